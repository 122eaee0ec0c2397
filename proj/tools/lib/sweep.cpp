#include "sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "jsrcert/certify.hpp"
#include "jsrcert/errors.hpp"

namespace jsrcert::tools {

void SweepConfig::validate() const {
  modes.validate();
  if (samples.empty()) throw InvalidArgument("--n-traj: at least one N is required");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i] < 1) throw InvalidArgument("--n-traj: N must be >= 1");
    if (i > 0 && samples[i] <= samples[i - 1]) throw InvalidArgument("--n-traj: N values must be strictly increasing");
  }
  if (runs < 1) throw InvalidArgument("--runs must be >= 1");
  if (degrees.empty()) throw InvalidArgument("--degree: at least one degree is required");
  for (int d : degrees) {
    if (d < 1) throw InvalidArgument("--degree must be >= 1");
  }
  if (trace_length < 1) throw InvalidArgument("--len must be >= 1");
  if (modes_upper < 0) throw InvalidArgument("--modes-upper must be >= 1");
  solve.validate();
}

std::uint64_t cell_seed(std::uint64_t master, long samples, int run, int degree) {
  return derive_seed(master, {static_cast<std::uint64_t>(samples), static_cast<std::uint64_t>(run),
                              static_cast<std::uint64_t>(degree)});
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  config.validate();
  std::vector<SweepRow> rows;
  for (long n : config.samples) {
    for (int run = 0; run < config.runs; ++run) {
      for (int d : config.degrees) rows.push_back({n, run, d, 0.0, 0.0, false});
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      SweepRow& row = rows[i];
      try {
        const ObservationSet obs =
            simulate(config.modes, row.N, config.trace_length, cell_seed(config.seed, row.N, row.run, row.degree));
        CertifyRequest request;
        request.degree = row.degree;
        request.beta = config.beta;
        request.beta1 = config.beta1;
        request.modes_upper = config.effective_modes_upper();
        request.solve = config.solve;
        const CertifyResult result = certify(obs, request);
        row.gamma_star = result.report.gamma_star;
        row.bound = result.report.jsr_upper_bound;
        row.finite = result.report.finite;
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = rows.size();
      }
    }
  };

  unsigned threads = config.threads > 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(rows.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  std::map<std::pair<int, long>, std::pair<double, std::pair<int, int>>> acc;  // sum, (count, finite)
  for (const auto& r : rows) {
    auto& a = acc[{r.degree, r.N}];
    a.first += r.bound;
    ++a.second.first;
    if (r.finite) ++a.second.second;
  }
  std::vector<SweepSummary> out;
  for (const auto& [key, a] : acc) {
    out.push_back({key.second, key.first, a.first / a.second.first, a.second.second});
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << r.N << ',' << r.run << ',' << r.degree << ',' << format_number(r.gamma_star) << ','
        << format_number(r.bound) << ',' << (r.finite ? 1 : 0) << '\n';
  }
}

std::string describe(const SweepConfig& config) {
  std::ostringstream os;
  os << "modes=" << (config.modes_file.empty() ? std::string("<inline>") : config.modes_file.string());
  os << " m=" << config.modes.count() << " n=" << config.modes.dim;
  os << " N=";
  for (std::size_t i = 0; i < config.samples.size(); ++i) os << (i ? "," : "") << config.samples[i];
  os << " runs=" << config.runs << " degrees=";
  for (std::size_t i = 0; i < config.degrees.size(); ++i) os << (i ? "," : "") << config.degrees[i];
  os << " beta=" << format_number(config.beta) << " beta1=" << format_number(config.beta1);
  os << " l=" << config.trace_length << " modes_upper=" << config.effective_modes_upper();
  os << " seed=" << config.seed << " generator=" << kGeneratorName;
  os << " C_bound=" << format_number(config.solve.c_bound);
  os << " bisect_tol=" << format_number(config.solve.bisection_rel_tol);
  return os.str();
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// "--" may not appear inside an XML comment.
std::string comment_safe(std::string s) {
  for (std::size_t p; (p = s.find("--")) != std::string::npos;) s.replace(p, 2, "- -");
  return s;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string render_svg(const SweepConfig& config, const std::vector<SweepSummary>& summary) {
  constexpr double width = 640, height = 420, left = 70, right = 150, top = 30, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double nmin = INFINITY, nmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : summary) {
    nmin = std::min(nmin, std::log10(static_cast<double>(s.N)));
    nmax = std::max(nmax, std::log10(static_cast<double>(s.N)));
    if (std::isfinite(s.mean_bound)) {
      ymin = std::min(ymin, s.mean_bound);
      ymax = std::max(ymax, s.mean_bound);
    }
  }
  if (!std::isfinite(nmin)) nmin = 0, nmax = 1;
  if (nmax - nmin < 1e-12) nmin -= 0.5, nmax += 0.5;
  if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](long n) { return left + plot_w * (std::log10(static_cast<double>(n)) - nmin) / (nmax - nmin); };
  auto py = [&](double y) { return top + plot_h * (1.0 - (y - ymin) / (ymax - ymin)); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto label = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<!-- jsrcert sweep: " << comment_safe(describe(config)) << " -->\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"18\" text-anchor=\"middle\">mean JSR upper bound vs N</text>\n";

  // Axes and ticks.
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(nmin - 1e-9)); e <= static_cast<int>(std::floor(nmax + 1e-9)); ++e) {
    const double x = left + plot_w * (e - nmin) / (nmax - nmin);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << top + plot_h << "\" x2=\"" << num(x) << "\" y2=\""
       << top + plot_h + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">1e" << e
       << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double y = ymin + (ymax - ymin) * k / 4.0;
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << num(py(y)) << "\" x2=\"" << left << "\" y2=\"" << num(py(y))
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << label(y)
       << "</text>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">N (log scale)</text>\n";

  // One series per degree.
  std::map<int, std::vector<const SweepSummary*>> series;
  for (const auto& s : summary) series[s.degree].push_back(&s);
  int index = 0;
  for (const auto& [degree, points] : series) {
    const char* color = kPalette[index % (sizeof kPalette / sizeof kPalette[0])];
    std::string path;
    for (const auto* p : points) {
      if (!std::isfinite(p->mean_bound)) continue;
      path += (path.empty() ? "" : " ") + num(px(p->N)) + "," + num(py(p->mean_bound));
    }
    if (!path.empty()) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << path << "\"/>\n";
    }
    for (const auto* p : points) {
      if (!std::isfinite(p->mean_bound)) continue;
      os << "<circle cx=\"" << num(px(p->N)) << "\" cy=\"" << num(py(p->mean_bound)) << "\" r=\"3\" fill=\"" << color
         << "\"><title>N=" << p->N << " d=" << degree << " mean=" << label(p->mean_bound) << "</title></circle>\n";
    }
    const double ly = top + 20 + 20 * index;
    os << "<line x1=\"" << width - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 40 << "\" y2=\""
       << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << width - right + 45 << "\" y=\"" << ly + 4 << "\">"
       << escape_xml(degree == 1 ? "quadratic (d=1)" : "SOS d=" + std::to_string(degree)) << "</text>\n";
    ++index;
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace jsrcert::tools
