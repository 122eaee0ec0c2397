#include "jsrcert/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "jsrcert/cap_geometry.hpp"
#include "jsrcert/errors.hpp"

namespace jsrcert {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, std::size_t line) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + t + "'", line);
  }
  if (used != t.size()) throw ParseError("expected a number, got '" + t + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite state value", line);
  return v;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(master, keys));
}

void ModeSet::validate() const {
  if (dim < 1) throw InvalidArgument("mode set: dim must be >= 1");
  if (matrices.empty()) throw InvalidArgument("mode set: at least one matrix is required");
  for (const auto& a : matrices) {
    if (a.rows() != dim || a.cols() != dim) throw InvalidArgument("mode set: matrix shape does not match dim");
    if (!a.allFinite()) throw InvalidArgument("mode set: non-finite matrix entry");
  }
}

ModeSet mode_set_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("mode set JSON: ") + e.what());
  }
  ModeSet modes;
  try {
    modes.dim = j.at("dim").get<int>();
    for (const auto& jm : j.at("matrices")) {
      Matrix a(modes.dim, modes.dim);
      if (jm.size() != static_cast<std::size_t>(modes.dim)) throw ParseError("mode set JSON: wrong row count");
      for (int r = 0; r < modes.dim; ++r) {
        const auto& row = jm.at(static_cast<std::size_t>(r));
        if (row.size() != static_cast<std::size_t>(modes.dim)) throw ParseError("mode set JSON: wrong column count");
        for (int c = 0; c < modes.dim; ++c) a(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
      }
      modes.matrices.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mode set JSON: ") + e.what());
  }
  modes.validate();
  return modes;
}

std::string mode_set_to_json(const ModeSet& modes) {
  nlohmann::json j;
  j["dim"] = modes.dim;
  j["matrices"] = nlohmann::json::array();
  for (const auto& a : modes.matrices) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
      rows.push_back(std::move(row));
    }
    j["matrices"].push_back(std::move(rows));
  }
  return j.dump(2);
}

ModeSet load_mode_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open mode-set file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return mode_set_from_json(buf.str());
}

void save_mode_set(const ModeSet& modes, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << mode_set_to_json(modes) << '\n';
}

EndpointSet EndpointSet::subset(const std::vector<std::size_t>& indices) const {
  EndpointSet out{dim, trace_length, {}, {}};
  out.x0.reserve(indices.size());
  out.xl.reserve(indices.size());
  for (std::size_t i : indices) {
    out.x0.push_back(x0.at(i));
    out.xl.push_back(xl.at(i));
  }
  return out;
}

EndpointSet ObservationSet::endpoints() const {
  EndpointSet out{dim, trace_length, {}, {}};
  out.x0.reserve(observations.size());
  out.xl.reserve(observations.size());
  for (const auto& o : observations) {
    out.x0.push_back(o.x0);
    out.xl.push_back(o.xl);
  }
  return out;
}

Vector sample_unit_sphere(int n, Rng& rng) {
  if (n < 1) throw InvalidArgument("sample_unit_sphere: n must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector x(n);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) x(i) = gauss(rng);
    norm = x.norm();
  } while (!(norm > 1e-150));
  return x / norm;
}

ModeSequence sample_mode_sequence(int modes, int trace_length, Rng& rng) {
  if (modes < 1 || trace_length < 1) throw InvalidArgument("sample_mode_sequence: m and l must be >= 1");
  std::uniform_int_distribution<int> pick(0, modes - 1);
  ModeSequence seq(static_cast<std::size_t>(trace_length));
  for (auto& j : seq) j = pick(rng);
  return seq;
}

Vector apply_modes(const ModeSet& modes, const ModeSequence& sequence, const Vector& x0,
                   std::vector<Vector>* path) {
  Vector x = x0;
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    x = modes.matrices.at(static_cast<std::size_t>(sequence[k])) * x;
    if (path && k + 1 < sequence.size()) path->push_back(x);
  }
  return x;
}

ObservationSet simulate(const ModeSet& modes, long samples, int trace_length, std::uint64_t seed) {
  modes.validate();
  if (samples < 1) throw InvalidArgument("simulate: N must be >= 1");
  if (trace_length < 1) throw InvalidArgument("simulate: l must be >= 1");
  ObservationSet out;
  out.dim = modes.dim;
  out.trace_length = trace_length;
  out.provenance = {"simulate", seed, kGeneratorName};
  out.observations.reserve(static_cast<std::size_t>(samples));
  for (long i = 0; i < samples; ++i) {
    Rng rng = make_stream(seed, {static_cast<std::uint64_t>(i)});
    Observation o;
    o.x0 = sample_unit_sphere(modes.dim, rng);
    ModeSequence seq = sample_mode_sequence(modes.count(), trace_length, rng);
    o.xl = apply_modes(modes, seq, o.x0, &o.intermediate);
    o.hidden_modes = std::move(seq);
    out.observations.push_back(std::move(o));
  }
  return out;
}

ObservationSet read_observations(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty trajectory file");
  ++line_no;
  const auto header = split_csv(line);
  if (header.size() < 3 || trim(header[0]) != "traj_id" || trim(header[1]) != "step") {
    throw ParseError("header must be traj_id,step,x1,...,xn", line_no);
  }
  const int n = static_cast<int>(header.size()) - 2;

  struct Pending {
    std::size_t first_line = 0;
    std::map<long, std::pair<Vector, std::size_t>> steps;
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> trajectories;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const std::string id = trim(fields[0]);
    const double step_value = parse_number(fields[1], line_no);
    if (step_value < 0 || step_value != std::floor(step_value)) throw ParseError("step must be a non-negative integer", line_no);
    const long step = static_cast<long>(step_value);
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = parse_number(fields[static_cast<std::size_t>(i) + 2], line_no);

    auto [it, inserted] = trajectories.try_emplace(id);
    if (inserted) {
      order.push_back(id);
      it->second.first_line = line_no;
    }
    if (!it->second.steps.emplace(step, std::make_pair(std::move(x), line_no)).second) {
      throw ParseError("duplicate step " + std::to_string(step) + " for trajectory " + id, line_no);
    }
  }
  if (order.empty()) throw ParseError("trajectory file has no data rows");

  ObservationSet out;
  out.dim = n;
  out.trace_length = -1;
  out.provenance = {source, 0, ""};
  std::string rejected;
  for (const auto& id : order) {
    const Pending& p = trajectories.at(id);
    const long last = p.steps.rbegin()->first;
    if (p.steps.begin()->first != 0 || static_cast<long>(p.steps.size()) != last + 1 || last < 1) {
      throw ParseError("trajectory " + id + " must have steps 0..l with l >= 1", p.first_line);
    }
    if (out.trace_length < 0) {
      out.trace_length = static_cast<int>(last);
    } else if (out.trace_length != last) {
      throw ParseError("trajectory " + id + " has length " + std::to_string(last) + ", expected " +
                           std::to_string(out.trace_length) + " (mixed lengths are not supported)",
                       p.first_line);
    }
    const auto& [x0, x0_line] = p.steps.at(0);
    const double scale = x0.norm();
    if (scale < 1e-12) {
      rejected += "\n  line " + std::to_string(x0_line) + ": trajectory " + id + " starts at the origin";
      continue;
    }
    // Homogeneity: rescaling a whole trajectory keeps it a trajectory. States
    // already on the sphere are kept bit-for-bit.
    const double factor = std::abs(scale - 1.0) > 1e-12 ? 1.0 / scale : 1.0;
    Observation o;
    o.x0 = x0 * factor;
    o.xl = p.steps.at(last).first * factor;
    for (long k = 1; k < last; ++k) o.intermediate.push_back(p.steps.at(k).first * factor);
    out.observations.push_back(std::move(o));
  }
  if (!rejected.empty()) throw ParseError("rejected trajectories with |x0| < 1e-12:" + rejected);
  return out;
}

ObservationSet load_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open trajectory file " + path.string());
  return read_observations(in, path.string());
}

void write_observations(const ObservationSet& obs, std::ostream& out) {
  out << "traj_id,step";
  for (int i = 1; i <= obs.dim; ++i) out << ",x" << i;
  out << '\n';
  auto row = [&](std::size_t id, int step, const Vector& x) {
    out << id << ',' << step;
    for (Eigen::Index i = 0; i < x.size(); ++i) out << ',' << format_double(x(i));
    out << '\n';
  };
  for (std::size_t id = 0; id < obs.observations.size(); ++id) {
    const auto& o = obs.observations[id];
    if (static_cast<int>(o.intermediate.size()) != obs.trace_length - 1) {
      throw InvalidArgument("write_observations: trajectory " + std::to_string(id) + " lacks intermediate states");
    }
    row(id, 0, o.x0);
    int step = 1;
    for (const auto& x : o.intermediate) row(id, step++, x);
    row(id, obs.trace_length, o.xl);
  }
}

void save_observations(const ObservationSet& obs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  write_observations(obs, out);
}

bool cap_membership(const Vector& c, double eps, const Vector& x) {
  if (c.size() != x.size()) throw InvalidArgument("cap_membership: dimension mismatch");
  return c.dot(x) > delta_cap(eps, static_cast<int>(c.size()));
}

}  // namespace jsrcert
