#include "jsrcert/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jsrcert/cap_geometry.hpp"
#include "jsrcert/errors.hpp"

namespace jsrcert {

namespace {

double product_count(const ModeSet& modes, int length) {
  return std::pow(static_cast<double>(modes.count()), length);
}

void check_enumeration(const ModeSet& modes, int length, const char* fn) {
  modes.validate();
  if (length < 1) throw InvalidArgument(std::string(fn) + ": length must be >= 1");
  if (product_count(modes, length) > kMaxEnumeration) {
    throw InvalidArgument(std::string(fn) + ": m^l exceeds the enumeration cap of 1e6");
  }
}

double spectral_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> eig(a, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double gamma_of(const EndpointSet& obs, int degree, const SolveOptions& opts) {
  if (obs.size() == 0) return 0.0;
  return bisect_gamma(obs, degree, opts).gamma_star;
}

// Visits every combination of `k` indices out of `n` in lexicographic order
// until `visit` returns true.
template <class Visit>
bool for_each_combination(std::size_t n, std::size_t k, Visit visit) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return false;
  for (;;) {
    if (visit(idx)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

ProductEnumeration enumerate_products(const ModeSet& modes, int length) {
  check_enumeration(modes, length, "enumerate_products");
  ProductEnumeration out;
  out.length = length;
  out.products.push_back({{}, Matrix::Identity(modes.dim, modes.dim)});
  for (int step = 0; step < length; ++step) {
    std::vector<ModeProduct> next;
    next.reserve(out.products.size() * static_cast<std::size_t>(modes.count()));
    for (const auto& prefix : out.products) {
      for (int j = 0; j < modes.count(); ++j) {
        ModeProduct p{prefix.sequence, modes.matrices[static_cast<std::size_t>(j)] * prefix.matrix};
        p.sequence.push_back(j);
        next.push_back(std::move(p));
      }
    }
    out.products = std::move(next);
  }
  return out;
}

double exact_B(const ModeSet& modes, int length) {
  const ProductEnumeration all = enumerate_products(modes, length);
  double best = 0.0;
  for (const auto& p : all.products) {
    Eigen::JacobiSVD<Matrix> svd(p.matrix);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

double jsr_lower_bound(const ModeSet& modes, int k_max) {
  check_enumeration(modes, k_max, "jsr_lower_bound");
  double best = 0.0;
  std::vector<Matrix> level{Matrix::Identity(modes.dim, modes.dim)};
  for (int k = 1; k <= k_max; ++k) {
    std::vector<Matrix> next;
    next.reserve(level.size() * static_cast<std::size_t>(modes.count()));
    for (const auto& prefix : level) {
      for (const auto& a : modes.matrices) {
        next.push_back(a * prefix);
        best = std::max(best, std::pow(spectral_radius(next.back()), 1.0 / k));
      }
    }
    level = std::move(next);
  }
  return best;
}

EndpointSet whitebox_constraints(const ModeSet& modes, int length, int grid, bool& surrogate,
                                 std::uint64_t surrogate_seed) {
  const ProductEnumeration all = enumerate_products(modes, length);
  std::vector<Vector> points;
  surrogate = modes.dim != 2;
  if (modes.dim == 1) {
    points = {Vector::Ones(1)};
    surrogate = false;
  } else if (!surrogate) {
    if (grid < 1) throw InvalidArgument("whitebox_gamma: grid must be >= 1");
    points.reserve(static_cast<std::size_t>(grid));
    for (int k = 0; k < grid; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / grid;
      Vector x(2);
      x << std::cos(theta), std::sin(theta);
      points.push_back(std::move(x));
    }
  } else {
    constexpr long kSurrogateSamples = 100000;
    Rng rng = make_stream(surrogate_seed, {static_cast<std::uint64_t>(modes.dim)});
    points.reserve(kSurrogateSamples);
    for (long i = 0; i < kSurrogateSamples; ++i) points.push_back(sample_unit_sphere(modes.dim, rng));
  }

  EndpointSet out{modes.dim, length, {}, {}};
  out.x0.reserve(points.size() * all.products.size());
  out.xl.reserve(points.size() * all.products.size());
  for (const auto& x : points) {
    for (const auto& p : all.products) {
      out.x0.push_back(x);
      out.xl.push_back(p.matrix * x);
    }
  }
  return out;
}

WhiteboxResult whitebox_gamma(const ModeSet& modes, int length, int degree, int grid, const SolveOptions& opts,
                              std::uint64_t surrogate_seed) {
  WhiteboxResult out;
  const EndpointSet pairs = whitebox_constraints(modes, length, grid, out.surrogate, surrogate_seed);
  out.constraints = pairs.size();
  out.grid_points = pairs.size() / enumerate_products(modes, length).products.size();
  const GammaSolution sol = solve_gamma(pairs, degree, opts);
  out.gamma = sol.gamma_star;
  out.candidate = sol.candidate;
  return out;
}

SupportResult support_constraints(const EndpointSet& obs, int degree, const SolveOptions& opts) {
  SupportResult out;
  out.gamma_full = gamma_of(obs, degree, opts);
  const double tol = 10.0 * opts.bisection_rel_tol * std::max(out.gamma_full, 1e-12);
  const double target = out.gamma_full - tol;
  const std::size_t lifted = lift_dimension(obs.dim, degree);
  const std::size_t cap = packed_size(lifted) + 1;

  if (out.gamma_full <= tol) {
    out.gamma_subset = 0.0;
    out.exhaustive = obs.size() <= 20;
    return out;
  }

  if (obs.size() <= 20) {
    out.exhaustive = true;
    for (std::size_t k = 1; k <= std::min(cap, obs.size()); ++k) {
      const bool found = for_each_combination(obs.size(), k, [&](const std::vector<std::size_t>& idx) {
        const double g = gamma_of(obs.subset(idx), degree, opts);
        if (g >= target) {
          out.indices = idx;
          out.gamma_subset = g;
          return true;
        }
        return false;
      });
      if (found) return out;
    }
  }

  // Greedy: drop any constraint whose removal keeps gamma* within tolerance.
  out.exhaustive = false;
  std::vector<std::size_t> current(obs.size());
  for (std::size_t i = 0; i < current.size(); ++i) current[i] = i;
  for (std::size_t pos = 0; pos < current.size();) {
    std::vector<std::size_t> trial = current;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(pos));
    if (gamma_of(obs.subset(trial), degree, opts) >= target) {
      current = std::move(trial);
    } else {
      ++pos;
    }
  }
  out.indices = std::move(current);
  out.gamma_subset = gamma_of(obs.subset(out.indices), degree, opts);
  return out;
}

double cap_measure_mc(const Vector& c, double eps, long samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("cap_measure_mc: samples must be >= 1");
  const double delta = delta_cap(eps, static_cast<int>(c.size()));
  Rng rng = make_stream(seed, {0xca9ULL});
  long inside = 0;
  for (long i = 0; i < samples; ++i) {
    if (c.dot(sample_unit_sphere(static_cast<int>(c.size()), rng)) > delta) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(samples);
}

}  // namespace jsrcert
