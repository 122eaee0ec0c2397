#pragma once

// White-box ground truth for validating the data-driven certifier. These
// functions read the mode matrices directly and are never part of a
// certificate.

#include <cstdint>
#include <vector>

#include "jsrcert/certifier.hpp"
#include "jsrcert/sampling.hpp"

namespace jsrcert {

inline constexpr double kMaxEnumeration = 1e6;

struct ModeProduct {
  ModeSequence sequence;  // j_1 .. j_l
  Matrix matrix;          // A_{j_l} ... A_{j_1}
};

struct ProductEnumeration {
  int length = 0;
  std::vector<ModeProduct> products;  // lexicographic in the sequence
};

ProductEnumeration enumerate_products(const ModeSet& modes, int length);

/// max over all length-l products of the spectral norm.
double exact_B(const ModeSet& modes, int length);

/// max over k <= k_max and all length-k products of rho(product)^{1/k}.
double jsr_lower_bound(const ModeSet& modes, int k_max);

struct WhiteboxResult {
  double gamma = 0.0;
  std::size_t grid_points = 0;
  std::size_t constraints = 0;
  bool surrogate = false;  // n >= 3: random sphere sample instead of a grid
  LyapunovCandidate candidate;
};

/// gamma for the full constraint family over every product in M^l, with the
/// sphere replaced by `grid` equally spaced angles (n = 2) or by 1e5 seeded
/// uniform samples (n >= 3, reported as surrogate).
WhiteboxResult whitebox_gamma(const ModeSet& modes, int length, int degree, int grid, const SolveOptions& opts,
                              std::uint64_t surrogate_seed = 0x5eed);

/// Endpoint pairs (x, A x) for every grid point and product; exposed for tests.
EndpointSet whitebox_constraints(const ModeSet& modes, int length, int grid, bool& surrogate,
                                 std::uint64_t surrogate_seed = 0x5eed);

struct SupportResult {
  std::vector<std::size_t> indices;  // into the observation set
  double gamma_subset = 0.0;
  double gamma_full = 0.0;
  bool exhaustive = false;
};

/// Smallest subset reproducing gamma*(obs) within 10 bisection tolerances.
/// Exhaustive over subsets of size <= D(D+1)/2 + 1 for N <= 20, otherwise
/// greedy removal.
SupportResult support_constraints(const EndpointSet& obs, int degree, const SolveOptions& opts);

/// Fraction of `samples` uniform sphere points inside C(c, eps).
double cap_measure_mc(const Vector& c, double eps, long samples, std::uint64_t seed);

}  // namespace jsrcert
