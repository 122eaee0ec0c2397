#pragma once

// Observation sets: uniform sampling on the sphere and over mode sequences,
// black-box trajectory simulation, and trajectory/mode-set file I/O.
//
// Trajectory CSV: header `traj_id,step,x1,...,xn`, one row per (trajectory,
// step) with step in {0..l}, values written with 17 significant digits.
// Mode-set JSON: {"dim": n, "matrices": [[[row], [row]], ...]}.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jsrcert/lift_algebra.hpp"

namespace jsrcert {

using Rng = std::mt19937_64;
inline constexpr const char* kGeneratorName = "mt19937_64/splitmix64-streams";

/// Mixes `keys` into `master` with the splitmix64 finalizer. Used to give
/// every trajectory / sweep cell its own reproducible stream.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);
Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

struct ModeSet {
  int dim = 0;
  std::vector<Matrix> matrices;

  int count() const { return static_cast<int>(matrices.size()); }
  void validate() const;
};

ModeSet mode_set_from_json(const std::string& text);
std::string mode_set_to_json(const ModeSet& modes);
ModeSet load_mode_set(const std::filesystem::path& path);
void save_mode_set(const ModeSet& modes, const std::filesystem::path& path);

/// Zero-based mode indices j_1, ..., j_l in the order they are applied.
using ModeSequence = std::vector<int>;

struct Observation {
  Vector x0;                                // unit initial state
  Vector xl;                                // state after l steps
  std::vector<Vector> intermediate;         // x_1 .. x_{l-1}; never enters the programs
  std::optional<ModeSequence> hidden_modes; // simulator output only
};

struct Provenance {
  std::string source;  // "simulate" or the input file
  std::uint64_t seed = 0;
  std::string generator;
};

/// The certifier's view of the data: endpoint pairs only. Mode sequences are
/// not representable here.
struct EndpointSet {
  int dim = 0;
  int trace_length = 1;
  std::vector<Vector> x0;
  std::vector<Vector> xl;

  std::size_t size() const { return x0.size(); }
  EndpointSet subset(const std::vector<std::size_t>& indices) const;
};

struct ObservationSet {
  int dim = 0;
  int trace_length = 1;
  std::vector<Observation> observations;
  Provenance provenance;

  std::size_t size() const { return observations.size(); }
  EndpointSet endpoints() const;
};

Vector sample_unit_sphere(int n, Rng& rng);
ModeSequence sample_mode_sequence(int modes, int trace_length, Rng& rng);

/// x_l = A_{j_l} ... A_{j_1} x_0.
Vector apply_modes(const ModeSet& modes, const ModeSequence& sequence, const Vector& x0,
                   std::vector<Vector>* path = nullptr);

/// N trajectories from uniform initial states and uniform mode sequences.
/// Trajectory i draws from make_stream(seed, {i}).
ObservationSet simulate(const ModeSet& modes, long samples, int trace_length, std::uint64_t seed);

ObservationSet read_observations(std::istream& in, const std::string& source);
ObservationSet load_observations(const std::filesystem::path& path);
void write_observations(const ObservationSet& obs, std::ostream& out);
void save_observations(const ObservationSet& obs, const std::filesystem::path& path);

/// c^T x > delta(eps) for unit c, x.
bool cap_membership(const Vector& c, double eps, const Vector& x);

}  // namespace jsrcert
