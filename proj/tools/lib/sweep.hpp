#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "jsrcert/certifier.hpp"
#include "jsrcert/sampling.hpp"

namespace jsrcert::tools {

struct SweepConfig {
  std::filesystem::path modes_file;  // echoed in outputs; may be empty
  ModeSet modes;
  std::vector<long> samples;  // strictly increasing
  int runs = 10;
  std::vector<int> degrees{1};
  double beta = 0.95;
  double beta1 = 0.95;
  int trace_length = 1;
  int modes_upper = 0;  // 0: use modes.count()
  std::uint64_t seed = 0;
  SolveOptions solve;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
  int effective_modes_upper() const { return modes_upper > 0 ? modes_upper : modes.count(); }
};

struct SweepRow {
  long N = 0;
  int run = 0;
  int degree = 1;
  double gamma_star = 0.0;
  double bound = 0.0;
  bool finite = false;
};

struct SweepSummary {
  long N = 0;
  int degree = 1;
  double mean_bound = 0.0;  // +inf if any run was infinite
  int finite_runs = 0;
};

/// Seed of one (N, run, degree) cell.
std::uint64_t cell_seed(std::uint64_t master, long samples, int run, int degree);

/// Rows ordered by (N, run, degree) regardless of scheduling.
std::vector<SweepRow> run_sweep(const SweepConfig& config);

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);

inline constexpr const char* kSweepHeader = "N,run,degree,gamma_star,bound,finite";

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

/// Line plot of the mean bound against N (log axis), one series per degree.
std::string render_svg(const SweepConfig& config, const std::vector<SweepSummary>& summary);

/// Human-readable echo of the configuration.
std::string describe(const SweepConfig& config);

/// "%.17g", with "inf" and "nan" spelled out.
std::string format_number(double v);

}  // namespace jsrcert::tools
