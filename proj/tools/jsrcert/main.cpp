// jsrcert: data-driven JSR certificates for switched linear systems.
//
// Exit status: 0 success, 2 argument or input error, 3 solver failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jsrcert/certify.hpp"
#include "jsrcert/errors.hpp"
#include "jsrcert/oracles.hpp"
#include "sweep.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;

using namespace jsrcert;

struct SolveFlags {
  double c_bound = SolveOptions{}.c_bound;
  double bisect_tol = SolveOptions{}.bisection_rel_tol;
  int max_newton = SolveOptions{}.max_newton_steps;

  void add(CLI::App* cmd) {
    cmd->add_option("--C-bound", c_bound, "bound C on lambda_max(P)")->capture_default_str();
    cmd->add_option("--bisect-tol", bisect_tol, "relative bisection tolerance on gamma")->capture_default_str();
    cmd->add_option("--max-newton", max_newton, "Newton-step budget per semidefinite solve")->capture_default_str();
  }
  SolveOptions options() const {
    SolveOptions o;
    o.c_bound = c_bound;
    o.bisection_rel_tol = bisect_tol;
    o.max_newton_steps = max_newton;
    return o;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("--out: cannot write " + path);
  out << text;
  if (!out) throw InvalidArgument("--out: write failed for " + path);
}

struct SimulateCmd {
  std::string modes;
  long n_traj = 0;
  int len = 1;
  std::uint64_t seed = 0;
  std::string out;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("simulate", "simulate trajectories from a mode set");
    cmd->add_option("--modes", modes, "mode-set JSON file")->required();
    cmd->add_option("--n-traj", n_traj, "number of trajectories N")->required();
    cmd->add_option("--len", len, "trace length l")->capture_default_str();
    cmd->add_option("--seed", seed, "master seed")->capture_default_str();
    cmd->add_option("--out", out, "trajectory CSV to write (stdout if omitted)");
    cmd->callback([this] { run(); });
  }

  void run() const {
    const ObservationSet obs = simulate(load_mode_set(modes), n_traj, len, seed);
    if (out.empty()) {
      write_observations(obs, std::cout);
    } else {
      save_observations(obs, out);
      std::cout << "wrote " << obs.size() << " trajectories to " << out << '\n';
    }
  }
};

struct CertifyCmd {
  std::string traj;
  std::string modes;
  long n_traj = 0;
  int len = 1;
  std::uint64_t seed = 0;
  int degree = 1;
  double beta = 0.95;
  double beta1 = 0.95;
  int modes_upper = 0;
  std::string out;
  SolveFlags solve;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("certify", "probabilistic JSR upper bound from trajectory data");
    auto* traj_opt = cmd->add_option("--traj", traj, "trajectory CSV file");
    auto* modes_opt = cmd->add_option("--modes", modes, "mode-set JSON file to simulate from");
    traj_opt->excludes(modes_opt);
    cmd->add_option("--n-traj", n_traj, "number of simulated trajectories (with --modes)");
    cmd->add_option("--len", len, "trace length l (with --modes)")->capture_default_str();
    cmd->add_option("--seed", seed, "simulation seed (with --modes)")->capture_default_str();
    cmd->add_option("--degree", degree, "half degree d of the Lyapunov function")->capture_default_str();
    cmd->add_option("--beta", beta, "covering confidence beta")->capture_default_str();
    cmd->add_option("--beta1", beta1, "norm-bound confidence beta1")->capture_default_str();
    cmd->add_option("--modes-upper", modes_upper, "upper bound m on the number of modes")->required();
    cmd->add_option("--out", out, "report JSON to write (stdout if omitted)");
    solve.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() const {
    ObservationSet obs;
    if (!traj.empty()) {
      obs = load_observations(traj);
    } else if (!modes.empty()) {
      if (n_traj < 1) throw InvalidArgument("--n-traj must be >= 1 when simulating from --modes");
      obs = simulate(load_mode_set(modes), n_traj, len, seed);
      obs.provenance.source = "simulate:" + modes;
    } else {
      throw InvalidArgument("either --traj or --modes is required");
    }
    CertifyRequest request;
    request.degree = degree;
    request.beta = beta;
    request.beta1 = beta1;
    request.modes_upper = modes_upper;
    request.solve = solve.options();
    const CertifyResult result = certify(obs, request);
    const CertificateReport& r = result.report;

    std::printf("gamma_star: %.10g\n", r.gamma_star);
    std::printf("kappa: %.10g\n", r.kappa);
    std::printf("bound: %s\n", tools::format_number(r.jsr_upper_bound).c_str());
    std::printf("confidence: %.10g%s\n", r.confidence, r.confidence_vacuous ? " (vacuous)" : "");
    std::printf("finite: %s\n", r.finite ? "true" : "false");
    if (r.c_bound_active) std::printf("note: lambda_max(P) reached --C-bound\n");
    std::fflush(stdout);
    if (out.empty()) {
      std::cout << to_json(r) << '\n';
    } else {
      write_text(out, to_json(r) + "\n");
    }
  }
};

struct WhiteboxCmd {
  std::string modes;
  int len = 1;
  int degree = 1;
  int grid = 720;
  std::uint64_t seed = 0x5eed;
  std::string out;
  SolveFlags solve;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("whitebox", "gamma over a dense sphere grid and every mode product");
    cmd->add_option("--modes", modes, "mode-set JSON file")->required();
    cmd->add_option("--len", len, "trace length l")->capture_default_str();
    cmd->add_option("--degree", degree, "half degree d")->capture_default_str();
    cmd->add_option("--grid", grid, "points on the circle (n = 2)")->capture_default_str();
    cmd->add_option("--seed", seed, "seed of the n >= 3 surrogate sample")->capture_default_str();
    cmd->add_option("--out", out, "result JSON to write");
    solve.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() const {
    if (grid < 1) throw InvalidArgument("--grid must be >= 1");
    const ModeSet m = load_mode_set(modes);
    const WhiteboxResult r = whitebox_gamma(m, len, degree, grid, solve.options(), seed);
    std::printf("gamma: %.10g\n", r.gamma);
    std::printf("kappa: %.10g\n", r.candidate.kappa);
    std::printf("grid_points: %zu%s\n", r.grid_points, r.surrogate ? " (random surrogate, n >= 3)" : "");
    std::printf("constraints: %zu\n", r.constraints);
    if (!out.empty()) {
      nlohmann::ordered_json j;
      j["gamma"] = r.gamma;
      j["kappa"] = r.candidate.kappa;
      j["degree"] = degree;
      j["l"] = len;
      j["grid_points"] = r.grid_points;
      j["constraints"] = r.constraints;
      j["surrogate"] = r.surrogate;
      j["C_bound"] = solve.c_bound;
      j["bisection_rel_tol"] = solve.bisect_tol;
      write_text(out, j.dump(2) + "\n");
    }
  }
};

struct SweepCmd {
  std::string modes;
  std::vector<long> n_traj{100, 1000, 10000};
  int runs = 10;
  std::vector<int> degrees{1, 2};
  double beta = 0.95;
  double beta1 = 0.95;
  int len = 1;
  int modes_upper = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string plot;
  SolveFlags solve;

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("sweep", "mean bound against N over repeated simulated runs");
    cmd->add_option("--modes", modes, "mode-set JSON file")->required();
    cmd->add_option("--n-traj", n_traj, "strictly increasing list of N")->capture_default_str();
    cmd->add_option("--runs", runs, "runs per N")->capture_default_str();
    cmd->add_option("--degree", degrees, "half degrees to compare")->capture_default_str();
    cmd->add_option("--beta", beta, "covering confidence beta")->capture_default_str();
    cmd->add_option("--beta1", beta1, "norm-bound confidence beta1")->capture_default_str();
    cmd->add_option("--len", len, "trace length l")->capture_default_str();
    cmd->add_option("--modes-upper", modes_upper, "upper bound m on the number of modes (default: mode count)");
    cmd->add_option("--seed", seed, "master seed")->capture_default_str();
    cmd->add_option("--out", out, "CSV to write (stdout if omitted)");
    cmd->add_option("--plot", plot, "SVG plot to write");
    solve.add(cmd);
    cmd->callback([this] { run(); });
  }

  void run() const {
    tools::SweepConfig config;
    config.modes_file = modes;
    config.modes = load_mode_set(modes);
    config.samples = n_traj;
    config.runs = runs;
    config.degrees = degrees;
    config.beta = beta;
    config.beta1 = beta1;
    config.trace_length = len;
    if (modes_upper != 0 && modes_upper < 1) throw InvalidArgument("--modes-upper must be >= 1");
    config.modes_upper = modes_upper;
    config.seed = seed;
    config.solve = solve.options();
    const auto rows = tools::run_sweep(config);
    if (out.empty()) {
      tools::write_sweep_csv(rows, std::cout);
    } else {
      std::ofstream os(out, std::ios::binary);
      if (!os) throw InvalidArgument("--out: cannot write " + out);
      tools::write_sweep_csv(rows, os);
    }
    const auto summary = tools::summarize(rows);
    if (!plot.empty()) write_text(plot, tools::render_svg(config, summary));
    if (!out.empty()) {
      for (const auto& s : summary) {
        std::printf("N=%ld d=%d mean_bound=%s finite=%d/%d\n", s.N, s.degree,
                    tools::format_number(s.mean_bound).c_str(), s.finite_runs, runs);
      }
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic JSR certificates from sampled trajectories"};
  app.require_subcommand(1);
  SimulateCmd simulate_cmd;
  CertifyCmd certify_cmd;
  WhiteboxCmd whitebox_cmd;
  SweepCmd sweep_cmd;
  simulate_cmd.add(app);
  certify_cmd.add(app);
  whitebox_cmd.add(app);
  sweep_cmd.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const jsrcert::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const jsrcert::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const jsrcert::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
