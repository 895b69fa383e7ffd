// Copyright 2026 The diqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diqkd/bounds.hpp"
#include "diqkd/chsh.hpp"
#include "diqkd/io.hpp"
#include "diqkd/jordan.hpp"
#include "diqkd/linalg.hpp"
#include "diqkd/protocol.hpp"

namespace {

using namespace diqkd;

// Digest of the referenced file when the source is a path, of the token
// itself when it is a preset name.
std::string input_digest(const std::string& source) {
  std::uint64_t digest = 0;
  if (std::filesystem::exists(source)) {
    digest = fnv1a_digest(read_text_file(source));
  } else {
    digest = fnv1a_digest(source);
  }
  std::ostringstream out;
  out << "fnv1a:" << std::hex << std::setw(16) << std::setfill('0') << digest;
  return out.str();
}

struct ChshArgs {
  std::string state;
  bool optimize = false;
  std::vector<double> angles;
};

int run_chsh(const ChshArgs& args) {
  const DensityOperator state = load_state(args.state);
  if (state.dim() != 4) {
    throw ValidationError("state-dimension", "chsh needs a two-qubit state");
  }
  std::cout << "command: chsh\n"
            << "state: " << args.state << '\n'
            << "input_digest: " << input_digest(args.state) << '\n';
  if (!args.angles.empty()) {
    const PlanarAngles angles{{args.angles[0], args.angles[1]},
                              {args.angles[2], args.angles[3]}};
    const ChshStrategy strategy = planar_qubit_strategy(state, angles);
    std::cout << "mode: fixed-angles\n"
              << "alpha0: " << angles.alice[0] << '\n'
              << "alpha1: " << angles.alice[1] << '\n'
              << "beta0: " << angles.bob[0] << '\n'
              << "beta1: " << angles.bob[1] << '\n'
              << "S: " << chsh_s(strategy) << '\n'
              << "p: " << chsh_p(strategy) << '\n';
    return 0;
  }
  const SMaxResult best = s_max_optimize(state);
  const ChshStrategy strategy = realize_s_max(state, best);
  const double s_realized = chsh_s(strategy);
  std::cout << "mode: optimize\n"
            << "alpha0: " << best.angles.alice[0] << '\n'
            << "alpha1: " << best.angles.alice[1] << '\n'
            << "beta0: " << best.angles.bob[0] << '\n'
            << "beta1: " << best.angles.bob[1] << '\n'
            << "S: " << best.s << '\n'
            << "p: " << (best.s + 4.0) / 8.0 << '\n'
            << "S_realized: " << s_realized << '\n'
            << "S_horodecki: " << s_max_horodecki(state) << '\n';
  return 0;
}

int run_jordan(const std::string& path) {
  const auto [a0, a1] = load_observable_pair(path);
  const BlockDecomposition dec = block_diagonalize(a0, a1);
  const double residual = dec.reconstruction_residual(a0, a1);
  const double pullback = dec.pullback_residual(a0, a1);

  // Orthonormality of the occupied basis columns (padded blocks contribute
  // a single column).
  std::vector<Eigen::Index> cols;
  ComplexMatrix stacked(a0.dim(), 2 * static_cast<Eigen::Index>(dec.blocks.size()));
  Eigen::Index used = 0;
  for (const auto& block : dec.blocks) {
    stacked.col(used++) = block.basis.col(0);
    if (!block.padded) stacked.col(used++) = block.basis.col(1);
  }
  const ComplexMatrix gram =
      stacked.leftCols(used).adjoint() * stacked.leftCols(used);
  const double gram_residual =
      (gram - ComplexMatrix::Identity(used, used)).cwiseAbs().maxCoeff();

  std::cout << "command: jordan\n"
            << "input: " << path << '\n'
            << "input_digest: " << input_digest(path) << '\n'
            << "dim: " << dec.dim << '\n'
            << "blocks: " << dec.blocks.size() << '\n';
  for (const auto& block : dec.blocks) {
    std::cout << "block " << block.label << ": angle " << block.angle
              << (block.padded ? " (1x1, padded)" : "") << '\n';
  }
  std::cout << "reconstruction_residual: " << residual << '\n'
            << "pullback_residual: " << pullback << '\n'
            << "basis_orthonormality_residual: " << gram_residual << '\n';
  if (residual > 1e-8) {
    std::cerr << "error [reconstruction-residual]: residual " << residual
              << " exceeds 1e-8\n";
    return 1;
  }
  return 0;
}

struct KeyrateArgs {
  double s = std::numeric_limits<double>::quiet_NaN();
  double q = std::numeric_limits<double>::quiet_NaN();
  std::string sweep;
};

int run_keyrate(const KeyrateArgs& args) {
  if (!args.sweep.empty()) {
    double lo = 0, hi = 0, step = 0;
    if (std::sscanf(args.sweep.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
        step <= 0) {
      throw ValidationError("sweep-grid",
                            "expected --sweep <min>:<max>:<step> with step > 0");
    }
    const double q = std::isnan(args.q) ? 0.0 : args.q;
    std::cout << "S,q,rate\n";
    for (double s = lo; s <= hi + step * 0.5; s += step) {
      const double s_clamped = std::min(s, hi);
      std::cout << s_clamped << ',' << q << ','
                << key_rate(s_clamped, q) << '\n';
      if (s_clamped >= hi) break;
    }
    return 0;
  }
  if (std::isnan(args.s) || std::isnan(args.q)) {
    throw ValidationError("missing-argument",
                          "need --S and --q, or --sweep");
  }
  std::cout << "command: keyrate\n"
            << "S: " << args.s << '\n'
            << "q: " << args.q << '\n'
            << "rate: " << key_rate(args.s, args.q) << '\n';
  return 0;
}

struct EstimateArgs {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t r = 0;
  double eps = 0;
  double p = 0.85355339059327376;  // cos^2(pi/8)
  double mu = std::numeric_limits<double>::quiet_NaN();
};

int run_estimate(const EstimateArgs& args) {
  const EstimationParams params{args.n, args.m, 0, args.r, args.eps, args.p};
  params.validate();
  std::cout << "command: estimate\n"
            << "n: " << args.n << '\n'
            << "m: " << args.m << '\n'
            << "r: " << args.r << '\n'
            << "eps: " << args.eps << '\n'
            << "p: " << args.p << '\n';
  if (!std::isnan(args.mu)) {
    std::cout << "mu: " << args.mu << '\n'
              << "bound: " << lemma1_bound(params, args.mu) << '\n';
    return 0;
  }
  const TailBoundResult result = pe_threshold(params);
  std::cout << "target: " << 2.0 * args.eps / 9.0 << '\n'
            << "mu: " << result.mu << '\n'
            << "bound_at_mu: " << result.bound << '\n'
            << "Y_threshold: " << result.y_threshold << '\n'
            << "mu_formula: " << mu_as_printed(params, 2.0 * args.eps / 9.0)
            << '\n';
  return 0;
}

struct SimulateArgs {
  std::string config;
  std::string transcript_path = "transcript.jsonl";
  std::string summary_path = "summary.json";
};

int run_simulate(const SimulateArgs& args) {
  SimulationSetup setup = load_simulation_config(args.config);
  const ProtocolTranscript tx = run_protocol(setup.config, *setup.device);
  write_text_file(args.transcript_path, transcript_to_jsonl(tx));
  write_text_file(args.summary_path, transcript_summary(tx).dump(2) + "\n");
  std::cout << "command: simulate\n"
            << "config: " << args.config << '\n'
            << "input_digest: " << input_digest(args.config) << '\n'
            << "device: " << setup.device_label << '\n'
            << "seed: " << setup.config.seed << '\n'
            << "aborted: " << (tx.aborted ? "true" : "false") << '\n';
  if (tx.aborted) std::cout << "abort_reason: " << tx.abort_reason << '\n';
  std::cout << "s_est: " << tx.s_est << '\n'
            << "q_est: " << tx.q_est << '\n'
            << "mu: " << tx.mu << '\n'
            << "final_length: " << tx.final_length << '\n'
            << "transcript: " << args.transcript_path << '\n'
            << "summary: " << args.summary_path << '\n';
  return tx.aborted ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = std::chrono::steady_clock::now();
  std::cout << std::setprecision(std::numeric_limits<double>::max_digits10);
  std::cerr << std::setprecision(6);

  CLI::App app{"device-independent QKD simulation and verification toolkit"};
  app.require_subcommand(1);

  ChshArgs chsh_args;
  auto* chsh_cmd = app.add_subcommand(
      "chsh", "CHSH values of a two-qubit state (preset name or matrix file)");
  chsh_cmd->add_option("state", chsh_args.state, "state preset or file")
      ->required();
  auto* opt_flag =
      chsh_cmd->add_flag("--optimize", chsh_args.optimize,
                         "optimize measurement angles (default)");
  chsh_cmd
      ->add_option("--angles", chsh_args.angles,
                   "fixed planar angles: alpha0 alpha1 beta0 beta1")
      ->expected(4)
      ->excludes(opt_flag);

  std::string jordan_path;
  auto* jordan_cmd = app.add_subcommand(
      "jordan", "simultaneous 2x2 block decomposition of two +/-1 observables");
  jordan_cmd->add_option("observables", jordan_path, "observable pair file")
      ->required();

  KeyrateArgs keyrate_args;
  auto* keyrate_cmd =
      app.add_subcommand("keyrate", "collective-attack asymptotic key rate");
  keyrate_cmd->add_option("--S", keyrate_args.s, "CHSH value in [2, 2 sqrt 2]");
  keyrate_cmd->add_option("--q", keyrate_args.q, "bit error rate in [0, 1/2]");
  keyrate_cmd->add_option("--sweep", keyrate_args.sweep,
                          "CSV sweep over S: <min>:<max>:<step>");

  EstimateArgs estimate_args;
  auto* estimate_cmd = app.add_subcommand(
      "estimate", "parameter-estimation deviation mu and tail bound");
  estimate_cmd->add_option("--n", estimate_args.n, "key trials")->required();
  estimate_cmd->add_option("--m", estimate_args.m, "estimation trials")
      ->required();
  estimate_cmd->add_option("--r", estimate_args.r, "slack parameter")
      ->required();
  estimate_cmd->add_option("--eps", estimate_args.eps, "security parameter")
      ->required();
  estimate_cmd->add_option("--p", estimate_args.p,
                           "reference success probability");
  estimate_cmd->add_option("--mu", estimate_args.mu,
                           "evaluate the tail bound at this mu instead");

  SimulateArgs simulate_args;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "run the full protocol from a config file");
  simulate_cmd->add_option("--config", simulate_args.config, "config JSON file")
      ->required();
  simulate_cmd->add_option("--transcript", simulate_args.transcript_path,
                           "transcript output path (JSONL)");
  simulate_cmd->add_option("--summary", simulate_args.summary_path,
                           "summary output path (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  int code = 1;
  try {
    if (chsh_cmd->parsed()) {
      code = run_chsh(chsh_args);
    } else if (jordan_cmd->parsed()) {
      code = run_jordan(jordan_path);
    } else if (keyrate_cmd->parsed()) {
      code = run_keyrate(keyrate_args);
    } else if (estimate_cmd->parsed()) {
      code = run_estimate(estimate_args);
    } else if (simulate_cmd->parsed()) {
      code = run_simulate(simulate_args);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  std::cerr << "wall_time_ms: " << elapsed.count() << '\n';
  return code;
}
