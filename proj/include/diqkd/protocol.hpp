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

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "diqkd/bounds.hpp"
#include "diqkd/chsh.hpp"
#include "diqkd/jordan.hpp"
#include "diqkd/rng.hpp"

namespace diqkd {

using Bits = std::vector<std::uint8_t>;  // one bit (0/1) per element

// ---------------------------------------------------------------------------
// Configuration and transcript types
// ---------------------------------------------------------------------------

struct ProtocolConfig {
  std::size_t n = 5000;  // key trials
  std::size_t m = 5000;  // parameter-estimation trials
  double eps = 1e-6;
  double p_thres = 0.78;
  double q_max = 0.12;
  std::size_t r = 0;
  std::string ec_model = "ideal-leakage";
  std::uint64_t seed = 0;
  std::size_t verification_tag_bits = 64;

  void validate() const;
  EstimationParams estimation_params() const;
};

enum class MessageType : std::uint8_t {
  pe_indices = 0x01,
  state_request = 0x02,
  settings = 0x03,
  flips = 0x04,
  permutation_seed = 0x05,
  estimate = 0x06,
  reconciliation = 0x07,
  verification_tag = 0x08,
  pa_seed = 0x09,
  abort_notice = 0x0A,
};

struct Message {
  std::string sender;  // "alice" or "bob"
  MessageType type;
  std::vector<std::uint8_t> payload;
  bool confidential = false;  // sent under pre-shared-key encryption
};

// Wire form: 4-byte big-endian length (type byte + payload), 1-byte type,
// payload.  Bit strings inside payloads are packed MSB-first.
std::vector<std::uint8_t> encode_frame(const Message& msg);

struct TrialRecord {
  std::size_t index;  // position before the public permutation
  bool estimation;
  int a;  // Alice's setting: 0, 1, or 2
  int b;  // Bob's setting: 0 or 1
  int x;  // Alice's outcome bit after symmetrization (0 means +1)
  int y;  // Bob's outcome bit after symmetrization
  int flip;
};

struct ProtocolTranscript {
  std::vector<Message> messages;
  std::vector<TrialRecord> trials;  // in post-permutation order
  double s_est = 0;
  double q_est = 0;
  double mu = 0;
  std::size_t y_count = 0;
  bool aborted = false;
  std::string abort_reason;
  Bits alice_key;
  Bits bob_key;
  std::size_t leak_ec = 0;
  std::size_t final_length = 0;
  long asymptotic_length = 0;   // floor(n * rate at the certified floor)
  std::size_t psk_consumed = 0; // pre-shared-key bits spent on step (i)
};

// ---------------------------------------------------------------------------
// Device models
// ---------------------------------------------------------------------------

// A single-trial strategy: shared state, Alice's two estimation observables
// plus her key observable (setting 2), Bob's two observables (setting 0 is
// the key setting).
struct TrialStrategy {
  DensityOperator state;
  std::array<BinaryObservable, 3> alice;
  std::array<BinaryObservable, 2> bob;
  Eigen::Index dim_a;
  Eigen::Index dim_b;

  void validate() const;
  // Outcome distribution {P(x=0,y=0), P(0,1), P(1,0), P(1,1)}.
  std::array<double, 4> outcome_distribution(int a, int b) const;
  // CHSH success probability under uniform settings on {0,1}^2.
  double chsh_success() const;
};

// Measurement devices with no trial-to-trial memory: a trial's outcome
// distribution depends only on that trial's settings, the per-trial component
// selected by classical randomness fixed in prepare(), and nothing else.
class DeviceModel {
 public:
  virtual ~DeviceModel() = default;

  virtual std::string kind() const = 0;

  // Fixes per-trial shared classical randomness for a run of the given
  // length.  Default: nothing to fix.
  virtual void prepare(std::size_t total_trials, CounterRng& rng);

  // Outcome bits (x, y) for one trial; rng supplies the Born-rule sampling.
  virtual std::pair<int, int> invoke(std::size_t trial, int a, int b,
                                     CounterRng& rng) const = 0;

  // CHSH success probability of the reference (bulk) component, used by the
  // tail-bound harness.
  virtual double reference_p() const = 0;
};

// Honest devices: the standard optimal qubit measurements on a Werner state
// of visibility v (v = 1 is noiseless).
std::unique_ptr<DeviceModel> make_honest_device(double v);

// Fixed strategy applied identically and independently on every trial.
std::unique_ptr<DeviceModel> make_iid_device(TrialStrategy strategy,
                                             std::string kind_label =
                                                 "collective-iid");

// Deterministic classical devices: every observable Z, state |00>.
std::unique_ptr<DeviceModel> make_classical_device();

// Per-trial component freshly sampled from a qubit-strategy mixture.
std::unique_ptr<DeviceModel> make_mixture_device(QubitStrategyMixture mixture);

// All trials use `bulk` except the final `tail_count` ones, which use `tail`
// (the planted near-product configuration of the tail-bound analysis).
std::unique_ptr<DeviceModel> make_planted_device(TrialStrategy bulk,
                                                 TrialStrategy tail,
                                                 std::size_t tail_count);

// Deterministically built higher-dimensional strategy whose observables are
// block-diagonal in hidden local bases: `num_blocks` two-qubit sub-strategies
// (strongly violating, jittered angles) embedded in dimension 2 * num_blocks
// per side and conjugated by seeded random local unitaries.
TrialStrategy highdim_block_strategy(std::uint64_t seed,
                                     std::size_t num_blocks = 3);
std::unique_ptr<DeviceModel> make_highdim_device(const TrialStrategy& strategy);

// The qubit-strategy mixture obtained by block-decomposing a strategy's
// observables (the reduced form of a highdim_block_strategy device).
QubitStrategyMixture reduce_trial_strategy(const TrialStrategy& strategy);

// ---------------------------------------------------------------------------
// Protocol steps
// ---------------------------------------------------------------------------

struct RunOptions {
  bool symmetrize = true;  // testing hook; the protocol always symmetrizes
};

// Full two-endpoint execution: estimation-position selection, measurement,
// settings announcement, symmetrization, public permutation, estimation with
// abort check, reconciliation with verification, privacy amplification.
ProtocolTranscript run_protocol(const ProtocolConfig& config,
                                DeviceModel& devices,
                                const RunOptions& options = {});

// S_est = 8 Y / m - 4 where Y counts trials with x XOR y = a.b.
std::pair<double, std::size_t> estimate_S(
    const std::vector<TrialRecord>& estimation_trials);

struct ReconcileResult {
  Bits corrected;
  std::size_t leak = 0;
  bool ok = false;
};

// Ideal-leakage reconciliation: Bob's string is the reference; the leakage
// accounting is ceil(n h(q_est)) plus the verification tag length
// ceil(log2(1/eps_cor)).  Verification compares Toeplitz tags computed with
// the given public seed.
ReconcileResult reconcile(const Bits& alice_raw, const Bits& bob_raw,
                          double q_est, double eps_cor,
                          std::uint64_t tag_seed);

// Toeplitz tag of `tag_bits` bits used by reconciliation verification.
Bits toeplitz_tag(const Bits& data, std::size_t tag_bits, std::uint64_t seed);

// Toeplitz two-universal hashing over GF(2):
// out[i] = XOR_j seed[i - j + len(key_in) - 1] * key_in[j].
// Requires len(seed) = len(key_in) + out_len - 1.
Bits privacy_amplify(const Bits& key_in, std::size_t out_len,
                     const Bits& seed);

// max(0, floor(n * key_rate(S_est - 8 mu, q_est)) - leak_ec -
// ceil(2 log2(1/eps))): the rate is evaluated at the certified floor of the
// estimate, and the margin-adjusted length never exceeds the raw count.
std::size_t final_key_length(double s_est, double mu, double q_est,
                             std::size_t n, std::size_t leak_ec, double eps);

// ---------------------------------------------------------------------------
// Monte Carlo harnesses
// ---------------------------------------------------------------------------

// For each mu, the frequency over `runs` of Y/m > reference_p + mu, where Y
// counts CHSH successes over m uniform-setting trials per run.
std::vector<double> monte_carlo_tail(DeviceModel& devices, std::size_t m,
                                     std::size_t runs,
                                     const std::vector<double>& mu_grid,
                                     std::uint64_t seed);

struct CollectiveEveResult {
  Bits bob_bits;
  // Adversary's states conditioned on Bob's bit, and the outcome law.
  std::array<DensityOperator, 2> conditional_states;
  std::array<double, 2> outcome_probs;
  double h_exact;     // H(X|E) from the constructed purification
  double h_estimate;  // Monte Carlo estimate from the sampled bits
};

// Purification-based collective attack on a Bell-diagonal two-qubit
// strategy: the adversary holds the purifying system; Bob measures his key
// setting (strategy.bob[0]).  The sampled estimate of H(X|E) converges to
// h_x_given_e of the spectrum when the key setting is the optimal phi = 0
// measurement.
CollectiveEveResult simulate_collective_eve(const ChshStrategy& strategy,
                                            std::size_t n, std::uint64_t seed);

}  // namespace diqkd
