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

#include "diqkd/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <utility>

namespace diqkd {

namespace {

const double two_sqrt2 = 2.0 * std::sqrt(2.0);

// ---------------------------------------------------------------------------
// Byte/bit packing (MSB-first throughout)
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> pack_bits(const Bits& bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (7 - i % 8));
  }
  return bytes;
}

std::vector<std::uint8_t> pack_two_bit(const std::vector<int>& values) {
  std::vector<std::uint8_t> bytes((values.size() + 3) / 4, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    bytes[i / 4] |= static_cast<std::uint8_t>((values[i] & 0x3)
                                              << (6 - 2 * (i % 4)));
  }
  return bytes;
}

void append_u64_be(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
  }
}

void append_double_be(std::vector<std::uint8_t>& out, double v) {
  append_u64_be(out, std::bit_cast<std::uint64_t>(v));
}

// Bits of a counter-based stream, packed 64 at a time, MSB-first.
Bits stream_bits(CounterRng& rng, std::size_t count) {
  Bits bits(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng();
    bits[i] = static_cast<std::uint8_t>((word >> (63 - i % 64)) & 1u);
  }
  return bits;
}

std::vector<std::uint64_t> pack_words(const Bits& bits) {
  std::vector<std::uint64_t> words((bits.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) words[i / 64] |= 1ULL << (63 - i % 64);
  }
  return words;
}

// 64 bits of the packed sequence starting at bit_off, zero-padded past the
// end.
std::uint64_t window64(const std::vector<std::uint64_t>& words,
                       std::size_t bit_off) {
  const std::size_t q = bit_off / 64;
  const std::size_t r = bit_off % 64;
  const std::uint64_t hi = q < words.size() ? words[q] : 0;
  if (r == 0) return hi;
  const std::uint64_t lo = q + 1 < words.size() ? words[q + 1] : 0;
  return (hi << r) | (lo >> (64 - r));
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void ProtocolConfig::validate() const {
  if (n == 0 || m == 0) {
    throw ValidationError("positive-counts", "n and m must be >= 1");
  }
  const double cos2_pi8 = std::cos(std::atan(1.0) / 2.0) *
                          std::cos(std::atan(1.0) / 2.0);
  if (!(p_thres > 0.75 && p_thres <= cos2_pi8)) {
    throw ValidationError("threshold-range",
                          "p_thres must lie in (0.75, cos^2(pi/8)]");
  }
  if (!(eps > 0.0 && eps < 1.0)) {
    throw ValidationError("probability-range", "eps not in (0,1)");
  }
  if (!(q_max >= 0.0 && q_max <= 0.5)) {
    throw ValidationError("probability-range", "q_max not in [0, 1/2]");
  }
  if (r > std::min(n, m)) {
    throw ValidationError("deviation-range", "r must satisfy r <= min(n, m)");
  }
  if (ec_model != "ideal-leakage") {
    throw ValidationError("ec-model", "unknown model '" + ec_model + "'");
  }
}

EstimationParams ProtocolConfig::estimation_params() const {
  return EstimationParams{n, m, 0, r, eps, p_thres};
}

std::vector<std::uint8_t> encode_frame(const Message& msg) {
  std::vector<std::uint8_t> out;
  const std::uint32_t length =
      static_cast<std::uint32_t>(msg.payload.size() + 1);
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>((length >> shift) & 0xFF));
  }
  out.push_back(static_cast<std::uint8_t>(msg.type));
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  return out;
}

// ---------------------------------------------------------------------------
// Strategies and devices
// ---------------------------------------------------------------------------

void TrialStrategy::validate() const {
  if (dim_a <= 0 || dim_b <= 0 || state.dim() != dim_a * dim_b) {
    throw ValidationError("dimension",
                          "state dimension does not factor as dim_a * dim_b");
  }
  for (const auto& obs : alice) {
    if (obs.dim() != dim_a) {
      throw ValidationError("dimension", "Alice observable dimension mismatch");
    }
  }
  for (const auto& obs : bob) {
    if (obs.dim() != dim_b) {
      throw ValidationError("dimension", "Bob observable dimension mismatch");
    }
  }
}

std::array<double, 4> TrialStrategy::outcome_distribution(int a, int b) const {
  return joint_distribution(state, alice[static_cast<std::size_t>(a)],
                            bob[static_cast<std::size_t>(b)], dim_a, dim_b);
}

double TrialStrategy::chsh_success() const {
  double p = 0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const auto d = outcome_distribution(a, b);
      p += (a & b) ? d[1] + d[2] : d[0] + d[3];
    }
  }
  return p / 4.0;
}

void DeviceModel::prepare(std::size_t, CounterRng&) {}

namespace {

// Cumulative outcome tables for every settings pair of one strategy.
struct OutcomeTables {
  // cum[a][b][k]: cumulative probability of outcome index k = 2x + y.
  double cum[3][2][4];
  double success_p;

  explicit OutcomeTables(const TrialStrategy& s) {
    s.validate();
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 2; ++b) {
        const auto d = s.outcome_distribution(a, b);
        double acc = 0;
        for (int k = 0; k < 4; ++k) {
          acc += d[static_cast<std::size_t>(k)];
          cum[a][b][k] = acc;
        }
        cum[a][b][3] = 1.0;  // guard against rounding in the last bin
      }
    }
    success_p = s.chsh_success();
  }

  std::pair<int, int> sample(int a, int b, CounterRng& rng) const {
    const double u = rng.uniform();
    const double* c = cum[a][b];
    int k = 0;
    while (k < 3 && u >= c[k]) ++k;
    return {k >> 1, k & 1};
  }
};

class StrategyDevice final : public DeviceModel {
 public:
  StrategyDevice(TrialStrategy strategy, std::string label)
      : tables_(strategy), label_(std::move(label)) {}

  std::string kind() const override { return label_; }

  std::pair<int, int> invoke(std::size_t, int a, int b,
                             CounterRng& rng) const override {
    return tables_.sample(a, b, rng);
  }

  double reference_p() const override { return tables_.success_p; }

 private:
  OutcomeTables tables_;
  std::string label_;
};

class MixtureDevice final : public DeviceModel {
 public:
  explicit MixtureDevice(QubitStrategyMixture mixture) {
    if (mixture.components.empty()) {
      throw ValidationError("mixture-empty", "mixture has no components");
    }
    double acc = 0;
    for (const auto& comp : mixture.components) {
      TrialStrategy s{comp.state,
                      {comp.alice[0], comp.alice[1], comp.alice[2]},
                      {comp.bob[0], comp.bob[1]},
                      2,
                      2};
      tables_.emplace_back(s);
      acc += comp.weight;
      cum_weights_.push_back(acc);
      mean_p_ += comp.weight * tables_.back().success_p;
    }
    const double total = cum_weights_.back();
    mean_p_ /= total;
    cum_weights_.back() = 1.0;
  }

  std::string kind() const override { return "coherent-memoryless-mixture"; }

  void prepare(std::size_t total_trials, CounterRng& rng) override {
    assignment_.resize(total_trials);
    for (auto& slot : assignment_) {
      const double u = rng.uniform();
      std::size_t k = 0;
      while (k + 1 < cum_weights_.size() && u >= cum_weights_[k]) ++k;
      slot = static_cast<std::uint32_t>(k);
    }
  }

  std::pair<int, int> invoke(std::size_t trial, int a, int b,
                             CounterRng& rng) const override {
    return tables_[assignment_.at(trial)].sample(a, b, rng);
  }

  double reference_p() const override { return mean_p_; }

 private:
  std::vector<OutcomeTables> tables_;
  std::vector<double> cum_weights_;
  std::vector<std::uint32_t> assignment_;
  double mean_p_ = 0;
};

class PlantedDevice final : public DeviceModel {
 public:
  PlantedDevice(TrialStrategy bulk, TrialStrategy tail, std::size_t tail_count)
      : bulk_(bulk), tail_(tail), tail_count_(tail_count) {}

  std::string kind() const override { return "coherent-memoryless-mixture"; }

  void prepare(std::size_t total_trials, CounterRng&) override {
    total_ = total_trials;
  }

  std::pair<int, int> invoke(std::size_t trial, int a, int b,
                             CounterRng& rng) const override {
    const bool in_tail = trial + tail_count_ >= total_ && total_ > 0;
    return (in_tail ? tail_ : bulk_).sample(a, b, rng);
  }

  double reference_p() const override { return bulk_.success_p; }

 private:
  OutcomeTables bulk_;
  OutcomeTables tail_;
  std::size_t tail_count_;
  std::size_t total_ = 0;
};

TrialStrategy honest_strategy(double v) {
  const IdealStrategy ideal = ideal_qubit_strategy(werner_state(v));
  return TrialStrategy{ideal.chsh.state,
                       {ideal.chsh.alice[0], ideal.chsh.alice[1],
                        ideal.alice_key},
                       {ideal.chsh.bob[0], ideal.chsh.bob[1]},
                       2,
                       2};
}

// Deterministic Haar-ish unitary: QR of a Ginibre matrix with the R diagonal
// phases absorbed.
ComplexMatrix seeded_unitary(Eigen::Index d, CounterRng& rng) {
  ComplexMatrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double u1 = std::max(rng.uniform(), 1e-300);
      const double u2 = rng.uniform();
      const double u3 = std::max(rng.uniform(), 1e-300);
      const double u4 = rng.uniform();
      const double pi = 4 * std::atan(1.0);
      g(i, j) = {std::sqrt(-2 * std::log(u1)) * std::cos(2 * pi * u2),
                 std::sqrt(-2 * std::log(u3)) * std::cos(2 * pi * u4)};
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    const std::complex<double> diag = r(i, i);
    if (std::abs(diag) > 0) q.col(i) *= diag / std::abs(diag);
  }
  return q;
}

}  // namespace

std::unique_ptr<DeviceModel> make_honest_device(double v) {
  return std::make_unique<StrategyDevice>(honest_strategy(v), "honest-noisy");
}

std::unique_ptr<DeviceModel> make_iid_device(TrialStrategy strategy,
                                             std::string kind_label) {
  return std::make_unique<StrategyDevice>(std::move(strategy),
                                          std::move(kind_label));
}

std::unique_ptr<DeviceModel> make_classical_device() {
  ComplexMatrix zero_state = ComplexMatrix::Zero(4, 4);
  zero_state(0, 0) = 1.0;
  const BinaryObservable z(pauli_z());
  TrialStrategy s{DensityOperator(zero_state), {z, z, z}, {z, z}, 2, 2};
  return std::make_unique<StrategyDevice>(std::move(s), "collective-iid");
}

std::unique_ptr<DeviceModel> make_mixture_device(QubitStrategyMixture mixture) {
  return std::make_unique<MixtureDevice>(std::move(mixture));
}

std::unique_ptr<DeviceModel> make_planted_device(TrialStrategy bulk,
                                                 TrialStrategy tail,
                                                 std::size_t tail_count) {
  return std::make_unique<PlantedDevice>(std::move(bulk), std::move(tail),
                                         tail_count);
}

TrialStrategy highdim_block_strategy(std::uint64_t seed,
                                     std::size_t num_blocks) {
  if (num_blocks == 0) {
    throw ValidationError("positive-counts", "num_blocks must be >= 1");
  }
  CounterRng rng(seed, "highdim-blocks");
  const Eigen::Index d = static_cast<Eigen::Index>(2 * num_blocks);
  const double pi = 4 * std::atan(1.0);

  ComplexMatrix a0 = ComplexMatrix::Zero(d, d);
  ComplexMatrix a1 = ComplexMatrix::Zero(d, d);
  ComplexMatrix a2 = ComplexMatrix::Zero(d, d);
  ComplexMatrix b0 = ComplexMatrix::Zero(d, d);
  ComplexMatrix b1 = ComplexMatrix::Zero(d, d);
  ComplexMatrix state = ComplexMatrix::Zero(d * d, d * d);

  std::vector<double> weights(num_blocks);
  double wsum = 0;
  for (auto& w : weights) {
    w = -std::log(std::max(rng.uniform(), 1e-300));
    wsum += w;
  }
  for (auto& w : weights) w /= wsum;

  for (std::size_t k = 0; k < num_blocks; ++k) {
    auto jitter = [&] { return (rng.uniform() * 2.0 - 1.0) * 0.1; };
    const Eigen::Index off = static_cast<Eigen::Index>(2 * k);
    // Near-optimal planar block strategy with per-block jitter; the key
    // setting shares Bob's key direction so the block contributes strong
    // violation and low error rate.
    a0.block(off, off, 2, 2) = planar_observable(0.0 + jitter());
    a1.block(off, off, 2, 2) = planar_observable(pi / 2 + jitter());
    const double key_angle = pi / 4 + jitter();
    a2.block(off, off, 2, 2) = planar_observable(key_angle);
    b0.block(off, off, 2, 2) = planar_observable(key_angle);
    b1.block(off, off, 2, 2) = planar_observable(-pi / 4 + jitter());

    const double v = 0.9 + 0.1 * rng.uniform();
    const ComplexMatrix block_state = werner_state(v).matrix();
    // Embed the two-qubit block state into (A block k) (x) (B block k).
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const Eigen::Index row = (off + (i >> 1)) * d + off + (i & 1);
        const Eigen::Index col = (off + (j >> 1)) * d + off + (j & 1);
        state(row, col) += weights[k] * block_state(i, j);
      }
    }
  }

  const ComplexMatrix ua = seeded_unitary(d, rng);
  const ComplexMatrix ub = seeded_unitary(d, rng);
  const ComplexMatrix uab = tensor(ua, ub);
  return TrialStrategy{
      DensityOperator(uab * state * uab.adjoint()),
      {BinaryObservable(ua * a0 * ua.adjoint()),
       BinaryObservable(ua * a1 * ua.adjoint()),
       BinaryObservable(ua * a2 * ua.adjoint())},
      {BinaryObservable(ub * b0 * ub.adjoint()),
       BinaryObservable(ub * b1 * ub.adjoint())},
      d,
      d};
}

std::unique_ptr<DeviceModel> make_highdim_device(const TrialStrategy& strategy) {
  return std::make_unique<StrategyDevice>(strategy, "highdim-blockdiag");
}

QubitStrategyMixture reduce_trial_strategy(const TrialStrategy& strategy) {
  strategy.validate();
  return reduce_strategy(strategy.state, {strategy.alice[0], strategy.alice[1]},
                         strategy.alice[2], {strategy.bob[0], strategy.bob[1]},
                         strategy.dim_a, strategy.dim_b);
}

// ---------------------------------------------------------------------------
// Protocol steps
// ---------------------------------------------------------------------------

std::pair<double, std::size_t> estimate_S(
    const std::vector<TrialRecord>& estimation_trials) {
  if (estimation_trials.empty()) {
    throw ValidationError("empty-input", "no estimation trials");
  }
  std::size_t y = 0;
  for (const auto& t : estimation_trials) {
    if (!t.estimation || t.a > 1) {
      throw ValidationError("trial-role", "record is not an estimation trial");
    }
    if ((t.x ^ t.y) == (t.a & t.b)) ++y;
  }
  const double ratio =
      static_cast<double>(y) / static_cast<double>(estimation_trials.size());
  return {8.0 * ratio - 4.0, y};
}

Bits toeplitz_tag(const Bits& data, std::size_t tag_bits, std::uint64_t seed) {
  if (tag_bits == 0) return {};
  CounterRng rng(seed, "verification-tag");
  const Bits hash_seed = stream_bits(rng, data.size() + tag_bits - 1);
  return privacy_amplify(data, tag_bits, hash_seed);
}

ReconcileResult reconcile(const Bits& alice_raw, const Bits& bob_raw,
                          double q_est, double eps_cor,
                          std::uint64_t tag_seed) {
  if (alice_raw.size() != bob_raw.size()) {
    throw ValidationError("length-mismatch",
                          "raw strings have different lengths");
  }
  if (!(q_est >= 0.0 && q_est <= 1.0)) {
    throw ValidationError("probability-range", "q_est not in [0,1]");
  }
  if (!(eps_cor > 0.0 && eps_cor < 1.0)) {
    throw ValidationError("probability-range", "eps_cor not in (0,1)");
  }
  const std::size_t tag_bits =
      static_cast<std::size_t>(std::ceil(-std::log2(eps_cor)));

  ReconcileResult result;
  result.corrected = bob_raw;  // Bob's string is the reference
  result.leak = static_cast<std::size_t>(
                    std::ceil(static_cast<double>(bob_raw.size()) *
                              binary_entropy(q_est))) +
                tag_bits;
  result.ok = toeplitz_tag(result.corrected, tag_bits, tag_seed) ==
              toeplitz_tag(bob_raw, tag_bits, tag_seed);
  return result;
}

Bits privacy_amplify(const Bits& key_in, std::size_t out_len,
                     const Bits& seed) {
  const std::size_t n = key_in.size();
  if (out_len > n) {
    throw ValidationError("output-length", "out_len exceeds input length");
  }
  if (out_len == 0) return {};
  if (seed.size() != n + out_len - 1) {
    throw ValidationError("seed-length",
                          "need exactly len(key) + out_len - 1 seed bits");
  }

  const auto seed_words = pack_words(seed);
  const std::size_t out_words = (out_len + 63) / 64;
  std::vector<std::uint64_t> acc(out_words, 0);
  // out[i] = XOR_j seed[n - 1 + i - j] key[j]: for each set key bit, XOR a
  // shifted 64-bit window of the seed into the accumulator.
  for (std::size_t j = 0; j < n; ++j) {
    if (!key_in[j]) continue;
    const std::size_t start = n - 1 - j;
    for (std::size_t w = 0; w < out_words; ++w) {
      acc[w] ^= window64(seed_words, start + 64 * w);
    }
  }

  Bits out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    out[i] = static_cast<std::uint8_t>((acc[i / 64] >> (63 - i % 64)) & 1u);
  }
  return out;
}

std::size_t final_key_length(double s_est, double mu, double q_est,
                             std::size_t n, std::size_t leak_ec, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw ValidationError("probability-range", "eps not in (0,1)");
  }
  // Certified floor of the estimate; the statistical estimate itself may
  // exceed the quantum maximum, the floor is capped there.
  const double s_floor = std::min(s_est - 8.0 * mu, two_sqrt2);
  const double rate = key_rate(s_floor, q_est);
  const long safety =
      static_cast<long>(std::ceil(2.0 * std::log2(1.0 / eps)));
  const long raw = static_cast<long>(
      std::floor(rate * static_cast<double>(n)));
  const long value = raw - static_cast<long>(leak_ec) - safety;
  return value > 0 ? static_cast<std::size_t>(value) : 0;
}

namespace {

Bits select_estimation_mask(std::size_t total, std::size_t m,
                            CounterRng& rng) {
  std::vector<std::size_t> positions(total);
  std::iota(positions.begin(), positions.end(), 0);
  // Partial Fisher-Yates: the first m entries become the sample.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
    std::swap(positions[i], positions[j]);
  }
  Bits mask(total, 0);
  for (std::size_t i = 0; i < m; ++i) mask[positions[i]] = 1;
  return mask;
}

}  // namespace

ProtocolTranscript run_protocol(const ProtocolConfig& config,
                                DeviceModel& devices,
                                const RunOptions& options) {
  config.validate();
  ProtocolTranscript tx;

  const EstimationParams params = config.estimation_params();
  const TailBoundResult threshold = pe_threshold(params);
  tx.mu = threshold.mu;

  CounterRng settings_rng(config.seed, "settings");
  CounterRng devices_rng(config.seed, "devices");
  CounterRng symmetrization_rng(config.seed, "symmetrization");
  CounterRng permutation_rng(config.seed, "permutation");
  CounterRng hashing_rng(config.seed, "hashing");

  const std::size_t total = config.n + config.m;

  // (i) Alice selects the estimation positions and sends them encrypted
  // under the pre-shared key; the budget is accounted, not subtracted.
  const Bits estimation_mask =
      select_estimation_mask(total, config.m, settings_rng);
  tx.psk_consumed =
      config.m *
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(total))));
  tx.messages.push_back(Message{"alice", MessageType::pe_indices,
                                pack_bits(estimation_mask), true});

  // (ii) Measurement phase: settings are uniform on {0,1}^2 for estimation
  // trials and (2,0) for key trials.
  devices.prepare(total, devices_rng);
  {
    std::vector<std::uint8_t> marker;
    append_u64_be(marker, total);
    tx.messages.push_back(
        Message{"alice", MessageType::state_request, std::move(marker), false});
  }
  std::vector<TrialRecord> trials;
  trials.reserve(total);
  for (std::size_t t = 0; t < total; ++t) {
    int a = 2, b = 0;
    if (estimation_mask[t]) {
      const std::uint64_t pick = settings_rng.below(4);
      a = static_cast<int>(pick >> 1);
      b = static_cast<int>(pick & 1);
    }
    const auto [x, y] = devices.invoke(t, a, b, devices_rng);
    trials.push_back(TrialRecord{t, estimation_mask[t] != 0, a, b, x, y, 0});
  }

  // (iii) Settings announcement.
  {
    std::vector<int> alice_settings, bob_settings_bits;
    Bits bob_bits;
    for (const auto& t : trials) {
      alice_settings.push_back(t.a);
      bob_bits.push_back(static_cast<std::uint8_t>(t.b));
    }
    tx.messages.push_back(Message{"alice", MessageType::settings,
                                  pack_two_bit(alice_settings), false});
    tx.messages.push_back(
        Message{"bob", MessageType::settings, pack_bits(bob_bits), false});
  }

  // (iv) Symmetrization: Alice flips with probability 1/2 and announces;
  // Bob flips whenever Alice does, so x XOR y is invariant.
  {
    Bits flips(total, 0);
    if (options.symmetrize) {
      for (auto& f : flips) f = symmetrization_rng.bernoulli(0.5) ? 1 : 0;
    }
    for (std::size_t t = 0; t < total; ++t) {
      trials[t].flip = flips[t];
      trials[t].x ^= flips[t];
      trials[t].y ^= flips[t];
    }
    tx.messages.push_back(
        Message{"alice", MessageType::flips, pack_bits(flips), false});
  }

  // (v) Public permutation, applied by both parties.
  {
    const std::uint64_t perm_seed = permutation_rng();
    std::vector<std::uint8_t> payload;
    append_u64_be(payload, perm_seed);
    tx.messages.push_back(Message{"alice", MessageType::permutation_seed,
                                  std::move(payload), false});
    CounterRng shuffle_rng(perm_seed, "public-permutation");
    const auto perm = shuffle_rng.permutation(total);
    std::vector<TrialRecord> permuted(total,
                                      TrialRecord{0, false, 0, 0, 0, 0, 0});
    for (std::size_t i = 0; i < total; ++i) permuted[perm[i]] = trials[i];
    trials = std::move(permuted);
  }
  tx.trials = trials;

  // (vi) Parameter estimation.
  std::vector<TrialRecord> estimation_trials;
  for (const auto& t : trials) {
    if (t.estimation) estimation_trials.push_back(t);
  }
  const auto [s_est, y_count] = estimate_S(estimation_trials);
  tx.s_est = s_est;
  tx.y_count = y_count;
  {
    std::vector<std::uint8_t> payload;
    append_u64_be(payload, y_count);
    append_double_be(payload, s_est);
    tx.messages.push_back(
        Message{"alice", MessageType::estimate, std::move(payload), false});
  }
  const double y_ratio =
      static_cast<double>(y_count) / static_cast<double>(config.m);
  if (y_ratio < config.p_thres + tx.mu) {
    tx.aborted = true;
    tx.abort_reason = "parameter estimation below threshold";
    tx.messages.push_back(Message{
        "alice", MessageType::abort_notice,
        std::vector<std::uint8_t>(tx.abort_reason.begin(),
                                  tx.abort_reason.end()),
        false});
    return tx;
  }

  // (vii) Reconciliation on the key trials, in permuted order.
  Bits alice_raw, bob_raw;
  for (const auto& t : trials) {
    if (!t.estimation) {
      alice_raw.push_back(static_cast<std::uint8_t>(t.x));
      bob_raw.push_back(static_cast<std::uint8_t>(t.y));
    }
  }
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < alice_raw.size(); ++i) {
    mismatches += alice_raw[i] != bob_raw[i];
  }
  tx.q_est = static_cast<double>(mismatches) /
             static_cast<double>(alice_raw.size());
  const double eps_cor =
      std::pow(2.0, -static_cast<double>(config.verification_tag_bits));
  const std::uint64_t tag_seed = hashing_rng();
  const ReconcileResult rec =
      reconcile(alice_raw, bob_raw, tx.q_est, eps_cor, tag_seed);
  tx.leak_ec = rec.leak;
  {
    std::vector<std::uint8_t> payload;
    append_u64_be(payload, rec.leak);
    append_double_be(payload, tx.q_est);
    tx.messages.push_back(
        Message{"bob", MessageType::reconciliation, std::move(payload), false});
  }
  if (tx.q_est > config.q_max) {
    tx.aborted = true;
    tx.abort_reason = "bit error rate above threshold";
    tx.messages.push_back(Message{
        "alice", MessageType::abort_notice,
        std::vector<std::uint8_t>(tx.abort_reason.begin(),
                                  tx.abort_reason.end()),
        false});
    return tx;
  }
  {
    std::vector<std::uint8_t> payload;
    append_u64_be(payload, tag_seed);
    const Bits tag = toeplitz_tag(rec.corrected,
                                  config.verification_tag_bits, tag_seed);
    const auto tag_bytes = pack_bits(tag);
    payload.insert(payload.end(), tag_bytes.begin(), tag_bytes.end());
    tx.messages.push_back(Message{"alice", MessageType::verification_tag,
                                  std::move(payload), false});
  }
  if (!rec.ok) {
    tx.aborted = true;
    tx.abort_reason = "verification failed";
    tx.messages.push_back(Message{
        "alice", MessageType::abort_notice,
        std::vector<std::uint8_t>(tx.abort_reason.begin(),
                                  tx.abort_reason.end()),
        false});
    return tx;
  }

  // (viii) Privacy amplification at the certified floor.
  const std::size_t n_key = alice_raw.size();
  tx.final_length = final_key_length(tx.s_est, tx.mu, tx.q_est, n_key,
                                     tx.leak_ec, config.eps);
  {
    const double s_floor = std::min(tx.s_est - 8.0 * tx.mu, two_sqrt2);
    tx.asymptotic_length = static_cast<long>(std::floor(
        key_rate(s_floor, tx.q_est) * static_cast<double>(n_key)));
  }
  const std::size_t seed_len =
      tx.final_length == 0 ? 0 : n_key + tx.final_length - 1;
  const Bits pa_seed = stream_bits(hashing_rng, seed_len);
  tx.messages.push_back(
      Message{"alice", MessageType::pa_seed, pack_bits(pa_seed), false});
  tx.alice_key = privacy_amplify(rec.corrected, tx.final_length, pa_seed);
  tx.bob_key = privacy_amplify(bob_raw, tx.final_length, pa_seed);
  return tx;
}

// ---------------------------------------------------------------------------
// Monte Carlo harnesses
// ---------------------------------------------------------------------------

std::vector<double> monte_carlo_tail(DeviceModel& devices, std::size_t m,
                                     std::size_t runs,
                                     const std::vector<double>& mu_grid,
                                     std::uint64_t seed) {
  if (m == 0 || runs == 0) {
    throw ValidationError("positive-counts", "m and runs must be >= 1");
  }
  const double p_ref = devices.reference_p();
  CounterRng root(seed, "tail-harness");
  std::vector<std::size_t> exceed(mu_grid.size(), 0);
  for (std::size_t run = 0; run < runs; ++run) {
    CounterRng rng = root.fork(run);
    devices.prepare(m, rng);
    std::size_t y = 0;
    for (std::size_t t = 0; t < m; ++t) {
      const std::uint64_t pick = rng.below(4);
      const int a = static_cast<int>(pick >> 1);
      const int b = static_cast<int>(pick & 1);
      const auto [x, yb] = devices.invoke(t, a, b, rng);
      y += static_cast<std::size_t>((x ^ yb) == (a & b));
    }
    const double ratio = static_cast<double>(y) / static_cast<double>(m);
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
      if (ratio > p_ref + mu_grid[i]) ++exceed[i];
    }
  }
  std::vector<double> freq(mu_grid.size());
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    freq[i] = static_cast<double>(exceed[i]) / static_cast<double>(runs);
  }
  return freq;
}

CollectiveEveResult simulate_collective_eve(const ChshStrategy& strategy,
                                            std::size_t n,
                                            std::uint64_t seed) {
  strategy.validate();
  if (strategy.dim_a != 2 || strategy.dim_b != 2) {
    throw ValidationError("dimension", "expected a two-qubit strategy");
  }
  // Requires the Bell-diagonal parameterization (throws otherwise).
  bell_diagonal_spectrum(strategy.state);

  // Adversary holds the purifying system E of dimension 4; Bob measures his
  // key setting (setting 0).
  const ComplexVector psi = purify(strategy.state);
  const ComplexMatrix full = psi * psi.adjoint();
  const ComplexMatrix sigma_be = partial_trace(full, {2, 2, 4}, {1, 2});
  const ComplexMatrix sigma_e = partial_trace(sigma_be, {2, 4}, {1});
  const double h_e = von_neumann_entropy(DensityOperator(sigma_e));

  const std::array<ComplexMatrix, 2> proj = {
      strategy.bob[0].projector_plus(), strategy.bob[0].projector_minus()};
  std::array<double, 2> probs{};
  std::array<ComplexMatrix, 2> cond{};
  for (int x = 0; x < 2; ++x) {
    const ComplexMatrix big = tensor(proj[x], identity(4));
    const ComplexMatrix reduced =
        partial_trace(big * sigma_be * big, {2, 4}, {1});
    probs[x] = reduced.trace().real();
    cond[x] = probs[x] > 1e-12 ? ComplexMatrix(reduced / probs[x])
                               : ComplexMatrix(identity(4) / 4.0);
  }

  const std::array<double, 2> cond_entropy = {
      von_neumann_entropy(DensityOperator(cond[0])),
      von_neumann_entropy(DensityOperator(cond[1]))};
  const double h_exact = shannon_entropy(probs) +
                         probs[0] * cond_entropy[0] +
                         probs[1] * cond_entropy[1] - h_e;

  CounterRng rng(seed, "collective-eve");
  Bits bits(n);
  std::size_t ones = 0;
  double entropy_sum = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const int x = rng.bernoulli(probs[1]) ? 1 : 0;
    bits[t] = static_cast<std::uint8_t>(x);
    ones += static_cast<std::size_t>(x);
    entropy_sum += cond_entropy[static_cast<std::size_t>(x)];
  }
  const double p1_hat = n > 0 ? static_cast<double>(ones) /
                                    static_cast<double>(n)
                              : 0.0;
  const double h_estimate =
      n > 0 ? binary_entropy(p1_hat) +
                  entropy_sum / static_cast<double>(n) - h_e
            : 0.0;

  return CollectiveEveResult{std::move(bits),
                             {DensityOperator(cond[0]),
                              DensityOperator(cond[1])},
                             probs,
                             h_exact,
                             h_estimate};
}

}  // namespace diqkd
