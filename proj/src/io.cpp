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

#include "diqkd/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace diqkd {

namespace {

void require_keys(const Json& j, std::initializer_list<const char*> keys,
                  const char* what) {
  if (!j.is_object()) {
    throw ValidationError("json-shape", std::string(what) + " must be an object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ValidationError("unknown-field",
                            std::string(what) + " has unknown field '" +
                                item.key() + "'");
    }
  }
}

double number_field(const Json& j, const char* key, double fallback,
                    bool* present = nullptr) {
  if (!j.contains(key)) {
    if (present) *present = false;
    return fallback;
  }
  if (present) *present = true;
  if (!j.at(key).is_number()) {
    throw ValidationError("field-type",
                          std::string("field '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

std::uint64_t count_field(const Json& j, const char* key,
                          std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_unsigned()) {
    throw ValidationError("field-type", std::string("field '") + key +
                                            "' must be a nonnegative integer");
  }
  return j.at(key).get<std::uint64_t>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

Json matrix_to_json(const ComplexMatrix& m) {
  Json j;
  j["dim"] = static_cast<std::uint64_t>(m.rows());
  Json entries = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      entries.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    }
  }
  j["entries"] = std::move(entries);
  return j;
}

ComplexMatrix matrix_from_json(const Json& j) {
  require_keys(j, {"dim", "entries"}, "matrix");
  if (!j.contains("dim") || !j.contains("entries")) {
    throw ValidationError("json-shape", "matrix needs 'dim' and 'entries'");
  }
  if (!j.at("dim").is_number_integer() || j.at("dim").get<std::int64_t>() <= 0) {
    throw ValidationError("field-type", "'dim' must be a positive integer");
  }
  const auto d = static_cast<Eigen::Index>(j.at("dim").get<std::int64_t>());
  const Json& entries = j.at("entries");
  if (!entries.is_array() ||
      entries.size() != static_cast<std::size_t>(d * d)) {
    throw ValidationError("json-shape",
                          "'entries' must hold dim*dim [re, im] pairs");
  }
  ComplexMatrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const Json& e = entries[static_cast<std::size_t>(r * d + c)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
          !e[1].is_number()) {
        throw ValidationError("json-shape", "entry is not an [re, im] pair");
      }
      m(r, c) = {e[0].get<double>(), e[1].get<double>()};
    }
  }
  return m;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("file-access", "cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ValidationError("file-access", "cannot write '" + path + "'");
  }
  out << content;
  if (!out) {
    throw ValidationError("file-access", "short write to '" + path + "'");
  }
}

namespace {

Json parse_json_text(const std::string& text, const std::string& origin) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw ValidationError("json-parse", "malformed JSON in " + origin);
  }
  return j;
}

bool parse_werner_preset(const std::string& source, double& v) {
  if (source.rfind("werner:", 0) != 0 && source.rfind("werner-", 0) != 0) {
    return false;
  }
  const std::string arg = source.substr(7);
  const char* first = arg.data();
  const char* last = first + arg.size();
  double parsed = 0;
  const auto [ptr, ec] = std::from_chars(first, last, parsed);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError("preset-parameter",
                          "cannot parse visibility in '" + source + "'");
  }
  v = parsed;
  return true;
}

}  // namespace

DensityOperator load_state(const std::string& source) {
  if (source == "phi-plus") {
    const ComplexVector phi = bell_phi_plus();
    return DensityOperator(phi * phi.adjoint());
  }
  if (source == "maximally-mixed") {
    return DensityOperator(ComplexMatrix(identity(4) / 4.0));
  }
  if (source == "classical-z") {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = 1.0;
    return DensityOperator(m);
  }
  double v = 0;
  if (parse_werner_preset(source, v)) return werner_state(v);
  const Json j = parse_json_text(read_text_file(source), "'" + source + "'");
  return DensityOperator(matrix_from_json(j));
}

std::pair<BinaryObservable, BinaryObservable> load_observable_pair(
    const std::string& path) {
  const Json j = parse_json_text(read_text_file(path), "'" + path + "'");
  require_keys(j, {"a0", "a1"}, "observable pair");
  if (!j.contains("a0") || !j.contains("a1")) {
    throw ValidationError("json-shape", "observable pair needs 'a0' and 'a1'");
  }
  BinaryObservable a0(matrix_from_json(j.at("a0")));
  BinaryObservable a1(matrix_from_json(j.at("a1")));
  if (a0.dim() != a1.dim()) {
    throw ValidationError("dimension", "observables have different dimensions");
  }
  return {std::move(a0), std::move(a1)};
}

// ---------------------------------------------------------------------------
// Simulation configs
// ---------------------------------------------------------------------------

SimulationSetup simulation_setup_from_json(const Json& j) {
  require_keys(j,
               {"n", "m", "eps", "p_thres", "q_max", "r", "ec_model", "seed",
                "verification_tag_bits", "device"},
               "config");
  SimulationSetup setup;
  ProtocolConfig& cfg = setup.config;
  cfg.n = count_field(j, "n", cfg.n);
  cfg.m = count_field(j, "m", cfg.m);
  cfg.eps = number_field(j, "eps", cfg.eps);
  cfg.p_thres = number_field(j, "p_thres", cfg.p_thres);
  cfg.q_max = number_field(j, "q_max", cfg.q_max);
  cfg.r = count_field(j, "r", cfg.r);
  if (j.contains("ec_model")) {
    if (!j.at("ec_model").is_string()) {
      throw ValidationError("field-type", "'ec_model' must be a string");
    }
    cfg.ec_model = j.at("ec_model").get<std::string>();
  }
  cfg.seed = count_field(j, "seed", cfg.seed);
  cfg.verification_tag_bits =
      count_field(j, "verification_tag_bits", cfg.verification_tag_bits);
  cfg.validate();

  if (!j.contains("device")) {
    throw ValidationError("json-shape", "config needs a 'device' object");
  }
  const Json& dev = j.at("device");
  require_keys(dev, {"kind", "v", "seed", "num_blocks"}, "device");
  if (!dev.contains("kind") || !dev.at("kind").is_string()) {
    throw ValidationError("json-shape", "device needs a string 'kind'");
  }
  const std::string kind = dev.at("kind").get<std::string>();
  setup.device_label = kind;
  if (kind == "honest-noisy") {
    const double v = number_field(dev, "v", 1.0);
    if (dev.contains("seed") || dev.contains("num_blocks")) {
      throw ValidationError("unknown-field",
                            "honest-noisy takes only 'v'");
    }
    setup.device = make_honest_device(v);
  } else if (kind == "classical-z") {
    if (dev.size() != 1) {
      throw ValidationError("unknown-field", "classical-z takes no parameters");
    }
    setup.device = make_classical_device();
  } else if (kind == "highdim-blockdiag" || kind == "reduced-highdim") {
    if (dev.contains("v")) {
      throw ValidationError("unknown-field", kind + " does not take 'v'");
    }
    const std::uint64_t seed = count_field(dev, "seed", 1);
    const std::size_t blocks =
        static_cast<std::size_t>(count_field(dev, "num_blocks", 3));
    const TrialStrategy strategy = highdim_block_strategy(seed, blocks);
    if (kind == "highdim-blockdiag") {
      setup.device = make_highdim_device(strategy);
    } else {
      setup.device = make_mixture_device(reduce_trial_strategy(strategy));
    }
  } else {
    throw ValidationError("device-kind", "unknown device kind '" + kind + "'");
  }
  return setup;
}

SimulationSetup load_simulation_config(const std::string& path) {
  const Json j = parse_json_text(read_text_file(path), "'" + path + "'");
  return simulation_setup_from_json(j);
}

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

namespace {

const char* message_type_name(MessageType t) {
  switch (t) {
    case MessageType::pe_indices: return "pe-indices";
    case MessageType::state_request: return "state-request";
    case MessageType::settings: return "settings";
    case MessageType::flips: return "flips";
    case MessageType::permutation_seed: return "permutation-seed";
    case MessageType::estimate: return "estimate";
    case MessageType::reconciliation: return "reconciliation";
    case MessageType::verification_tag: return "verification-tag";
    case MessageType::pa_seed: return "pa-seed";
    case MessageType::abort_notice: return "abort-notice";
  }
  return "unknown";
}

}  // namespace

Json transcript_summary(const ProtocolTranscript& tx) {
  Json s;
  s["record"] = "summary";
  s["aborted"] = tx.aborted;
  s["abort_reason"] = tx.abort_reason;
  s["s_est"] = tx.s_est;
  s["q_est"] = tx.q_est;
  s["mu"] = tx.mu;
  s["y_count"] = tx.y_count;
  s["leak_ec"] = tx.leak_ec;
  s["final_length"] = tx.final_length;
  s["asymptotic_length"] = tx.asymptotic_length;
  s["psk_consumed"] = tx.psk_consumed;
  s["keys_equal"] = tx.alice_key == tx.bob_key;
  s["alice_key_hex"] = bits_to_hex(tx.alice_key);
  s["bob_key_hex"] = bits_to_hex(tx.bob_key);
  return s;
}

std::string transcript_to_jsonl(const ProtocolTranscript& tx) {
  std::ostringstream out;
  for (const auto& msg : tx.messages) {
    Json line;
    line["record"] = "message";
    line["sender"] = msg.sender;
    line["type"] = static_cast<int>(msg.type);
    line["type_name"] = message_type_name(msg.type);
    line["confidential"] = msg.confidential;
    line["frame_hex"] = hex_bytes(encode_frame(msg));
    out << line.dump() << '\n';
  }
  for (const auto& t : tx.trials) {
    Json line;
    line["record"] = "trial";
    line["index"] = t.index;
    line["role"] = t.estimation ? "estimation" : "key";
    line["a"] = t.a;
    line["b"] = t.b;
    line["x"] = t.x;
    line["y"] = t.y;
    line["flip"] = t.flip;
    out << line.dump() << '\n';
  }
  out << transcript_summary(tx).dump() << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Misc
// ---------------------------------------------------------------------------

std::uint64_t fnv1a_digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex_bytes(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

std::string bits_to_hex(const Bits& bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (7 - i % 8));
  }
  return hex_bytes(bytes);
}

}  // namespace diqkd
