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
#include <string_view>
#include <utility>

#include <json.hpp>

#include "diqkd/linalg.hpp"
#include "diqkd/protocol.hpp"

namespace diqkd {

// Field order in files is meaningful for byte-identical output, so the
// ordered variant is used everywhere.
using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Matrices and observables
// ---------------------------------------------------------------------------

// Wire format: {"dim": d, "entries": [[re, im], ...]} in row-major order.
Json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// A state source is either a preset name (phi-plus, maximally-mixed,
// classical-z, werner:<v>) or a path to a matrix JSON file.
DensityOperator load_state(const std::string& source);

// Observable pair file: {"a0": <matrix>, "a1": <matrix>}.
std::pair<BinaryObservable, BinaryObservable> load_observable_pair(
    const std::string& path);

// ---------------------------------------------------------------------------
// Simulation configs
// ---------------------------------------------------------------------------

struct SimulationSetup {
  ProtocolConfig config;
  std::unique_ptr<DeviceModel> device;
  std::string device_label;  // the "kind" string from the config file
};

// Parses a config file holding the ProtocolConfig fields plus a "device"
// object; unknown fields are rejected at both levels.
SimulationSetup load_simulation_config(const std::string& path);
SimulationSetup simulation_setup_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Transcript serialization
// ---------------------------------------------------------------------------

// One JSON object per line: message records, trial records, then a summary
// record.
std::string transcript_to_jsonl(const ProtocolTranscript& tx);
Json transcript_summary(const ProtocolTranscript& tx);

// ---------------------------------------------------------------------------
// Misc
// ---------------------------------------------------------------------------

std::uint64_t fnv1a_digest(std::string_view bytes);
std::string hex_bytes(const std::vector<std::uint8_t>& bytes);
std::string bits_to_hex(const Bits& bits);  // MSB-first packing, then hex

}  // namespace diqkd
