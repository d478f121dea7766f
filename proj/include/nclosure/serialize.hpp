// Copyright 2026 The nclosure Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Self-describing text format for network weights and closure models.
//
// A network dump is a JSON object with format tag "nclosure.dense_net.v1":
// input width, per-layer width and activation, flat row-major weights,
// prune mask, output scale, optional output map and tied-row constraints.
// Doubles are written in shortest round-trip form, so a dump and reload is
// bit-exact.

#ifndef NCLOSURE_SERIALIZE_HPP
#define NCLOSURE_SERIALIZE_HPP

#include <string>

#include "nclosure/forward.hpp"
#include "nclosure/nets.hpp"

namespace nclosure {

inline constexpr const char* kNetFormat = "nclosure.dense_net.v1";
inline constexpr const char* kClosureFormat = "nclosure.closure.v1";

std::string dense_net_to_text(const DenseNet& net);
DenseNet dense_net_from_text(const std::string& text);

/// Markovian and memory terms (library and network) plus tau. Base terms
/// and the Smagorinsky coefficient are configuration, not weights.
std::string closure_to_text(const ClosureModel& model);

/// Replaces the closure terms and tau of `model` with those in `text`.
void closure_from_text(const std::string& text, ClosureModel& model);

void save_closure(const std::string& path, const ClosureModel& model);
void load_closure(const std::string& path, ClosureModel& model);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace nclosure

#endif  // NCLOSURE_SERIALIZE_HPP
