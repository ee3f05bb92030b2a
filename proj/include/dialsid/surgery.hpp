// Copyright 2026 The dialsid Authors.
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

// Layer-level checkpoint surgery: reverting fine-tuned layers to their
// pretrained values, splicing layers of one fine-tuned model into another,
// and per-layer mean absolute parameter differences (MAV).
//
// Tensors are assigned to groups by name through a NamingScheme. Splicing
// copies bytes verbatim and never converts or averages values.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "dialsid/checkpoint.hpp"

namespace dialsid {

class SurgeryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamingScheme {
  std::vector<std::string> embeddings_prefixes{"embeddings."};
  // Exactly one "{i}" placeholder.
  std::string layer_template = "encoder.layer.{i}.";
  std::vector<std::string> head_prefixes{"classifier.", "intent_classifier.", "slot_classifier."};
  std::size_t num_layers = 12;

  void validate() const;
};

// Keys: embeddings_prefixes, layer_template, head_prefixes, num_layers.
// Missing keys keep their defaults; unknown keys are rejected.
NamingScheme naming_scheme_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NamingScheme& s);

struct LayerGroup {
  enum class Kind { kEmbeddings, kLayer, kHeads };
  Kind kind = Kind::kLayer;
  std::size_t layer = 0;

  static LayerGroup embeddings() { return {Kind::kEmbeddings, 0}; }
  static LayerGroup heads() { return {Kind::kHeads, 0}; }
  static LayerGroup encoder_layer(std::size_t i) { return {Kind::kLayer, i}; }

  // "embeddings", "heads", "layer.<i>"
  std::string id() const;
  friend bool operator==(const LayerGroup&, const LayerGroup&) = default;
  friend auto operator<=>(const LayerGroup&, const LayerGroup&) = default;
};

// Accepts "embeddings", "heads", "<i>" or "layer.<i>".
LayerGroup parse_layer_group(std::string_view text);

// Group of a tensor name, or nullopt if it belongs to none. Layer matching is
// delimiter aware: layer 1 never captures "encoder.layer.10.".
std::optional<LayerGroup> classify(const NamingScheme& scheme, std::string_view name);

// Names in `names` that belong to `group`. Throws SurgeryError if none do or
// the layer index is out of range.
std::vector<std::string> layer_group(const NamingScheme& scheme, const LayerGroup& group,
                                     std::span<const std::string> names);

struct GroupCoverage {
  std::map<std::string, std::vector<std::string>> groups;  // by LayerGroup::id()
  std::vector<std::string> unassigned;
};

GroupCoverage group_coverage(const NamingScheme& scheme, std::span<const std::string> names);

// Output = `base` with every tensor in `groups` replaced by the bytes of the
// same-named tensor in `source`. Metadata and tensor order follow `base`.
CheckpointPlan splice(const CheckpointFile& base, const CheckpointFile& source,
                      std::span<const LayerGroup> groups, const NamingScheme& scheme);

CheckpointPlan revert_layers(const CheckpointFile& finetuned, const CheckpointFile& pretrained,
                             std::span<const LayerGroup> groups, const NamingScheme& scheme);

// Heads are never swapped.
CheckpointPlan swap_layers(const CheckpointFile& recipient, const CheckpointFile& donor,
                           std::span<const std::size_t> layers, bool include_embeddings,
                           const NamingScheme& scheme);

// Sequential layer pairs (0,1), (1,2), ... used by the reverting ablation.
std::vector<std::vector<LayerGroup>> sequential_layer_pairs(std::size_t num_layers);

struct MavGroup {
  double mav = 0.0;
  std::uint64_t parameters = 0;
};

struct MavReport {
  // Keyed by LayerGroup::id(); "other" collects unassigned tensors.
  std::map<std::string, MavGroup> per_group;
  std::uint64_t parameters = 0;
  double global_mav = 0.0;
  double global_mean = 0.0;
  double global_variance = 0.0;  // population variance of a_i - b_i
};

// Element values of a floating-point tensor widened to double.
Eigen::ArrayXd decode_floats(std::span<const std::byte> bytes, DType dtype);

// Streaming: one tensor pair is resident at a time. Throws SurgeryError when
// names, dtypes or shapes differ, or a dtype is not F16/BF16/F32/F64.
MavReport mav_report(const CheckpointFile& a, const CheckpointFile& b, const NamingScheme& scheme);

}  // namespace dialsid
