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

#include "dialsid/surgery.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

namespace dialsid {
namespace {

constexpr std::string_view kPlaceholder = "{i}";

bool starts_with_any(std::string_view name, const std::vector<std::string>& prefixes) {
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& p) { return name.starts_with(p); });
}

// Layer index encoded in `name` under the template, if any.
std::optional<std::size_t> layer_index(const NamingScheme& scheme, std::string_view name) {
  const auto at = scheme.layer_template.find(kPlaceholder);
  const std::string_view before = std::string_view(scheme.layer_template).substr(0, at);
  const std::string_view after = std::string_view(scheme.layer_template).substr(at + kPlaceholder.size());
  if (!name.starts_with(before)) return std::nullopt;
  std::string_view rest = name.substr(before.size());
  std::size_t digits = 0;
  while (digits < rest.size() && std::isdigit(static_cast<unsigned char>(rest[digits]))) ++digits;
  if (digits == 0) return std::nullopt;
  // No leading zeros: "01" is not layer 1.
  if (digits > 1 && rest[0] == '0') return std::nullopt;
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + digits, index);
  if (ec != std::errc()) return std::nullopt;
  rest = rest.substr(digits);
  if (!rest.starts_with(after)) return std::nullopt;
  return index;
}

void check_pair(const TensorEntry& base, const TensorEntry* source, const std::string& source_path) {
  if (!source) {
    throw SurgeryError(fmt::format("tensor '{}' missing from '{}'", base.name, source_path));
  }
  if (source->dtype != base.dtype) {
    throw SurgeryError(fmt::format("tensor '{}': dtype {} vs {}", base.name, dtype_name(base.dtype),
                                   dtype_name(source->dtype)));
  }
  if (source->shape != base.shape) {
    throw SurgeryError(fmt::format("tensor '{}': shape mismatch", base.name));
  }
}

}  // namespace

void NamingScheme::validate() const {
  const auto first = layer_template.find(kPlaceholder);
  if (first == std::string::npos || layer_template.find(kPlaceholder, first + 1) != std::string::npos) {
    throw std::invalid_argument("layer_template must contain exactly one '{i}' placeholder");
  }
  if (num_layers == 0) throw std::invalid_argument("num_layers must be positive");
  for (const auto* list : {&embeddings_prefixes, &head_prefixes}) {
    for (const auto& p : *list) {
      if (p.empty()) throw std::invalid_argument("group prefixes must be non-empty");
    }
  }
}

NamingScheme naming_scheme_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("naming scheme must be a JSON object");
  NamingScheme s;
  for (const auto& [key, value] : j.items()) {
    if (key == "embeddings_prefixes") {
      s.embeddings_prefixes = value.get<std::vector<std::string>>();
    } else if (key == "layer_template") {
      s.layer_template = value.get<std::string>();
    } else if (key == "head_prefixes") {
      s.head_prefixes = value.get<std::vector<std::string>>();
    } else if (key == "num_layers") {
      s.num_layers = value.get<std::size_t>();
    } else {
      throw std::invalid_argument("unknown naming scheme key '" + key + "'");
    }
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const NamingScheme& s) {
  return {{"embeddings_prefixes", s.embeddings_prefixes},
          {"layer_template", s.layer_template},
          {"head_prefixes", s.head_prefixes},
          {"num_layers", s.num_layers}};
}

std::string LayerGroup::id() const {
  switch (kind) {
    case Kind::kEmbeddings: return "embeddings";
    case Kind::kHeads: return "heads";
    case Kind::kLayer: return "layer." + std::to_string(layer);
  }
  return "unknown";
}

LayerGroup parse_layer_group(std::string_view text) {
  if (text == "embeddings") return LayerGroup::embeddings();
  if (text == "heads") return LayerGroup::heads();
  if (text.starts_with("layer.")) text.remove_prefix(6);
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("bad layer group '" + std::string(text) + "'");
  }
  return LayerGroup::encoder_layer(index);
}

std::optional<LayerGroup> classify(const NamingScheme& scheme, std::string_view name) {
  std::optional<LayerGroup> found;
  auto assign = [&](LayerGroup g) {
    if (found) {
      throw SurgeryError(fmt::format("tensor '{}' matches both {} and {}", name, found->id(), g.id()));
    }
    found = g;
  };
  if (starts_with_any(name, scheme.embeddings_prefixes)) assign(LayerGroup::embeddings());
  if (starts_with_any(name, scheme.head_prefixes)) assign(LayerGroup::heads());
  if (auto i = layer_index(scheme, name); i && *i < scheme.num_layers) {
    assign(LayerGroup::encoder_layer(*i));
  }
  return found;
}

std::vector<std::string> layer_group(const NamingScheme& scheme, const LayerGroup& group,
                                     std::span<const std::string> names) {
  if (group.kind == LayerGroup::Kind::kLayer && group.layer >= scheme.num_layers) {
    throw SurgeryError(fmt::format("layer {} out of range for a {}-layer scheme", group.layer,
                                   scheme.num_layers));
  }
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (classify(scheme, n) == group) out.push_back(n);
  }
  if (out.empty()) {
    throw SurgeryError(fmt::format("group {} matches no tensor; check the naming scheme", group.id()));
  }
  return out;
}

GroupCoverage group_coverage(const NamingScheme& scheme, std::span<const std::string> names) {
  GroupCoverage c;
  for (const auto& n : names) {
    if (auto g = classify(scheme, n)) {
      c.groups[g->id()].push_back(n);
    } else {
      c.unassigned.push_back(n);
    }
  }
  return c;
}

CheckpointPlan splice(const CheckpointFile& base, const CheckpointFile& source,
                      std::span<const LayerGroup> groups, const NamingScheme& scheme) {
  scheme.validate();
  const auto names = base.index().names();
  std::set<std::string> selected;
  for (const auto& g : groups) {
    for (auto& n : layer_group(scheme, g, names)) selected.insert(std::move(n));
  }

  CheckpointPlan plan = plan_from(base);
  for (auto& t : plan.tensors) {
    if (!selected.contains(t.name)) continue;
    const auto& slice = std::get<FileSlice>(t.data);
    const TensorEntry* replacement = source.index().find(t.name);
    check_pair(*slice.entry, replacement, source.path());
    t.data = FileSlice{&source, replacement};
  }
  return plan;
}

CheckpointPlan revert_layers(const CheckpointFile& finetuned, const CheckpointFile& pretrained,
                             std::span<const LayerGroup> groups, const NamingScheme& scheme) {
  return splice(finetuned, pretrained, groups, scheme);
}

CheckpointPlan swap_layers(const CheckpointFile& recipient, const CheckpointFile& donor,
                           std::span<const std::size_t> layers, bool include_embeddings,
                           const NamingScheme& scheme) {
  std::vector<LayerGroup> groups;
  if (include_embeddings) groups.push_back(LayerGroup::embeddings());
  for (auto i : layers) groups.push_back(LayerGroup::encoder_layer(i));
  return splice(recipient, donor, groups, scheme);
}

std::vector<std::vector<LayerGroup>> sequential_layer_pairs(std::size_t num_layers) {
  std::vector<std::vector<LayerGroup>> pairs;
  for (std::size_t i = 0; i + 1 < num_layers; ++i) {
    pairs.push_back({LayerGroup::encoder_layer(i), LayerGroup::encoder_layer(i + 1)});
  }
  return pairs;
}

Eigen::ArrayXd decode_floats(std::span<const std::byte> bytes, DType dtype) {
  auto map = [&]<typename Scalar>(Scalar) {
    const auto n = static_cast<Eigen::Index>(bytes.size() / sizeof(Scalar));
    Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>, Eigen::Unaligned> view(
        reinterpret_cast<const Scalar*>(bytes.data()), n);
    if constexpr (std::is_same_v<Scalar, double>) {
      return Eigen::ArrayXd(view);
    } else if constexpr (std::is_same_v<Scalar, float>) {
      return Eigen::ArrayXd(view.template cast<double>());
    } else {
      return Eigen::ArrayXd(view.template cast<float>().template cast<double>());
    }
  };
  switch (dtype) {
    case DType::kF64: return map(double{});
    case DType::kF32: return map(float{});
    case DType::kF16: return map(Eigen::half{});
    case DType::kBF16: return map(Eigen::bfloat16{});
    default:
      throw SurgeryError(fmt::format("MAV needs a floating-point dtype, got {}", dtype_name(dtype)));
  }
}

MavReport mav_report(const CheckpointFile& a, const CheckpointFile& b, const NamingScheme& scheme) {
  scheme.validate();
  const auto& ia = a.index();
  const auto& ib = b.index();
  if (ia.entries.size() != ib.entries.size()) {
    throw SurgeryError(fmt::format("'{}' has {} tensors, '{}' has {}", a.path(), ia.entries.size(),
                                   b.path(), ib.entries.size()));
  }

  struct Accum {
    double abs_sum = 0.0;
    std::uint64_t count = 0;
  };
  std::map<std::string, Accum> groups;
  // Running mean and sum of squared deviations, merged per tensor.
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t total = 0;
  double abs_total = 0.0;

  for (const auto& ea : ia.entries) {
    const TensorEntry* eb = ib.find(ea.name);
    check_pair(ea, eb, b.path());
    const auto g = classify(scheme, ea.name);
    const std::string key = g ? g->id() : "other";
    auto& acc = groups[key];
    if (ea.element_count() == 0) continue;

    const Eigen::ArrayXd diff = decode_floats(a.read(ea), ea.dtype) - decode_floats(b.read(*eb), eb->dtype);
    const auto n = static_cast<std::uint64_t>(diff.size());
    const double abs_sum = diff.abs().sum();
    acc.abs_sum += abs_sum;
    acc.count += n;
    abs_total += abs_sum;

    const double t_mean = diff.mean();
    const double t_m2 = (diff - t_mean).square().sum();
    const double delta = t_mean - mean;
    const auto merged = total + n;
    mean += delta * static_cast<double>(n) / static_cast<double>(merged);
    m2 += t_m2 + delta * delta * static_cast<double>(total) * static_cast<double>(n) /
                     static_cast<double>(merged);
    total = merged;
  }

  MavReport r;
  for (const auto& [key, acc] : groups) {
    r.per_group[key] = MavGroup{acc.count ? acc.abs_sum / static_cast<double>(acc.count) : 0.0, acc.count};
  }
  r.parameters = total;
  if (total > 0) {
    r.global_mav = abs_total / static_cast<double>(total);
    r.global_mean = mean;
    r.global_variance = m2 / static_cast<double>(total);
  }
  return r;
}

}  // namespace dialsid
