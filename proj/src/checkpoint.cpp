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

#include "dialsid/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

namespace dialsid {
namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

constexpr std::string_view kMetadataKey = "__metadata__";
constexpr std::uint64_t kMaxHeaderSize = 100ull << 20;
constexpr std::size_t kCopyChunk = 1 << 20;

struct DTypeInfo {
  DType type;
  std::string_view name;
  std::size_t size;
};

constexpr std::array<DTypeInfo, 15> kDTypes{{
    {DType::kF64, "F64", 8},      {DType::kF32, "F32", 4},      {DType::kF16, "F16", 2},
    {DType::kBF16, "BF16", 2},    {DType::kF8E4M3, "F8_E4M3", 1}, {DType::kF8E5M2, "F8_E5M2", 1},
    {DType::kI64, "I64", 8},      {DType::kI32, "I32", 4},      {DType::kI16, "I16", 2},
    {DType::kI8, "I8", 1},        {DType::kU64, "U64", 8},      {DType::kU32, "U32", 4},
    {DType::kU16, "U16", 2},      {DType::kU8, "U8", 1},        {DType::kBool, "BOOL", 1},
}};

const DTypeInfo& info(DType t) {
  for (const auto& d : kDTypes) {
    if (d.type == t) return d;
  }
  throw std::logic_error("unhandled dtype");
}

std::uint64_t checked_product(const std::vector<std::uint64_t>& shape, std::size_t elem,
                              std::string_view name) {
  std::uint64_t n = elem;
  for (auto d : shape) {
    if (d != 0 && n > UINT64_MAX / d) {
      throw CheckpointFormatError(fmt::format("tensor '{}': shape overflows", name));
    }
    n *= d;
  }
  return n;
}

std::uint64_t file_size(const std::string& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot stat '{}': {}", path, ec.message()));
  return size;
}

}  // namespace

std::size_t dtype_size(DType t) { return info(t).size; }
std::string_view dtype_name(DType t) { return info(t).name; }

DType parse_dtype(std::string_view tag) {
  for (const auto& d : kDTypes) {
    if (d.name == tag) return d.type;
  }
  throw CheckpointFormatError(fmt::format("unknown dtype '{}'", tag));
}

std::uint64_t TensorEntry::element_count() const {
  return checked_product(shape, 1, name);
}

const TensorEntry* CheckpointIndex::find(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::vector<std::string> CheckpointIndex::names() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.name);
  return out;
}

CheckpointIndex parse_checkpoint_header(std::string_view text, std::uint64_t data_size) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointFormatError(fmt::format("malformed header JSON: {}", e.what()));
  }
  if (!header.is_object()) throw CheckpointFormatError("header is not a JSON object");

  CheckpointIndex index;
  for (const auto& [key, value] : header.items()) {
    if (key == kMetadataKey) {
      if (!value.is_object()) throw CheckpointFormatError("__metadata__ must be an object");
      for (const auto& [mk, mv] : value.items()) {
        if (!mv.is_string()) {
          throw CheckpointFormatError(fmt::format("metadata value for '{}' is not a string", mk));
        }
        index.metadata.emplace(mk, mv.get<std::string>());
      }
      continue;
    }
    if (!value.is_object()) {
      throw CheckpointFormatError(fmt::format("entry '{}' is not an object", key));
    }
    TensorEntry e;
    e.name = key;
    bool has_dtype = false, has_shape = false, has_offsets = false;
    for (const auto& [field, v] : value.items()) {
      if (field == "dtype" && v.is_string()) {
        e.dtype = parse_dtype(v.get<std::string>());
        has_dtype = true;
      } else if (field == "shape" && v.is_array()) {
        for (const auto& d : v) {
          if (!d.is_number_unsigned()) {
            throw CheckpointFormatError(fmt::format("tensor '{}': bad shape", key));
          }
          e.shape.push_back(d.get<std::uint64_t>());
        }
        has_shape = true;
      } else if (field == "data_offsets" && v.is_array() && v.size() == 2 &&
                 v[0].is_number_unsigned() && v[1].is_number_unsigned()) {
        e.begin = v[0].get<std::uint64_t>();
        e.end = v[1].get<std::uint64_t>();
        has_offsets = true;
      } else {
        throw CheckpointFormatError(fmt::format("tensor '{}': bad field '{}'", key, field));
      }
    }
    if (!has_dtype || !has_shape || !has_offsets) {
      throw CheckpointFormatError(fmt::format("tensor '{}': missing dtype, shape or data_offsets", key));
    }
    if (e.end < e.begin) {
      throw CheckpointFormatError(fmt::format("tensor '{}': data_offsets reversed", key));
    }
    const auto expected = checked_product(e.shape, dtype_size(e.dtype), key);
    if (e.byte_size() != expected) {
      throw CheckpointFormatError(fmt::format("tensor '{}': {} bytes for dtype {} and shape needing {}",
                                              key, e.byte_size(), dtype_name(e.dtype), expected));
    }
    if (e.end > data_size) {
      throw CheckpointFormatError(fmt::format("tensor '{}': data truncated (ends at {}, data region {})",
                                              key, e.end, data_size));
    }
    index.entries.push_back(std::move(e));
  }

  std::sort(index.entries.begin(), index.entries.end(), [](const TensorEntry& a, const TensorEntry& b) {
    return std::tie(a.begin, a.end, a.name) < std::tie(b.begin, b.end, b.name);
  });
  for (std::size_t i = 1; i < index.entries.size(); ++i) {
    const auto& prev = index.entries[i - 1];
    const auto& cur = index.entries[i];
    if (cur.begin < prev.end) {
      throw CheckpointFormatError(fmt::format("tensors '{}' and '{}' overlap", prev.name, cur.name));
    }
  }
  return index;
}

CheckpointFile CheckpointFile::open(const std::string& path) {
  const auto size = file_size(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  if (size < 8) throw CheckpointFormatError(fmt::format("'{}': shorter than the 8-byte header length", path));
  std::array<unsigned char, 8> raw{};
  in.read(reinterpret_cast<char*>(raw.data()), 8);
  std::uint64_t n = 0;
  for (int i = 7; i >= 0; --i) n = (n << 8) | raw[static_cast<std::size_t>(i)];
  if (n > size - 8) {
    throw CheckpointFormatError(fmt::format("'{}': header length {} exceeds file size {}", path, n, size));
  }
  if (n > kMaxHeaderSize) throw CheckpointFormatError(fmt::format("'{}': header too large", path));
  std::string json(n, '\0');
  in.read(json.data(), static_cast<std::streamsize>(n));
  if (!in) throw CheckpointFormatError(fmt::format("'{}': short read in header", path));

  CheckpointFile f;
  f.path_ = path;
  f.data_offset_ = 8 + n;
  try {
    f.index_ = parse_checkpoint_header(json, size - f.data_offset_);
  } catch (const CheckpointFormatError& e) {
    throw CheckpointFormatError(fmt::format("'{}': {}", path, e.what()));
  }
  return f;
}

std::vector<std::byte> CheckpointFile::read(const TensorEntry& entry) const {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path_));
  std::vector<std::byte> out(entry.byte_size());
  in.seekg(static_cast<std::streamoff>(data_offset_ + entry.begin));
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!in) throw CheckpointFormatError(fmt::format("'{}': short read for '{}'", path_, entry.name));
  return out;
}

std::vector<std::byte> CheckpointFile::read(std::string_view name) const {
  const auto* e = index_.find(name);
  if (!e) throw std::out_of_range(fmt::format("'{}': no tensor named '{}'", path_, name));
  return read(*e);
}

std::uint64_t PlannedTensor::byte_size() const {
  if (const auto* bytes = std::get_if<std::vector<std::byte>>(&data)) return bytes->size();
  return std::get<FileSlice>(data).entry->byte_size();
}

CheckpointPlan plan_from(const CheckpointFile& file) {
  CheckpointPlan plan;
  plan.metadata = file.index().metadata;
  for (const auto& e : file.index().entries) {
    plan.tensors.push_back(PlannedTensor{e.name, e.dtype, e.shape, FileSlice{&file, &e}});
  }
  return plan;
}

void write_checkpoint(const CheckpointPlan& plan, const std::string& path) {
  nlohmann::json header = nlohmann::json::object();
  std::set<std::string_view> seen;
  std::uint64_t offset = 0;
  for (const auto& t : plan.tensors) {
    if (t.name == kMetadataKey) throw CheckpointFormatError("tensor name '__metadata__' is reserved");
    if (!seen.insert(t.name).second) {
      throw CheckpointFormatError(fmt::format("duplicate tensor name '{}'", t.name));
    }
    const auto expected = checked_product(t.shape, dtype_size(t.dtype), t.name);
    if (t.byte_size() != expected) {
      throw CheckpointFormatError(fmt::format("tensor '{}': {} bytes but dtype and shape need {}",
                                              t.name, t.byte_size(), expected));
    }
    header[t.name] = {{"dtype", std::string(dtype_name(t.dtype))},
                      {"shape", t.shape},
                      {"data_offsets", {offset, offset + expected}}};
    offset += expected;
  }
  if (!plan.metadata.empty()) header[std::string(kMetadataKey)] = plan.metadata;

  std::string json = header.dump();
  json.append((8 - json.size() % 8) % 8, ' ');

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp));
    std::array<char, 8> len{};
    std::uint64_t n = json.size();
    for (std::size_t i = 0; i < 8; ++i) len[i] = static_cast<char>((n >> (8 * i)) & 0xFF);
    out.write(len.data(), 8);
    out.write(json.data(), static_cast<std::streamsize>(json.size()));

    std::vector<char> buffer;
    for (const auto& t : plan.tensors) {
      if (const auto* bytes = std::get_if<std::vector<std::byte>>(&t.data)) {
        out.write(reinterpret_cast<const char*>(bytes->data()), static_cast<std::streamsize>(bytes->size()));
        continue;
      }
      const auto& slice = std::get<FileSlice>(t.data);
      std::ifstream in(slice.file->path(), std::ios::binary);
      if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", slice.file->path()));
      in.seekg(static_cast<std::streamoff>(slice.file->data_offset() + slice.entry->begin));
      std::uint64_t remaining = slice.entry->byte_size();
      buffer.resize(static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kCopyChunk)));
      while (remaining > 0) {
        const auto chunk = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kCopyChunk));
        in.read(buffer.data(), static_cast<std::streamsize>(chunk));
        if (!in) {
          throw CheckpointFormatError(fmt::format("'{}': short read for '{}'", slice.file->path(),
                                                  slice.entry->name));
        }
        out.write(buffer.data(), static_cast<std::streamsize>(chunk));
        remaining -= chunk;
      }
    }
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", tmp));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace dialsid
