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

// Named-tensor checkpoint container, byte compatible with safetensors:
//
//   [8 bytes]  little-endian u64 N
//   [N bytes]  JSON: {"<name>": {"dtype": "F32", "shape": [..],
//                                "data_offsets": [begin, end]}, ...,
//                     "__metadata__": {"k": "v"}}
//   [rest]     data region; offsets are relative to its start
//
// Files written here are canonical: header keys sorted, compact JSON padded
// with spaces to an 8-byte boundary, tensor data contiguous in index order.
// Reading and rewriting a canonical file reproduces it byte for byte.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dialsid {

enum class DType { kF64, kF32, kF16, kBF16, kF8E4M3, kF8E5M2, kI64, kI32, kI16, kI8, kU64, kU32, kU16, kU8, kBool };

std::size_t dtype_size(DType t);
std::string_view dtype_name(DType t);
// Throws CheckpointFormatError for unknown tags.
DType parse_dtype(std::string_view tag);

class CheckpointFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TensorEntry {
  std::string name;
  DType dtype = DType::kF32;
  std::vector<std::uint64_t> shape;
  std::uint64_t begin = 0;  // relative to the data region
  std::uint64_t end = 0;

  std::uint64_t element_count() const;
  std::uint64_t byte_size() const { return end - begin; }
  friend bool operator==(const TensorEntry&, const TensorEntry&) = default;
};

struct CheckpointIndex {
  // Sorted by data offset.
  std::vector<TensorEntry> entries;
  std::map<std::string, std::string> metadata;

  const TensorEntry* find(std::string_view name) const;
  std::vector<std::string> names() const;
  friend bool operator==(const CheckpointIndex&, const CheckpointIndex&) = default;
};

// Parses and validates a header. `data_size` is the length of the data region.
CheckpointIndex parse_checkpoint_header(std::string_view json, std::uint64_t data_size);

// Read-only handle on a checkpoint file. Only the header is loaded; tensor
// bytes are read on demand. Each read opens its own stream, so a handle can be
// shared between threads.
class CheckpointFile {
 public:
  static CheckpointFile open(const std::string& path);

  const std::string& path() const { return path_; }
  const CheckpointIndex& index() const { return index_; }
  std::uint64_t data_offset() const { return data_offset_; }

  std::vector<std::byte> read(const TensorEntry& entry) const;
  std::vector<std::byte> read(std::string_view name) const;

 private:
  std::string path_;
  CheckpointIndex index_;
  std::uint64_t data_offset_ = 0;
};

inline CheckpointFile read_checkpoint(const std::string& path) { return CheckpointFile::open(path); }

// Bytes of one tensor taken from an open checkpoint.
struct FileSlice {
  const CheckpointFile* file = nullptr;
  const TensorEntry* entry = nullptr;
};

struct PlannedTensor {
  std::string name;
  DType dtype = DType::kF32;
  std::vector<std::uint64_t> shape;
  std::variant<std::vector<std::byte>, FileSlice> data;

  std::uint64_t byte_size() const;
};

// What write_checkpoint lays out: tensors in order plus metadata.
struct CheckpointPlan {
  std::vector<PlannedTensor> tensors;
  std::map<std::string, std::string> metadata;
};

// Plan that reproduces `file` unchanged.
CheckpointPlan plan_from(const CheckpointFile& file);

// Writes via a temporary file and rename. Throws CheckpointFormatError when a
// tensor's byte count disagrees with dtype and shape, or names repeat.
void write_checkpoint(const CheckpointPlan& plan, const std::string& path);

}  // namespace dialsid
