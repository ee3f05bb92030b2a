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

// BIO-annotated slot/intent corpora: reading, writing, validation, span
// extraction, label inventories and dev/train splitting.
//
// On-disk layout is CoNLL-like. Utterances are blank-line separated blocks;
// each block has "# key: value" comment lines followed by one tab-separated
// line per token:
//
//   # id: 1
//   # intent: reminder/set_reminder
//   minn	O
//   mæ	O
//
// Recognized comment keys are id, text, intent and variety. Other comments
// are kept in order and written back after the recognized ones.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dialsid {

struct Span {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::string label;

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct Utterance {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> slot_tags;
  std::string intent;
  std::optional<std::string> variety;
  std::optional<std::string> raw_text;
  // Unrecognized comment lines without the leading "# ", in file order.
  std::vector<std::string> comments;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Dataset {
  std::string name;
  std::vector<Utterance> utterances;

  std::size_t size() const { return utterances.size(); }
  bool empty() const { return utterances.empty(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Column mapping and metadata handling for the block format.
struct FormatOptions {
  std::size_t token_column = 0;
  std::size_t tag_column = 1;
  // If set, the intent is also read from (and written to) this column.
  std::optional<std::size_t> intent_column;
  // If set, this column holds the 1-based token index.
  std::optional<std::size_t> index_column;
  bool require_intent = true;
  // Variety assigned to utterances without a "# variety:" comment.
  std::optional<std::string> default_variety;

  // Layout of the released xSID files: index, token, intent, slot.
  static FormatOptions xsid();
  std::size_t column_count() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string detail, const std::string& source = {});
  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

Dataset parse_dataset(std::istream& in, const FormatOptions& options = {},
                      std::string name = {});
Dataset parse_dataset(std::string_view text, const FormatOptions& options = {},
                      std::string name = {});
// Reads a file; the dataset name is the file stem.
Dataset read_dataset(const std::string& path, const FormatOptions& options = {});

void write_dataset(const Dataset& d, std::ostream& out, const FormatOptions& options = {});
std::string write_dataset(const Dataset& d, const FormatOptions& options = {});
void write_dataset_file(const Dataset& d, const std::string& path,
                        const FormatOptions& options = {});

// ---------------------------------------------------------------------------
// BIO tags

enum class TagPrefix : char { kOutside = 'O', kBegin = 'B', kInside = 'I' };

struct Tag {
  TagPrefix prefix = TagPrefix::kOutside;
  std::string_view label;  // empty for O
};

// nullopt for anything other than O, B-<label>, I-<label> with non-empty label.
std::optional<Tag> parse_tag(std::string_view tag);

enum class BioViolationKind { kInsideWithoutBegin, kInsideLabelMismatch, kMalformedTag };

std::string_view to_string(BioViolationKind kind);

struct BioViolation {
  std::string utterance_id;
  std::size_t position = 0;
  BioViolationKind kind = BioViolationKind::kMalformedTag;
  std::string detail;

  friend bool operator==(const BioViolation&, const BioViolation&) = default;
};

std::vector<BioViolation> validate_bio(std::span<const std::string> tags,
                                       std::string_view utterance_id = {});
std::vector<BioViolation> validate_bio(const Utterance& u);

enum class RepairPolicy { kStrict, kLenient };

class BioError : public std::runtime_error {
 public:
  explicit BioError(BioViolation violation);
  const BioViolation& violation() const { return violation_; }

 private:
  BioViolation violation_;
};

// Maximal BIO runs as half-open spans, sorted by start. Under the lenient
// policy a stray I-X opens a new span and malformed tags count as O; under
// the strict policy any violation throws BioError.
std::vector<Span> extract_spans(std::span<const std::string> tags,
                                RepairPolicy repair = RepairPolicy::kStrict);

// Inverse of extract_spans for well-formed sequences.
std::vector<std::string> tags_from_spans(std::span<const Span> spans, std::size_t length);

// ---------------------------------------------------------------------------
// Inventories

using LabelCounts = std::map<std::string, std::size_t>;

struct LabelInventory {
  std::size_t utterances = 0;
  std::size_t tokens = 0;
  LabelCounts intents;
  LabelCounts slot_labels;  // label part only, B/I merged; counted per span
  LabelCounts full_tags;    // B-x / I-x occurrences; O and malformed tags excluded
  LabelCounts varieties;
};

LabelInventory label_inventory(const Dataset& d);

// Labels present in `eval` but absent from `train`, with their counts in eval.
struct UnseenReport {
  LabelCounts intents;
  LabelCounts slot_labels;
  LabelCounts full_tags;
};

UnseenReport unseen_label_report(const Dataset& train, const Dataset& eval);

// ---------------------------------------------------------------------------
// Splitting

enum class SplitStrategy { kUniform, kGrouped };

struct SplitOptions {
  double ratio = 0.9;
  std::uint64_t seed = 0;
  SplitStrategy strategy = SplitStrategy::kUniform;
  // Grouped strategy: the group key is the id prefix before this delimiter.
  std::string group_delimiter = "-";
};

// Group key of an utterance id, or nullopt when the delimiter is missing.
std::optional<std::string> group_key(std::string_view id, std::string_view delimiter);

// Partitions d into (first, second). The uniform strategy puts exactly
// round_half_up(ratio * N) utterances in the first part. The grouped strategy
// keeps whole groups together and fills the first part up to that target
// without exceeding it. Both parts keep the input order.
std::pair<Dataset, Dataset> split_dataset(const Dataset& d, const SplitOptions& options);

// Throws std::invalid_argument on duplicate ids.
void check_unique_ids(const Dataset& d);

}  // namespace dialsid
