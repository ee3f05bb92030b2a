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

#include "dialsid/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dialsid/rng.hpp"

namespace dialsid {
namespace {

constexpr std::string_view kCommentPrefix = "# ";

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t begin = 0;
  while (true) {
    const auto tab = line.find('\t', begin);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(begin));
      break;
    }
    cols.push_back(line.substr(begin, tab - begin));
    begin = tab + 1;
  }
  return cols;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

bool has_whitespace(std::string_view s) {
  return s.find_first_of(" \t\n\r\v\f") != std::string_view::npos;
}

struct BlockBuilder {
  Utterance u;
  std::size_t first_line = 0;
  bool has_id = false;
  bool has_intent = false;
  std::optional<std::string> column_intent;

  bool empty() const { return first_line == 0; }
};

}  // namespace

ParseError::ParseError(std::size_t line, std::string detail, const std::string& source)
    : std::runtime_error((source.empty() ? std::string() : source + ":") + "line " +
                         std::to_string(line) + ": " + detail),
      line_(line),
      detail_(std::move(detail)) {}

FormatOptions FormatOptions::xsid() {
  FormatOptions o;
  o.index_column = 0;
  o.token_column = 1;
  o.intent_column = 2;
  o.tag_column = 3;
  return o;
}

std::size_t FormatOptions::column_count() const {
  std::size_t n = std::max(token_column, tag_column) + 1;
  if (intent_column) n = std::max(n, *intent_column + 1);
  if (index_column) n = std::max(n, *index_column + 1);
  return n;
}

Dataset parse_dataset(std::istream& in, const FormatOptions& options, std::string name) {
  Dataset d;
  d.name = std::move(name);
  const std::size_t needed = options.column_count();
  std::unordered_set<std::string> seen_ids;

  BlockBuilder block;
  auto finish = [&] {
    if (block.empty()) return;
    if (block.u.tokens.empty()) {
      throw ParseError(block.first_line, "block has no token lines");
    }
    if (!block.has_intent && block.column_intent) {
      block.u.intent = *block.column_intent;
      block.has_intent = true;
    }
    if (!block.has_intent && options.require_intent) {
      throw ParseError(block.first_line, "missing '# intent:' comment");
    }
    if (!block.has_id) block.u.id = std::to_string(d.utterances.size() + 1);
    if (!block.u.variety) block.u.variety = options.default_variety;
    if (!seen_ids.insert(block.u.id).second) {
      throw ParseError(block.first_line, "duplicate utterance id '" + block.u.id + "'");
    }
    d.utterances.push_back(std::move(block.u));
    block = BlockBuilder{};
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view(line);
    if (is_blank(view)) {
      finish();
      continue;
    }
    if (block.empty()) block.first_line = line_no;

    if (view.starts_with(kCommentPrefix)) {
      const auto body = view.substr(kCommentPrefix.size());
      const auto colon = body.find(": ");
      const auto bare = body.ends_with(":") ? body.substr(0, body.size() - 1) : std::string_view{};
      std::string_view key = colon == std::string_view::npos ? bare : body.substr(0, colon);
      std::string value =
          colon == std::string_view::npos ? std::string() : std::string(body.substr(colon + 2));
      if (key == "id") {
        block.u.id = value;
        block.has_id = true;
      } else if (key == "intent") {
        block.u.intent = value;
        block.has_intent = true;
      } else if (key == "text") {
        block.u.raw_text = value;
      } else if (key == "variety") {
        block.u.variety = value;
      } else {
        block.u.comments.emplace_back(body);
      }
      continue;
    }

    const auto cols = split_tabs(view);
    if (cols.size() < needed) {
      throw ParseError(line_no, "expected at least " + std::to_string(needed) +
                                    " tab-separated columns, found " +
                                    std::to_string(cols.size()));
    }
    const auto token = cols[options.token_column];
    if (token.empty()) throw ParseError(line_no, "empty token");
    if (has_whitespace(token)) throw ParseError(line_no, "token contains whitespace");
    block.u.tokens.emplace_back(token);
    block.u.slot_tags.emplace_back(cols[options.tag_column]);
    if (options.intent_column && !block.column_intent) {
      block.column_intent = std::string(cols[*options.intent_column]);
    }
  }
  finish();
  return d;
}

Dataset parse_dataset(std::string_view text, const FormatOptions& options, std::string name) {
  std::istringstream in{std::string(text)};
  return parse_dataset(in, options, std::move(name));
}

Dataset read_dataset(const std::string& path, const FormatOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return parse_dataset(in, options, std::filesystem::path(path).stem().string());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  }
}

void write_dataset(const Dataset& d, std::ostream& out, const FormatOptions& options) {
  const std::size_t ncols = options.column_count();
  std::vector<std::string> cols(ncols);
  bool first = true;
  for (const auto& u : d.utterances) {
    if (!first) out << '\n';
    first = false;
    out << kCommentPrefix << "id: " << u.id << '\n';
    if (u.raw_text) out << kCommentPrefix << "text: " << *u.raw_text << '\n';
    if (!u.intent.empty() || options.require_intent) {
      out << kCommentPrefix << "intent: " << u.intent << '\n';
    }
    if (u.variety && u.variety != options.default_variety) {
      out << kCommentPrefix << "variety: " << *u.variety << '\n';
    }
    for (const auto& c : u.comments) out << kCommentPrefix << c << '\n';
    for (std::size_t i = 0; i < u.tokens.size(); ++i) {
      std::fill(cols.begin(), cols.end(), "_");
      if (options.index_column) cols[*options.index_column] = std::to_string(i + 1);
      if (options.intent_column) cols[*options.intent_column] = u.intent;
      cols[options.token_column] = u.tokens[i];
      cols[options.tag_column] = i < u.slot_tags.size() ? u.slot_tags[i] : "O";
      for (std::size_t c = 0; c < ncols; ++c) {
        if (c) out << '\t';
        out << cols[c];
      }
      out << '\n';
    }
  }
}

std::string write_dataset(const Dataset& d, const FormatOptions& options) {
  std::ostringstream out;
  write_dataset(d, out, options);
  return out.str();
}

void write_dataset_file(const Dataset& d, const std::string& path, const FormatOptions& options) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_dataset(d, out, options);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------

std::optional<Tag> parse_tag(std::string_view tag) {
  if (tag == "O") return Tag{TagPrefix::kOutside, {}};
  if (tag.size() < 3 || tag[1] != '-') return std::nullopt;
  if (tag[0] == 'B') return Tag{TagPrefix::kBegin, tag.substr(2)};
  if (tag[0] == 'I') return Tag{TagPrefix::kInside, tag.substr(2)};
  return std::nullopt;
}

std::string_view to_string(BioViolationKind kind) {
  switch (kind) {
    case BioViolationKind::kInsideWithoutBegin: return "I-without-B";
    case BioViolationKind::kInsideLabelMismatch: return "I-label-mismatch";
    case BioViolationKind::kMalformedTag: return "malformed-tag";
  }
  return "unknown";
}

namespace {

// Shared scan for validate_bio and extract_spans. `on_violation` returns true
// to continue scanning.
template <typename OnSpan, typename OnViolation>
void scan_bio(std::span<const std::string> tags, std::string_view id, OnSpan&& on_span,
              OnViolation&& on_violation) {
  std::optional<Span> open;
  auto close = [&](std::size_t at) {
    if (open) {
      open->end = at;
      on_span(std::move(*open));
      open.reset();
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto tag = parse_tag(tags[i]);
    if (!tag) {
      if (!on_violation(BioViolation{std::string(id), i, BioViolationKind::kMalformedTag,
                                     "malformed tag '" + tags[i] + "'"})) {
        return;
      }
      close(i);
      continue;
    }
    switch (tag->prefix) {
      case TagPrefix::kOutside:
        close(i);
        break;
      case TagPrefix::kBegin:
        close(i);
        open = Span{i, i, std::string(tag->label)};
        break;
      case TagPrefix::kInside:
        if (open && open->label == tag->label) break;
        if (!open) {
          if (!on_violation(BioViolation{std::string(id), i,
                                         BioViolationKind::kInsideWithoutBegin,
                                         "'" + tags[i] + "' does not continue a span"})) {
            return;
          }
        } else {
          if (!on_violation(BioViolation{std::string(id), i,
                                         BioViolationKind::kInsideLabelMismatch,
                                         "'" + tags[i] + "' follows a span labelled '" +
                                             open->label + "'"})) {
            return;
          }
        }
        close(i);
        open = Span{i, i, std::string(tag->label)};
        break;
    }
  }
  close(tags.size());
}

}  // namespace

std::vector<BioViolation> validate_bio(std::span<const std::string> tags,
                                       std::string_view utterance_id) {
  std::vector<BioViolation> out;
  scan_bio(
      tags, utterance_id, [](Span&&) {},
      [&](BioViolation&& v) {
        out.push_back(std::move(v));
        return true;
      });
  return out;
}

std::vector<BioViolation> validate_bio(const Utterance& u) {
  return validate_bio(u.slot_tags, u.id);
}

BioError::BioError(BioViolation violation)
    : std::runtime_error("BIO violation (" + std::string(to_string(violation.kind)) +
                         ") at position " + std::to_string(violation.position) +
                         (violation.utterance_id.empty() ? std::string()
                                                         : " of '" + violation.utterance_id + "'") +
                         ": " + violation.detail),
      violation_(std::move(violation)) {}

std::vector<Span> extract_spans(std::span<const std::string> tags, RepairPolicy repair) {
  std::vector<Span> spans;
  scan_bio(
      tags, {}, [&](Span&& s) { spans.push_back(std::move(s)); },
      [&](BioViolation&& v) {
        if (repair == RepairPolicy::kStrict) throw BioError(std::move(v));
        return true;
      });
  return spans;
}

std::vector<std::string> tags_from_spans(std::span<const Span> spans, std::size_t length) {
  std::vector<std::string> tags(length, "O");
  std::vector<bool> used(length, false);
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > length) {
      throw std::invalid_argument("span [" + std::to_string(s.start) + ", " +
                                  std::to_string(s.end) + ") out of bounds");
    }
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (used[i]) throw std::invalid_argument("overlapping spans");
      used[i] = true;
      tags[i] = (i == s.start ? "B-" : "I-") + s.label;
    }
  }
  return tags;
}

// ---------------------------------------------------------------------------

LabelInventory label_inventory(const Dataset& d) {
  LabelInventory inv;
  inv.utterances = d.size();
  for (const auto& u : d.utterances) {
    inv.tokens += u.size();
    ++inv.intents[u.intent];
    if (u.variety) ++inv.varieties[*u.variety];
    for (const auto& t : u.slot_tags) {
      const auto tag = parse_tag(t);
      if (tag && tag->prefix != TagPrefix::kOutside) ++inv.full_tags[t];
    }
    for (const auto& s : extract_spans(u.slot_tags, RepairPolicy::kLenient)) {
      ++inv.slot_labels[s.label];
    }
  }
  return inv;
}

UnseenReport unseen_label_report(const Dataset& train, const Dataset& eval) {
  const auto known = label_inventory(train);
  const auto target = label_inventory(eval);
  UnseenReport r;
  auto diff = [](const LabelCounts& have, const LabelCounts& want, LabelCounts& out) {
    for (const auto& [label, count] : want) {
      if (!have.contains(label)) out[label] = count;
    }
  };
  diff(known.intents, target.intents, r.intents);
  diff(known.slot_labels, target.slot_labels, r.slot_labels);
  diff(known.full_tags, target.full_tags, r.full_tags);
  return r;
}

// ---------------------------------------------------------------------------

std::optional<std::string> group_key(std::string_view id, std::string_view delimiter) {
  if (delimiter.empty()) return std::nullopt;
  const auto pos = id.find(delimiter);
  if (pos == std::string_view::npos || pos == 0) return std::nullopt;
  return std::string(id.substr(0, pos));
}

void check_unique_ids(const Dataset& d) {
  std::unordered_set<std::string_view> seen;
  for (const auto& u : d.utterances) {
    if (!seen.insert(u.id).second) {
      throw std::invalid_argument("duplicate utterance id '" + u.id + "'");
    }
  }
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& d, const SplitOptions& options) {
  if (d.empty()) throw std::invalid_argument("cannot split an empty dataset");
  if (!(options.ratio > 0.0 && options.ratio < 1.0)) {
    throw std::invalid_argument("split ratio must lie strictly between 0 and 1");
  }
  const std::size_t n = d.size();
  const std::size_t target = std::min(n, round_half_up(options.ratio * static_cast<double>(n)));
  Rng rng(splitmix64(options.seed));
  std::vector<bool> in_first(n, false);

  if (options.strategy == SplitStrategy::kUniform) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i = 0; i < target; ++i) in_first[order[i]] = true;
  } else {
    std::vector<std::string> keys;
    std::unordered_map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) {
      auto key = group_key(d.utterances[i].id, options.group_delimiter);
      if (!key) {
        throw std::invalid_argument("utterance '" + d.utterances[i].id +
                                    "' has no group key (delimiter '" +
                                    options.group_delimiter + "')");
      }
      auto [it, inserted] = members.try_emplace(*key);
      if (inserted) keys.push_back(*key);
      it->second.push_back(i);
    }
    rng.shuffle(keys);
    std::size_t filled = 0;
    for (const auto& key : keys) {
      const auto& group = members.at(key);
      if (filled + group.size() > target) continue;
      for (std::size_t i : group) in_first[i] = true;
      filled += group.size();
      if (filled == target) break;
    }
  }

  Dataset first{d.name, {}};
  Dataset second{d.name, {}};
  for (std::size_t i = 0; i < n; ++i) {
    (in_first[i] ? first : second).utterances.push_back(d.utterances[i]);
  }
  return {std::move(first), std::move(second)};
}

}  // namespace dialsid
