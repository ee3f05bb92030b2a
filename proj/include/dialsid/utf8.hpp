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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dialsid::utf8 {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Decodes UTF-8 into code points. Throws DecodeError on malformed input.
std::u32string decode(std::string_view text);

std::string encode(char32_t cp);
std::string encode(std::u32string_view cps);

// Number of code points; throws on malformed input.
std::size_t length(std::string_view text);

// Unicode letter category test (alphabetic per the C.UTF-8 ctype tables).
bool is_letter(char32_t cp);

// True iff `word` is non-empty and every code point is a letter.
bool is_alphabetic_word(std::string_view word);

bool is_space(char32_t cp);

}  // namespace dialsid::utf8
