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

// Command-line front end. Each subcommand reads its inputs, calls one library
// operation and writes the result; nothing else happens here.
//
// Exit status: 0 success, 1 data error, 2 usage error.

#pragma once

#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dialsid {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// Version of the toolkit and of the manifest layout written by `pipeline`.
std::string_view toolkit_version();
inline constexpr std::string_view kManifestFormat = "dialsid-manifest/1";

// Bad flags, bad option values or malformed config files.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

int run_main(int argc, char** argv);

}  // namespace dialsid
