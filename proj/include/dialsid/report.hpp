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

// JSON and TSV renderings of the report structs.

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialsid/corpus.hpp"
#include "dialsid/eval.hpp"
#include "dialsid/stats.hpp"
#include "dialsid/surgery.hpp"

namespace dialsid {

enum class ReportFormat { kJson, kTsv };

ReportFormat parse_report_format(const std::string& name);

nlohmann::json to_json(const LabelInventory& inv);
nlohmann::json to_json(const UnseenReport& r);
nlohmann::json to_json(const std::vector<BioViolation>& violations);
nlohmann::json to_json(const PRF& prf);
nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const CorrelationResult& c);
nlohmann::json to_json(const MavReport& m);

// TSV rows are "section<TAB>key<TAB>value..." with a header line.
std::string to_tsv(const LabelInventory& inv);
std::string to_tsv(const UnseenReport& r);
std::string to_tsv(const std::vector<BioViolation>& violations);
std::string to_tsv(const EvalReport& r);
std::string to_tsv(const CorrelationResult& c);
std::string to_tsv(const MavReport& m);

}  // namespace dialsid
