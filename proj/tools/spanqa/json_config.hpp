// Copyright 2026 The spanqa Authors.
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

#ifndef SPANQA_TOOLS_JSON_CONFIG_HPP_
#define SPANQA_TOOLS_JSON_CONFIG_HPP_

#include <istream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

namespace spanqa::cli {

// CLI11 config reader for JSON files. Top-level keys set options of the
// main app; an object keyed by a subcommand name sets that subcommand's
// options, e.g. {"train": {"gamma": 0.05, "epochs": 20}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;
};

// Resolved option values of an app and its parsed subcommands, with
// defaults filled in.
nlohmann::json resolved_options(const CLI::App* app);

}  // namespace spanqa::cli

#endif  // SPANQA_TOOLS_JSON_CONFIG_HPP_
