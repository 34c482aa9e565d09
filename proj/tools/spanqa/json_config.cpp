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

#include "json_config.hpp"

#include <nlohmann/json.hpp>

namespace spanqa::cli {
namespace {

using nlohmann::json;

std::string scalar_text(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_null()) return "";
  return value.dump();
}

void flatten(const json& object, std::vector<std::string>& parents,
             std::vector<CLI::ConfigItem>& out) {
  for (const auto& [key, value] : object.items()) {
    if (value.is_object()) {
      parents.push_back(key);
      flatten(value, parents, out);
      parents.pop_back();
      continue;
    }
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = key;
    if (value.is_array()) {
      for (const json& v : value) item.inputs.push_back(scalar_text(v));
    } else {
      item.inputs.push_back(scalar_text(value));
    }
    out.push_back(std::move(item));
  }
}

json option_value(const CLI::Option* opt, bool default_also) {
  std::vector<std::string> values = opt->results();
  if (values.empty()) {
    if (!default_also || opt->get_default_str().empty()) return nullptr;
    values.push_back(opt->get_default_str());
  }
  auto typed = [](const std::string& s) -> json {
    json parsed = json::parse(s, nullptr, false);
    if (parsed.is_number() || parsed.is_boolean()) return parsed;
    return s;
  };
  if (values.size() == 1 && opt->get_expected_max() <= 1) return typed(values[0]);
  json array = json::array();
  for (const std::string& v : values) array.push_back(typed(v));
  return array;
}

json app_to_json(const CLI::App* app, bool default_also) {
  json out = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
    if (opt == app->get_help_ptr() || opt == app->get_config_ptr()) continue;
    json value = option_value(opt, default_also);
    if (!value.is_null()) out[opt->get_lnames().front()] = std::move(value);
  }
  for (const CLI::App* sub : app->get_subcommands({})) {
    if (sub->get_name().empty() || !sub->parsed()) continue;
    json nested = app_to_json(sub, default_also);
    if (!nested.empty()) out[sub->get_name()] = std::move(nested);
  }
  return out;
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool default_also,
                                  bool /*write_description*/,
                                  std::string /*prefix*/) const {
  return app_to_json(app, default_also).dump(2) + "\n";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  json root;
  try {
    root = json::parse(input);
  } catch (const json::parse_error& e) {
    throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
  std::vector<CLI::ConfigItem> items;
  std::vector<std::string> parents;
  flatten(root, parents, items);
  return items;
}

nlohmann::json resolved_options(const CLI::App* app) { return app_to_json(app, true); }

}  // namespace spanqa::cli
