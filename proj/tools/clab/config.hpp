#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace clab::cli {

using nlohmann::json;

inline const std::vector<std::string> kExperiments = {"gap-sweep", "ufm-run", "bound-check", "batch-check",
                                                      "report"};

// Every key an experiment accepts, with its default value. The JSON type of
// the default is the type the key must have.
json default_config(const std::string& experiment);

// Merge `overrides` into `base`. Unknown keys and type mismatches throw
// ConfigError.
void merge_config(json& base, const json& overrides, const std::string& where);

// Parse a command-line string as a value shaped like `like`: numbers,
// booleans, strings, or comma-separated lists of those.
json parse_flag_value(const std::string& text, const json& like, const std::string& key);

// Reads a config file. A manifest written by an earlier run is accepted too;
// its "config" block is used.
json load_config_file(const std::string& path, const std::string& experiment);

std::string kebab(const std::string& key);

}  // namespace clab::cli
