#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "clab/error.hpp"
#include "output.hpp"

namespace clab::cli {

json default_config(const std::string& experiment) {
  if (experiment == "gap-sweep") {
    return {{"classes", {4, 16, 64}},
            {"per_class", 20},
            {"n_augs", 2},
            {"dim", 0},  // 0: d = C
            {"source", "ufm"},
            {"loss", "dcl"},
            {"steps", 200},
            {"learning_rate", 0.1},
            {"repeats", 5},
            {"checkpoint_every", 50}};
  }
  if (experiment == "ufm-run") {
    return {{"n_classes", 5},          {"per_class", 20},         {"n_augs", 2},
            {"dim", 8},                {"loss", "nscl"},          {"steps", 5000},
            {"learning_rate", 0.1},    {"optimizer", "adam"},     {"init_scale", 1.0},
            {"renorm", "none"},        {"clip_norm", 1000.0},     {"loss_tol", 1e-3},
            {"gram_tol", 1e-2},        {"sum_norm_tol", 1e-2},    {"norm_spread_tol", 1e-2},
            {"aug_cos_min", 0.999},    {"within_cos_min", 0.999}};
  }
  if (experiment == "bound-check") {
    return {{"source", "gaussian"},
            {"input", ""},
            {"n_classes", 4},
            {"dim", 3},
            {"distance", 2.0},
            {"sigma", 0.5},
            {"per_class", 1000},
            {"dispersion", "analytic"},
            {"shots", {10, 100, 500}},
            {"n_way", 2},
            {"n_tasks", 10},
            {"n_support_draws", 5},
            {"classifiers", {"ncc", "lp"}}};
  }
  if (experiment == "batch-check") {
    return {{"source", "random"},
            {"input", ""},
            {"n_samples", 2000},
            {"n_classes", 20},
            {"n_augs", 2},
            {"dim", 32},
            {"batch_sizes", {256, 1024}},
            {"epsilons", {0.02, 0.05}},
            {"n_trials", 2000},
            {"se_check", false}};
  }
  if (experiment == "report") {
    return {{"input", ""}, {"compare", ""}, {"anchors_csv", true}};
  }
  throw ConfigError("unknown experiment '" + experiment + "'");
}

namespace {

bool same_kind(const json& like, const json& value) {
  if (like.is_number_integer()) return value.is_number_integer();
  if (like.is_number()) return value.is_number();
  if (like.is_array()) {
    if (!value.is_array()) return false;
    if (like.empty()) return true;
    return std::all_of(value.begin(), value.end(), [&](const json& v) { return same_kind(like.front(), v); });
  }
  return like.type() == value.type();
}

}  // namespace

void merge_config(json& base, const json& overrides, const std::string& where) {
  if (!overrides.is_object()) throw ConfigError(where + ": config must be a JSON object");
  for (const auto& [key, value] : overrides.items()) {
    if (!base.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!same_kind(base[key], value)) {
      throw ConfigError(where + ": key '" + key + "' expects a value like " + base[key].dump());
    }
    base[key] = value;
  }
}

json parse_flag_value(const std::string& text, const json& like, const std::string& key) {
  const auto fail = [&]() -> json {
    throw ConfigError("--" + kebab(key) + ": cannot read '" + text + "' as a value like " + like.dump());
  };
  if (like.is_array()) {
    json out = json::array();
    const json element = like.empty() ? json("") : like.front();
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_flag_value(item, element, key));
    return out;
  }
  if (like.is_string()) return text;
  if (like.is_boolean()) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    return fail();
  }
  try {
    std::size_t used = 0;
    if (like.is_number_integer()) {
      const long long v = std::stoll(text, &used);
      if (used != text.size()) return fail();
      return v;
    }
    const double v = std::stod(text, &used);
    if (used != text.size()) return fail();
    return v;
  } catch (const std::logic_error&) {
    return fail();
  }
}

json load_config_file(const std::string& path, const std::string& experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("experiment") && doc.contains("config")) {
    if (doc["experiment"] != experiment) {
      throw ConfigError(path + ": manifest is for experiment " + doc["experiment"].dump());
    }
    json config = doc["config"];
    if (doc.contains("seed")) config["seed"] = doc["seed"];
    return config;
  }
  return doc;
}

std::string kebab(const std::string& key) {
  std::string out = key;
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

}  // namespace clab::cli
