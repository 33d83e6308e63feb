// clab <experiment> [--config PATH] [--seed N] [--out DIR] [--<key> VALUE ...]
//
// Exit codes: 0 every check passed, 1 a check failed or the run errored,
// 2 the configuration or input was rejected.

#include <cstdio>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "clab/error.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "output.hpp"

using namespace clab::cli;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Invocation {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::map<std::string, std::string> flags;  // config key -> raw text
};

nlohmann::json resolve(const std::string& experiment, const Invocation& inv, std::uint64_t& seed, std::string& out) {
  nlohmann::json config = default_config(experiment);
  seed = 0;
  out = "clab-out/" + experiment;
  if (!inv.config_path.empty()) {
    nlohmann::json file = load_config_file(inv.config_path, experiment);
    if (!file.is_object()) throw ConfigError(inv.config_path + ": config must be a JSON object");
    if (file.contains("seed")) {
      if (!file["seed"].is_number_unsigned()) throw ConfigError(inv.config_path + ": seed must be a non-negative integer");
      seed = file["seed"].get<std::uint64_t>();
      file.erase("seed");
    }
    if (file.contains("output_dir")) {
      if (!file["output_dir"].is_string()) throw ConfigError(inv.config_path + ": output_dir must be a string");
      out = file["output_dir"].get<std::string>();
      file.erase("output_dir");
    }
    merge_config(config, file, inv.config_path);
  }
  for (const auto& [key, text] : inv.flags) config[key] = parse_flag_value(text, config[key], key);
  if (inv.seed) seed = *inv.seed;
  if (!inv.out.empty()) out = inv.out;
  return config;
}

int dispatch(const std::string& experiment, const RunContext& ctx) {
  if (experiment == "gap-sweep") return run_gap_sweep(ctx);
  if (experiment == "ufm-run") return run_ufm(ctx);
  if (experiment == "bound-check") return run_bound_check(ctx);
  if (experiment == "batch-check") return run_batch_check(ctx);
  return run_report(ctx);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive-learning geometry experiments"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::map<std::string, Invocation> invocations;
  for (const auto& name : kExperiments) {
    Invocation& inv = invocations[name];
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", inv.config_path, "JSON config file (or a manifest from an earlier run)");
    sub->add_option("--seed", inv.seed, "Base seed");
    sub->add_option("--out", inv.out, "Output directory");
    const nlohmann::json defaults = default_config(name);
    for (const auto& [key, value] : defaults.items()) {
      sub->add_option_function<std::string>(
          "--" + kebab(key), [&inv, key = key](const std::string& text) { inv.flags[key] = text; },
          "default " + value.dump());
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    std::uint64_t seed = 0;
    std::string out;
    const nlohmann::json config = resolve(experiment, invocations[experiment], seed, out);
    const OutputDir dir(out);
    nlohmann::json manifest{{"experiment", experiment},
                            {"config", config},
                            {"seed", seed},
                            {"output_dir", out},
                            {"timestamp", utc_timestamp()},
                            {"clab_version", kVersion}};
    if (experiment == "gap-sweep") {
      manifest["note"] = "repeats draw independent synthetic embeddings per seed in place of re-sampling classes from a dataset";
    }
    dir.write_json("manifest.json", manifest);
    const int code = dispatch(experiment, {config, seed, dir});
    std::printf("%s: %s (outputs in %s)\n", experiment.c_str(), code == 0 ? "pass" : "FAIL", out.c_str());
    return code;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "clab: config error: %s\n", e.what());
    return 2;
  } catch (const clab::DomainError& e) {
    std::fprintf(stderr, "clab: config error: %s\n", e.what());
    return 2;
  } catch (const clab::FormatError& e) {
    std::fprintf(stderr, "clab: bad input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "clab: error: %s\n", e.what());
    return 1;
  }
}
