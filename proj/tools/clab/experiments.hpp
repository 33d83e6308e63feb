#pragma once

#include <cstdint>

#include <json.hpp>

#include "output.hpp"

namespace clab::cli {

struct RunContext {
  const nlohmann::json& config;
  std::uint64_t seed;
  const OutputDir& out;
};

// Each returns the process exit code: 0 when every check passed, 1 otherwise.
int run_gap_sweep(const RunContext& ctx);
int run_ufm(const RunContext& ctx);
int run_bound_check(const RunContext& ctx);
int run_batch_check(const RunContext& ctx);
int run_report(const RunContext& ctx);

}  // namespace clab::cli
