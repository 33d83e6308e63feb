#pragma once

#include <string>

#include <json.hpp>

#include "clab/bounds.hpp"
#include "clab/fewshot.hpp"
#include "clab/geometry.hpp"
#include "clab/losses.hpp"
#include "clab/ufm.hpp"

// JSON forms of the report types. Non-finite numbers (the a_opt = +inf
// sentinel) are written as null.
namespace clab {

nlohmann::json to_json(const GapReport& report, bool include_ratios = false);
nlohmann::json to_json(const DispersionSummary& summary);
nlohmann::json to_json(const EtfReport& report);
nlohmann::json to_json(const CorSolution& solution);
nlohmann::json to_json(const TrainTrace& trace, bool include_steps = true);
nlohmann::json to_json(const FewShotResult& result);
nlohmann::json to_json(const BatchGapBound& bound);

// "%.9g": the CSV float format.
std::string format_g9(double value);

}  // namespace clab
