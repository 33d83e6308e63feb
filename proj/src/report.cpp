#include "clab/report.hpp"

#include <cmath>
#include <cstdio>

namespace clab {

namespace {

nlohmann::json number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const GapReport& report, bool include_ratios) {
  nlohmann::json j{{"dcl", report.dcl},
                   {"nscl", report.nscl},
                   {"cl", report.cl},
                   {"gap_dcl_nscl", report.gap_dcl_nscl},
                   {"thm1_bound", report.thm1_bound}};
  if (include_ratios) j["per_anchor_ratio"] = report.per_anchor_ratio;
  return j;
}

nlohmann::json to_json(const DispersionSummary& s) {
  return {{"cdnv_avg", s.cdnv_avg},
          {"cdnv_sym_avg", s.cdnv_sym_avg},
          {"dir_cdnv_avg", s.dir_cdnv_avg},
          {"sqrt_cdnv_avg", s.sqrt_cdnv_avg}};
}

nlohmann::json to_json(const EtfReport& r) {
  return {{"norm_mean", r.norm_mean},       {"norm_spread", r.norm_spread},
          {"gram_deviation", r.gram_deviation}, {"mean_sum_norm", r.mean_sum_norm},
          {"aug_cos_same", r.aug_cos_same}, {"aug_cos_diff", r.aug_cos_diff},
          {"within_class_cos", r.within_class_cos}, {"max_pair_cos", r.max_pair_cos}};
}

nlohmann::json to_json(const CorSolution& s) {
  return {{"A", s.A},           {"b_lin", s.b_lin},      {"F", number(s.F)},
          {"y_star", number(s.y_star)}, {"a_star", number(s.a_star)},
          {"a_opt", number(s.a_opt)},   {"bound", s.bound}};
}

nlohmann::json to_json(const TrainTrace& t, bool include_steps) {
  nlohmann::json j{{"final_loss", t.final_loss},
                   {"final_grad_norm", t.final_grad_norm},
                   {"target_loss", t.target_loss ? nlohmann::json(*t.target_loss) : nlohmann::json(nullptr)},
                   {"steps", t.loss_per_step.size()},
                   {"etf", to_json(t.etf)}};
  if (include_steps) {
    j["loss_per_step"] = t.loss_per_step;
    j["grad_norm_per_step"] = t.grad_norm_per_step;
  }
  return j;
}

nlohmann::json to_json(const FewShotResult& r) {
  return {{"mean_error", r.mean_error}, {"std", r.std}, {"std_error", r.std_error},
          {"per_trial", r.per_trial}};
}

nlohmann::json to_json(const BatchGapBound& b) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"b_bar", b.b_bar},
          {"main_term", b.main_term}, {"tail_term", b.tail_term}};
}

std::string format_g9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

}  // namespace clab
