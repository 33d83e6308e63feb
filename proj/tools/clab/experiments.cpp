#include "experiments.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "clab/bounds.hpp"
#include "clab/embedding_set.hpp"
#include "clab/fewshot.hpp"
#include "clab/geometry.hpp"
#include "clab/losses.hpp"
#include "clab/report.hpp"
#include "clab/rng.hpp"
#include "clab/ufm.hpp"

namespace clab::cli {

using nlohmann::json;

namespace {

std::size_t count(const json& config, const char* key) {
  const long long v = config.at(key).get<long long>();
  if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

EmbeddingSet load_embeddings(const std::string& path) {
  if (path.empty()) throw ConfigError("input path is required");
  const std::filesystem::path p(path);
  if (p.extension() == ".csv") return load_csv(p);
  return load_bundle(p);
}

void warn(const std::string& message) { std::fprintf(stderr, "clab: warning: %s\n", message.c_str()); }

}  // namespace

int run_gap_sweep(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const std::string source = cfg.at("source");
  if (source != "ufm" && source != "random") throw ConfigError("source must be 'ufm' or 'random'");
  const auto per_class = count(cfg, "per_class");
  const auto n_augs = count(cfg, "n_augs");
  const auto repeats = count(cfg, "repeats");
  const auto every = count(cfg, "checkpoint_every");
  const LossKind kind = parse_loss_kind(cfg.at("loss").get<std::string>());

  CsvWriter gaps(ctx.out.file("gaps.csv"), {"C", "repeat", "dcl", "nscl", "gap", "bound"});
  std::optional<CsvWriter> checkpoints;
  if (source == "ufm") checkpoints.emplace(ctx.out.file("checkpoints.csv"), std::vector<std::string>{"C", "repeat", "step", "gap", "bound"});

  std::vector<double> all_gaps, all_bounds;
  json per_c = json::array();
  std::size_t violations = 0;
  for (const auto& c_value : cfg.at("classes")) {
    const int c = c_value.get<int>();
    if (c < 2) throw ConfigError("every C must be at least 2");
    const std::size_t dim = cfg.at("dim").get<long long>() > 0 ? count(cfg, "dim") : static_cast<std::size_t>(c);
    const double bound = thm1_gap_bound(per_class * static_cast<std::size_t>(c), per_class).log_form;
    double sum = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      const std::uint64_t seed = derive_seed(derive_seed(ctx.seed, static_cast<std::uint64_t>(c)), r);
      std::optional<EmbeddingSet> set;
      if (source == "ufm") {
        UfmConfig u;
        u.n_classes = c;
        u.per_class = per_class;
        u.n_augs = n_augs;
        u.dim = dim;
        u.loss_kind = kind;
        u.steps = count(cfg, "steps");
        u.learning_rate = cfg.at("learning_rate");
        u.seed = seed;
        validate(u);
        auto record = [&](std::size_t step, const EmbeddingSet& z) {
          const double gap = loss_gap(z, *z.labeling()).gap_dcl_nscl;
          if (gap > bound || gap < 0.0) ++violations;
          checkpoints->row({static_cast<long long>(c), static_cast<long long>(r), static_cast<long long>(step), gap, bound});
        };
        record(0, ufm_initial(u));
        set = ufm_train(u, {every, record}).embeddings;
      } else {
        set = generate_random_unit(per_class * static_cast<std::size_t>(c), n_augs, dim, seed)
                  .with_labeling(Labeling::balanced_blocks(per_class * static_cast<std::size_t>(c), c));
      }
      const GapReport report = loss_gap(*set, *set->labeling());
      if (report.gap_dcl_nscl > bound || report.gap_dcl_nscl < 0.0) ++violations;
      gaps.row({static_cast<long long>(c), static_cast<long long>(r), report.dcl, report.nscl, report.gap_dcl_nscl, bound});
      all_gaps.push_back(report.gap_dcl_nscl);
      all_bounds.push_back(bound);
      sum += report.gap_dcl_nscl;
    }
    per_c.push_back({{"C", c}, {"mean_gap", repeats ? sum / static_cast<double>(repeats) : 0.0}, {"bound", bound}});
  }

  bool monotone = true;
  for (std::size_t i = 1; i < per_c.size(); ++i)
    if (per_c[i]["mean_gap"].get<double>() > per_c[i - 1]["mean_gap"].get<double>()) monotone = false;
  double correlation = std::nan("");
  if (all_gaps.size() > 1) {
    try {
      correlation = pearson(all_gaps, all_bounds);
    } catch (const Error&) {
    }
  }
  const bool pass = violations == 0;
  ctx.out.write_json("summary.json", {{"per_C", per_c},
                                       {"pearson_gap_bound", nullable(correlation)},
                                       {"bound_violations", violations},
                                       {"mean_gap_nonincreasing_in_C", monotone},
                                       {"pass", pass}});
  return pass ? 0 : 1;
}

int run_ufm(const RunContext& ctx) {
  const json& cfg = ctx.config;
  UfmConfig u;
  u.n_classes = cfg.at("n_classes");
  u.per_class = count(cfg, "per_class");
  u.n_augs = count(cfg, "n_augs");
  u.dim = count(cfg, "dim");
  u.loss_kind = parse_loss_kind(cfg.at("loss").get<std::string>());
  u.steps = count(cfg, "steps");
  u.learning_rate = cfg.at("learning_rate");
  u.optimizer = parse_optimizer(cfg.at("optimizer").get<std::string>());
  u.init_scale = cfg.at("init_scale");
  u.renorm = parse_renorm(cfg.at("renorm").get<std::string>());
  u.clip_norm = cfg.at("clip_norm");
  u.seed = ctx.seed;
  validate(u);

  const UfmResult result = ufm_train(u);
  const TrainTrace& tr = result.trace;
  save_bundle(result.embeddings, ctx.out.file("embeddings.emb"));
  ctx.out.write_json("trace.json", to_json(tr));
  ctx.out.write_json("etf.json", to_json(tr.etf));
  CsvWriter trace(ctx.out.file("trace.csv"), {"step", "loss", "grad_norm"});
  for (std::size_t s = 0; s < tr.loss_per_step.size(); ++s)
    trace.row({static_cast<long long>(s), tr.loss_per_step[s], tr.grad_norm_per_step[s]});

  json diagnostics = json::object();
  bool pass = true;
  auto check = [&](const char* name, double value, double threshold, bool ok) {
    diagnostics[name] = {{"value", nullable(value)}, {"threshold", threshold}, {"pass", ok}};
    pass = pass && ok;
  };
  if (tr.target_loss) {
    const double diff = std::abs(tr.final_loss - *tr.target_loss);
    check("loss_gap_to_minimum", diff, cfg.at("loss_tol"), diff <= cfg.at("loss_tol").get<double>());
  }
  const EtfReport& e = tr.etf;
  check("gram_deviation", e.gram_deviation, cfg.at("gram_tol"), e.gram_deviation <= cfg.at("gram_tol").get<double>());
  check("mean_sum_norm", e.mean_sum_norm, cfg.at("sum_norm_tol"), e.mean_sum_norm <= cfg.at("sum_norm_tol").get<double>());
  check("norm_spread", e.norm_spread, cfg.at("norm_spread_tol"), e.norm_spread <= cfg.at("norm_spread_tol").get<double>());
  check("aug_cos_same", e.aug_cos_same, cfg.at("aug_cos_min"), e.aug_cos_same >= cfg.at("aug_cos_min").get<double>());
  check("within_class_cos", e.within_class_cos, cfg.at("within_cos_min"),
        e.within_class_cos >= cfg.at("within_cos_min").get<double>());
  // Zero steps never counts as converged, whatever the initialization.
  if (u.steps == 0) check("steps_taken", 0.0, 1.0, false);

  ctx.out.write_json("summary.json", {{"final_loss", tr.final_loss},
                                       {"target_loss", tr.target_loss ? json(*tr.target_loss) : json(nullptr)},
                                       {"final_grad_norm", tr.final_grad_norm},
                                       {"diagnostics", diagnostics},
                                       {"pass", pass}});
  return pass ? 0 : 1;
}

int run_bound_check(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const std::string source = cfg.at("source");
  const std::string disp_mode = cfg.at("dispersion");
  if (disp_mode != "analytic" && disp_mode != "empirical") throw ConfigError("dispersion must be 'analytic' or 'empirical'");
  const int n_way = cfg.at("n_way");

  std::optional<EmbeddingSet> set;
  BoundInputs in;
  in.n_way = n_way;
  DispersionSummary disp;
  if (source == "gaussian") {
    const int c = cfg.at("n_classes");
    const auto d = count(cfg, "dim");
    const double dist = cfg.at("distance"), sigma = cfg.at("sigma");
    if (c < 2 || !(dist > 0.0) || sigma < 0.0) throw ConfigError("gaussian source needs C >= 2, distance > 0, sigma >= 0");
    GaussianTaskSpec spec;
    // Unit simplex rows sit sqrt(2C/(C-1)) apart.
    spec.class_means = simplex_etf(c, d, derive_seed(ctx.seed, 1)) * (dist / std::sqrt(2.0 * c / (c - 1.0)));
    spec.latent_sigma = sigma;
    spec.per_class = count(cfg, "per_class");
    spec.seed = derive_seed(ctx.seed, 2);
    set = generate_gaussian_classes(spec);
    if (disp_mode == "analytic") {
      const double v = 2.0 * static_cast<double>(d) * sigma * sigma / (dist * dist);
      disp = {v / 2.0, v, sigma * sigma / (dist * dist), std::sqrt(v)};
    }
  } else if (source == "bundle") {
    if (disp_mode == "analytic") throw ConfigError("analytic dispersion needs the gaussian source");
    set = load_embeddings(cfg.at("input"));
    if (!set->labeled()) throw ConfigError("bound-check input must be labeled");
  } else {
    throw ConfigError("source must be 'gaussian' or 'bundle'");
  }
  if (disp_mode == "empirical") disp = dispersion(class_stats(*set, *set->labeling()));
  in.cdnv = disp.cdnv_sym_avg;
  in.sqrt_cdnv = disp.sqrt_cdnv_avg;
  in.dir_cdnv = disp.dir_cdnv_avg;

  std::vector<Classifier> classifiers;
  for (const auto& name : cfg.at("classifiers")) classifiers.push_back(parse_classifier(name.get<std::string>()));

  CsvWriter table(ctx.out.file("bounds.csv"),
                  {"m", "ncc_error", "lp_error", "prop1", "cor1", "baseline", "ncc_se", "lp_se"});
  json rows = json::array(), skipped = json::array();
  std::size_t violations = 0;
  bool monotone = true;
  double previous = INFINITY;
  for (const auto& m_value : cfg.at("shots")) {
    const int m = m_value.get<int>();
    if (m < 10) {
      warn("m=" + std::to_string(m) + " skipped: the bounds need m >= 10");
      skipped.push_back(m);
      continue;
    }
    in.shots = m;
    const CorSolution cor = cor1_bound(in);
    const double prop = prop1_bound(in), base = baseline_bound(in);
    monotone = monotone && cor.bound <= previous;
    previous = cor.bound;

    Cell err[2], se[2];
    json row{{"m", m}, {"cor1", to_json(cor)}, {"prop1", prop}, {"baseline", base}};
    for (Classifier cls : classifiers) {
      FewShotConfig fs;
      fs.shots = static_cast<std::size_t>(m);
      fs.n_way = n_way;
      fs.n_tasks = count(cfg, "n_tasks");
      fs.n_support_draws = count(cfg, "n_support_draws");
      fs.classifier = cls;
      fs.seed = derive_seed(ctx.seed, 100 + static_cast<std::uint64_t>(m));
      const FewShotResult r = estimate_mshot_error(*set, *set->labeling(), fs);
      const int slot = cls == Classifier::NCC ? 0 : 1;
      err[slot] = r.mean_error;
      se[slot] = r.std_error;
      const bool violated = r.mean_error - 3.0 * r.std_error > cor.bound;
      if (violated) ++violations;
      row[std::string(to_string(cls))] = {{"mean_error", r.mean_error}, {"std_error", r.std_error}, {"violation", violated}};
    }
    table.row({static_cast<long long>(m), err[0], err[1], prop, cor.bound, base, se[0], se[1]});
    rows.push_back(row);
  }

  const bool pass = violations == 0;
  ctx.out.write_json("summary.json", {{"dispersion", to_json(disp)},
                                       {"dispersion_source", disp_mode},
                                       {"rows", rows},
                                       {"skipped_m", skipped},
                                       {"violations", violations},
                                       {"cor1_nonincreasing_in_m", monotone},
                                       {"pass", pass}});
  return pass ? 0 : 1;
}

int run_batch_check(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const std::string source = cfg.at("source");
  std::optional<EmbeddingSet> set;
  if (source == "random") {
    const auto n = count(cfg, "n_samples");
    const int c = cfg.at("n_classes");
    if (c < 2 || n < static_cast<std::size_t>(c)) throw ConfigError("random source needs 2 <= C <= N");
    set = generate_random_unit(n, count(cfg, "n_augs"), count(cfg, "dim"), derive_seed(ctx.seed, 0))
              .with_labeling(Labeling::balanced_blocks(n, c));
  } else if (source == "bundle") {
    set = load_embeddings(cfg.at("input"));
    if (!set->labeled()) throw ConfigError("batch-check input must be labeled");
  } else {
    throw ConfigError("source must be 'random' or 'bundle'");
  }
  const Labeling& labeling = *set->labeling();
  const int c = labeling.n_classes();
  const auto trials = count(cfg, "n_trials");

  CsvWriter table(ctx.out.file("batch.csv"), {"B", "epsilon", "b_bar", "gap_estimate", "se", "lower", "upper"});
  json rows = json::array(), rejected = json::array();
  bool all_within = true;
  std::uint64_t row_id = 0;
  std::optional<BatchSpec> first_spec;
  for (const auto& b_value : cfg.at("batch_sizes")) {
    for (const auto& eps_value : cfg.at("epsilons")) {
      const auto b = b_value.get<long long>();
      const double eps = eps_value.get<double>();
      ++row_id;
      BatchGapBound bound;
      try {
        if (b < 1) throw DomainError("batch size must be positive");
        bound = batch_gap_bound(static_cast<std::size_t>(b), c, eps);
      } catch (const DomainError& e) {
        warn("row B=" + std::to_string(b) + " epsilon=" + format_g9(eps) + " rejected: " + e.what());
        rejected.push_back({{"B", b}, {"epsilon", eps}, {"reason", e.what()}});
        continue;
      }
      const BatchSpec spec{static_cast<std::size_t>(b), eps, trials, derive_seed(ctx.seed, row_id)};
      if (!first_spec) first_spec = spec;
      const McEstimate est = batch_gap_estimate(*set, labeling, spec);
      const bool within = est.mean >= bound.lower - 3.0 * est.std_error && est.mean <= bound.upper + 3.0 * est.std_error;
      all_within = all_within && within;
      table.row({static_cast<long long>(b), eps, static_cast<long long>(bound.b_bar), est.mean, est.std_error,
                 bound.lower, bound.upper});
      json row = to_json(bound);
      row["B"] = b;
      row["epsilon"] = eps;
      row["gap_estimate"] = est.mean;
      row["se"] = est.std_error;
      row["within"] = within;
      rows.push_back(row);
    }
  }
  if (rows.empty()) throw ConfigError("every (B, epsilon) row was rejected");

  json summary{{"rows", rows}, {"rejected", rejected}, {"all_within_bounds", all_within}};
  bool pass = all_within;
  if (cfg.at("se_check").get<bool>()) {
    // The standard error falls as 1/sqrt(n): four times the trials halves it.
    BatchSpec more = *first_spec;
    more.n_trials *= 4;
    const double base = batch_gap_estimate(*set, labeling, *first_spec).std_error;
    const double ratio = batch_gap_estimate(*set, labeling, more).std_error / base;
    const bool ok = std::abs(ratio - 0.5) <= 0.25 * 0.5;
    summary["se_check"] = {{"ratio_4x_trials", ratio}, {"expected", 0.5}, {"pass", ok}};
    pass = pass && ok;
  }
  summary["pass"] = pass;
  ctx.out.write_json("summary.json", summary);
  return pass ? 0 : 1;
}

int run_report(const RunContext& ctx) {
  const json& cfg = ctx.config;
  const EmbeddingSet set = load_embeddings(cfg.at("input"));
  json summary{{"n_samples", set.n_samples()}, {"n_augs", set.n_augs()}, {"dim", set.dim()}, {"labeled", set.labeled()}};
  summary["cl"] = contrastive_loss(set, LossKind::CL);
  summary["dcl"] = contrastive_loss(set, LossKind::DCL);
  if (set.labeled() && set.labeling()->n_nonempty() >= 2) {
    const Labeling& y = *set.labeling();
    const GapReport gap = loss_gap(set, y);
    summary["gap"] = to_json(gap);
    summary["etf"] = to_json(etf_report(set, y));
    try {
      summary["dispersion"] = to_json(dispersion(class_stats(set, y)));
    } catch (const Error& e) {
      summary["dispersion"] = nullptr;
      warn(std::string("dispersion unavailable: ") + e.what());
    }
    if (cfg.at("anchors_csv").get<bool>()) {
      CsvWriter anchors(ctx.out.file("anchors.csv"), {"sample", "aug", "label", "ratio"});
      for (std::size_t i = 0; i < set.n_samples(); ++i)
        for (std::size_t l = 0; l < set.n_augs(); ++l)
          anchors.row({static_cast<long long>(i), static_cast<long long>(l), static_cast<long long>(y.label(i)),
                       gap.per_anchor_ratio[set.row_index(i, l)]});
    }
  }
  const std::string compare = cfg.at("compare");
  if (!compare.empty()) {
    const EmbeddingSet other = load_embeddings(compare);
    summary["cka"] = cka(set, other);
    summary["rsa"] = rsa(set, other);
  }
  ctx.out.write_json("summary.json", summary);
  return 0;
}

}  // namespace clab::cli
