#include "clab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "clab/error.hpp"
#include "clab/rng.hpp"

namespace clab {

std::string_view to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::CL: return "cl";
    case LossKind::DCL: return "dcl";
    case LossKind::NSCL: return "nscl";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view text) {
  if (text == "cl" || text == "CL") return LossKind::CL;
  if (text == "dcl" || text == "DCL") return LossKind::DCL;
  if (text == "nscl" || text == "NSCL") return LossKind::NSCL;
  throw DomainError("unknown loss kind '" + std::string(text) + "'");
}

namespace {

const Labeling* resolve_labeling(const EmbeddingSet& set, LossKind kind, const Labeling* labeling) {
  if (labeling == nullptr && set.labeled()) labeling = &*set.labeling();
  if (labeling != nullptr && labeling->n_samples() != set.n_samples()) {
    throw LabelMismatchError("labeling size does not match the embedding set");
  }
  if (kind == LossKind::NSCL) {
    if (labeling == nullptr) throw DomainError("NSCL needs labels");
    if (labeling->n_nonempty() < 2) {
      throw DegenerateError("NSCL with a single populated class has an empty denominator");
    }
  }
  return labeling;
}

// Per-row sample index and label (label -1 when unlabeled).
struct RowIndex {
  std::vector<int> sample;
  std::vector<int> label;
};

RowIndex row_index(const EmbeddingSet& set, const Labeling* labeling) {
  const std::size_t k = set.n_augs();
  RowIndex idx;
  idx.sample.resize(set.n_rows());
  idx.label.resize(set.n_rows(), -1);
  for (std::size_t r = 0; r < set.n_rows(); ++r) {
    idx.sample[r] = static_cast<int>(r / k);
    if (labeling) idx.label[r] = labeling->label(r / k);
  }
  return idx;
}

// Scaled cosine-similarity matrix, symmetric.
Eigen::MatrixXd similarity_matrix(const Eigen::MatrixXd& unit, double scale) {
  const auto m = unit.rows();
  Eigen::MatrixXd sim(m, m);
  sim.noalias() = scale * unit * unit.transpose();
  return sim;
}

// Core evaluation. When `grad_out` is non-null the similarity matrix is
// overwritten column by column with dL/dS and the gradient is assembled.
double evaluate(const EmbeddingSet& set, LossKind kind, const Labeling* labeling,
                LossOptions options, Eigen::MatrixXd* grad_out) {
  labeling = resolve_labeling(set, kind, labeling);
  const double t = options.inverse_temperature;
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("inverse temperature must be positive");

  const std::size_t n = set.n_samples();
  const std::size_t k = set.n_augs();
  const std::size_t m = set.n_rows();
  const Eigen::MatrixXd unit = set.unit_rows();
  Eigen::MatrixXd sim = similarity_matrix(unit, t);
  const RowIndex idx = row_index(set, labeling);

  const double inv_k2n = 1.0 / (static_cast<double>(k * k) * static_cast<double>(n));
  const double inv_kn = 1.0 / (static_cast<double>(k) * static_cast<double>(n));
  std::vector<double> weights(m);
  double total = 0.0;

  // Anchor r's denominator holds every c with keys[c] != keys[r]: sample ids
  // for DCL, labels for NSCL. CL keeps every entry.
  const int* keys = kind == LossKind::DCL ? idx.sample.data()
                    : kind == LossKind::NSCL ? idx.label.data()
                                             : nullptr;

  for (std::size_t r = 0; r < m; ++r) {
    double* col = sim.col(static_cast<Eigen::Index>(r)).data();
    double shift = -std::numeric_limits<double>::infinity();
    double z = 0.0;
    if (keys == nullptr) {
      for (std::size_t c = 0; c < m; ++c) shift = std::max(shift, col[c]);
      for (std::size_t c = 0; c < m; ++c) {
        weights[c] = std::exp(col[c] - shift);
        z += weights[c];
      }
    } else {
      const int own = keys[r];
      for (std::size_t c = 0; c < m; ++c) shift = keys[c] != own ? std::max(shift, col[c]) : shift;
      if (!std::isfinite(shift)) throw DegenerateError("anchor has an empty denominator");
      for (std::size_t c = 0; c < m; ++c) {
        weights[c] = keys[c] != own ? std::exp(col[c] - shift) : 0.0;
        z += weights[c];
      }
    }
    const double lse = shift + std::log(z);
    const std::size_t first = static_cast<std::size_t>(idx.sample[r]) * k;
    for (std::size_t l2 = 0; l2 < k; ++l2) total += lse - col[first + l2];

    if (grad_out) {
      // Column r now holds dL/dS(r, .): softmax weights from the log term,
      // -1/(K^2 N) from each positive.
      const double scale = inv_kn / z;
      for (std::size_t c = 0; c < m; ++c) col[c] = weights[c] * scale;
      for (std::size_t l2 = 0; l2 < k; ++l2) col[first + l2] -= inv_k2n;
    }
  }

  if (grad_out) {
    // S = t U U^T, so dL/dU = t (G + G^T) U; symmetrize G into its lower half.
    const auto mm = static_cast<Eigen::Index>(m);
    for (Eigen::Index c = 0; c < mm; ++c)
      for (Eigen::Index r = c; r < mm; ++r) sim(r, c) += sim(c, r);
    Eigen::MatrixXd grad_unit = sim.selfadjointView<Eigen::Lower>() * unit;
    grad_unit *= t;
    // Chain through u = z / |z|: (I - u u^T) g / |z|.
    const Eigen::MatrixXd& raw = set.data();
    grad_out->resize(mm, raw.cols());
    for (Eigen::Index r = 0; r < mm; ++r) {
      const double norm = raw.row(r).norm();
      const double radial = unit.row(r).dot(grad_unit.row(r));
      grad_out->row(r) = (grad_unit.row(r) - radial * unit.row(r)) / norm;
    }
  }
  return total * inv_k2n;
}

}  // namespace

double contrastive_loss(const EmbeddingSet& set, LossKind kind, const Labeling* labeling,
                        LossOptions options) {
  return evaluate(set, kind, labeling, options, nullptr);
}

LossWithGradient loss_and_gradient(const EmbeddingSet& set, LossKind kind,
                                   const Labeling* labeling, LossOptions options) {
  LossWithGradient out;
  out.loss = evaluate(set, kind, labeling, options, &out.gradient);
  return out;
}

Thm1Bound thm1_gap_bound(std::size_t n_total, std::size_t n_max) {
  if (n_max < 1 || n_max >= n_total) {
    throw DomainError("gap bound needs 1 <= n_max < N (got n_max=" + std::to_string(n_max) +
                      ", N=" + std::to_string(n_total) + ")");
  }
  constexpr double e2 = std::numbers::e * std::numbers::e;
  const double linear = static_cast<double>(n_max) * e2 / static_cast<double>(n_total - n_max);
  return {std::log1p(linear), linear};
}

GapReport loss_gap(const EmbeddingSet& set, const Labeling& labeling) {
  if (labeling.n_samples() != set.n_samples()) throw LabelMismatchError("labeling size mismatch");
  if (labeling.n_nonempty() < 2) throw DegenerateError("loss gap needs at least two populated classes");

  GapReport report;
  report.dcl = contrastive_loss(set, LossKind::DCL, &labeling);
  report.nscl = contrastive_loss(set, LossKind::NSCL, &labeling);
  report.cl = contrastive_loss(set, LossKind::CL, &labeling);

  const std::size_t k = set.n_augs();
  const std::size_t m = set.n_rows();
  const Eigen::MatrixXd sim = similarity_matrix(set.unit_rows(), 1.0);
  const RowIndex idx = row_index(set, &labeling);
  report.per_anchor_ratio.resize(m);
  double sum = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const auto col = sim.col(static_cast<Eigen::Index>(r));
    double z_neg = 0.0, z_pos_other = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      // Cosine similarities lie in [-1, 1]; shifting by 1 keeps every term in
      // [e^-2, 1] without a data-dependent maximum.
      const double w = std::exp(col[static_cast<Eigen::Index>(c)] - 1.0);
      if (idx.label[c] != idx.label[r]) {
        z_neg += w;
      } else if (idx.sample[c] != idx.sample[r]) {
        z_pos_other += w;
      }
    }
    report.per_anchor_ratio[r] = z_pos_other / z_neg;
    sum += std::log1p(report.per_anchor_ratio[r]);
  }
  report.gap_dcl_nscl = sum / (static_cast<double>(k) * static_cast<double>(set.n_samples()));
  report.thm1_bound = thm1_gap_bound(set.n_samples(), labeling.n_max()).log_form;
  return report;
}

// ---------------------------------------------------------------------------
// Batch estimators

BatchGapBound batch_gap_bound(std::size_t batch, int n_classes, double epsilon) {
  if (batch < 1) throw DomainError("batch size must be positive");
  if (n_classes < 2) throw DomainError("batch gap bound needs C >= 2");
  const double c = n_classes;
  if (!(epsilon > 0.0) || !(epsilon < 1.0 - 1.0 / c)) {
    throw DomainError("epsilon must lie in (0, 1 - 1/C)");
  }
  if (!(c * (1.0 - epsilon) - 1.0 > 0.0)) throw DomainError("C (1 - eps) - 1 must be positive");
  const double b = static_cast<double>(batch);
  constexpr double e2 = std::numbers::e * std::numbers::e;

  BatchGapBound out;
  out.b_bar = static_cast<std::size_t>(std::ceil(b * (1.0 - 1.0 / c - epsilon)));
  if (out.b_bar < 1) throw DomainError("reduced batch size B_bar is zero");
  out.main_term = e2 * (1.0 + epsilon * c) / (c * (1.0 - epsilon) - 1.0);
  out.tail_term = 2.0 * (std::log(2.0 * b) + 2.0) * std::exp(-2.0 * b * epsilon * epsilon);
  out.lower = -out.tail_term;
  out.upper = out.main_term + out.tail_term;
  return out;
}

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class BatchSampler {
  RowMajorMatrix unit_;
  std::size_t n_, k_;
  const Labeling& labeling_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> by_class_;

  auto row(std::size_t sample, std::size_t aug) const {
    return unit_.row(static_cast<Eigen::Index>(sample * k_ + aug));
  }

 public:
  BatchSampler(const EmbeddingSet& set, const Labeling& labeling)
      : unit_(set.unit_rows()), n_(set.n_samples()), k_(set.n_augs()), labeling_(labeling) {
    if (k_ < 2) throw DomainError("batch losses need K >= 2 to form a positive pair");
    if (labeling.n_samples() != n_) throw LabelMismatchError("labeling size mismatch");
    const auto c = static_cast<std::size_t>(labeling.n_classes());
    offsets_.assign(c + 1, 0);
    for (std::size_t y = 0; y < c; ++y) offsets_[y + 1] = offsets_[y] + labeling.class_counts()[y];
    by_class_.resize(n_);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < n_; ++i) by_class_[fill[static_cast<std::size_t>(labeling.label(i))]++] = i;
  }

  std::size_t anchor(Rng& rng) const { return uniform_index(rng, n_); }

  double positive(std::size_t i) const { return row(i, 0).dot(row(i, 1)); }

  // log sum over B members of exp(sim(z_i, z_j)) + exp(sim(z_i, z'_j)).
  double log_denominator(Rng& rng, std::size_t i, std::size_t batch, bool negatives_only) const {
    const auto z = row(i, 0);
    const auto y = static_cast<std::size_t>(labeling_.label(i));
    const std::size_t own = offsets_[y + 1] - offsets_[y];
    if (negatives_only && own == n_) throw DegenerateError("anchor has an empty negative pool");
    double sum = 0.0;
    for (std::size_t t = 0; t < batch; ++t) {
      std::size_t j;
      if (negatives_only) {
        std::size_t u = uniform_index(rng, n_ - own);
        if (u >= offsets_[y]) u += own;
        j = by_class_[u];
      } else {
        j = uniform_index(rng, n_);
      }
      const std::size_t aug = 1 + uniform_index(rng, k_ - 1);
      // Similarities are in [-1, 1]; shift by 1 for a fixed safe exponent.
      sum += std::exp(z.dot(row(j, 0)) - 1.0) + std::exp(z.dot(row(j, aug)) - 1.0);
    }
    return 1.0 + std::log(sum);
  }

};

McEstimate summarize(std::vector<double> trials) {
  McEstimate est;
  const double n = static_cast<double>(trials.size());
  double sum = 0.0;
  for (double v : trials) sum += v;
  est.mean = sum / n;
  double ss = 0.0;
  for (double v : trials) ss += (v - est.mean) * (v - est.mean);
  est.std_error = trials.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  est.trials = std::move(trials);
  return est;
}

}  // namespace

McEstimate batch_loss_estimate(const EmbeddingSet& set, BatchLossKind kind,
                               const Labeling& labeling, const BatchSpec& spec) {
  if (spec.n_trials < 1) throw DomainError("n_trials must be positive");
  const BatchSampler sampler(set, labeling);
  std::size_t batch = spec.batch_size;
  if (kind == BatchLossKind::NSCL) {
    batch = batch_gap_bound(spec.batch_size, labeling.n_classes(), spec.epsilon).b_bar;
  } else if (batch < 1) {
    throw DomainError("batch size must be positive");
  }
  std::vector<double> trials(spec.n_trials);
  for (std::size_t t = 0; t < spec.n_trials; ++t) {
    Rng rng = make_rng(spec.seed, t);
    const std::size_t i = sampler.anchor(rng);
    trials[t] = sampler.log_denominator(rng, i, batch, kind == BatchLossKind::NSCL) - sampler.positive(i);
  }
  return summarize(std::move(trials));
}

McEstimate batch_gap_estimate(const EmbeddingSet& set, const Labeling& labeling,
                              const BatchSpec& spec) {
  if (spec.n_trials < 1) throw DomainError("n_trials must be positive");
  const BatchSampler sampler(set, labeling);
  const std::size_t b_bar = batch_gap_bound(spec.batch_size, labeling.n_classes(), spec.epsilon).b_bar;
  std::vector<double> trials(spec.n_trials);
  for (std::size_t t = 0; t < spec.n_trials; ++t) {
    Rng rng = make_rng(spec.seed, t);
    const std::size_t i = sampler.anchor(rng);
    const double cl = sampler.log_denominator(rng, i, spec.batch_size, false);
    const double nscl = sampler.log_denominator(rng, i, b_bar, true);
    trials[t] = cl - nscl;
  }
  return summarize(std::move(trials));
}

}  // namespace clab
