#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "clab/embedding_set.hpp"

namespace clab {

// Which (sample, augmentation) terms enter an anchor's denominator:
//   CL   every (j, l3), including the anchor's own sample;
//   DCL  every (j, l3) with j != i;
//   NSCL every (j, l3) with y_j != y_i.
enum class LossKind { CL, DCL, NSCL };

std::string_view to_string(LossKind kind) noexcept;
LossKind parse_loss_kind(std::string_view text);

struct LossOptions {
  // Multiplies every cosine similarity. Kept at 1 for every bound-related
  // check; the gap bound below assumes similarities in [-1, 1].
  double inverse_temperature = 1.0;
};

// Global contrastive loss, (1/(K^2 N)) sum over anchors (i, l1) and positives
// (i, l2). `labeling` defaults to the set's own labels and is required for
// NSCL. Summation runs in (i, l1, l2) order, so results are reproducible.
double contrastive_loss(const EmbeddingSet& set, LossKind kind,
                        const Labeling* labeling = nullptr, LossOptions options = {});

struct LossWithGradient {
  double loss;
  Eigen::MatrixXd gradient;  // same row layout as EmbeddingSet::data()
};

// Exact gradient with respect to the raw (unnormalized) embeddings.
LossWithGradient loss_and_gradient(const EmbeddingSet& set, LossKind kind,
                                   const Labeling* labeling = nullptr, LossOptions options = {});

inline Eigen::MatrixXd loss_gradient(const EmbeddingSet& set, LossKind kind,
                                     const Labeling* labeling = nullptr, LossOptions options = {}) {
  return loss_and_gradient(set, kind, labeling, options).gradient;
}

struct Thm1Bound {
  double log_form;     // log(1 + n_max e^2 / (N - n_max))
  double linear_form;  // n_max e^2 / (N - n_max)
};

// Label-agnostic upper bound on DCL - NSCL (and CL - NSCL). Requires
// 1 <= n_max < N.
Thm1Bound thm1_gap_bound(std::size_t n_total, std::size_t n_max);

struct GapReport {
  double dcl = 0.0;
  double nscl = 0.0;
  double cl = 0.0;
  // DCL - NSCL through the per-anchor identity (1/(KN)) sum log(1 + ratio).
  double gap_dcl_nscl = 0.0;
  // Z_pos\self / Z_neg for every anchor (i, l1), row order.
  std::vector<double> per_anchor_ratio;
  double thm1_bound = 0.0;
};

GapReport loss_gap(const EmbeddingSet& set, const Labeling& labeling);

// ---------------------------------------------------------------------------
// Mini-batch estimators. Each trial draws an anchor i uniformly, pairs its
// augmentation 0 with augmentation 1, and draws a batch with replacement; each
// batch member j contributes its augmentation 0 and one augmentation drawn
// uniformly from {1, ..., K-1}. Trial t uses the stream derive_seed(seed, t).

enum class BatchLossKind {
  CL,    // batch of B from all samples
  NSCL,  // batch of B_bar from the anchor's other classes
};

struct BatchSpec {
  std::size_t batch_size = 1024;
  double epsilon = 0.05;
  std::size_t n_trials = 1000;
  std::uint64_t seed = 0;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> trials;
};

struct BatchGapBound {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t b_bar = 0;
  double main_term = 0.0;  // e^2 (1 + eps C) / (C (1 - eps) - 1)
  double tail_term = 0.0;  // 2 (log(2B) + 2) exp(-2 B eps^2)
};

// Interval containing L^CL_B - L^NSCL_B_bar. Requires 0 < eps < 1 - 1/C and
// C (1 - eps) > 1.
BatchGapBound batch_gap_bound(std::size_t batch, int n_classes, double epsilon);

McEstimate batch_loss_estimate(const EmbeddingSet& set, BatchLossKind kind,
                               const Labeling& labeling, const BatchSpec& spec);

// Paired estimate of L^CL_B - L^NSCL_B_bar: every trial shares its anchor
// between the two losses and records the difference.
McEstimate batch_gap_estimate(const EmbeddingSet& set, const Labeling& labeling,
                              const BatchSpec& spec);

}  // namespace clab
