#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "clab/embedding_set.hpp"

namespace clab {

// Per-class moments with every augmentation pooled as a draw of its class.
// Population convention (divide by the class row count).
struct ClassStats {
  Eigen::MatrixXd means;       // C x d
  Eigen::VectorXd variances;   // trace variance sigma_c^2
  Eigen::MatrixXd pair_dists;  // |mu_i - mu_j|
  // dir_vars(i, j): variance of <x - mu_i, u_ij> over class i, with
  // u_ij = (mu_i - mu_j) / |mu_i - mu_j|. Zero on the diagonal and for
  // coincident means.
  Eigen::MatrixXd dir_vars;
  std::vector<std::size_t> counts;  // rows per class
  bool degenerate = false;          // some pair of means coincides
};

// Requires C >= 2 with every class populated.
ClassStats class_stats(const EmbeddingSet& set, const Labeling& labeling);

// Averages over ordered pairs i != j.
struct DispersionSummary {
  double cdnv_avg = 0.0;       // sigma_i^2 / d_ij^2
  double cdnv_sym_avg = 0.0;   // (sigma_i^2 + sigma_j^2) / d_ij^2; fed to the bounds
  double dir_cdnv_avg = 0.0;   // sigma_ij^2 / d_ij^2
  double sqrt_cdnv_avg = 0.0;  // sqrt((sigma_i^2 + sigma_j^2) / d_ij^2)
};

// Throws DegenerateError when two class means coincide.
DispersionSummary dispersion(const ClassStats& stats);

// Neural-collapse diagnostics, computed on unit-normalized embeddings.
struct EtfReport {
  double norm_mean = 0.0;       // mean |mu_c|
  double norm_spread = 0.0;     // max |mu_c| - min |mu_c|
  double gram_deviation = 0.0;  // max_{c != c'} |<mu_c, mu_c'> + mean|mu|^2 / (C - 1)|
  double mean_sum_norm = 0.0;   // |sum_c mu_c|
  double aug_cos_same = 1.0;    // same sample, different augmentation (1 when K = 1)
  double aug_cos_diff = 0.0;    // different samples, any augmentations
  double within_class_cos = 1.0;  // different samples of one class
  double max_pair_cos = 0.0;    // largest cosine between distinct class means
};

EtfReport etf_report(const EmbeddingSet& set, const Labeling& labeling);

// Linear CKA between the N*K row representations (centered Gram matrices).
double cka(const EmbeddingSet& a, const EmbeddingSet& b);

// Spearman correlation of the upper-triangular Euclidean distance entries.
double rsa(const EmbeddingSet& a, const EmbeddingSet& b);

// Average ranks (1-based, ties share their mean rank).
std::vector<double> average_ranks(const std::vector<double>& values);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace clab
