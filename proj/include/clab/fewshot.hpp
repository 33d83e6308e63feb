#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "clab/embedding_set.hpp"

namespace clab {

enum class Classifier { NCC, LinearProbe };

std::string_view to_string(Classifier classifier) noexcept;
Classifier parse_classifier(std::string_view text);

struct ProbeConfig {
  std::size_t epochs = 500;
  std::size_t max_batch = 256;  // batch = min(support rows, max_batch)
  double learning_rate = 3e-4;
  double weight_decay = 5e-4;
  double momentum = 0.9;
};

struct FewShotConfig {
  std::size_t shots = 1;  // m
  int n_way = 2;          // C'
  std::size_t n_support_draws = 5;
  // 0 picks the default: 1 task when C' equals the number of classes, 10 otherwise.
  std::size_t n_tasks = 0;
  Classifier classifier = Classifier::NCC;
  std::uint64_t seed = 0;
};

struct FewShotTrial {
  std::size_t task = 0;
  std::size_t draw = 0;
  double error = 0.0;
};

struct FewShotResult {
  double mean_error = 0.0;
  double std = 0.0;        // sample std of per-trial errors
  double std_error = 0.0;  // std / sqrt(trials): Monte-Carlo std of mean_error
  std::vector<double> per_trial;
  std::vector<FewShotTrial> trials;
};

// argmin_c |query - centers.row(c)|; ties go to the lowest index.
std::size_t ncc_predict(const Eigen::MatrixXd& centers, const Eigen::Ref<const Eigen::RowVectorXd>& query);

// Multinomial logistic regression on (x - shift) where shift is the support
// mean. Centering is an affine reparameterization of the same linear
// hypothesis class; it keeps the small default learning rate from spending
// its whole budget on the bias.
struct LinearClassifier {
  Eigen::MatrixXd weights;  // C' x d
  Eigen::VectorXd bias;     // C'
  Eigen::RowVectorXd shift;

  std::size_t predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

// Zero-initialized mini-batch SGD with momentum and weight decay on the
// softmax cross-entropy. Shuffling uses stream derive_seed(seed, epoch).
LinearClassifier train_linear_probe(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                    int n_classes, const ProbeConfig& config, std::uint64_t seed);

// Monte-Carlo m-shot error: per task a random C'-subset of classes, per draw
// m support samples per class (all their augmentations) without replacement;
// the error is measured on every remaining row of the selected classes.
FewShotResult estimate_mshot_error(const EmbeddingSet& set, const Labeling& labeling,
                                   const FewShotConfig& config,
                                   const std::optional<ProbeConfig>& probe = std::nullopt);

}  // namespace clab
