#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "clab/embedding_set.hpp"
#include "clab/geometry.hpp"
#include "clab/losses.hpp"

namespace clab {

enum class Optimizer { GD, AdaptiveMoment };
enum class Renorm { None, PerStepUnit };

std::string_view to_string(Optimizer optimizer) noexcept;
std::string_view to_string(Renorm renorm) noexcept;
Optimizer parse_optimizer(std::string_view text);
Renorm parse_renorm(std::string_view text);

struct UfmConfig {
  int n_classes = 5;
  std::size_t per_class = 20;
  std::size_t n_augs = 2;
  std::size_t dim = 8;
  LossKind loss_kind = LossKind::NSCL;
  std::size_t steps = 5000;
  double learning_rate = 0.1;
  Optimizer optimizer = Optimizer::AdaptiveMoment;
  double init_scale = 1.0;
  std::uint64_t seed = 0;
  Renorm renorm = Renorm::None;
  double clip_norm = 1e3;  // global gradient-norm clip

  std::size_t n_samples() const noexcept { return per_class * static_cast<std::size_t>(n_classes); }
};

// Validates d >= C - 1, C >= 2 and positive sizes; throws DomainError.
void validate(const UfmConfig& config);

// Global minimum of NSCL over free embeddings with balanced classes:
// log(K n (C - 1)) - 1 - 1/(C - 1). The denominator of every anchor holds
// K n (C - 1) terms, hence the K.
double ufm_target_loss(int n_classes, std::size_t per_class, std::size_t n_augs = 1);

struct TrainTrace {
  std::vector<double> loss_per_step;       // loss before the update of each step
  std::vector<double> grad_norm_per_step;  // gradient norm at that point
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  std::optional<double> target_loss;  // NSCL runs only
  EtfReport etf;
};

struct UfmResult {
  EmbeddingSet embeddings;
  TrainTrace trace;
};

// Called every `every` steps (and after the last one) with the step count
// completed so far and the current embeddings.
struct UfmCheckpoint {
  std::size_t every = 0;
  std::function<void(std::size_t, const EmbeddingSet&)> callback;
};

// Full-batch first-order minimization of the configured loss over free
// embeddings, initialized i.i.d. Normal(0, init_scale^2 / d). Labels are
// assigned blockwise. Throws Error when the loss turns non-finite.
UfmResult ufm_train(const UfmConfig& config, const UfmCheckpoint& checkpoint = {});

// The seeded initialization ufm_train starts from.
EmbeddingSet ufm_initial(const UfmConfig& config);

}  // namespace clab
