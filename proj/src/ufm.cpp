#include "clab/ufm.hpp"

#include <cmath>
#include <random>
#include <string>

#include "clab/error.hpp"
#include "clab/rng.hpp"

namespace clab {

std::string_view to_string(Optimizer optimizer) noexcept {
  return optimizer == Optimizer::GD ? "gd" : "adam";
}

std::string_view to_string(Renorm renorm) noexcept {
  return renorm == Renorm::None ? "none" : "per_step_unit";
}

Optimizer parse_optimizer(std::string_view text) {
  if (text == "gd") return Optimizer::GD;
  if (text == "adam" || text == "adaptive_moment") return Optimizer::AdaptiveMoment;
  throw DomainError("unknown optimizer '" + std::string(text) + "'");
}

Renorm parse_renorm(std::string_view text) {
  if (text == "none") return Renorm::None;
  if (text == "per_step_unit") return Renorm::PerStepUnit;
  throw DomainError("unknown renorm mode '" + std::string(text) + "'");
}

void validate(const UfmConfig& config) {
  if (config.n_classes < 2) throw DomainError("UFM needs C >= 2");
  if (config.per_class < 1 || config.n_augs < 1 || config.dim < 1) {
    throw DomainError("UFM sizes must be positive");
  }
  if (config.dim + 1 < static_cast<std::size_t>(config.n_classes)) {
    throw DomainError("UFM needs d >= C - 1 (got d=" + std::to_string(config.dim) +
                      ", C=" + std::to_string(config.n_classes) + ")");
  }
  if (!(config.learning_rate > 0.0) || !(config.init_scale > 0.0) || !(config.clip_norm > 0.0)) {
    throw DomainError("learning rate, init scale and clip norm must be positive");
  }
}

double ufm_target_loss(int n_classes, std::size_t per_class, std::size_t n_augs) {
  if (n_classes < 2) throw DomainError("target loss needs C >= 2");
  if (per_class < 1 || n_augs < 1) throw DomainError("target loss needs n, K >= 1");
  const double c = n_classes;
  return std::log(static_cast<double>(n_augs) * static_cast<double>(per_class) * (c - 1.0)) - 1.0 -
         1.0 / (c - 1.0);
}

EmbeddingSet ufm_initial(const UfmConfig& config) {
  validate(config);
  const std::size_t n = config.n_samples();
  const auto rows = static_cast<Eigen::Index>(n * config.n_augs);
  const auto d = static_cast<Eigen::Index>(config.dim);
  Rng rng(derive_seed(config.seed, 0));
  std::normal_distribution<double> normal(0.0, config.init_scale / std::sqrt(static_cast<double>(d)));
  Eigen::MatrixXd z(rows, d);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index k = 0; k < d; ++k) z(r, k) = normal(rng);
  return EmbeddingSet(n, config.n_augs, std::move(z), Labeling::balanced_blocks(n, config.n_classes));
}

UfmResult ufm_train(const UfmConfig& config, const UfmCheckpoint& checkpoint) {
  EmbeddingSet current = ufm_initial(config);
  const std::size_t n = config.n_samples();
  const std::size_t k = config.n_augs;
  const Labeling labeling = *current.labeling();
  Eigen::MatrixXd z = current.data();
  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(z.rows(), z.cols());
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(z.rows(), z.cols());
  constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

  TrainTrace trace;
  trace.loss_per_step.reserve(config.steps);
  trace.grad_norm_per_step.reserve(config.steps);

  for (std::size_t step = 0; step < config.steps; ++step) {
    LossWithGradient lg = loss_and_gradient(current, config.loss_kind, &labeling);
    if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
      throw Error("UFM diverged at step " + std::to_string(step) + ": non-finite loss or gradient");
    }
    const double gnorm = lg.gradient.norm();
    trace.loss_per_step.push_back(lg.loss);
    trace.grad_norm_per_step.push_back(gnorm);
    if (gnorm > config.clip_norm) lg.gradient *= config.clip_norm / gnorm;

    if (config.optimizer == Optimizer::GD) {
      z -= config.learning_rate * lg.gradient;
    } else {
      const double t = static_cast<double>(step + 1);
      m1 = beta1 * m1 + (1.0 - beta1) * lg.gradient;
      m2 = beta2 * m2 + (1.0 - beta2) * lg.gradient.cwiseProduct(lg.gradient);
      const double c1 = 1.0 - std::pow(beta1, t);
      const double c2 = 1.0 - std::pow(beta2, t);
      z.array() -= config.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + adam_eps);
    }
    if (config.renorm == Renorm::PerStepUnit) z.rowwise().normalize();
    if (!z.allFinite()) throw Error("UFM diverged at step " + std::to_string(step) + ": non-finite embedding");

    current = EmbeddingSet(n, k, z, labeling);
    const std::size_t done = step + 1;
    if (checkpoint.callback && checkpoint.every > 0 &&
        (done % checkpoint.every == 0 || done == config.steps)) {
      checkpoint.callback(done, current);
    }
  }

  const LossWithGradient final_lg = loss_and_gradient(current, config.loss_kind, &labeling);
  if (!std::isfinite(final_lg.loss)) throw Error("UFM diverged: final loss is non-finite");
  trace.final_loss = final_lg.loss;
  trace.final_grad_norm = final_lg.gradient.norm();
  if (config.loss_kind == LossKind::NSCL) {
    trace.target_loss = ufm_target_loss(config.n_classes, config.per_class, k);
  }
  trace.etf = etf_report(current, labeling);
  return UfmResult{std::move(current), std::move(trace)};
}

}  // namespace clab
