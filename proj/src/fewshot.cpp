#include "clab/fewshot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clab/error.hpp"
#include "clab/rng.hpp"

namespace clab {

std::string_view to_string(Classifier classifier) noexcept {
  return classifier == Classifier::NCC ? "ncc" : "lp";
}

Classifier parse_classifier(std::string_view text) {
  if (text == "ncc" || text == "NCC") return Classifier::NCC;
  if (text == "lp" || text == "LP" || text == "linear_probe") return Classifier::LinearProbe;
  throw DomainError("unknown classifier '" + std::string(text) + "'");
}

std::size_t ncc_predict(const Eigen::MatrixXd& centers, const Eigen::Ref<const Eigen::RowVectorXd>& query) {
  if (centers.rows() == 0) throw DomainError("NCC needs at least one center");
  std::size_t best = 0;
  double best_dist = (centers.row(0) - query).squaredNorm();
  for (Eigen::Index c = 1; c < centers.rows(); ++c) {
    const double dist = (centers.row(c) - query).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<std::size_t>(c);
    }
  }
  return best;
}

std::size_t LinearClassifier::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  const Eigen::VectorXd logits = weights * (x - shift).transpose() + bias;
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[best]) best = c;
  }
  return static_cast<std::size_t>(best);
}

namespace {

// Fisher-Yates with uniform_index so shuffles match across platforms.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

}  // namespace

LinearClassifier train_linear_probe(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                    int n_classes, const ProbeConfig& config, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (n == 0 || labels.size() != n) throw DomainError("probe support is empty or mislabeled");
  if (n_classes < 2) throw DomainError("probe needs at least two classes");
  std::vector<char> present(static_cast<std::size_t>(n_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw DomainError("probe label out of range");
    present[static_cast<std::size_t>(y)] = 1;
  }
  if (std::count(present.begin(), present.end(), 1) < 2) {
    throw DegenerateError("probe support contains a single class");
  }
  if (config.epochs < 1 || config.max_batch < 1 || !(config.learning_rate > 0.0) ||
      !(config.weight_decay >= 0.0) || !(config.momentum >= 0.0)) {
    throw DomainError("invalid probe configuration");
  }

  const Eigen::Index c = n_classes;
  const Eigen::Index d = features.cols();
  LinearClassifier model;
  model.shift = features.colwise().mean();
  model.weights = Eigen::MatrixXd::Zero(c, d);
  model.bias = Eigen::VectorXd::Zero(c);
  const Eigen::MatrixXd x = features.rowwise() - model.shift;

  Eigen::MatrixXd vel_w = Eigen::MatrixXd::Zero(c, d);
  Eigen::VectorXd vel_b = Eigen::VectorXd::Zero(c);
  Eigen::MatrixXd grad_w(c, d);
  Eigen::VectorXd grad_b(c);
  Eigen::VectorXd logits(c);
  const std::size_t batch = std::min(n, config.max_batch);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng = make_rng(seed, epoch);
    shuffle(order, rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      grad_w.setZero();
      grad_b.setZero();
      for (std::size_t t = start; t < stop; ++t) {
        const auto row = x.row(static_cast<Eigen::Index>(order[t]));
        logits = model.weights * row.transpose() + model.bias;
        const double top = logits.maxCoeff();
        logits = (logits.array() - top).exp();
        logits /= logits.sum();
        logits[labels[order[t]]] -= 1.0;
        grad_w.noalias() += logits * row;
        grad_b += logits;
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      // SGD with coupled L2 weight decay on the weights, torch-style momentum.
      grad_w = grad_w * inv + config.weight_decay * model.weights;
      grad_b *= inv;
      vel_w = config.momentum * vel_w + grad_w;
      vel_b = config.momentum * vel_b + grad_b;
      model.weights -= config.learning_rate * vel_w;
      model.bias -= config.learning_rate * vel_b;
    }
  }
  return model;
}

FewShotResult estimate_mshot_error(const EmbeddingSet& set, const Labeling& labeling,
                                   const FewShotConfig& config, const std::optional<ProbeConfig>& probe) {
  if (labeling.n_samples() != set.n_samples()) throw LabelMismatchError("labeling size mismatch");
  if (config.shots < 1) throw DomainError("m must be at least 1");
  if (config.n_way < 2 || config.n_way > labeling.n_classes()) {
    throw DomainError("n_way must lie in [2, C]");
  }
  if (config.n_support_draws < 1) throw DomainError("need at least one support draw");

  const int total_classes = labeling.n_classes();
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(total_classes));
  for (std::size_t i = 0; i < set.n_samples(); ++i) members[static_cast<std::size_t>(labeling.label(i))].push_back(i);

  const std::size_t n_tasks =
      config.n_tasks > 0 ? config.n_tasks : (config.n_way == total_classes ? 1 : 10);
  const ProbeConfig probe_cfg = probe.value_or(ProbeConfig{});
  const std::size_t k = set.n_augs();
  const Eigen::MatrixXd& x = set.data();
  const auto way = static_cast<std::size_t>(config.n_way);

  FewShotResult result;
  for (std::size_t task = 0; task < n_tasks; ++task) {
    Rng task_rng = make_rng(config.seed, task);
    std::vector<int> classes(static_cast<std::size_t>(total_classes));
    std::iota(classes.begin(), classes.end(), 0);
    if (config.n_way < total_classes) {
      shuffle(classes, task_rng);
      classes.resize(way);
      std::sort(classes.begin(), classes.end());
    }
    for (int cls : classes) {
      if (members[static_cast<std::size_t>(cls)].size() < config.shots + 1) {
        throw DomainError("class " + std::to_string(cls) + " has fewer than m + 1 samples");
      }
    }

    for (std::size_t draw = 0; draw < config.n_support_draws; ++draw) {
      Rng rng = make_rng(derive_seed(config.seed, task), draw + 1);
      std::vector<std::vector<std::size_t>> support(way), query(way);
      for (std::size_t c = 0; c < way; ++c) {
        auto pool = members[static_cast<std::size_t>(classes[c])];
        shuffle(pool, rng);
        support[c].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(config.shots));
        query[c].assign(pool.begin() + static_cast<std::ptrdiff_t>(config.shots), pool.end());
      }

      std::size_t errors = 0, evaluated = 0;
      auto score = [&](auto&& predict) {
        for (std::size_t c = 0; c < way; ++c)
          for (std::size_t i : query[c])
            for (std::size_t l = 0; l < k; ++l, ++evaluated)
              if (predict(x.row(static_cast<Eigen::Index>(i * k + l))) != c) ++errors;
      };

      if (config.classifier == Classifier::NCC) {
        Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(way), x.cols());
        for (std::size_t c = 0; c < way; ++c) {
          for (std::size_t i : support[c])
            for (std::size_t l = 0; l < k; ++l) centers.row(static_cast<Eigen::Index>(c)) += x.row(static_cast<Eigen::Index>(i * k + l));
          centers.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(support[c].size() * k);
        }
        score([&](const auto& row) { return ncc_predict(centers, row); });
      } else {
        Eigen::MatrixXd features(static_cast<Eigen::Index>(way * config.shots * k), x.cols());
        std::vector<int> labels;
        Eigen::Index r = 0;
        for (std::size_t c = 0; c < way; ++c)
          for (std::size_t i : support[c])
            for (std::size_t l = 0; l < k; ++l, ++r) {
              features.row(r) = x.row(static_cast<Eigen::Index>(i * k + l));
              labels.push_back(static_cast<int>(c));
            }
        const LinearClassifier model = train_linear_probe(
            features, labels, config.n_way, probe_cfg, derive_seed(derive_seed(config.seed, task), draw));
        score([&](const auto& row) { return model.predict(row); });
      }
      const double err = static_cast<double>(errors) / static_cast<double>(evaluated);
      result.per_trial.push_back(err);
      result.trials.push_back({task, draw, err});
    }
  }

  const double n = static_cast<double>(result.per_trial.size());
  result.mean_error = std::accumulate(result.per_trial.begin(), result.per_trial.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : result.per_trial) ss += (e - result.mean_error) * (e - result.mean_error);
  result.std = result.per_trial.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  result.std_error = result.std / std::sqrt(n);
  return result;
}

}  // namespace clab
