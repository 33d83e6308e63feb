#include "clab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "clab/error.hpp"

namespace clab {

namespace {

void require_classes(const EmbeddingSet& set, const Labeling& labeling) {
  if (labeling.n_samples() != set.n_samples()) throw LabelMismatchError("labeling size mismatch");
  if (labeling.n_classes() < 2) throw DomainError("class statistics need C >= 2");
  for (std::size_t c = 0; c < labeling.class_counts().size(); ++c) {
    if (labeling.class_counts()[c] == 0) {
      throw DomainError("class " + std::to_string(c) + " has no samples");
    }
  }
}

}  // namespace

ClassStats class_stats(const EmbeddingSet& set, const Labeling& labeling) {
  require_classes(set, labeling);
  const Eigen::Index c = labeling.n_classes();
  const Eigen::Index d = static_cast<Eigen::Index>(set.dim());
  const std::size_t k = set.n_augs();
  const Eigen::MatrixXd& x = set.data();

  ClassStats stats;
  stats.counts.assign(static_cast<std::size_t>(c), 0);
  stats.means = Eigen::MatrixXd::Zero(c, d);
  for (std::size_t i = 0; i < set.n_samples(); ++i) {
    const int y = labeling.label(i);
    for (std::size_t l = 0; l < k; ++l) stats.means.row(y) += x.row(static_cast<Eigen::Index>(i * k + l));
    stats.counts[static_cast<std::size_t>(y)] += k;
  }
  for (Eigen::Index y = 0; y < c; ++y) stats.means.row(y) /= static_cast<double>(stats.counts[static_cast<std::size_t>(y)]);

  // Per-class covariance; trace and quadratic forms give both variances.
  std::vector<Eigen::MatrixXd> cov(static_cast<std::size_t>(c), Eigen::MatrixXd::Zero(d, d));
  for (std::size_t i = 0; i < set.n_samples(); ++i) {
    const int y = labeling.label(i);
    for (std::size_t l = 0; l < k; ++l) {
      const Eigen::RowVectorXd centered = x.row(static_cast<Eigen::Index>(i * k + l)) - stats.means.row(y);
      cov[static_cast<std::size_t>(y)].noalias() += centered.transpose() * centered;
    }
  }
  stats.variances.resize(c);
  for (Eigen::Index y = 0; y < c; ++y) {
    auto& s = cov[static_cast<std::size_t>(y)];
    s /= static_cast<double>(stats.counts[static_cast<std::size_t>(y)]);
    stats.variances[y] = s.trace();
  }

  stats.pair_dists = Eigen::MatrixXd::Zero(c, c);
  stats.dir_vars = Eigen::MatrixXd::Zero(c, c);
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      if (i == j) continue;
      const Eigen::VectorXd diff = (stats.means.row(i) - stats.means.row(j)).transpose();
      const double dist = diff.norm();
      stats.pair_dists(i, j) = dist;
      if (dist == 0.0) {
        stats.degenerate = true;
        continue;
      }
      const Eigen::VectorXd u = diff / dist;
      stats.dir_vars(i, j) = u.dot(cov[static_cast<std::size_t>(i)] * u);
    }
  }
  return stats;
}

DispersionSummary dispersion(const ClassStats& stats) {
  const Eigen::Index c = stats.means.rows();
  if (c < 2) throw DomainError("dispersion needs C >= 2");
  DispersionSummary out;
  double n_pairs = 0.0;
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      if (i == j) continue;
      const double d2 = stats.pair_dists(i, j) * stats.pair_dists(i, j);
      if (!(d2 > 0.0)) {
        throw DegenerateError("classes " + std::to_string(i) + " and " + std::to_string(j) +
                              " have coincident means; CDNV undefined");
      }
      const double sym = (stats.variances[i] + stats.variances[j]) / d2;
      out.cdnv_avg += stats.variances[i] / d2;
      out.cdnv_sym_avg += sym;
      out.dir_cdnv_avg += stats.dir_vars(i, j) / d2;
      out.sqrt_cdnv_avg += std::sqrt(sym);
      n_pairs += 1.0;
    }
  }
  out.cdnv_avg /= n_pairs;
  out.cdnv_sym_avg /= n_pairs;
  out.dir_cdnv_avg /= n_pairs;
  out.sqrt_cdnv_avg /= n_pairs;
  return out;
}

EtfReport etf_report(const EmbeddingSet& set, const Labeling& labeling) {
  require_classes(set, labeling);
  const Eigen::MatrixXd unit = set.unit_rows();
  const std::size_t n = set.n_samples();
  const std::size_t k = set.n_augs();
  const Eigen::Index c = labeling.n_classes();
  const Eigen::Index d = unit.cols();

  // Sums of unit vectors per sample and per class turn every mean pairwise
  // cosine into |sum|^2 arithmetic, so no pair enumeration or subsampling.
  Eigen::MatrixXd sample_sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      sample_sum.row(static_cast<Eigen::Index>(i)) += unit.row(static_cast<Eigen::Index>(i * k + l));

  Eigen::MatrixXd class_sum = Eigen::MatrixXd::Zero(c, d);
  Eigen::VectorXd class_self = Eigen::VectorXd::Zero(c);  // sum_i |sample_sum_i|^2 per class
  double self_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labeling.label(i);
    const double s2 = sample_sum.row(static_cast<Eigen::Index>(i)).squaredNorm();
    class_sum.row(y) += sample_sum.row(static_cast<Eigen::Index>(i));
    class_self[y] += s2;
    self_total += s2;
  }

  EtfReport r;
  const double kk = static_cast<double>(k);
  if (k > 1) {
    r.aug_cos_same = (self_total - static_cast<double>(n) * kk) / (static_cast<double>(n) * kk * (kk - 1.0));
  }
  const Eigen::RowVectorXd total = class_sum.colwise().sum();
  r.aug_cos_diff = (total.squaredNorm() - self_total) /
                   (static_cast<double>(n) * static_cast<double>(n - 1) * kk * kk);

  double within_sum = 0.0, within_pairs = 0.0;
  for (Eigen::Index y = 0; y < c; ++y) {
    const double ny = static_cast<double>(labeling.class_counts()[static_cast<std::size_t>(y)]);
    within_sum += class_sum.row(y).squaredNorm() - class_self[y];
    within_pairs += ny * (ny - 1.0) * kk * kk;
  }
  r.within_class_cos = within_pairs > 0.0 ? within_sum / within_pairs : 1.0;

  Eigen::MatrixXd means = class_sum;
  for (Eigen::Index y = 0; y < c; ++y) {
    means.row(y) /= static_cast<double>(labeling.class_counts()[static_cast<std::size_t>(y)]) * kk;
  }
  const Eigen::VectorXd norms = means.rowwise().norm();
  r.norm_mean = norms.mean();
  r.norm_spread = norms.maxCoeff() - norms.minCoeff();
  r.mean_sum_norm = means.colwise().sum().norm();
  const double mean_sq = norms.squaredNorm() / static_cast<double>(c);
  const Eigen::MatrixXd gram = means * means.transpose();
  r.max_pair_cos = -1.0;
  for (Eigen::Index a = 0; a < c; ++a) {
    for (Eigen::Index b = 0; b < c; ++b) {
      if (a == b) continue;
      r.gram_deviation = std::max(r.gram_deviation,
                                  std::abs(gram(a, b) + mean_sq / static_cast<double>(c - 1)));
      const double denom = norms[a] * norms[b];
      if (denom > 0.0) r.max_pair_cos = std::max(r.max_pair_cos, gram(a, b) / denom);
    }
  }
  // Guard the cosine means against round-off outside [-1, 1].
  r.aug_cos_same = std::clamp(r.aug_cos_same, -1.0, 1.0);
  r.aug_cos_diff = std::clamp(r.aug_cos_diff, -1.0, 1.0);
  r.within_class_cos = std::clamp(r.within_class_cos, -1.0, 1.0);
  return r;
}

namespace {

void require_same_rows(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.n_samples() != b.n_samples() || a.n_augs() != b.n_augs()) {
    throw DomainError("similarity indices need equal N and K");
  }
}

}  // namespace

double cka(const EmbeddingSet& a, const EmbeddingSet& b) {
  require_same_rows(a, b);
  const Eigen::MatrixXd x = a.data().rowwise() - a.data().colwise().mean();
  const Eigen::MatrixXd y = b.data().rowwise() - b.data().colwise().mean();
  // <K_x, K_y>_F = |Y^T X|_F^2 for linear kernels.
  const double cross = (y.transpose() * x).squaredNorm();
  const double xx = (x.transpose() * x).norm();
  const double yy = (y.transpose() * y).norm();
  if (!(xx > 0.0) || !(yy > 0.0)) throw DegenerateError("CKA undefined for a constant representation");
  return cross / (xx * yy);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson needs two equal-length series");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateError("correlation undefined for a constant series");
  return sxy / std::sqrt(sxx * syy);
}

double rsa(const EmbeddingSet& a, const EmbeddingSet& b) {
  require_same_rows(a, b);
  auto upper_distances = [](const Eigen::MatrixXd& x) {
    const Eigen::Index m = x.rows();
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i + 1; j < m; ++j) out.push_back((x.row(i) - x.row(j)).norm());
    return out;
  };
  const auto da = upper_distances(a.data());
  const auto db = upper_distances(b.data());
  return pearson(average_ranks(da), average_ranks(db));
}

}  // namespace clab
