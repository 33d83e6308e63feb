#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "clab/error.hpp"
#include "clab/geometry.hpp"

using namespace clab;

TEST_CASE("class stats on a hand-built set") {
  // Class 0 at (+-0.5, 0) around (0, 0), class 1 at (2, +-0.5) around (2, 0).
  const Eigen::MatrixXd data{{0.5, 0.0}, {-0.5, 0.0}, {2.0, 0.5}, {2.0, -0.5}};
  const EmbeddingSet set(4, 1, data, Labeling({0, 0, 1, 1}, 2));
  const auto stats = class_stats(set, *set.labeling());
  CHECK(stats.means.row(0).norm() <= 1e-15);
  CHECK(stats.means(1, 0) == 2.0);
  CHECK(stats.variances[0] == doctest::Approx(0.25));
  CHECK(stats.variances[1] == doctest::Approx(0.25));
  CHECK(stats.pair_dists(0, 1) == doctest::Approx(2.0));
  // Class 0 spreads along the axis joining the means, class 1 across it.
  CHECK(stats.dir_vars(0, 1) == doctest::Approx(0.25));
  CHECK(stats.dir_vars(1, 0) == doctest::Approx(0.0));
  const auto summary = dispersion(stats);
  CHECK(summary.cdnv_avg == doctest::Approx(0.0625));
  CHECK(summary.cdnv_sym_avg == doctest::Approx(0.125));
  CHECK(summary.dir_cdnv_avg == doctest::Approx(0.03125));
  CHECK(summary.sqrt_cdnv_avg == doctest::Approx(std::sqrt(0.125)));
}

TEST_CASE("coincident means are rejected by the dispersion summary") {
  const Eigen::MatrixXd data{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  const EmbeddingSet set(4, 1, data, Labeling({0, 0, 1, 1}, 2));
  const auto stats = class_stats(set, *set.labeling());
  CHECK(stats.degenerate);
  CHECK_THROWS_AS(dispersion(stats), DegenerateError);
}

TEST_CASE("directional CDNV is about 1/d of CDNV for isotropic classes") {
  for (std::size_t d : {4u, 16u}) {
    GaussianTaskSpec spec;
    spec.class_means = 3.0 * simplex_etf(4, d, 2u);
    spec.latent_sigma = 0.4;
    spec.per_class = 4000;
    spec.seed = d;
    const auto set = generate_gaussian_classes(spec);
    const auto summary = dispersion(class_stats(set, *set.labeling()));
    CHECK(summary.dir_cdnv_avg / summary.cdnv_avg == doctest::Approx(1.0 / static_cast<double>(d)).epsilon(0.3));
  }
}

TEST_CASE("ETF report of an exact simplex") {
  const int c = 6;
  const Eigen::MatrixXd means = simplex_etf(c, 7, 5u);
  Eigen::MatrixXd data(c * 3 * 2, 7);
  for (int i = 0; i < c * 3; ++i) data.middleRows(2 * i, 2).rowwise() = means.row(i / 3);
  const EmbeddingSet set(static_cast<std::size_t>(c * 3), 2, data, Labeling::balanced_blocks(18, c));
  const auto etf = etf_report(set, *set.labeling());
  CHECK(etf.norm_mean == doctest::Approx(1.0));
  CHECK(etf.norm_spread <= 1e-12);
  CHECK(etf.gram_deviation <= 1e-12);
  CHECK(etf.mean_sum_norm <= 1e-12);
  CHECK(etf.aug_cos_same == doctest::Approx(1.0));
  CHECK(etf.within_class_cos == doctest::Approx(1.0));
  CHECK(etf.max_pair_cos == doctest::Approx(-1.0 / (c - 1)));
}

TEST_CASE("CKA and RSA identities") {
  const auto a = generate_random_unit(80, 2, 10, 1);
  CHECK(cka(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rsa(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  const Eigen::MatrixXd q = random_orthogonal(10, 4);
  const EmbeddingSet rotated(80, 2, a.data() * q);
  CHECK(std::abs(cka(a, rotated) - 1.0) <= 1e-9);
  CHECK(std::abs(rsa(a, rotated) - 1.0) <= 1e-9);
  const Eigen::MatrixXd gram = q.transpose() * q;
  CHECK((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("CKA of independent random sets is small") {
  const auto a = generate_random_unit(1000, 1, 64, 10);
  const auto b = generate_random_unit(1000, 1, 64, 20);
  CHECK(cka(a, b) <= 0.1);
}

TEST_CASE("CKA rejects constant representations") {
  const EmbeddingSet constant(3, 1, Eigen::MatrixXd::Ones(3, 2));
  const auto a = generate_random_unit(3, 1, 2, 1);
  CHECK_THROWS_AS(cka(constant, a), DegenerateError);
}

TEST_CASE("average ranks share ties") {
  CHECK(average_ranks({3.0, 1.0, 3.0, 2.0}) == std::vector<double>{3.5, 1.0, 3.5, 2.0});
  CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
}
