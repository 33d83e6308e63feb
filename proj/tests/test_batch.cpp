#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "clab/error.hpp"
#include "clab/losses.hpp"

using namespace clab;

namespace {

EmbeddingSet identical(std::size_t n, std::size_t k, int c) {
  Eigen::MatrixXd data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * k), 4);
  data.col(1).setConstant(2.0);
  return EmbeddingSet(n, k, data, Labeling::balanced_blocks(n, c));
}

}  // namespace

TEST_CASE("batch bound endpoints") {
  const auto b = batch_gap_bound(1024, 100, 0.05);
  CHECK(b.b_bar == 963);
  CHECK(b.lower == doctest::Approx(-0.1150339).epsilon(1e-6));
  CHECK(b.upper == doctest::Approx(0.5866758).epsilon(1e-6));

  const auto c = batch_gap_bound(1024, 20, 0.05);
  CHECK(c.b_bar == 922);
  CHECK(c.upper == doctest::Approx(0.9360401).epsilon(1e-6));
  CHECK(batch_gap_bound(256, 20, 0.02).b_bar == 239);
  CHECK(batch_gap_bound(256, 20, 0.05).b_bar == 231);
  CHECK(batch_gap_bound(1024, 20, 0.02).b_bar == 953);
  CHECK(batch_gap_bound(256, 20, 0.02).lower == doctest::Approx(-13.4253).epsilon(1e-4));
}

TEST_CASE("batch bound domain") {
  CHECK_THROWS_AS(batch_gap_bound(64, 2, 0.6), DomainError);
  CHECK_THROWS_AS(batch_gap_bound(64, 10, 0.0), DomainError);
  CHECK_THROWS_AS(batch_gap_bound(64, 1, 0.1), DomainError);
  CHECK_THROWS_AS(batch_gap_bound(0, 10, 0.1), DomainError);
}

TEST_CASE("identical embeddings give a zero-variance estimate of log 2B") {
  const auto set = identical(40, 2, 4);
  BatchSpec spec{64, 0.05, 50, 3};
  const auto cl = batch_loss_estimate(set, BatchLossKind::CL, *set.labeling(), spec);
  CHECK(cl.mean == doctest::Approx(std::log(128.0)).epsilon(1e-12));
  CHECK(cl.std_error <= 1e-12);
  const std::size_t b_bar = batch_gap_bound(64, 4, 0.05).b_bar;
  const auto nscl = batch_loss_estimate(set, BatchLossKind::NSCL, *set.labeling(), spec);
  CHECK(nscl.mean == doctest::Approx(std::log(2.0 * static_cast<double>(b_bar))).epsilon(1e-12));
  CHECK(nscl.std_error <= 1e-12);
}

TEST_CASE("batch estimates are deterministic and prefix-stable") {
  const auto set = EmbeddingSet(60, 3, Eigen::MatrixXd::Random(180, 5), Labeling::balanced_blocks(60, 6));
  BatchSpec spec{32, 0.05, 40, 11};
  const auto a = batch_gap_estimate(set, *set.labeling(), spec);
  const auto b = batch_gap_estimate(set, *set.labeling(), spec);
  CHECK(a.trials == b.trials);
  spec.n_trials = 80;
  const auto longer = batch_gap_estimate(set, *set.labeling(), spec);
  CHECK(std::equal(a.trials.begin(), a.trials.end(), longer.trials.begin()));
  spec.seed = 12;
  CHECK(batch_gap_estimate(set, *set.labeling(), spec).trials != a.trials);
}

TEST_CASE("standard error shrinks as one over root n") {
  const auto set = EmbeddingSet(200, 2, Eigen::MatrixXd::Random(400, 6), Labeling::balanced_blocks(200, 10));
  BatchSpec spec{64, 0.05, 2000, 5};
  const double se1 = batch_gap_estimate(set, *set.labeling(), spec).std_error;
  spec.n_trials = 8000;
  const double se4 = batch_gap_estimate(set, *set.labeling(), spec).std_error;
  CHECK(se4 / se1 == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("batch losses need two augmentations") {
  const auto set = identical(10, 1, 2);
  CHECK_THROWS_AS(batch_loss_estimate(set, BatchLossKind::CL, *set.labeling(), {}), DomainError);
}
