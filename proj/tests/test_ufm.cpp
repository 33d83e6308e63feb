#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "clab/error.hpp"
#include "clab/ufm.hpp"

using namespace clab;

TEST_CASE("config validation") {
  UfmConfig cfg;
  cfg.dim = 3;
  CHECK_THROWS_AS(validate(cfg), DomainError);
  cfg.dim = 4;
  CHECK_NOTHROW(validate(cfg));
  cfg.n_classes = 1;
  CHECK_THROWS_AS(validate(cfg), DomainError);
}

TEST_CASE("initialization is seeded") {
  UfmConfig cfg;
  cfg.seed = 4;
  CHECK(ufm_initial(cfg) == ufm_initial(cfg));
  const auto init = ufm_initial(cfg);
  CHECK(init.labeling()->labels()[20] == 1);
  cfg.seed = 5;
  CHECK_FALSE(ufm_initial(cfg) == init);
}

TEST_CASE("short NSCL run decreases the loss and reproduces") {
  UfmConfig cfg;
  cfg.steps = 300;
  cfg.seed = 1;
  const auto a = ufm_train(cfg);
  const auto b = ufm_train(cfg);
  CHECK(a.trace.loss_per_step == b.trace.loss_per_step);
  CHECK(a.trace.final_loss < a.trace.loss_per_step.front());
  REQUIRE(a.trace.target_loss.has_value());
  CHECK(a.trace.final_loss >= *a.trace.target_loss - 1e-9);
  CHECK(a.trace.loss_per_step.size() == 300);
}

TEST_CASE("plain gradient descent with renormalization") {
  UfmConfig cfg;
  cfg.optimizer = Optimizer::GD;
  cfg.renorm = Renorm::PerStepUnit;
  cfg.learning_rate = 1.0;
  cfg.steps = 200;
  const auto r = ufm_train(cfg);
  CHECK((r.embeddings.data().rowwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(r.trace.final_loss < r.trace.loss_per_step.front());
}

TEST_CASE("checkpoints fire on schedule") {
  UfmConfig cfg;
  cfg.steps = 25;
  std::vector<std::size_t> seen;
  ufm_train(cfg, {10, [&](std::size_t step, const EmbeddingSet&) { seen.push_back(step); }});
  CHECK(seen == std::vector<std::size_t>{10, 20, 25});
}

TEST_CASE("zero steps leaves the initialization") {
  UfmConfig cfg;
  cfg.steps = 0;
  const auto r = ufm_train(cfg);
  CHECK(r.embeddings == ufm_initial(cfg));
  CHECK(r.trace.loss_per_step.empty());
}
