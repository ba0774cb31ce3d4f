#include <doctest.h>

#include <cmath>

#include "mwetag/errors.hpp"
#include "mwetag/optim.hpp"
#include "mwetag/train.hpp"
#include "test_util.hpp"

using namespace mwetag;

TEST_CASE("adam with a zero gradient leaves parameters alone") {
  Rng rng(1);
  std::vector<Tensor> params = {Tensor::parameter(testing::random_matrix(3, 4, rng)),
                                Tensor::parameter(testing::random_matrix(1, 2, rng))};
  const Matrix before0 = params[0].value();
  const Matrix before1 = params[1].value();
  AdamState state = make_adam_state(params);
  std::vector<Matrix> grads = {Matrix::Zero(3, 4), Matrix::Zero(1, 2)};
  adam_step(params, grads, state, 4e-5);
  CHECK(params[0].value() == before0);
  CHECK(params[1].value() == before1);
  CHECK(state.step == 1);
}

TEST_CASE("adam first step moves by lr/(1+eps)") {
  std::vector<Tensor> params = {Tensor::parameter(Matrix::Constant(1, 1, 0.5))};
  AdamState state = make_adam_state(params);
  std::vector<Matrix> grads = {Matrix::Constant(1, 1, 1.0)};
  adam_step(params, grads, state, 4e-5);
  const double expected = 0.5 - 4e-5 / (1.0 + 1e-8);
  CHECK(std::abs(params[0].value()(0, 0) - expected) <= 1e-15);
}

TEST_CASE("adam descends theta squared monotonically") {
  std::vector<Tensor> params = {Tensor::parameter(Matrix::Constant(1, 1, 1.0))};
  AdamState state = make_adam_state(params);
  double prev = 1.0;
  for (int i = 0; i < 10; ++i) {
    std::vector<Matrix> grads = {2.0 * params[0].value()};
    adam_step(params, grads, state, 0.1);
    const double now = std::abs(params[0].value()(0, 0));
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("adam with lr 0 advances moments only") {
  Rng rng(2);
  std::vector<Tensor> params = {Tensor::parameter(testing::random_matrix(2, 3, rng))};
  const Matrix before = params[0].value();
  AdamState state = make_adam_state(params);
  const Matrix g = testing::random_matrix(2, 3, rng);
  std::vector<Matrix> grads = {g};
  adam_step(params, grads, state, 0.0);
  CHECK(params[0].value() == before);
  CHECK(state.step == 1);
  CHECK((state.first_moment[0] - 0.1 * g).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((state.second_moment[0] - 0.001 * g.cwiseProduct(g)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("adam rejects mismatched shapes") {
  std::vector<Tensor> params = {Tensor::parameter(Matrix::Zero(2, 2))};
  AdamState state = make_adam_state(params);
  std::vector<Matrix> grads = {Matrix::Zero(2, 3)};
  CHECK_THROWS_AS(adam_step(params, grads, state, 0.1), ShapeError);
  std::vector<Matrix> none;
  CHECK_THROWS_AS(adam_step(params, none, state, 0.1), ShapeError);
}

TEST_CASE("clip_global_norm") {
  std::vector<Matrix> grads = {Matrix::Constant(1, 1, 3.0), Matrix::Constant(1, 1, 4.0)};
  CHECK(clip_global_norm(grads, 1.0) == doctest::Approx(5.0));
  CHECK(grads[0](0, 0) == doctest::Approx(0.6));
  CHECK(grads[1](0, 0) == doctest::Approx(0.8));

  std::vector<Matrix> small = {Matrix::Constant(1, 2, 0.1)};
  const Matrix copy = small[0];
  clip_global_norm(small, 1.0);
  CHECK(small[0] == copy);
}

TEST_CASE("lr_at_step warmup and decay") {
  TrainConfig cfg = TrainConfig::defaults(ModelKind::kTransformer);
  REQUIRE(cfg.lr == 4e-5);
  CHECK(lr_at_step(4, 100, cfg) == doctest::Approx(2e-5).epsilon(1e-12));
  CHECK(lr_at_step(9, 100, cfg) == 4e-5);
  CHECK(lr_at_step(0, 100, cfg) == doctest::Approx(4e-6).epsilon(1e-12));
  CHECK(lr_at_step(10, 100, cfg) == 4e-5);
  CHECK(lr_at_step(55, 100, cfg) == doctest::Approx(4e-5 * 45.0 / 90.0).epsilon(1e-12));

  for (std::size_t total : {7u, 30u, 100u, 251u}) {
    for (double frac : {0.0, 0.1, 0.33}) {
      cfg.warmup_fraction = frac;
      const auto w = static_cast<std::size_t>(std::llround(frac * static_cast<double>(total)));
      if (w > 0) CHECK(lr_at_step(w - 1, total, cfg) == cfg.lr);
      for (std::size_t s = 0; s + 1 < w; ++s) CHECK(lr_at_step(s, total, cfg) < lr_at_step(s + 1, total, cfg));
      for (std::size_t s = w; s + 1 < total; ++s) CHECK(lr_at_step(s + 1, total, cfg) <= lr_at_step(s, total, cfg));
      CHECK(lr_at_step(total - 1, total, cfg) > 0.0);
    }
  }

  cfg.warmup_fraction = 0.0;
  CHECK(lr_at_step(0, 100, cfg) == 4e-5);
  cfg.decay = DecaySchedule::kConstant;
  CHECK(lr_at_step(99, 100, cfg) == 4e-5);
}
