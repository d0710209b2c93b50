#include <chrono>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "g2p/error.hpp"
#include "g2p/invmap.hpp"
#include "g2p/random.hpp"
#include "test_util.hpp"

using namespace g2p;

namespace {

Dataset random_dataset(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t r = 0; r < n; ++r) {
    Input x;
    for (auto& v : x) v = rng.uniform(-3.0, 3.0);
    Output y;
    for (auto& v : y) v = rng.uniform(-0.9, 0.9);
    d.inputs.push_back(x);
    d.targets.push_back(y);
  }
  return d;
}

// Targets from a fixed linear map of the inputs, inside the tanh range.
Dataset linear_teacher(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::array<Input, kOutputs> w;
  for (auto& row : w)
    for (auto& v : row) v = rng.uniform(-0.1, 0.1);
  Dataset d;
  for (std::size_t r = 0; r < n; ++r) {
    Input x;
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    Output y{};
    for (std::size_t k = 0; k < kOutputs; ++k)
      for (std::size_t i = 0; i < kInputs; ++i) y[k] += w[k][i] * x[i];
    d.inputs.push_back(x);
    d.targets.push_back(y);
  }
  return d;
}

Mlp random_net(std::uint64_t seed) {
  Mlp net = nguyen_widrow_init(seed);
  Rng rng(seed + 1000);
  for (std::size_t i = 0; i < kInputs; ++i) {
    net.input_mean[i] = rng.uniform(-0.5, 0.5);
    net.input_scale[i] = rng.uniform(0.5, 2.0);
  }
  return net;
}

}  // namespace

TEST_CASE("Nguyen-Widrow rows have the prescribed norm") {
  const double beta = 0.7 * std::pow(15.0, 1.0 / 6.0);
  CHECK(nguyen_widrow_beta(15, 6) == doctest::Approx(beta).epsilon(1e-15));
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    const Mlp net = nguyen_widrow_init(seed);
    for (std::size_t h = 0; h < kHidden; ++h) {
      double n2 = 0;
      for (std::size_t i = 0; i < kInputs; ++i) n2 += net.w1(h, i) * net.w1(h, i);
      CHECK(std::abs(std::sqrt(n2) - beta) < 1e-9);
      CHECK(std::abs(net.b1(h)) <= beta);
    }
  }
  CHECK(nguyen_widrow_init(4).params == nguyen_widrow_init(4).params);
  CHECK(nguyen_widrow_init(4).params != nguyen_widrow_init(5).params);
}

TEST_CASE("zero weights give the middle of the PWM range") {
  Mlp net;
  const Output y = forward(net, {1, 2, 3, 4, 5, 6});
  for (double v : y) CHECK(v == 127.5);
}

TEST_CASE("forward matches a hand-evaluated network") {
  Mlp net;
  net.input_mean = {1.0, 0, 0, 0, 0, 0};
  net.input_scale = {2.0, 1, 1, 1, 1, 1};
  net.w1(0, 0) = 0.5;
  net.w1(0, 3) = -0.25;
  net.b1(0) = 0.1;
  net.w1(4, 1) = 1.5;
  net.w2(0, 0) = 2.0;
  net.w2(2, 4) = -0.75;
  net.w2(2, 0) = 0.3;
  net.b2(1) = -0.2;
  const Input x{3.0, 0.4, 0, 2.0, 0, 0};
  const double h0 = std::tanh(0.5 * (3.0 - 1.0) / 2.0 - 0.25 * 2.0 + 0.1);
  const double h4 = std::tanh(1.5 * 0.4);
  const Output expect{127.5 + 127.5 * std::tanh(2.0 * h0), 127.5 + 127.5 * std::tanh(-0.2),
                      127.5 + 127.5 * std::tanh(0.3 * h0 - 0.75 * h4)};
  const Output y = forward(net, x);
  for (std::size_t k = 0; k < kOutputs; ++k) CHECK(std::abs(y[k] - expect[k]) < 1e-10);
}

TEST_CASE("forward output stays in range and rejects non-finite inputs") {
  Mlp net = random_net(3);
  for (auto& p : net.params) p *= 50.0;
  Rng rng(8);
  for (int k = 0; k < 500; ++k) {
    Input x;
    for (auto& v : x) v = rng.uniform(-1e6, 1e6);
    for (double v : forward(net, x)) {
      CHECK(v >= 0.0);
      CHECK(v <= 255.0);
    }
  }
  try {
    forward(net, {0, 0, std::nan(""), 0, 0, 0});
    FAIL("expected NonFiniteInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteInput);
  }
  CHECK_THROWS_AS(forward(net, {0, 0, 0, INFINITY, 0, 0}), Error);
}

TEST_CASE("mse") {
  const std::vector<Output> a{{1, 2, 3}, {4, 5, 6}};
  const std::vector<Output> b{{1, 2, 3}, {4, 5, 9}};
  CHECK(mse<kOutputs>(a, a) == 0.0);
  CHECK(mse<kOutputs>(a, b) == doctest::Approx(9.0 / 6.0));
  const std::vector<Output> c{{0, 0, 0}};
  try {
    mse<kOutputs>(a, c);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("analytic gradient matches central differences") {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Mlp net = random_net(seed);
    const Dataset data = random_dataset(seed * 7, 16);
    std::vector<std::size_t> batch(data.size());
    std::iota(batch.begin(), batch.end(), 0);
    const Params g = gradient(net, data, batch);
    const double h = 1e-5;
    for (std::size_t p = 0; p < kParamCount; ++p) {
      Mlp plus = net, minus = net;
      plus.params[p] += h;
      minus.params[p] -= h;
      const double fd = (batch_loss(plus, data, batch) - batch_loss(minus, data, batch)) / (2 * h);
      const double rel = std::abs(fd - g[p]) / std::max(1e-7, std::abs(fd) + std::abs(g[p]));
      worst = std::max(worst, rel);
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(worst < 1e-4);
  CHECK(seconds < 5.0);
}

TEST_CASE("training fits a linear teacher") {
  TrainConfig cfg;
  cfg.seed = 3;
  cfg.learning_rate = 5e-3;
  const TrainResult r = train(linear_teacher(1, 2000), cfg);
  CHECK(r.history.best_test_mse() < 1e-3);
  CHECK(r.history.train_size + r.history.test_size == 2000);
  CHECK(r.history.test_size == 400);  // test:train = 1:4
}

TEST_CASE("training is deterministic given the seed") {
  TrainConfig cfg;
  cfg.seed = 9;
  cfg.max_epochs = 10;
  cfg.patience = 3;
  const Dataset d = linear_teacher(2, 400);
  const TrainResult a = train(d, cfg), b = train(d, cfg);
  CHECK(a.net.params == b.net.params);
  CHECK(a.net.input_mean == b.net.input_mean);
  cfg.seed = 10;
  CHECK(train(d, cfg).net.params != a.net.params);
}

TEST_CASE("training never exceeds the epoch cap") {
  TrainConfig cfg;
  cfg.seed = 1;
  cfg.max_epochs = 100;
  cfg.patience = 99;
  const TrainResult r = train(linear_teacher(4, 64), cfg);
  CHECK(r.history.epochs.size() <= 101);
  CHECK(r.history.epochs.back().epoch <= 100);
}

TEST_CASE("early stopping returns the best weights seen") {
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.learning_rate = 1e-2;
  const Dataset d = random_dataset(6, 300);  // nothing to learn, so the test loss turns up
  const TrainResult r = train(d, cfg);
  REQUIRE(r.history.stopped_early);
  const auto& best = r.history.epochs[static_cast<std::size_t>(r.history.best_epoch)];
  CHECK(best.test_mse == r.history.best_test_mse());
  CHECK(r.history.epochs.size() == static_cast<std::size_t>(r.history.best_epoch + cfg.patience + 1));
  REQUIRE(r.history.best_epoch >= 1);
  // The same run truncated at the best epoch ends on identical weights.
  TrainConfig cut = cfg;
  cut.max_epochs = r.history.best_epoch + 1;
  cut.patience = cut.max_epochs - 1;
  const TrainResult rerun = train(d, cut);
  CHECK(rerun.history.best_epoch == r.history.best_epoch);
  CHECK(rerun.net.params == r.net.params);
}

TEST_CASE("training input validation") {
  TrainConfig cfg;
  try {
    train(random_dataset(1, 5), cfg);
    FAIL("expected DatasetTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DatasetTooSmall);
  }
  Dataset bad = random_dataset(1, 20);
  bad.targets.pop_back();
  CHECK_THROWS_AS(train(bad, cfg), Error);
  bad = random_dataset(1, 20);
  bad.inputs[3][2] = std::nan("");
  CHECK_THROWS_AS(train(bad, cfg), Error);
  TrainConfig bad_cfg;
  bad_cfg.patience = 100;
  CHECK_THROWS_AS(bad_cfg.validate(), Error);
  bad_cfg = {};
  bad_cfg.test_split = 1.0;
  CHECK_THROWS_AS(bad_cfg.validate(), Error);
  CHECK(TrainConfig{}.test_fraction() == doctest::Approx(0.2));
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  testing::ScratchDir dir("ckpt");
  TrainConfig cfg;
  cfg.seed = 12;
  cfg.max_epochs = 5;
  cfg.patience = 2;
  const TrainResult r = train(linear_teacher(3, 200), cfg);
  Checkpoint c{r.net, r.history, 12, "unit test"};
  save_checkpoint(c, dir / "net.json");
  const Checkpoint back = load_checkpoint(dir / "net.json");
  CHECK(back.net.params == c.net.params);
  CHECK(back.net.input_mean == c.net.input_mean);
  CHECK(back.net.input_scale == c.net.input_scale);
  CHECK(back.net.output_offset == c.net.output_offset);
  CHECK(back.seed == 12);
  CHECK(back.provenance == "unit test");
  REQUIRE(back.history.epochs.size() == c.history.epochs.size());
  for (std::size_t i = 0; i < c.history.epochs.size(); ++i) {
    CHECK(back.history.epochs[i].train_mse == c.history.epochs[i].train_mse);
    CHECK(back.history.epochs[i].test_mse == c.history.epochs[i].test_mse);
  }
  CHECK(back.history.best_epoch == c.history.best_epoch);
  // Saving the loaded checkpoint reproduces the file.
  save_checkpoint(back, dir / "again.json");
  CHECK(testing::slurp(dir / "net.json") == testing::slurp(dir / "again.json"));
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), Error);
}
