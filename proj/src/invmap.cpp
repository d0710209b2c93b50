#include "g2p/invmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include "json.hpp"

#include "g2p/error.hpp"
#include "g2p/random.hpp"

namespace g2p {
namespace {

Input normalize(const Mlp& net, const Input& x) {
  Input n;
  for (std::size_t i = 0; i < kInputs; ++i) n[i] = (x[i] - net.input_mean[i]) / net.input_scale[i];
  return n;
}

void nguyen_widrow_layer(Params& p, std::size_t w_offset, std::size_t b_offset, std::size_t fan_out,
                         std::size_t fan_in, Rng& rng) {
  const double beta = nguyen_widrow_beta(fan_out, fan_in);
  for (std::size_t r = 0; r < fan_out; ++r) {
    double norm2 = 0.0;
    for (std::size_t c = 0; c < fan_in; ++c) {
      double& w = p[w_offset + r * fan_in + c];
      w = rng.uniform(-1.0, 1.0);
      norm2 += w * w;
    }
    const double s = beta / std::sqrt(norm2);
    for (std::size_t c = 0; c < fan_in; ++c) p[w_offset + r * fan_in + c] *= s;
    p[b_offset + r] = rng.uniform(-beta, beta);
  }
}

}  // namespace

double nguyen_widrow_beta(std::size_t fan_out, std::size_t fan_in) {
  return 0.7 * std::pow(static_cast<double>(fan_out), 1.0 / static_cast<double>(fan_in));
}

Mlp nguyen_widrow_init(std::uint64_t seed) {
  Mlp net;
  Rng rng(derive_seed(seed, 7));
  nguyen_widrow_layer(net.params, Mlp::w1_index(0, 0), Mlp::b1_index(0), kHidden, kInputs, rng);
  nguyen_widrow_layer(net.params, Mlp::w2_index(0, 0), Mlp::b2_index(0), kOutputs, kHidden, rng);
  return net;
}

Output Mlp::forward_unit(const Input& n) const {
  std::array<double, kHidden> h;
  for (std::size_t j = 0; j < kHidden; ++j) {
    double a = b1(j);
    for (std::size_t i = 0; i < kInputs; ++i) a += w1(j, i) * n[i];
    h[j] = std::tanh(a);
  }
  Output o;
  for (std::size_t k = 0; k < kOutputs; ++k) {
    double z = b2(k);
    for (std::size_t j = 0; j < kHidden; ++j) z += w2(k, j) * h[j];
    o[k] = std::tanh(z);
  }
  return o;
}

Output forward(const Mlp& net, const Input& x) {
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "network input contains a non-finite value");
  Output o = net.forward_unit(normalize(net, x));
  for (auto& v : o) v = std::clamp(net.output_offset + net.output_gain * v, 0.0, 255.0);
  return o;
}

template <std::size_t N>
double mse(std::span<const std::array<double, N>> pred, std::span<const std::array<double, N>> truth) {
  if (pred.size() != truth.size())
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("mse shape mismatch: {} vs {} rows", pred.size(), truth.size()));
  if (pred.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t r = 0; r < pred.size(); ++r)
    for (std::size_t c = 0; c < N; ++c) {
      const double d = pred[r][c] - truth[r][c];
      acc += d * d;
    }
  return acc / static_cast<double>(pred.size() * N);
}

template double mse<kOutputs>(std::span<const Output>, std::span<const Output>);
template double mse<kInputs>(std::span<const Input>, std::span<const Input>);

void Dataset::validate() const {
  if (inputs.size() != targets.size())
    throw Error(ErrorCode::ShapeMismatch, "dataset inputs and targets differ in length");
  for (const auto& x : inputs)
    for (double v : x)
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "dataset input is not finite");
  for (const auto& y : targets)
    for (double v : y)
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "dataset target is not finite");
}

double batch_loss(const Mlp& net, const Dataset& data, std::span<const std::size_t> batch) {
  double acc = 0.0;
  for (std::size_t idx : batch) {
    const Output o = net.forward_unit(normalize(net, data.inputs[idx]));
    for (std::size_t k = 0; k < kOutputs; ++k) {
      const double d = o[k] - data.targets[idx][k];
      acc += d * d;
    }
  }
  return acc / static_cast<double>(batch.size() * kOutputs);
}

Params gradient(const Mlp& net, const Dataset& data, std::span<const std::size_t> batch) {
  Params g{};
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "gradient needs a non-empty batch");
  const double scale = 2.0 / static_cast<double>(batch.size() * kOutputs);
  for (std::size_t idx : batch) {
    const Input n = normalize(net, data.inputs[idx]);
    std::array<double, kHidden> h;
    for (std::size_t j = 0; j < kHidden; ++j) {
      double a = net.b1(j);
      for (std::size_t i = 0; i < kInputs; ++i) a += net.w1(j, i) * n[i];
      h[j] = std::tanh(a);
    }
    std::array<double, kOutputs> dz;
    for (std::size_t k = 0; k < kOutputs; ++k) {
      double z = net.b2(k);
      for (std::size_t j = 0; j < kHidden; ++j) z += net.w2(k, j) * h[j];
      const double o = std::tanh(z);
      dz[k] = scale * (o - data.targets[idx][k]) * (1.0 - o * o);
      g[Mlp::b2_index(k)] += dz[k];
      for (std::size_t j = 0; j < kHidden; ++j) g[Mlp::w2_index(k, j)] += dz[k] * h[j];
    }
    for (std::size_t j = 0; j < kHidden; ++j) {
      double dh = 0.0;
      for (std::size_t k = 0; k < kOutputs; ++k) dh += net.w2(k, j) * dz[k];
      const double da = dh * (1.0 - h[j] * h[j]);
      g[Mlp::b1_index(j)] += da;
      for (std::size_t i = 0; i < kInputs; ++i) g[Mlp::w1_index(j, i)] += da * n[i];
    }
  }
  return g;
}

void TrainConfig::validate() const {
  if (max_epochs < 1 || patience < 1 || patience >= max_epochs)
    throw Error(ErrorCode::InvalidArgument, "need 1 <= patience < max_epochs");
  if (!(test_split > 0.0) || !(test_split < 1.0))
    throw Error(ErrorCode::InvalidArgument, "test_split must lie in (0, 1)");
  if (!(learning_rate > 0.0) || batch_size < 1)
    throw Error(ErrorCode::InvalidArgument, "learning rate and batch size must be positive");
}

double TrainConfig::test_fraction() const {
  return test_split_is_fraction ? test_split : test_split / (1.0 + test_split);
}

double TrainHistory::best_test_mse() const {
  double best = INFINITY;
  for (const auto& e : epochs) best = std::min(best, e.test_mse);
  return best;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.size() < 8)
    throw Error(ErrorCode::DatasetTooSmall,
                fmt::format("training needs at least 8 samples (got {})", data.size()));

  const std::size_t n = data.size();
  const auto n_test = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(cfg.test_fraction() * static_cast<double>(n))), 1, n - 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed, 11));
  if (cfg.split == SplitMode::Random)
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> test_idx(order.end() - static_cast<std::ptrdiff_t>(n_test), order.end());

  TrainResult result;
  Mlp net = nguyen_widrow_init(cfg.seed);
  // z-score on the training split only.
  for (std::size_t i = 0; i < kInputs; ++i) {
    double mean = 0.0;
    for (std::size_t idx : train_idx) mean += data.inputs[idx][i];
    mean /= static_cast<double>(train_idx.size());
    double var = 0.0;
    for (std::size_t idx : train_idx) {
      const double d = data.inputs[idx][i] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(train_idx.size()));
    net.input_mean[i] = mean;
    net.input_scale[i] = sd > 1e-12 ? sd : 1.0;
  }

  auto& hist = result.history;
  hist.train_size = train_idx.size();
  hist.test_size = test_idx.size();
  hist.epochs.push_back({0, batch_loss(net, data, train_idx), batch_loss(net, data, test_idx)});
  Mlp best = net;
  double best_test = hist.epochs.back().test_mse;
  int since_best = 0;

  Params m{}, v{};
  long long t = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = train_idx.size() - 1; i > 0; --i) std::swap(train_idx[i], train_idx[rng.below(i + 1)]);
    for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), train_idx.size() - start);
      const Params g = gradient(net, data, std::span(train_idx).subspan(start, len));
      ++t;
      const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
      for (std::size_t p = 0; p < kParamCount; ++p) {
        m[p] = cfg.adam_beta1 * m[p] + (1.0 - cfg.adam_beta1) * g[p];
        v[p] = cfg.adam_beta2 * v[p] + (1.0 - cfg.adam_beta2) * g[p] * g[p];
        net.params[p] -= cfg.learning_rate * (m[p] / c1) / (std::sqrt(v[p] / c2) + cfg.adam_epsilon);
      }
    }
    for (double p : net.params)
      if (!std::isfinite(p)) throw Error(ErrorCode::NumericalDivergence, "training produced non-finite weights");
    const double test = batch_loss(net, data, test_idx);
    hist.epochs.push_back({epoch, batch_loss(net, data, train_idx), test});
    if (test < best_test) {
      best_test = test;
      best = net;
      hist.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      hist.stopped_early = true;
      break;
    }
  }
  result.net = best;
  return result;
}

namespace {

nlohmann::json to_json(const Input& a) { return nlohmann::json(std::vector<double>(a.begin(), a.end())); }

template <std::size_t N>
std::array<double, N> array_from(const nlohmann::json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != N) throw Error(ErrorCode::IoError, fmt::format("checkpoint field '{}' has wrong size", key));
  std::array<double, N> a;
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::json j;
  j["schema"] = "g2p.mlp/1";
  j["layers"] = {kInputs, kHidden, kOutputs};
  j["activation"] = "tanh";
  j["params"] = std::vector<double>(ckpt.net.params.begin(), ckpt.net.params.end());
  j["input_mean"] = to_json(ckpt.net.input_mean);
  j["input_scale"] = to_json(ckpt.net.input_scale);
  j["output_offset"] = ckpt.net.output_offset;
  j["output_gain"] = ckpt.net.output_gain;
  j["seed"] = ckpt.seed;
  j["provenance"] = ckpt.provenance;
  auto& h = j["history"];
  h["best_epoch"] = ckpt.history.best_epoch;
  h["stopped_early"] = ckpt.history.stopped_early;
  h["train_size"] = ckpt.history.train_size;
  h["test_size"] = ckpt.history.test_size;
  h["epochs"] = nlohmann::json::array();
  for (const auto& e : ckpt.history.epochs)
    h["epochs"].push_back({{"epoch", e.epoch}, {"train_mse", e.train_mse}, {"test_mse", e.test_mse}});
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Checkpoint ckpt;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("schema") != "g2p.mlp/1") throw Error(ErrorCode::IoError, "unknown checkpoint schema");
    if (j.at("layers") != nlohmann::json({kInputs, kHidden, kOutputs}))
      throw Error(ErrorCode::IoError, "checkpoint layer shapes do not match 6-15-3");
    ckpt.net.params = array_from<kParamCount>(j, "params");
    ckpt.net.input_mean = array_from<kInputs>(j, "input_mean");
    ckpt.net.input_scale = array_from<kInputs>(j, "input_scale");
    ckpt.net.output_offset = j.at("output_offset").get<double>();
    ckpt.net.output_gain = j.at("output_gain").get<double>();
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    ckpt.provenance = j.at("provenance").get<std::string>();
    const auto& h = j.at("history");
    ckpt.history.best_epoch = h.at("best_epoch").get<int>();
    ckpt.history.stopped_early = h.at("stopped_early").get<bool>();
    ckpt.history.train_size = h.at("train_size").get<std::size_t>();
    ckpt.history.test_size = h.at("test_size").get<std::size_t>();
    for (const auto& e : h.at("epochs"))
      ckpt.history.epochs.push_back(
          {e.at("epoch").get<int>(), e.at("train_mse").get<double>(), e.at("test_mse").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, fmt::format("malformed checkpoint {}: {}", path.string(), e.what()));
  }
  return ckpt;
}

}  // namespace g2p
