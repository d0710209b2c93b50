#pragma once

// 6-15-3 inverse-map network: desired joint kinematics (q, qd, qdd for hip
// and knee) -> three motor PWM activations.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace g2p {

inline constexpr std::size_t kInputs = 6;
inline constexpr std::size_t kHidden = 15;
inline constexpr std::size_t kOutputs = 3;
inline constexpr std::size_t kParamCount =
    kHidden * kInputs + kHidden + kOutputs * kHidden + kOutputs;

using Input = std::array<double, kInputs>;
using Output = std::array<double, kOutputs>;
using Params = std::array<double, kParamCount>;

/// Flat parameter layout: W1 (row-major 15x6), b1, W2 (row-major 3x15), b2.
struct Mlp {
  Params params{};
  Input input_mean{};
  Input input_scale{1, 1, 1, 1, 1, 1};
  double output_offset = 127.5;  // [-1, 1] -> [0, 255]
  double output_gain = 127.5;

  static constexpr std::size_t w1_index(std::size_t h, std::size_t i) { return h * kInputs + i; }
  static constexpr std::size_t b1_index(std::size_t h) { return kHidden * kInputs + h; }
  static constexpr std::size_t w2_index(std::size_t o, std::size_t h) {
    return kHidden * kInputs + kHidden + o * kHidden + h;
  }
  static constexpr std::size_t b2_index(std::size_t o) {
    return kHidden * kInputs + kHidden + kOutputs * kHidden + o;
  }

  double& w1(std::size_t h, std::size_t i) { return params[w1_index(h, i)]; }
  double w1(std::size_t h, std::size_t i) const { return params[w1_index(h, i)]; }
  double& b1(std::size_t h) { return params[b1_index(h)]; }
  double b1(std::size_t h) const { return params[b1_index(h)]; }
  double& w2(std::size_t o, std::size_t h) { return params[w2_index(o, h)]; }
  double w2(std::size_t o, std::size_t h) const { return params[w2_index(o, h)]; }
  double& b2(std::size_t o) { return params[b2_index(o)]; }
  double b2(std::size_t o) const { return params[b2_index(o)]; }

  /// Normalized input -> tanh output layer activations in [-1, 1].
  Output forward_unit(const Input& x) const;
  /// Training-target scaling between PWM units and the tanh range.
  double to_unit(double pwm) const { return (pwm - output_offset) / output_gain; }
};

/// Input-layer and output-layer Nguyen-Widrow scale 0.7 * H^(1/D).
double nguyen_widrow_beta(std::size_t fan_out, std::size_t fan_in);

Mlp nguyen_widrow_init(std::uint64_t seed);

/// PWM prediction; each component lies in [0, 255]. Throws NonFiniteInput.
Output forward(const Mlp& net, const Input& x);

template <std::size_t N>
double mse(std::span<const std::array<double, N>> pred, std::span<const std::array<double, N>> truth);

extern template double mse<kOutputs>(std::span<const Output>, std::span<const Output>);
extern template double mse<kInputs>(std::span<const Input>, std::span<const Input>);

struct Dataset {
  std::vector<Input> inputs;    // raw kinematics; the net carries the normalization
  std::vector<Output> targets;  // PWM scaled to [-1, 1]
  std::string provenance;

  std::size_t size() const { return inputs.size(); }
  void validate() const;
};

/// Loss is the mean over samples and outputs of (tanh output - target)^2.
double batch_loss(const Mlp& net, const Dataset& data, std::span<const std::size_t> batch);
Params gradient(const Mlp& net, const Dataset& data, std::span<const std::size_t> batch);

enum class SplitMode { Random, Block };

struct TrainConfig {
  int max_epochs = 100;
  int patience = 5;
  double test_split = 0.25;          // test/train size ratio
  bool test_split_is_fraction = false;  // treat test_split as a fraction of all data
  SplitMode split = SplitMode::Random;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
  double test_fraction() const;
};

struct EpochRecord {
  int epoch = 0;  // 0 is the initialized network before any update
  double train_mse = 0.0;
  double test_mse = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool stopped_early = false;
  std::size_t train_size = 0;
  std::size_t test_size = 0;

  double best_test_mse() const;
};

struct TrainResult {
  Mlp net;
  TrainHistory history;
};

TrainResult train(const Dataset& data, const TrainConfig& cfg);

struct Checkpoint {
  Mlp net;
  TrainHistory history;
  std::uint64_t seed = 0;
  std::string provenance;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace g2p
