#pragma once

// Pseudo-random 3-channel PWM babbling: the "naive" independent random steps
// and the "natural" half-wave rectified, antagonist-aware sinusoids.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace g2p {

inline constexpr int kChannels = 3;
inline constexpr int kPwmMax = 255;

using Pwm3 = std::array<double, kChannels>;

struct PwmSequence {
  std::array<std::vector<std::uint8_t>, kChannels> channels;
  double sample_rate = 200.0;
  double duration = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return channels[0].size(); }
  Pwm3 at(std::size_t i) const {
    return {double(channels[0][i]), double(channels[1][i]), double(channels[2][i])};
  }

  /// All-zero sequence of round(duration * sample_rate) samples.
  static PwmSequence zeros(double duration, double sample_rate);
};

struct NaiveParams {
  double sample_rate = 200.0;
  double step_change_freq = 1.3;
  int amplitude_low = 0;
  int amplitude_high = kPwmMax;
  double timing_jitter = 0.0;  // relative hold-length jitter, 0 = exact rates

  void validate() const;
};

struct NaturalParams {
  double sample_rate = 200.0;
  double step_freq = 6.0;
  double sinusoid_freq = 0.6;
  double peak_freq = 1.3;
  double m1_m2_phase_deg = 180.0;
  double m1_m2_phase_tolerance_deg = 20.0;
  double m1_m3_phase_increment_deg = 36.0;
  double increment_period = 15.0;
  std::array<double, kChannels> baseline_levels{45.0, 35.0, 40.0};  // centre of each channel's jittered baseline
  double baseline_jitter = 30.0;
  int amplitude_low = 10;
  int amplitude_high = 60;
  double timing_jitter = 0.0;

  void validate() const;
};

enum class BabblingKind { Naive, Natural };

const char* to_string(BabblingKind k);
BabblingKind babbling_kind_from_string(const std::string& s);

PwmSequence generate_naive(double duration, std::uint64_t seed, const NaiveParams& params);
PwmSequence generate_natural(double duration, std::uint64_t seed, const NaturalParams& params);

/// Mean over time of min(a, b) / 255; 0 for disjoint support, 1 for both saturated.
double coactivation_index(const PwmSequence& seq, int channel_a, int channel_b);

void write_pwm_csv(const PwmSequence& seq, const std::filesystem::path& path, std::string_view comment = {});
PwmSequence read_pwm_csv(const std::filesystem::path& path);

}  // namespace g2p
