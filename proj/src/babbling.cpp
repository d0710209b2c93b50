#include "g2p/babbling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <fmt/os.h>

#include "g2p/error.hpp"
#include "g2p/random.hpp"

namespace g2p {
namespace {

std::size_t sample_count(double duration, double rate) {
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw Error(ErrorCode::InvalidDuration, fmt::format("duration must be positive (got {})", duration));
  return static_cast<std::size_t>(std::llround(duration * rate));
}

std::size_t hold_length(double rate, double freq, double jitter, Rng& rng) {
  double nominal = rate / freq;
  if (jitter > 0.0) nominal *= 1.0 + rng.uniform(-jitter, jitter);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(nominal)));
}

std::uint8_t to_pwm(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, static_cast<long>(kPwmMax)));
}

constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

PwmSequence PwmSequence::zeros(double duration, double sample_rate) {
  PwmSequence seq;
  seq.sample_rate = sample_rate;
  seq.duration = duration;
  const auto n = sample_count(duration, sample_rate);
  for (auto& ch : seq.channels) ch.assign(n, 0);
  return seq;
}

void NaiveParams::validate() const {
  if (!(sample_rate > 0.0) || !(step_change_freq > 0.0))
    throw Error(ErrorCode::InvalidArgument, "naive babbling rates must be positive");
  if (amplitude_low < 0 || amplitude_high > kPwmMax || amplitude_low >= amplitude_high)
    throw Error(ErrorCode::InvalidArgument, "naive amplitude range must satisfy 0 <= low < high <= 255");
  if (timing_jitter < 0.0 || timing_jitter >= 1.0)
    throw Error(ErrorCode::InvalidArgument, "timing jitter must be in [0, 1)");
}

void NaturalParams::validate() const {
  if (!(sample_rate > 0.0) || !(step_freq > 0.0) || !(sinusoid_freq > 0.0) || !(peak_freq > 0.0) ||
      !(increment_period > 0.0))
    throw Error(ErrorCode::InvalidArgument, "natural babbling frequencies must be positive");
  if (m1_m2_phase_tolerance_deg < 0.0 || m1_m2_phase_tolerance_deg > 20.0)
    throw Error(ErrorCode::InvalidArgument, "M1-M2 phase tolerance must be within [0, 20] deg");
  if (amplitude_low < 0 || amplitude_high > kPwmMax || amplitude_low >= amplitude_high)
    throw Error(ErrorCode::InvalidArgument, "natural amplitude range must satisfy 0 <= low < high <= 255");
  for (double b : baseline_levels)
    if (b < 0.0 || b > kPwmMax) throw Error(ErrorCode::InvalidArgument, "baseline levels must lie in [0, 255]");
  if (baseline_jitter < 0.0)
    throw Error(ErrorCode::InvalidArgument, "baseline jitter must be non-negative");
  if (timing_jitter < 0.0 || timing_jitter >= 1.0)
    throw Error(ErrorCode::InvalidArgument, "timing jitter must be in [0, 1)");
}

const char* to_string(BabblingKind k) { return k == BabblingKind::Naive ? "naive" : "natural"; }

BabblingKind babbling_kind_from_string(const std::string& s) {
  if (s == "naive") return BabblingKind::Naive;
  if (s == "natural") return BabblingKind::Natural;
  throw Error(ErrorCode::InvalidArgument, "babbling kind must be 'naive' or 'natural' (got '" + s + "')");
}

PwmSequence generate_naive(double duration, std::uint64_t seed, const NaiveParams& params) {
  params.validate();
  PwmSequence seq;
  seq.sample_rate = params.sample_rate;
  seq.duration = duration;
  seq.seed = seed;
  const auto n = sample_count(duration, params.sample_rate);
  const auto span = static_cast<std::uint64_t>(params.amplitude_high - params.amplitude_low + 1);
  for (int c = 0; c < kChannels; ++c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    auto& ch = seq.channels[static_cast<std::size_t>(c)];
    ch.reserve(n);
    while (ch.size() < n) {
      const auto level = static_cast<std::uint8_t>(params.amplitude_low + static_cast<int>(rng.below(span)));
      const auto hold = hold_length(params.sample_rate, params.step_change_freq, params.timing_jitter, rng);
      for (std::size_t k = 0; k < hold && ch.size() < n; ++k) ch.push_back(level);
    }
  }
  return seq;
}

PwmSequence generate_natural(double duration, std::uint64_t seed, const NaturalParams& params) {
  params.validate();
  PwmSequence seq;
  seq.sample_rate = params.sample_rate;
  seq.duration = duration;
  seq.seed = seed;
  const auto n = sample_count(duration, params.sample_rate);

  Rng trial_rng(derive_seed(seed, 100));
  const double m2_phase =
      deg2rad(params.m1_m2_phase_deg +
              trial_rng.uniform(-params.m1_m2_phase_tolerance_deg, params.m1_m2_phase_tolerance_deg));
  const double m3_phase0 = trial_rng.uniform(0.0, 2.0 * std::numbers::pi);

  const auto n_windows = static_cast<std::size_t>(std::ceil(duration / params.increment_period)) + 1;
  std::array<std::vector<double>, kChannels> baselines;
  for (int c = 0; c < kChannels; ++c) {
    Rng rng(derive_seed(seed, 200 + static_cast<std::uint64_t>(c)));
    for (std::size_t w = 0; w < n_windows; ++w)
      baselines[static_cast<std::size_t>(c)].push_back(
          std::max(0.0, params.baseline_levels[static_cast<std::size_t>(c)] +
                            rng.uniform(-params.baseline_jitter, params.baseline_jitter)));
  }

  std::array<Rng, kChannels> amp_rng{Rng(derive_seed(seed, 300)), Rng(derive_seed(seed, 301)),
                                     Rng(derive_seed(seed, 302))};
  std::array<long long, kChannels> amp_cycle{-1, -1, -1};
  std::array<double, kChannels> amplitude{};
  Rng timing_rng(derive_seed(seed, 400));

  for (auto& ch : seq.channels) ch.reserve(n);
  std::size_t i = 0;
  while (i < n) {
    // Sample-and-hold at the step rate discretizes the sinusoids.
    const double t = static_cast<double>(i) / params.sample_rate;
    const auto window = static_cast<std::size_t>(std::floor(t / params.increment_period));
    const std::array<double, kChannels> phase{
        0.0, m2_phase, m3_phase0 + deg2rad(params.m1_m3_phase_increment_deg) * static_cast<double>(window)};
    std::array<std::uint8_t, kChannels> level{};
    for (std::size_t c = 0; c < kChannels; ++c) {
      const double cycles = params.sinusoid_freq * t + phase[c] / (2.0 * std::numbers::pi);
      const auto cycle = static_cast<long long>(std::floor(cycles));
      if (cycle != amp_cycle[c]) {
        amp_cycle[c] = cycle;
        amplitude[c] = amp_rng[c].uniform(params.amplitude_low, params.amplitude_high);
      }
      const double s = amplitude[c] * std::sin(2.0 * std::numbers::pi * cycles);
      level[c] = to_pwm(baselines[c][window] + std::max(0.0, s));
    }
    const auto hold = hold_length(params.sample_rate, params.step_freq, params.timing_jitter, timing_rng);
    for (std::size_t k = 0; k < hold && i < n; ++k, ++i)
      for (std::size_t c = 0; c < kChannels; ++c) seq.channels[c].push_back(level[c]);
  }
  return seq;
}

double coactivation_index(const PwmSequence& seq, int channel_a, int channel_b) {
  if (channel_a == channel_b || channel_a < 0 || channel_b < 0 || channel_a >= kChannels ||
      channel_b >= kChannels)
    throw Error(ErrorCode::InvalidArgument, "coactivation needs two distinct channels in [0, 3)");
  const auto& a = seq.channels[static_cast<std::size_t>(channel_a)];
  const auto& b = seq.channels[static_cast<std::size_t>(channel_b)];
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::min(a[i], b[i]);
  return acc / (static_cast<double>(kPwmMax) * static_cast<double>(a.size()));
}

void write_pwm_csv(const PwmSequence& seq, const std::filesystem::path& path, std::string_view comment) {
  auto out = fmt::output_file(path.string());
  if (!comment.empty()) out.print("# {}\n", comment);
  out.print("# sample_rate_hz={:.17g} duration_s={:.17g} seed={}\n", seq.sample_rate, seq.duration, seq.seed);
  out.print("t_s,m1,m2,m3\n");
  for (std::size_t i = 0; i < seq.size(); ++i)
    out.print("{:.6f},{},{},{}\n", static_cast<double>(i) / seq.sample_rate, seq.channels[0][i],
              seq.channels[1][i], seq.channels[2][i]);
}

PwmSequence read_pwm_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  PwmSequence seq;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      unsigned long long s = 0;
      if (std::sscanf(line.c_str(), "# sample_rate_hz=%lf duration_s=%lf seed=%llu", &seq.sample_rate,
                      &seq.duration, &s) == 3)
        seq.seed = s;
      continue;
    }
    if (line.rfind("t_s", 0) == 0) continue;
    double t = 0;
    int m[3];
    if (std::sscanf(line.c_str(), "%lf,%d,%d,%d", &t, &m[0], &m[1], &m[2]) != 4)
      throw Error(ErrorCode::IoError, "malformed PWM row: " + line);
    for (std::size_t c = 0; c < kChannels; ++c) {
      if (m[c] < 0 || m[c] > kPwmMax) throw Error(ErrorCode::IoError, "PWM value out of range: " + line);
      seq.channels[c].push_back(static_cast<std::uint8_t>(m[c]));
    }
  }
  return seq;
}

}  // namespace g2p
