// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   g2p_acceptance [--out DIR] [--config FILE]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "g2p/analysis.hpp"
#include "g2p/config.hpp"
#include "g2p/harness.hpp"
#include "g2p/invmap.hpp"
#include "g2p/plant.hpp"
#include "g2p/random.hpp"

using namespace g2p;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(bool ok, const std::string& id, const std::string& detail) {
  fmt::print("{} {}: {}\n", ok ? "PASS" : "FAIL", id, detail);
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<double> gaussian(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) {
    const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
    v = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  return x;
}

// Two-sided Student t tail by Simpson integration of the density.
double t_tail_simpson(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * std::numbers::pi);
  auto f = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1) / 2); };
  const int n = 200000;
  const double b = std::abs(t), h = b / n;
  double s = f(0) + f(b);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * s * h / 3.0;
}

// ---------------------------------------------------------------- numerics

void gradient_check() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Mlp net = nguyen_widrow_init(seed);
    Rng rng(seed * 31);
    for (std::size_t i = 0; i < kInputs; ++i) {
      net.input_mean[i] = rng.uniform(-0.5, 0.5);
      net.input_scale[i] = rng.uniform(0.5, 2.0);
    }
    Dataset data;
    for (int r = 0; r < 16; ++r) {
      Input x;
      for (auto& v : x) v = rng.uniform(-3, 3);
      Output y;
      for (auto& v : y) v = rng.uniform(-0.9, 0.9);
      data.inputs.push_back(x);
      data.targets.push_back(y);
    }
    std::vector<std::size_t> batch(data.size());
    std::iota(batch.begin(), batch.end(), 0);
    const Params g = gradient(net, data, batch);
    const double h = 1e-5;
    for (std::size_t p = 0; p < kParamCount; ++p) {
      Mlp a = net, b = net;
      a.params[p] += h;
      b.params[p] -= h;
      const double fd = (batch_loss(a, data, batch) - batch_loss(b, data, batch)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[p]) / std::max(1e-7, std::abs(fd) + std::abs(g[p])));
    }
  }
  const double secs = seconds_since(t0);
  verdict(worst < 1e-4 && secs < 5.0, "numerics.gradient_check",
          fmt::format("max relative error {:.2e} (< 1e-4) over 20 nets, {:.2f} s (< 5 s)", worst, secs));
}

void nguyen_widrow() {
  const double beta = 0.7 * std::pow(15.0, 1.0 / 6.0);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Mlp net = nguyen_widrow_init(seed);
    for (std::size_t h = 0; h < kHidden; ++h) {
      double n2 = 0;
      for (std::size_t i = 0; i < kInputs; ++i) n2 += net.w1(h, i) * net.w1(h, i);
      worst = std::max(worst, std::abs(std::sqrt(n2) - beta));
    }
  }
  verdict(worst < 1e-9, "numerics.nguyen_widrow",
          fmt::format("hidden row norms within {:.1e} of {:.12f} (tol 1e-9)", worst, beta));
}

void dfa_calibration() {
  bool ok = true;
  double worst_time = 0, w_lo = INFINITY, w_hi = -INFINITY, b_lo = INFINITY, b_hi = -INFINITY, r2 = 1.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto noise = gaussian(seed, 10000);
    std::vector<double> walk(noise.size());
    std::partial_sum(noise.begin(), noise.end(), walk.begin());
    for (int kind = 0; kind < 2; ++kind) {
      const auto t0 = Clock::now();
      const DfaResult r = dfa(kind == 0 ? noise : walk);
      worst_time = std::max(worst_time, seconds_since(t0));
      r2 = std::min(r2, r.fit_r2);
      if (kind == 0) {
        w_lo = std::min(w_lo, r.alpha), w_hi = std::max(w_hi, r.alpha);
        ok = ok && std::abs(r.alpha - 0.5) <= 0.05;
      } else {
        b_lo = std::min(b_lo, r.alpha), b_hi = std::max(b_hi, r.alpha);
        ok = ok && std::abs(r.alpha - 1.5) <= 0.10;
      }
    }
  }
  ok = ok && r2 > 0.95 && worst_time < 1.0;
  verdict(ok, "numerics.dfa_calibration",
          fmt::format("white alpha in [{:.3f}, {:.3f}] (0.50 +- 0.05), walk alpha in [{:.3f}, {:.3f}] (1.50 +- 0.10), "
                      "min r2 {:.4f} (> 0.95), max {:.3f} s per series (< 1 s)",
                      w_lo, w_hi, b_lo, b_hi, r2, worst_time));
}

void dfa_affine() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = gaussian(seed + 50, 10000);
    const double base = dfa(x).alpha;
    for (auto [a, b] : {std::pair{3.0, 7.0}, std::pair{-0.02, 40.0}, std::pair{1e3, -1e3}}) {
      std::vector<double> y;
      for (double v : x) y.push_back(a * v + b);
      worst = std::max(worst, std::abs(dfa(y).alpha - base));
    }
  }
  verdict(worst < 1e-9, "numerics.dfa_affine_invariance", fmt::format("max |delta alpha| {:.2e} (< 1e-9)", worst));
}

void welch_oracle() {
  double worst = 0.0;
  Rng rng(99);
  for (int k = 0; k < 25; ++k) {
    std::vector<double> a, b;
    for (int i = 0; i < 8; ++i) a.push_back(rng.uniform(0, 1)), b.push_back(rng.uniform(0.1, 1.6));
    const WelchResult r = welch_test(a, b);
    worst = std::max(worst, std::abs(r.p - t_tail_simpson(r.t, r.df)));
  }
  for (double df : {1.5, 3.3, 7.0, 14.2, 40.0})
    for (double t : {0.1, 0.7, 1.5, 2.2, 3.9})
      worst = std::max(worst, std::abs(student_t_two_sided(t, df) - t_tail_simpson(t, df)));
  verdict(worst < 1e-6, "numerics.welch_vs_t_cdf",
          fmt::format("max |p - integrated t tail| {:.2e} (< 1e-6)", worst));
}

// ---------------------------------------------------------------- plant

void passive_settles(const PlantParams& p) {
  bool ok = true;
  double worst_rise = 0.0, worst_speed = 0.0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    Rng rng(seed);
    PlantState s = PlantState::hanging();
    for (auto& leg : s.legs) {
      leg.joints.q_hip = rng.uniform(0.8 * p.geometry.hip_limits.lo, 0.8 * p.geometry.hip_limits.hi);
      leg.joints.q_knee = rng.uniform(0.1, 0.8 * p.geometry.knee_limits.hi);
      leg.joints.qd_hip = rng.uniform(-1, 1);
      leg.joints.qd_knee = rng.uniform(-1, 1);
    }
    double prev = INFINITY;
    for (int i = 0; i < 200 * 20; ++i) {
      s = step(s, {0, 0, 0}, {0, 0, 0}, p);
      const double e = leg_energy(s.legs[0].joints, p) + leg_energy(s.legs[1].joints, p);
      if (s.time > 0.5) {
        worst_rise = std::max(worst_rise, e - prev);
        prev = e;
      }
    }
    for (const auto& leg : s.legs)
      worst_speed = std::max({worst_speed, std::abs(leg.joints.qd_hip), std::abs(leg.joints.qd_knee)});
  }
  ok = worst_rise <= 1e-12 && worst_speed < 1e-3;
  verdict(ok, "plant.passive_settles",
          fmt::format("8 seeds, max energy rise after 0.5 s {:.2e} J (<= 0), max joint speed at 20 s {:.2e} rad/s",
                      std::max(worst_rise, 0.0), worst_speed));
}

void forces_and_penetration(const PlantParams& p) {
  double min_force = INFINITY;
  Rng rng(3);
  for (int k = 0; k < 1000; ++k)
    for (double f : tendon_forces({rng.uniform(-100, 400), rng.uniform(-100, 400), rng.uniform(-100, 400)}, p))
      min_force = std::min(min_force, f);
  const double hip = 0.37;
  const std::vector<double> levels{0, 60, 120, 180, 255};
  double worst = 0.0;
  for (double a : levels)
    for (double b : levels)
      for (double c : levels) {
        PlantState s = PlantState::hanging(0.0, hip);
        for (auto& leg : s.legs)
          leg.joints.q_knee = std::acos((hip - p.geometry.thigh_length) / p.geometry.shank_length);
        for (int i = 0; i < 200; ++i) {
          s = step(s, {a, b, c}, {b, a, c}, p);
          for (const auto& leg : s.legs) worst = std::max(worst, forward_kinematics(p.geometry, leg.joints).z - hip);
        }
      }
  verdict(min_force >= 0.0 && worst <= 1e-3, "plant.forces_and_penetration",
          fmt::format("min tendon force {:.3g} N (>= 0), max penetration {:.3f} mm over 125 PWM steps (<= 1 mm)",
                      min_force, worst * 1e3));
}

void command_invariance(const RunRecord& run) {
  std::size_t groups = 0, mismatched = 0;
  std::map<std::string, std::vector<const TrialRecord*>> by_trial;
  for (const auto& t : run.trials)
    if (!t.failed) by_trial[t.directory.parent_path().string()].push_back(&t);
  for (const auto& [dir, recs] : by_trial) {
    if (recs.size() < 2) continue;
    ++groups;
    for (const char* f : {"commands_left.csv", "commands_right.csv"}) {
      const std::string ref = slurp(recs.front()->directory / f);
      for (const auto* r : recs)
        if (ref.empty() || slurp(r->directory / f) != ref) ++mismatched;
    }
  }
  verdict(groups > 0 && mismatched == 0, "plant.command_stream_invariance",
          fmt::format("{} trained pairs replayed under conditions 1-3, {} command files differ", groups, mismatched));
}

// ---------------------------------------------------------------- trends

const GroupSummary& group(const std::vector<GroupSummary>& gs, BabblingKind k, Condition c) {
  const GroupSummary* g = find_group(gs, k, c);
  if (!g) throw std::runtime_error("missing group");
  return *g;
}

void spread_ordering(const RunRecord& run) {
  std::map<int, std::array<SpreadResult, kLegs>> naive, natural;
  for (const auto& t : run.trials) {
    if (t.condition != Condition::InAir) continue;
    (t.kind == BabblingKind::Naive ? naive : natural)[t.trial] = t.spread;
  }
  double mn = 0, mt = 0, min_ratio = INFINITY;
  int n = 0;
  for (const auto& [trial, s] : natural) {
    if (!naive.count(trial)) continue;
    for (std::size_t l = 0; l < kLegs; ++l) {
      mt += s[l].ratio;
      mn += naive[trial][l].ratio;
      min_ratio = std::min(min_ratio, s[l].ratio / std::max(naive[trial][l].ratio, 1e-12));
      ++n;
    }
  }
  if (n > 0) mn /= n, mt /= n;
  verdict(n > 0 && mt > mn && min_ratio >= 1.5, "trend.spread_ordering",
          fmt::format("mean spread natural {:.3f} vs naive {:.3f}; min per-trial-leg ratio {:.2f} (>= 1.5)", mt, mn,
                      min_ratio));
}

void condition2_success(const std::vector<GroupSummary>& gs) {
  const auto& a = group(gs, BabblingKind::Natural, Condition::SlightContact);
  const auto& b = group(gs, BabblingKind::Naive, Condition::SlightContact);
  verdict(a.success_rate > b.success_rate, "trend.condition2_success",
          fmt::format("success natural {}/{} vs naive {}/{} (natural must be strictly higher)", a.successes, a.trials,
                      b.successes, b.trials));
}

void condition3(const std::vector<GroupSummary>& gs) {
  const auto& n3 = group(gs, BabblingKind::Natural, Condition::UnderGround1cm);
  const auto& v3 = group(gs, BabblingKind::Naive, Condition::UnderGround1cm);
  const auto& n2 = group(gs, BabblingKind::Natural, Condition::SlightContact);
  const bool ok = n3.success_rate >= 0.75 && v3.success_rate >= 0.75 && n3.mean_speed > n2.mean_speed;
  verdict(ok, "trend.condition3_success_and_speed",
          fmt::format("success natural {}/{}, naive {}/{} (>= 3/4 each); natural mean speed {:.3f} cm/s vs "
                      "condition 2 {:.3f} cm/s (must increase)",
                      n3.successes, n3.trials, v3.successes, v3.trials, n3.mean_speed, n2.mean_speed));
}

void in_air_error(const RunRecord& run) {
  std::map<int, double> naive, natural;
  for (const auto& t : run.trials) {
    if (t.condition != Condition::InAir || t.failed) continue;
    const double e = 0.5 * (t.rms_error[kLeft] + t.rms_error[kRight]);
    (t.kind == BabblingKind::Naive ? naive : natural)[t.trial] = e;
  }
  int wins = 0, seeds = 0;
  std::string detail;
  for (const auto& [trial, e] : natural) {
    if (!naive.count(trial)) continue;
    ++seeds;
    if (e < naive[trial]) ++wins;
    detail += fmt::format(" t{}: {:.1f} vs {:.1f} mm;", trial, e * 1e3, naive[trial] * 1e3);
  }
  verdict(seeds >= 4 && wins >= 3, "trend.condition1_tracking_error",
          fmt::format("natural RMS error below naive on {}/{} seeds (need >= 3 of 4);{}", wins, seeds, detail));
}

void dfa_ordering(const std::vector<GroupSummary>& gs) {
  const auto& v2 = group(gs, BabblingKind::Naive, Condition::SlightContact);
  const auto& v3 = group(gs, BabblingKind::Naive, Condition::UnderGround1cm);
  bool naive_ok = false;
  std::string naive_detail = "insufficient data";
  if (v2.alphas.size() >= 2 && v3.alphas.size() >= 2) {
    const WelchResult w = welch_test(v3.alphas, v2.alphas);
    naive_ok = w.mean_a > w.mean_b && w.p < 0.1;
    naive_detail = fmt::format("mean alpha C3 {:.3f} vs C2 {:.3f}, Welch p {:.3g} on {}+{} leg series", w.mean_a,
                               w.mean_b, w.p, v3.alphas.size(), v2.alphas.size());
  }
  verdict(naive_ok, "trend.dfa_naive_c3_gt_c2", naive_detail + " (need C3 > C2 with p < 0.1)");
  const auto& n2 = group(gs, BabblingKind::Natural, Condition::SlightContact);
  const auto& n3 = group(gs, BabblingKind::Natural, Condition::UnderGround1cm);
  verdict(n3.alpha_variance <= n2.alpha_variance, "trend.dfa_natural_variance",
          fmt::format("natural alpha variance C3 {:.3g} vs C2 {:.3g} (need C3 <= C2)", n3.alpha_variance,
                      n2.alpha_variance));
}

// ---------------------------------------------------------------- reproducibility

void reproducibility(const ExperimentConfig& cfg, const fs::path& out) {
  // Same config (the output directory is not part of it), first seed, every kind and condition.
  ExperimentConfig again = cfg;
  again.output_dir = out / "rerun";
  fs::remove_all(again.output_dir);
  for (BabblingKind kind : cfg.kinds)
    for (Condition c : cfg.conditions) run_trial(again, cfg.seeds.front(), kind, c, 0);
  std::size_t compared = 0, differing = 0;
  std::string first_diff;
  for (const auto& entry : fs::recursive_directory_iterator(again.output_dir / "trials")) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(entry.path(), again.output_dir);
    ++compared;
    if (slurp(entry.path()) != slurp(cfg.output_dir / rel)) {
      ++differing;
      if (first_diff.empty()) first_diff = rel.string();
    }
  }
  verdict(compared > 0 && differing == 0, "reproducibility.byte_identical_csv",
          fmt::format("{} CSV artifacts from a rerun of trial 0, {} differ{}", compared, differing,
                      first_diff.empty() ? "" : " (first: " + first_diff + ")"));
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = "acceptance_run";
  fs::path config_path;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--out") out = argv[i + 1];
    else if (flag == "--config") config_path = argv[i + 1];
    else {
      fmt::print(stderr, "usage: {} [--out DIR] [--config FILE]\n", argv[0]);
      return 64;
    }
  }
  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    cfg.output_dir = out / "reference";

    gradient_check();
    nguyen_widrow();
    dfa_calibration();
    dfa_affine();
    welch_oracle();
    passive_settles(cfg.plant);
    forces_and_penetration(cfg.plant);

    fs::remove_all(cfg.output_dir);
    const auto t0 = Clock::now();
    const RunRecord run = run_experiment(cfg);
    const double run_secs = seconds_since(t0);
    const auto groups = summarize(run);
    std::size_t failed = 0;
    for (const auto& t : run.trials) failed += t.failed ? 1 : 0;

    command_invariance(run);
    verdict(run_secs < 15 * 60 && failed == 0 && cfg.trials == 4 && cfg.babble_duration == 120.0,
            "trend.reference_run",
            fmt::format("{} trials x {} kinds x {} conditions with {:.0f} s babbling in {:.1f} s (< 900 s), {} failed",
                        cfg.trials, cfg.kinds.size(), cfg.conditions.size(), cfg.babble_duration, run_secs, failed));
    spread_ordering(run);
    condition2_success(groups);
    condition3(groups);
    in_air_error(run);
    dfa_ordering(groups);
    reproducibility(cfg, out);
  } catch (const std::exception& e) {
    fmt::print("FAIL acceptance.harness: {}\n", e.what());
    return 1;
  }
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
