#pragma once

// Experiment orchestration: babble -> open-loop rollout -> per-leg training
// -> tracking under each ground condition -> analyses, with every artifact
// persisted under the run's output directory.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "g2p/analysis.hpp"
#include "g2p/config.hpp"
#include "g2p/plant.hpp"

namespace g2p {

inline constexpr const char* kRunSchema = "g2p.run/1";

struct BabbleData {
  BabblingKind kind = BabblingKind::Natural;
  std::uint64_t seed = 0;
  std::array<PwmSequence, kLegs> pwm;
  KinematicsLog log;  // in-air rollout of the babbling commands
};

BabbleData babble(const ExperimentConfig& cfg, BabblingKind kind, std::uint64_t seed);

/// Pairs the logged 6D kinematics of one leg with the PWM that was applied.
Dataset make_dataset(const BabbleData& data, std::size_t leg);

std::array<TrainResult, kLegs> train_legs(const ExperimentConfig& cfg, const BabbleData& data);

Trajectory desired_for(const ExperimentConfig& cfg, Condition condition);

/// Time-aligned RMS distance (m) between realized and desired foot positions
/// after `skip` seconds.
double tracking_rms_error(const KinematicsLog& log, std::size_t leg, const Trajectory& desired,
                          double phase_offset, double skip);

struct ConditionOutcome {
  Condition condition = Condition::InAir;
  Trajectory desired;
  TrackingResult tracking;
  TrialStats stats;
  std::array<DfaResult, kLegs> dfa;
  std::array<double, kLegs> rms_error{};
};

ConditionOutcome track_condition(const ExperimentConfig& cfg, const std::array<Mlp, kLegs>& nets,
                                 Condition condition);

struct TrialRecord {
  BabblingKind kind = BabblingKind::Natural;
  int trial = 0;
  std::uint64_t seed = 0;
  Condition condition = Condition::InAir;
  bool failed = false;
  std::string error_code;
  std::string error_message;
  std::array<SpreadResult, kLegs> spread;
  TrialStats stats;
  std::array<DfaResult, kLegs> dfa;
  std::array<double, kLegs> rms_error{};
  std::array<std::size_t, kLegs> babble_limit_events{};
  std::filesystem::path directory;
};

struct RunRecord {
  std::string schema = kRunSchema;
  ExperimentConfig config;
  std::string config_hash;
  std::vector<TrialRecord> trials;
};

/// Full pipeline for one (seed, kind, condition); artifacts go under
/// cfg.output_dir. Failures are recorded, not thrown.
TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t seed, BabblingKind kind, Condition condition,
                      int trial_index = 0);

/// All kinds x trials x conditions. Babbling and training run once per
/// (kind, trial) and the trained pair is reused for every condition.
RunRecord run_experiment(const ExperimentConfig& cfg);

struct GroupSummary {
  BabblingKind kind = BabblingKind::Natural;
  Condition condition = Condition::InAir;
  int trials = 0;
  int successes = 0;
  int failures = 0;
  double success_rate = 0.0;
  double mean_speed = 0.0;  // cm/s over successful trials, 0 when none
  double mean_spread = 0.0;
  double mean_alpha = 0.0;
  double alpha_variance = 0.0;  // sample variance of `alphas`
  double mean_rms_error = 0.0;
  std::vector<double> alphas;  // one per leg per trial
};

std::vector<GroupSummary> summarize(const RunRecord& record);
const GroupSummary* find_group(const std::vector<GroupSummary>& groups, BabblingKind kind, Condition condition);

/// Writes summary.csv, trials.csv, dfa.csv, spread.csv, tests.csv,
/// manifest.json and report.txt into `dir`.
void report(const RunRecord& record, const std::filesystem::path& dir);

/// Rebuilds a RunRecord from a directory written by run_experiment.
RunRecord load_run(const std::filesystem::path& dir);

}  // namespace g2p
