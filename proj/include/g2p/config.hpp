#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "g2p/babbling.hpp"
#include "g2p/invmap.hpp"
#include "g2p/kinematics.hpp"
#include "g2p/analysis.hpp"
#include "g2p/plant.hpp"

namespace g2p {

struct ExperimentConfig {
  NaiveParams naive;
  NaturalParams natural;
  PlantParams plant;
  TrainConfig net;
  ShapeParams shape;
  int trajectory_samples = 256;
  PlacementParams placement;
  TrackingOptions tracking;
  DfaOptions dfa;
  int trials = 4;
  double babble_duration = 120.0;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  std::vector<BabblingKind> kinds{BabblingKind::Naive, BabblingKind::Natural};
  std::vector<Condition> conditions{Condition::InAir, Condition::SlightContact, Condition::UnderGround1cm};
  double tracking_skip = 5.0;  // s of transient excluded from error and DFA series
  std::filesystem::path output_dir = "runs/latest";
  int jobs = 0;  // 0 = hardware concurrency

  void validate() const;
};

/// Reads an INI file (sections [experiment], [naive], [natural], [plant],
/// [net], [trajectory], [placement], [tracking], [dfa]). Keys left out keep
/// their defaults; unknown keys are a ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& ini_text);

/// Canonical INI rendering of every resolved value; parse_config round-trips it.
std::string to_ini(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical rendering, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace g2p
