#pragma once

// Simulated backdrivable tendon-driven biped on a gantry.
//
// Each leg is a planar two-link pendulum hanging from the hip, driven by
// three tendons through a constant moment-arm matrix. The gantry holds the
// hip at a fixed height; ground contact is a unilateral spring-damper on
// the foot. Hip travel comes from kinematic anchoring of the stance foot.

#include <array>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "g2p/babbling.hpp"
#include "g2p/invmap.hpp"
#include "g2p/kinematics.hpp"

namespace g2p {

inline constexpr std::size_t kLegs = 2;
inline constexpr std::size_t kLeft = 0;
inline constexpr std::size_t kRight = 1;

/// Signed tendon moment arms (m): row = motor, columns = (hip, knee).
using MomentArms = std::array<std::array<double, 2>, kChannels>;

struct PlantParams {
  LegGeometry geometry;
  double thigh_mass = 0.30;       // kg
  double shank_mass = 0.15;
  double thigh_com = 0.08;        // m from the hip
  double shank_com = 0.12;        // m from the knee
  double thigh_inertia = 1.0e-3;  // kg m^2 about the segment COM
  double shank_inertia = 5.0e-4;
  MomentArms moment_arms{{{0.015, 0.0}, {-0.015, 0.0}, {0.005, 0.008}}};
  double force_per_pwm = 0.18;  // N of tendon tension per PWM unit
  std::array<double, 2> joint_damping{0.15, 0.05};  // N m s / rad
  double ground_stiffness = 2.0e4;  // N / m
  double ground_damping = 200.0;    // N s / m
  double ground_friction = 0.3;
  double gravity = 9.81;
  double dt = 1.0 / 200.0;  // control / logging step
  int substeps = 10;        // integration substeps per control step
  double divergence_bound = 1.0e3;

  void validate() const;
};

struct LegState {
  JointState joints;
  bool contact = false;
  bool at_limit = false;
  double normal_force = 0.0;
};

struct PlantState {
  std::array<LegState, kLegs> legs;
  double hip_x = 0.0;
  double hip_z = 1.0;  // world height of the hip, held by the gantry
  double hip_xd = 0.0;
  double hip_zd = 0.0;
  double displacement = 0.0;  // accumulated forward hip travel
  std::optional<double> ground_z;  // no ground when empty
  double time = 0.0;

  static PlantState hanging(std::optional<double> ground_z = std::nullopt, double hip_z = 1.0);
};

/// Joint torques (hip, knee) from tendon tensions f = force_per_pwm * pwm.
std::array<double, 2> tendon_torques(const Pwm3& pwm, const PlantParams& params);
std::array<double, kChannels> tendon_forces(const Pwm3& pwm, const PlantParams& params);

/// Kinetic + potential energy of one leg; potential is zero at the straight hanging pose.
double leg_energy(const JointState& q, const PlantParams& params);

/// Gravity torques dV/dq at a configuration (hip, knee).
std::array<double, 2> gravity_torques(double q_hip, double q_knee, const PlantParams& params);

PlantState step(const PlantState& state, const Pwm3& pwm_left, const Pwm3& pwm_right,
                const PlantParams& params);

struct LegSample {
  JointState joints;
  FootPoint foot;
  bool contact = false;
  bool at_limit = false;
};

struct KinematicsLog {
  double sample_rate = 200.0;
  std::vector<double> time;
  std::array<std::vector<LegSample>, kLegs> legs;
  std::vector<double> displacement;

  std::size_t size() const { return time.size(); }
  std::size_t limit_events(std::size_t leg) const;
};

/// Recomputes qdd as central differences of the logged qd (one-sided at the ends).
void fill_accelerations(KinematicsLog& log);

KinematicsLog run_open_loop(const PlantState& initial, const PwmSequence& seq_left,
                            const PwmSequence& seq_right, const PlantParams& params);

struct TrackingOptions {
  double duration = 60.0;
  double success_distance = 0.40;
  double right_leg_phase = 0.5;  // cycle offset of the right leg
  int cycle_resolution = 400;    // desired-kinematics samples per cycle
};

struct TrackingResult {
  KinematicsLog log;
  std::array<PwmSequence, kLegs> commands;
  double displacement = 0.0;
  bool success = false;
};

/// Open-loop replay of each leg's inverse map on the desired cycle.
TrackingResult run_tracking(const Mlp& net_left, const Mlp& net_right, const Trajectory& desired,
                            const PlantParams& params, const TrackingOptions& options = {});

void write_kinematics_csv(const KinematicsLog& log, const std::filesystem::path& path,
                          std::string_view comment = {});
void write_displacement_csv(const KinematicsLog& log, const std::filesystem::path& path,
                            std::string_view comment = {});

/// Reads a kinematics CSV back; limit flags are not stored and read as false.
/// `displacement_path`, when given, fills the displacement series.
KinematicsLog read_kinematics_csv(const std::filesystem::path& path,
                                  const std::filesystem::path& displacement_path = {});

}  // namespace g2p
