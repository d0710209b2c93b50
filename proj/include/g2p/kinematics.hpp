#pragma once

// Planar two-link leg geometry (hip, knee).
//
// Frames:
//   hip-relative: origin at the hip, x forward, z positive DOWNWARD.
//   world:        z positive UPWARD from the ground plane (z = 0).
// A foot at hip-relative depth z_rel under a hip at height h sits at world
// height h - z_rel.
//
// Angles: q_hip is the thigh angle from the downward vertical, positive
// forward (flexion). q_knee is knee flexion, positive when the shank folds
// backward relative to the thigh; 0 is a straight leg.

#include <array>
#include <filesystem>
#include <string_view>
#include <vector>

namespace g2p {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

struct LegGeometry {
  double thigh_length = 0.20;
  double shank_length = 0.20;
  Interval hip_limits{-60.0 * 3.14159265358979323846 / 180.0,
                      60.0 * 3.14159265358979323846 / 180.0};
  Interval knee_limits{0.0, 120.0 * 3.14159265358979323846 / 180.0};

  double reach() const { return thigh_length + shank_length; }
  /// Throws InvalidArgument when lengths or limits break the type invariants.
  void validate() const;
};

struct JointState {
  double q_hip = 0.0;
  double q_knee = 0.0;
  double qd_hip = 0.0;
  double qd_knee = 0.0;
  double qdd_hip = 0.0;
  double qdd_knee = 0.0;
};

struct FootPoint {
  double x = 0.0;
  double z = 0.0;

  double norm() const;
};

enum class Condition { InAir = 1, SlightContact = 2, UnderGround1cm = 3 };

const char* to_string(Condition c);
Condition condition_from_int(int c);

/// Parameters of the closed desired foot loop, hip-relative.
///
/// x(t) = center_x + half_stride * cos(t)
/// z(t) = center_z + half_height * sin(t) - skew * sin(2t) * (1 - sin(t)) / 2
///
/// The skew term only acts on the upper arc, so the front and back swing
/// apexes sit at different heights. The lower arc is traversed backward
/// (stance direction).
struct ShapeParams {
  double center_x = 0.0;
  double center_z = 0.36;
  double half_stride = 0.06;
  double half_height = 0.015;
  double skew = 0.006;
  double cycle_rate_hz = 0.6;
  double joint_margin = 5.0 * 3.14159265358979323846 / 180.0;
};

struct Trajectory {
  std::vector<FootPoint> points;  // closed: front() == back()
  double period = 0.0;
  Condition condition = Condition::InAir;
  double hip_height = 0.0;  // world frame

  FootPoint centroid() const;  // mean of the distinct points
  double lowest_depth() const;   // max hip-relative z
  double highest_depth() const;  // min hip-relative z
  /// Foot position at cycle phase in [0, 1), linearly interpolated.
  FootPoint at_phase(double phase) const;
};

FootPoint forward_kinematics(const LegGeometry& geom, const JointState& q);

/// Jacobian d(x, z)/d(q_hip, q_knee), row-major {dx/dqh, dx/dqk, dz/dqh, dz/dqk}.
std::array<double, 4> foot_jacobian(const LegGeometry& geom, double q_hip, double q_knee);

/// Returns the knee-flexion branch with zero velocities. Throws Unreachable
/// outside the annulus and OutOfLimits when the flexion branch leaves the
/// joint limits.
JointState inverse_kinematics(const LegGeometry& geom, const FootPoint& p);

Trajectory desired_trajectory(const LegGeometry& geom, const ShapeParams& shape,
                              int n_samples);

struct PlacementParams {
  double air_clearance = 0.05;    // InAir: lowest point this far above ground
  double contact_depth = 0.004;   // SlightContact: lowest point this far below
  double underground_depth = 0.01;  // UnderGround1cm: highest point this far below
};

Trajectory place_for_condition(const Trajectory& traj, Condition condition,
                               double ground_z = 0.0,
                               const PlacementParams& placement = {});

/// World-frame height of a hip-relative point under the trajectory's hip.
double world_height(const Trajectory& traj, const FootPoint& p, double ground_z = 0.0);

/// Desired 6D joint kinematics sampled at `steps_per_cycle` uniform phases.
/// q from IK, qd and qdd by periodic central differences.
std::vector<JointState> desired_joint_cycle(const LegGeometry& geom,
                                            const Trajectory& traj,
                                            int steps_per_cycle);

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path,
                          std::string_view comment = {});
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace g2p
