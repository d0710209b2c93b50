#include "g2p/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/os.h>

#include "g2p/error.hpp"

namespace g2p {

void LegGeometry::validate() const {
  if (!(thigh_length > 0.0) || !(shank_length > 0.0))
    throw Error(ErrorCode::InvalidArgument, "link lengths must be positive");
  if (!(hip_limits.lo < hip_limits.hi) || !(knee_limits.lo < knee_limits.hi))
    throw Error(ErrorCode::InvalidArgument, "joint limit intervals must be non-empty");
  if (knee_limits.lo < 0.0 || knee_limits.hi > std::numbers::pi)
    throw Error(ErrorCode::InvalidArgument, "knee limits must stay on the flexion branch");
}

double FootPoint::norm() const { return std::hypot(x, z); }

const char* to_string(Condition c) {
  switch (c) {
    case Condition::InAir: return "in_air";
    case Condition::SlightContact: return "slight_contact";
    case Condition::UnderGround1cm: return "underground_1cm";
  }
  return "unknown";
}

Condition condition_from_int(int c) {
  if (c < 1 || c > 3)
    throw Error(ErrorCode::InvalidArgument, fmt::format("condition must be 1, 2 or 3 (got {})", c));
  return static_cast<Condition>(c);
}

FootPoint Trajectory::centroid() const {
  FootPoint c;
  if (points.empty()) return c;
  const std::size_t n = points.size() > 1 ? points.size() - 1 : 1;
  for (std::size_t i = 0; i < n; ++i) {
    c.x += points[i].x;
    c.z += points[i].z;
  }
  c.x /= static_cast<double>(n);
  c.z /= static_cast<double>(n);
  return c;
}

double Trajectory::lowest_depth() const {
  double m = -INFINITY;
  for (const auto& p : points) m = std::max(m, p.z);
  return m;
}

double Trajectory::highest_depth() const {
  double m = INFINITY;
  for (const auto& p : points) m = std::min(m, p.z);
  return m;
}

FootPoint Trajectory::at_phase(double phase) const {
  const std::size_t segments = points.size() - 1;
  double u = phase - std::floor(phase);
  double s = u * static_cast<double>(segments);
  auto i = std::min(static_cast<std::size_t>(s), segments - 1);
  double w = s - static_cast<double>(i);
  return {points[i].x + w * (points[i + 1].x - points[i].x),
          points[i].z + w * (points[i + 1].z - points[i].z)};
}

FootPoint forward_kinematics(const LegGeometry& geom, const JointState& q) {
  const double shank_angle = q.q_hip - q.q_knee;
  return {geom.thigh_length * std::sin(q.q_hip) + geom.shank_length * std::sin(shank_angle),
          geom.thigh_length * std::cos(q.q_hip) + geom.shank_length * std::cos(shank_angle)};
}

std::array<double, 4> foot_jacobian(const LegGeometry& geom, double q_hip, double q_knee) {
  const double a2 = q_hip - q_knee;
  const double c1 = std::cos(q_hip), s1 = std::sin(q_hip);
  const double c2 = std::cos(a2), s2 = std::sin(a2);
  const double l1 = geom.thigh_length, l2 = geom.shank_length;
  return {l1 * c1 + l2 * c2, -l2 * c2, -l1 * s1 - l2 * s2, l2 * s2};
}

JointState inverse_kinematics(const LegGeometry& geom, const FootPoint& p) {
  const double l1 = geom.thigh_length, l2 = geom.shank_length;
  const double r = p.norm();
  const double tol = 1e-12;
  if (r > l1 + l2 + tol || r < std::abs(l1 - l2) - tol)
    throw Error(ErrorCode::Unreachable,
                fmt::format("foot point ({:.6f}, {:.6f}) outside the reachable annulus", p.x, p.z));
  const double c = std::clamp((r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  JointState q;
  q.q_knee = std::acos(c);
  q.q_hip = std::atan2(p.x, p.z) + std::atan2(l2 * std::sin(q.q_knee), l1 + l2 * std::cos(q.q_knee));
  if (!geom.hip_limits.contains(q.q_hip) || !geom.knee_limits.contains(q.q_knee))
    throw Error(ErrorCode::OutOfLimits,
                fmt::format("foot point ({:.6f}, {:.6f}) needs q=({:.4f}, {:.4f}) rad outside the joint limits",
                            p.x, p.z, q.q_hip, q.q_knee));
  return q;
}

Trajectory desired_trajectory(const LegGeometry& geom, const ShapeParams& shape, int n_samples) {
  geom.validate();
  if (n_samples < 16)
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("desired trajectory needs at least 16 samples (got {})", n_samples));
  if (!(shape.half_stride > 0.0) || !(shape.half_height > 0.0) || !(shape.cycle_rate_hz > 0.0) ||
      shape.joint_margin < 0.0)
    throw Error(ErrorCode::InfeasibleShape, "shape parameters must be positive");

  Trajectory traj;
  traj.period = 1.0 / shape.cycle_rate_hz;
  traj.points.reserve(static_cast<std::size_t>(n_samples));
  const int segments = n_samples - 1;
  for (int i = 0; i < segments; ++i) {
    const double t = 2.0 * std::numbers::pi * i / segments;
    FootPoint p{shape.center_x + shape.half_stride * std::cos(t),
                shape.center_z + shape.half_height * std::sin(t) -
                    shape.skew * std::sin(2.0 * t) * (1.0 - std::sin(t)) / 2.0};
    JointState q;
    try {
      q = inverse_kinematics(geom, p);
    } catch (const Error& e) {
      throw Error(ErrorCode::InfeasibleShape, e.what());
    }
    const double m = shape.joint_margin;
    if (q.q_hip <= geom.hip_limits.lo + m || q.q_hip >= geom.hip_limits.hi - m ||
        q.q_knee <= geom.knee_limits.lo + m || q.q_knee >= geom.knee_limits.hi - m)
      throw Error(ErrorCode::InfeasibleShape,
                  fmt::format("sample {} comes within the joint-limit margin", i));
    traj.points.push_back(p);
  }
  traj.points.push_back(traj.points.front());
  return place_for_condition(traj, Condition::InAir);
}

Trajectory place_for_condition(const Trajectory& traj, Condition condition, double ground_z,
                               const PlacementParams& placement) {
  Trajectory out = traj;
  out.condition = condition;
  switch (condition) {
    case Condition::InAir:
      out.hip_height = ground_z + traj.lowest_depth() + placement.air_clearance;
      break;
    case Condition::SlightContact:
      out.hip_height = ground_z + traj.lowest_depth() - placement.contact_depth;
      break;
    case Condition::UnderGround1cm:
      out.hip_height = ground_z + traj.highest_depth() - placement.underground_depth;
      break;
  }
  return out;
}

double world_height(const Trajectory& traj, const FootPoint& p, double ground_z) {
  return traj.hip_height - p.z - ground_z;
}

std::vector<JointState> desired_joint_cycle(const LegGeometry& geom, const Trajectory& traj,
                                            int steps_per_cycle) {
  const auto n = static_cast<std::size_t>(steps_per_cycle);
  std::vector<JointState> cycle(n);
  for (std::size_t i = 0; i < n; ++i) {
    const JointState q =
        inverse_kinematics(geom, traj.at_phase(static_cast<double>(i) / static_cast<double>(n)));
    cycle[i].q_hip = q.q_hip;
    cycle[i].q_knee = q.q_knee;
  }
  const double h = traj.period / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& prev = cycle[(i + n - 1) % n];
    const auto& next = cycle[(i + 1) % n];
    cycle[i].qd_hip = (next.q_hip - prev.q_hip) / (2.0 * h);
    cycle[i].qd_knee = (next.q_knee - prev.q_knee) / (2.0 * h);
    cycle[i].qdd_hip = (next.q_hip - 2.0 * cycle[i].q_hip + prev.q_hip) / (h * h);
    cycle[i].qdd_knee = (next.q_knee - 2.0 * cycle[i].q_knee + prev.q_knee) / (h * h);
  }
  return cycle;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path, std::string_view comment) {
  auto out = fmt::output_file(path.string());
  if (!comment.empty()) out.print("# {}\n", comment);
  out.print("# period_s={:.17g} condition={} hip_height_m={:.17g}\n", traj.period,
            static_cast<int>(traj.condition), traj.hip_height);
  out.print("index,x_m,z_m\n");
  for (std::size_t i = 0; i < traj.points.size(); ++i)
    out.print("{},{:.17g},{:.17g}\n", i, traj.points[i].x, traj.points[i].z);
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Trajectory traj;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      int cond = 1;
      if (std::sscanf(line.c_str(), "# period_s=%lf condition=%d hip_height_m=%lf", &traj.period,
                      &cond, &traj.hip_height) == 3)
        traj.condition = condition_from_int(cond);
      continue;
    }
    if (line.rfind("index", 0) == 0) continue;
    std::istringstream row(line);
    std::string idx, x, z;
    std::getline(row, idx, ',');
    std::getline(row, x, ',');
    std::getline(row, z, ',');
    traj.points.push_back({std::stod(x), std::stod(z)});
  }
  if (traj.points.size() < 2)
    throw Error(ErrorCode::IoError, "trajectory file has no points: " + path.string());
  return traj;
}

}  // namespace g2p
