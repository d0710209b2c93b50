#include "g2p/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/os.h>

#include "g2p/error.hpp"

namespace g2p {
namespace {

struct LegDynamics {
  std::array<double, 4> mass;  // joint-space inertia, row-major
  std::array<double, 2> bias;  // Coriolis + gravity, joint space
};

// Absolute segment angles a1 = q_hip, a2 = q_hip - q_knee. Joint-space terms
// follow from T = [[1, 0], [1, -1]]: M = T' Ma T, h = T' ha.
LegDynamics leg_dynamics(const JointState& q, const PlantParams& p) {
  const double l1 = p.geometry.thigh_length;
  const double m1 = p.thigh_mass, m2 = p.shank_mass;
  const double c1 = p.thigh_com, c2 = p.shank_com;
  const double a1 = q.q_hip, a2 = q.q_hip - q.q_knee;
  const double a1d = q.qd_hip, a2d = q.qd_hip - q.qd_knee;
  const double k = m2 * l1 * c2;
  const double m11 = m1 * c1 * c1 + p.thigh_inertia + m2 * l1 * l1;
  const double m22 = m2 * c2 * c2 + p.shank_inertia;
  const double m12 = k * std::cos(a1 - a2);
  const double s12 = std::sin(a1 - a2);
  const double h1 = k * s12 * a2d * a2d + p.gravity * (m1 * c1 + m2 * l1) * std::sin(a1);
  const double h2 = -k * s12 * a1d * a1d + p.gravity * m2 * c2 * std::sin(a2);
  LegDynamics d;
  d.mass = {m11 + 2.0 * m12 + m22, -(m12 + m22), -(m12 + m22), m22};
  d.bias = {h1 + h2, -h2};
  return d;
}

bool clamp_to_limits(JointState& q, const LegGeometry& g) {
  bool hit = false;
  auto clamp_one = [&hit](double& pos, double& vel, const Interval& lim) {
    if (pos < lim.lo) {
      pos = lim.lo;
      vel = std::max(vel, 0.0);
      hit = true;
    } else if (pos > lim.hi) {
      pos = lim.hi;
      vel = std::min(vel, 0.0);
      hit = true;
    }
  };
  clamp_one(q.q_hip, q.qd_hip, g.hip_limits);
  clamp_one(q.q_knee, q.qd_knee, g.knee_limits);
  return hit;
}

}  // namespace

void PlantParams::validate() const {
  geometry.validate();
  if (!(dt > 0.0) || substeps < 1)
    throw Error(ErrorCode::InvalidArgument, "plant dt must be positive with at least one substep");
  if (joint_damping[0] < 0.0 || joint_damping[1] < 0.0 || ground_stiffness < 0.0 || ground_damping < 0.0 ||
      ground_friction < 0.0)
    throw Error(ErrorCode::InvalidArgument, "damping, stiffness and friction must be non-negative");
  if (!(thigh_mass > 0.0) || !(shank_mass > 0.0) || force_per_pwm < 0.0)
    throw Error(ErrorCode::InvalidArgument, "segment masses must be positive");
  bool all_proportional = true;
  for (std::size_t i = 0; i < kChannels; ++i) {
    const auto& r = moment_arms[i];
    if (r[0] == 0.0 && r[1] == 0.0)
      throw Error(ErrorCode::InvalidArgument, fmt::format("motor M{} has no moment arm", i + 1));
    const auto& r0 = moment_arms[0];
    if (std::abs(r0[0] * r[1] - r0[1] * r[0]) > 1e-15) all_proportional = false;
  }
  if (all_proportional)
    throw Error(ErrorCode::InvalidArgument, "moment-arm rows are all proportional; legs would be under-actuated");
}

PlantState PlantState::hanging(std::optional<double> ground_z, double hip_z) {
  PlantState s;
  s.ground_z = ground_z;
  s.hip_z = hip_z;
  return s;
}

std::array<double, kChannels> tendon_forces(const Pwm3& pwm, const PlantParams& params) {
  std::array<double, kChannels> f;
  for (std::size_t i = 0; i < kChannels; ++i)
    f[i] = params.force_per_pwm * std::clamp(pwm[i], 0.0, static_cast<double>(kPwmMax));
  return f;
}

std::array<double, 2> tendon_torques(const Pwm3& pwm, const PlantParams& params) {
  const auto f = tendon_forces(pwm, params);
  std::array<double, 2> tau{0.0, 0.0};
  for (std::size_t i = 0; i < kChannels; ++i) {
    tau[0] += params.moment_arms[i][0] * f[i];
    tau[1] += params.moment_arms[i][1] * f[i];
  }
  return tau;
}

double leg_energy(const JointState& q, const PlantParams& p) {
  const auto d = leg_dynamics(q, p);
  const double v0 = q.qd_hip, v1 = q.qd_knee;
  const double kinetic = 0.5 * (d.mass[0] * v0 * v0 + 2.0 * d.mass[1] * v0 * v1 + d.mass[3] * v1 * v1);
  const double l1 = p.geometry.thigh_length;
  const double a1 = q.q_hip, a2 = q.q_hip - q.q_knee;
  const double potential = p.gravity * (p.thigh_mass * p.thigh_com * (1.0 - std::cos(a1)) +
                                        p.shank_mass * (l1 * (1.0 - std::cos(a1)) + p.shank_com * (1.0 - std::cos(a2))));
  return kinetic + potential;
}

std::array<double, 2> gravity_torques(double q_hip, double q_knee, const PlantParams& params) {
  JointState q;
  q.q_hip = q_hip;
  q.q_knee = q_knee;
  return leg_dynamics(q, params).bias;
}

PlantState step(const PlantState& state, const Pwm3& pwm_left, const Pwm3& pwm_right,
                const PlantParams& params) {
  PlantState next = state;
  const double h = params.dt / params.substeps;
  const std::array<std::array<double, 2>, kLegs> tendon{tendon_torques(pwm_left, params),
                                                         tendon_torques(pwm_right, params)};
  for (auto& leg : next.legs) leg.at_limit = false;

  for (int sub = 0; sub < params.substeps; ++sub) {
    std::array<double, kLegs> anchor_velocity{};
    for (std::size_t l = 0; l < kLegs; ++l) {
      LegState& leg = next.legs[l];
      JointState& q = leg.joints;
      const auto dyn = leg_dynamics(q, params);
      std::array<double, 2> tau{tendon[l][0] - params.joint_damping[0] * q.qd_hip,
                                tendon[l][1] - params.joint_damping[1] * q.qd_knee};

      const auto jac = foot_jacobian(params.geometry, q.q_hip, q.q_knee);
      const FootPoint foot = forward_kinematics(params.geometry, q);
      const double foot_xd = jac[0] * q.qd_hip + jac[1] * q.qd_knee;
      const double foot_zd = jac[2] * q.qd_hip + jac[3] * q.qd_knee;
      leg.normal_force = 0.0;
      leg.contact = false;
      if (next.ground_z) {
        // Penetration below the ground plane, positive when the foot is under it.
        const double pen = foot.z - (next.hip_z - *next.ground_z);
        if (pen > 0.0) {
          leg.normal_force =
              std::max(0.0, params.ground_stiffness * pen + params.ground_damping * foot_zd);
          leg.contact = leg.normal_force > 0.0;
        }
      }
      // Ground pushes the foot upward (negative hip-relative z).
      tau[0] += jac[2] * -leg.normal_force;
      tau[1] += jac[3] * -leg.normal_force;
      anchor_velocity[l] = -foot_xd;

      const double rhs0 = tau[0] - dyn.bias[0];
      const double rhs1 = tau[1] - dyn.bias[1];
      const auto& m = dyn.mass;
      const double det = m[0] * m[3] - m[1] * m[2];
      q.qdd_hip = (m[3] * rhs0 - m[1] * rhs1) / det;
      q.qdd_knee = (m[0] * rhs1 - m[2] * rhs0) / det;
      q.qd_hip += h * q.qdd_hip;
      q.qd_knee += h * q.qdd_knee;
      q.q_hip += h * q.qd_hip;
      q.q_knee += h * q.qd_knee;
      if (clamp_to_limits(q, params.geometry)) leg.at_limit = true;

      for (double v : {q.q_hip, q.q_knee, q.qd_hip, q.qd_knee})
        if (!std::isfinite(v) || std::abs(v) > params.divergence_bound)
          throw Error(ErrorCode::NumericalDivergence,
                      fmt::format("leg {} state left the sanity bound at t={:.4f}s", l, next.time));
    }

    // Kinematic anchoring: a foot in contact and sliding backward is a stance
    // foot; the hip advances with it, or with the mean of two stance feet.
    double v = 0.0;
    int stance = 0;
    for (std::size_t l = 0; l < kLegs; ++l)
      if (next.legs[l].contact && anchor_velocity[l] > 0.0) {
        v += anchor_velocity[l];
        ++stance;
      }
    if (stance > 0) v /= stance;
    v *= std::min(params.ground_friction, 1.0);
    next.hip_xd = v;
    next.hip_x += v * h;
    next.displacement += v * h;
    next.time += h;
  }
  return next;
}

std::size_t KinematicsLog::limit_events(std::size_t leg) const {
  return static_cast<std::size_t>(
      std::count_if(legs[leg].begin(), legs[leg].end(), [](const LegSample& s) { return s.at_limit; }));
}

void fill_accelerations(KinematicsLog& log) {
  const double dt = 1.0 / log.sample_rate;
  for (auto& leg : log.legs) {
    const std::size_t n = leg.size();
    if (n < 2) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = i == 0 ? 0 : i - 1;
      const std::size_t b = i + 1 == n ? n - 1 : i + 1;
      const double span = static_cast<double>(b - a) * dt;
      leg[i].joints.qdd_hip = (leg[b].joints.qd_hip - leg[a].joints.qd_hip) / span;
      leg[i].joints.qdd_knee = (leg[b].joints.qd_knee - leg[a].joints.qd_knee) / span;
    }
  }
}

namespace {

void record(KinematicsLog& log, const PlantState& s, const PlantParams& params,
            const std::array<bool, kLegs>& limit_hit) {
  log.time.push_back(s.time);
  log.displacement.push_back(s.displacement);
  for (std::size_t l = 0; l < kLegs; ++l) {
    LegSample sample;
    sample.joints = s.legs[l].joints;
    sample.foot = forward_kinematics(params.geometry, s.legs[l].joints);
    sample.contact = s.legs[l].contact;
    sample.at_limit = limit_hit[l];
    log.legs[l].push_back(sample);
  }
}

}  // namespace

KinematicsLog run_open_loop(const PlantState& initial, const PwmSequence& seq_left,
                            const PwmSequence& seq_right, const PlantParams& params) {
  params.validate();
  if (seq_left.size() != seq_right.size())
    throw Error(ErrorCode::ShapeMismatch, "left and right PWM sequences differ in length");
  KinematicsLog log;
  log.sample_rate = 1.0 / params.dt;
  const std::size_t n = seq_left.size();
  log.time.reserve(n);
  for (auto& leg : log.legs) leg.reserve(n);
  PlantState s = initial;
  for (std::size_t i = 0; i < n; ++i) {
    const PlantState next = step(s, seq_left.at(i), seq_right.at(i), params);
    // Sample i: state at t_i together with whether command i drove a joint into a stop.
    record(log, s, params, {next.legs[0].at_limit, next.legs[1].at_limit});
    s = next;
  }
  fill_accelerations(log);
  return log;
}

TrackingResult run_tracking(const Mlp& net_left, const Mlp& net_right, const Trajectory& desired,
                            const PlantParams& params, const TrackingOptions& options) {
  params.validate();
  if (!(options.duration > 0.0))
    throw Error(ErrorCode::InvalidDuration, "tracking duration must be positive");
  const auto cycle = desired_joint_cycle(params.geometry, desired, options.cycle_resolution);
  const auto n_cycle = cycle.size();
  auto desired_at = [&](double phase) {
    double u = (phase - std::floor(phase)) * static_cast<double>(n_cycle);
    const auto i = static_cast<std::size_t>(u) % n_cycle;
    const auto j = (i + 1) % n_cycle;
    const double w = u - std::floor(u);
    const JointState& a = cycle[i];
    const JointState& b = cycle[j];
    return Input{a.q_hip + w * (b.q_hip - a.q_hip),   a.q_knee + w * (b.q_knee - a.q_knee),
                 a.qd_hip + w * (b.qd_hip - a.qd_hip), a.qd_knee + w * (b.qd_knee - a.qd_knee),
                 a.qdd_hip + w * (b.qdd_hip - a.qdd_hip), a.qdd_knee + w * (b.qdd_knee - a.qdd_knee)};
  };

  TrackingResult result;
  const double rate = 1.0 / params.dt;
  for (auto& c : result.commands) c = PwmSequence::zeros(options.duration, rate);
  const std::size_t n = result.commands[0].size();
  KinematicsLog& log = result.log;
  log.sample_rate = rate;

  PlantState s = PlantState::hanging(0.0, desired.hip_height);
  const std::array<const Mlp*, kLegs> nets{&net_left, &net_right};
  const std::array<double, kLegs> phase_offset{0.0, options.right_leg_phase};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * params.dt;
    std::array<Pwm3, kLegs> pwm;
    for (std::size_t l = 0; l < kLegs; ++l) {
      const Output y = forward(*nets[l], desired_at(t / desired.period + phase_offset[l]));
      for (std::size_t c = 0; c < kChannels; ++c) {
        const auto level = static_cast<std::uint8_t>(std::lround(y[c]));
        result.commands[l].channels[c][i] = level;
        pwm[l][c] = level;
      }
    }
    const PlantState next = step(s, pwm[kLeft], pwm[kRight], params);
    record(log, s, params, {next.legs[0].at_limit, next.legs[1].at_limit});
    s = next;
  }
  fill_accelerations(log);
  result.displacement = s.displacement;
  result.success = s.displacement >= options.success_distance;
  return result;
}

void write_kinematics_csv(const KinematicsLog& log, const std::filesystem::path& path, std::string_view comment) {
  auto out = fmt::output_file(path.string());
  if (!comment.empty()) out.print("# {}\n", comment);
  out.print("t_s,leg,q_hip,q_knee,qd_hip,qd_knee,qdd_hip,qdd_knee,foot_x_m,foot_z_m,contact\n");
  for (std::size_t i = 0; i < log.size(); ++i)
    for (std::size_t l = 0; l < kLegs; ++l) {
      const auto& s = log.legs[l][i];
      const auto& j = s.joints;
      out.print("{:.6f},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{}\n", log.time[i],
                l == kLeft ? "left" : "right", j.q_hip, j.q_knee, j.qd_hip, j.qd_knee, j.qdd_hip, j.qdd_knee,
                s.foot.x, s.foot.z, s.contact ? 1 : 0);
    }
}

void write_displacement_csv(const KinematicsLog& log, const std::filesystem::path& path, std::string_view comment) {
  auto out = fmt::output_file(path.string());
  if (!comment.empty()) out.print("# {}\n", comment);
  out.print("t_s,displacement_m\n");
  for (std::size_t i = 0; i < log.size(); ++i) out.print("{:.6f},{:.9g}\n", log.time[i], log.displacement[i]);
}

namespace {

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns)
      throw Error(ErrorCode::IoError, fmt::format("{}: expected {} columns, got {}", path.string(), columns, cells.size()));
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

KinematicsLog read_kinematics_csv(const std::filesystem::path& path, const std::filesystem::path& displacement_path) {
  KinematicsLog log;
  try {
    for (const auto& r : read_rows(path, 11)) {
      const std::size_t leg = r[1] == "left" ? kLeft : kRight;
      if (leg == kLeft) log.time.push_back(std::stod(r[0]));
      LegSample s;
      s.joints = {std::stod(r[2]), std::stod(r[3]), std::stod(r[4]), std::stod(r[5]), std::stod(r[6]), std::stod(r[7])};
      s.foot = {std::stod(r[8]), std::stod(r[9])};
      s.contact = r[10] == "1";
      log.legs[leg].push_back(s);
    }
    if (log.legs[kLeft].size() != log.time.size() || log.legs[kRight].size() != log.time.size())
      throw Error(ErrorCode::IoError, path.string() + ": legs have unequal sample counts");
    if (log.time.size() >= 2) log.sample_rate = 1.0 / (log.time[1] - log.time[0]);
    if (!displacement_path.empty()) {
      for (const auto& r : read_rows(displacement_path, 2)) log.displacement.push_back(std::stod(r[1]));
      if (log.displacement.size() != log.time.size())
        throw Error(ErrorCode::IoError, displacement_path.string() + ": length differs from kinematics");
    } else {
      log.displacement.assign(log.time.size(), 0.0);
    }
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::IoError, path.string() + ": malformed number");
  }
  return log;
}

}  // namespace g2p
