#include "g2p/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "g2p/error.hpp"

namespace g2p {
namespace {

struct Binding {
  std::string key;  // "section.name"
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: '{}' is not a number", key, v));
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: '{}' is not an integer", key, v));
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::ConfigError, fmt::format("{}: '{}' is not a boolean", key, v));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// Shortest text that reads back to exactly `v`.
std::string fmt_double(double v) { return fmt::format("{}", v); }

template <typename Field>
Binding real(std::string key, Field field) {
  return {key, [field](const ExperimentConfig& c) { return fmt_double(field(const_cast<ExperimentConfig&>(c))); },
          [field, key](ExperimentConfig& c, const std::string& v) { field(c) = parse_double(key, v); }};
}

template <typename Field>
Binding integer(std::string key, Field field) {
  return {key, [field](const ExperimentConfig& c) { return fmt::format("{}", field(const_cast<ExperimentConfig&>(c))); },
          [field, key](ExperimentConfig& c, const std::string& v) {
            field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(parse_int(key, v));
          }};
}

template <typename Field>
Binding boolean(std::string key, Field field) {
  return {key, [field](const ExperimentConfig& c) { return std::string(field(const_cast<ExperimentConfig&>(c)) ? "true" : "false"); },
          [field, key](ExperimentConfig& c, const std::string& v) { field(c) = parse_bool(key, v); }};
}

// Angles are stored in radians but configured in degrees.
template <typename Field>
Binding degrees(std::string key, Field field) {
  return {key,
          [field](const ExperimentConfig& c) {
            const double rad = field(const_cast<ExperimentConfig&>(c));
            // Fewest digits whose conversion back lands on the same radians.
            for (int digits = 1; digits <= 17; ++digits) {
              const double deg = std::stod(fmt::format("{:.{}g}", rad * 180.0 / std::numbers::pi, digits));
              if (deg * std::numbers::pi / 180.0 == rad) return fmt_double(deg);
            }
            return fmt_double(rad * 180.0 / std::numbers::pi);
          },
          [field, key](ExperimentConfig& c, const std::string& v) {
            field(c) = parse_double(key, v) * std::numbers::pi / 180.0;
          }};
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = [] {
    using C = ExperimentConfig;
    std::vector<Binding> b;
    b.push_back({"experiment.seeds",
                 [](const C& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.seeds.size(); ++i) s += (i ? "," : "") + std::to_string(c.seeds[i]);
                   return s;
                 },
                 [](C& c, const std::string& v) {
                   c.seeds.clear();
                   for (const auto& item : split_list(v))
                     c.seeds.push_back(static_cast<std::uint64_t>(parse_int("experiment.seeds", item)));
                 }});
    b.push_back({"experiment.kinds",
                 [](const C& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.kinds.size(); ++i) s += std::string(i ? "," : "") + to_string(c.kinds[i]);
                   return s;
                 },
                 [](C& c, const std::string& v) {
                   c.kinds.clear();
                   for (const auto& item : split_list(v)) c.kinds.push_back(babbling_kind_from_string(item));
                 }});
    b.push_back({"experiment.conditions",
                 [](const C& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.conditions.size(); ++i)
                     s += (i ? "," : "") + std::to_string(static_cast<int>(c.conditions[i]));
                   return s;
                 },
                 [](C& c, const std::string& v) {
                   c.conditions.clear();
                   for (const auto& item : split_list(v))
                     c.conditions.push_back(condition_from_int(static_cast<int>(parse_int("experiment.conditions", item))));
                 }});
    b.push_back(integer("experiment.trials", [](C& c) -> int& { return c.trials; }));
    b.push_back(real("experiment.babble_duration", [](C& c) -> double& { return c.babble_duration; }));
    b.push_back(real("experiment.tracking_skip", [](C& c) -> double& { return c.tracking_skip; }));
    b.push_back(integer("experiment.jobs", [](C& c) -> int& { return c.jobs; }));
    b.push_back({"experiment.output_dir", [](const C& c) { return c.output_dir.string(); },
                 [](C& c, const std::string& v) { c.output_dir = v; }});

    b.push_back(real("naive.sample_rate", [](C& c) -> double& { return c.naive.sample_rate; }));
    b.push_back(real("naive.step_change_freq", [](C& c) -> double& { return c.naive.step_change_freq; }));
    b.push_back(integer("naive.amplitude_low", [](C& c) -> int& { return c.naive.amplitude_low; }));
    b.push_back(integer("naive.amplitude_high", [](C& c) -> int& { return c.naive.amplitude_high; }));
    b.push_back(real("naive.timing_jitter", [](C& c) -> double& { return c.naive.timing_jitter; }));

    b.push_back(real("natural.sample_rate", [](C& c) -> double& { return c.natural.sample_rate; }));
    b.push_back(real("natural.step_freq", [](C& c) -> double& { return c.natural.step_freq; }));
    b.push_back(real("natural.sinusoid_freq", [](C& c) -> double& { return c.natural.sinusoid_freq; }));
    b.push_back(real("natural.peak_freq", [](C& c) -> double& { return c.natural.peak_freq; }));
    b.push_back(real("natural.m1_m2_phase_deg", [](C& c) -> double& { return c.natural.m1_m2_phase_deg; }));
    b.push_back(real("natural.m1_m2_phase_tolerance_deg", [](C& c) -> double& { return c.natural.m1_m2_phase_tolerance_deg; }));
    b.push_back(real("natural.m1_m3_phase_increment_deg", [](C& c) -> double& { return c.natural.m1_m3_phase_increment_deg; }));
    b.push_back(real("natural.increment_period", [](C& c) -> double& { return c.natural.increment_period; }));
    for (std::size_t m = 0; m < kChannels; ++m)
      b.push_back(real(fmt::format("natural.m{}_baseline", m + 1), [m](C& c) -> double& { return c.natural.baseline_levels[m]; }));
    b.push_back(real("natural.baseline_jitter", [](C& c) -> double& { return c.natural.baseline_jitter; }));
    b.push_back(integer("natural.amplitude_low", [](C& c) -> int& { return c.natural.amplitude_low; }));
    b.push_back(integer("natural.amplitude_high", [](C& c) -> int& { return c.natural.amplitude_high; }));
    b.push_back(real("natural.timing_jitter", [](C& c) -> double& { return c.natural.timing_jitter; }));

    b.push_back(real("plant.thigh_length", [](C& c) -> double& { return c.plant.geometry.thigh_length; }));
    b.push_back(real("plant.shank_length", [](C& c) -> double& { return c.plant.geometry.shank_length; }));
    b.push_back(degrees("plant.hip_limit_low_deg", [](C& c) -> double& { return c.plant.geometry.hip_limits.lo; }));
    b.push_back(degrees("plant.hip_limit_high_deg", [](C& c) -> double& { return c.plant.geometry.hip_limits.hi; }));
    b.push_back(degrees("plant.knee_limit_low_deg", [](C& c) -> double& { return c.plant.geometry.knee_limits.lo; }));
    b.push_back(degrees("plant.knee_limit_high_deg", [](C& c) -> double& { return c.plant.geometry.knee_limits.hi; }));
    b.push_back(real("plant.thigh_mass", [](C& c) -> double& { return c.plant.thigh_mass; }));
    b.push_back(real("plant.shank_mass", [](C& c) -> double& { return c.plant.shank_mass; }));
    b.push_back(real("plant.thigh_com", [](C& c) -> double& { return c.plant.thigh_com; }));
    b.push_back(real("plant.shank_com", [](C& c) -> double& { return c.plant.shank_com; }));
    b.push_back(real("plant.thigh_inertia", [](C& c) -> double& { return c.plant.thigh_inertia; }));
    b.push_back(real("plant.shank_inertia", [](C& c) -> double& { return c.plant.shank_inertia; }));
    for (std::size_t m = 0; m < kChannels; ++m) {
      b.push_back(real(fmt::format("plant.m{}_hip_arm", m + 1), [m](C& c) -> double& { return c.plant.moment_arms[m][0]; }));
      b.push_back(real(fmt::format("plant.m{}_knee_arm", m + 1), [m](C& c) -> double& { return c.plant.moment_arms[m][1]; }));
    }
    b.push_back(real("plant.force_per_pwm", [](C& c) -> double& { return c.plant.force_per_pwm; }));
    b.push_back(real("plant.hip_damping", [](C& c) -> double& { return c.plant.joint_damping[0]; }));
    b.push_back(real("plant.knee_damping", [](C& c) -> double& { return c.plant.joint_damping[1]; }));
    b.push_back(real("plant.ground_stiffness", [](C& c) -> double& { return c.plant.ground_stiffness; }));
    b.push_back(real("plant.ground_damping", [](C& c) -> double& { return c.plant.ground_damping; }));
    b.push_back(real("plant.ground_friction", [](C& c) -> double& { return c.plant.ground_friction; }));
    b.push_back(real("plant.gravity", [](C& c) -> double& { return c.plant.gravity; }));
    b.push_back(real("plant.dt", [](C& c) -> double& { return c.plant.dt; }));
    b.push_back(integer("plant.substeps", [](C& c) -> int& { return c.plant.substeps; }));

    b.push_back(integer("net.max_epochs", [](C& c) -> int& { return c.net.max_epochs; }));
    b.push_back(integer("net.patience", [](C& c) -> int& { return c.net.patience; }));
    b.push_back(real("net.test_split", [](C& c) -> double& { return c.net.test_split; }));
    b.push_back(boolean("net.test_split_is_fraction", [](C& c) -> bool& { return c.net.test_split_is_fraction; }));
    b.push_back({"net.split", [](const C& c) { return std::string(c.net.split == SplitMode::Random ? "random" : "block"); },
                 [](C& c, const std::string& v) {
                   if (v == "random") c.net.split = SplitMode::Random;
                   else if (v == "block") c.net.split = SplitMode::Block;
                   else throw Error(ErrorCode::ConfigError, "net.split must be 'random' or 'block'");
                 }});
    b.push_back(real("net.learning_rate", [](C& c) -> double& { return c.net.learning_rate; }));
    b.push_back(real("net.adam_beta1", [](C& c) -> double& { return c.net.adam_beta1; }));
    b.push_back(real("net.adam_beta2", [](C& c) -> double& { return c.net.adam_beta2; }));
    b.push_back(real("net.adam_epsilon", [](C& c) -> double& { return c.net.adam_epsilon; }));
    b.push_back(integer("net.batch_size", [](C& c) -> int& { return c.net.batch_size; }));

    b.push_back(real("trajectory.center_x", [](C& c) -> double& { return c.shape.center_x; }));
    b.push_back(real("trajectory.center_z", [](C& c) -> double& { return c.shape.center_z; }));
    b.push_back(real("trajectory.half_stride", [](C& c) -> double& { return c.shape.half_stride; }));
    b.push_back(real("trajectory.half_height", [](C& c) -> double& { return c.shape.half_height; }));
    b.push_back(real("trajectory.skew", [](C& c) -> double& { return c.shape.skew; }));
    b.push_back(real("trajectory.cycle_rate_hz", [](C& c) -> double& { return c.shape.cycle_rate_hz; }));
    b.push_back(degrees("trajectory.joint_margin_deg", [](C& c) -> double& { return c.shape.joint_margin; }));
    b.push_back(integer("trajectory.samples", [](C& c) -> int& { return c.trajectory_samples; }));

    b.push_back(real("placement.air_clearance", [](C& c) -> double& { return c.placement.air_clearance; }));
    b.push_back(real("placement.contact_depth", [](C& c) -> double& { return c.placement.contact_depth; }));
    b.push_back(real("placement.underground_depth", [](C& c) -> double& { return c.placement.underground_depth; }));

    b.push_back(real("tracking.duration", [](C& c) -> double& { return c.tracking.duration; }));
    b.push_back(real("tracking.success_distance", [](C& c) -> double& { return c.tracking.success_distance; }));
    b.push_back(real("tracking.right_leg_phase", [](C& c) -> double& { return c.tracking.right_leg_phase; }));
    b.push_back(integer("tracking.cycle_resolution", [](C& c) -> int& { return c.tracking.cycle_resolution; }));

    b.push_back(integer("dfa.detrend_order", [](C& c) -> int& { return c.dfa.detrend_order; }));
    b.push_back(boolean("dfa.integrate", [](C& c) -> bool& { return c.dfa.integrate; }));
    return b;
  }();
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::ConfigError, "experiment.trials must be >= 1");
  if (!(babble_duration > 0.0)) throw Error(ErrorCode::ConfigError, "experiment.babble_duration must be > 0");
  if (seeds.size() < static_cast<std::size_t>(trials))
    throw Error(ErrorCode::ConfigError,
                fmt::format("experiment.seeds lists {} seeds for {} trials", seeds.size(), trials));
  if (kinds.empty() || conditions.empty())
    throw Error(ErrorCode::ConfigError, "experiment.kinds and experiment.conditions must be non-empty");
  if (tracking_skip < 0.0 || tracking_skip >= tracking.duration)
    throw Error(ErrorCode::ConfigError, "experiment.tracking_skip must lie in [0, tracking.duration)");
  try {
    naive.validate();
    natural.validate();
    plant.validate();
    net.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (std::abs(naive.sample_rate * plant.dt - 1.0) > 1e-9 || std::abs(natural.sample_rate * plant.dt - 1.0) > 1e-9)
    throw Error(ErrorCode::ConfigError, "babbling sample rates must equal the plant control rate 1/dt");
}

ExperimentConfig parse_config(const std::string& ini_text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  std::map<std::string, const Binding*> index;
  for (const auto& b : bindings()) index[b.key] = &b;

  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw Error(ErrorCode::ConfigError, fmt::format("key '{}' must live inside a [section]", section));
    for (const auto& [name, value] : body) {
      const std::string key = section + "." + name;
      const auto it = index.find(key);
      if (it == index.end()) throw Error(ErrorCode::ConfigError, fmt::format("unknown config key '{}'", key));
      it->second->set(cfg, value.data());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_ini(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& b : bindings()) {
    const auto dot = b.key.find('.');
    const std::string sec = b.key.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "" : "\n") + fmt::format("[{}]\n", sec);
      section = sec;
    }
    out += fmt::format("{} = {}\n", b.key.substr(dot + 1), b.get(cfg));
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // output_dir and jobs do not change results.
  ExperimentConfig canon = cfg;
  canon.output_dir.clear();
  canon.jobs = 0;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_ini(canon)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace g2p
