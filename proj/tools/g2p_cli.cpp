// Command-line front end for the babbling / inverse-map / tracking pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "g2p/error.hpp"
#include "g2p/harness.hpp"

namespace fs = std::filesystem;
using namespace g2p;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string kind = "natural";
  int condition = 1;
  std::string out;
  std::string input;
  std::string net_left;
  std::string net_right;
  std::string desired;
  std::optional<double> duration;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.duration) cfg.babble_duration = *o.duration;
  cfg.validate();
  return cfg;
}

std::uint64_t seed_of(const Options& o, const ExperimentConfig& cfg) { return o.seed ? *o.seed : cfg.seeds.front(); }

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(1) << '\n';
}

int cmd_babble(const Options& o) {
  const auto cfg = resolve(o);
  const auto kind = babbling_kind_from_string(o.kind);
  const auto seed = seed_of(o, cfg);
  fs::create_directories(cfg.output_dir);
  const std::string comment = fmt::format("config_hash={} seed={} kind={}", config_hash(cfg), seed, o.kind);
  const auto data = babble(cfg, kind, seed);
  write_pwm_csv(data.pwm[kLeft], cfg.output_dir / "babble_pwm_left.csv", comment);
  write_pwm_csv(data.pwm[kRight], cfg.output_dir / "babble_pwm_right.csv", comment);
  std::cout << fmt::format("{} babbling, seed {}: {} samples per leg, M1-M2 coactivation {:.4f} / {:.4f}\n", o.kind, seed,
                           data.pwm[kLeft].size(), coactivation_index(data.pwm[kLeft], 0, 1),
                           coactivation_index(data.pwm[kRight], 0, 1));
  return 0;
}

int cmd_rollout(const Options& o) {
  const auto cfg = resolve(o);
  const auto seed = seed_of(o, cfg);
  std::array<PwmSequence, kLegs> pwm;
  if (!o.input.empty()) {
    pwm[kLeft] = read_pwm_csv(fs::path(o.input) / "babble_pwm_left.csv");
    pwm[kRight] = read_pwm_csv(fs::path(o.input) / "babble_pwm_right.csv");
  } else {
    const auto data = babble(cfg, babbling_kind_from_string(o.kind), seed);
    pwm = data.pwm;
  }
  const auto log = run_open_loop(PlantState::hanging(), pwm[kLeft], pwm[kRight], cfg.plant);
  fs::create_directories(cfg.output_dir);
  write_kinematics_csv(log, cfg.output_dir / "babble_kinematics.csv",
                       fmt::format("config_hash={} seed={}", config_hash(cfg), pwm[kLeft].seed));
  std::cout << fmt::format("rollout: {} samples, joint-limit events {} / {}\n", log.size(), log.limit_events(kLeft),
                           log.limit_events(kRight));
  return 0;
}

int cmd_train(const Options& o) {
  const auto cfg = resolve(o);
  const auto kind = babbling_kind_from_string(o.kind);
  const auto seed = seed_of(o, cfg);
  const auto data = babble(cfg, kind, seed);
  const auto nets = train_legs(cfg, data);
  fs::create_directories(cfg.output_dir);
  for (std::size_t l = 0; l < kLegs; ++l) {
    const char* leg = l == kLeft ? "left" : "right";
    save_checkpoint({nets[l].net, nets[l].history, seed, fmt::format("{} babbling seed {} {} leg", o.kind, seed, leg)},
                    cfg.output_dir / fmt::format("net_{}.json", leg));
    const auto& h = nets[l].history;
    std::cout << fmt::format("{} leg: {} epochs, best epoch {}, test mse {:.5f}\n", leg, h.epochs.size() - 1,
                             h.best_epoch, h.epochs[static_cast<std::size_t>(h.best_epoch)].test_mse);
  }
  return 0;
}

int cmd_track(const Options& o) {
  const auto cfg = resolve(o);
  const auto cond = condition_from_int(o.condition);
  std::array<Mlp, kLegs> nets;
  if (!o.net_left.empty() || !o.net_right.empty()) {
    if (o.net_left.empty() || o.net_right.empty())
      throw Error(ErrorCode::InvalidArgument, "--net-left and --net-right must be given together");
    nets = {load_checkpoint(o.net_left).net, load_checkpoint(o.net_right).net};
  } else {
    const auto trained = train_legs(cfg, babble(cfg, babbling_kind_from_string(o.kind), seed_of(o, cfg)));
    nets = {trained[kLeft].net, trained[kRight].net};
  }
  const auto out = track_condition(cfg, nets, cond);
  fs::create_directories(cfg.output_dir);
  const std::string comment = fmt::format("config_hash={} condition={}", config_hash(cfg), o.condition);
  write_trajectory_csv(out.desired, cfg.output_dir / "desired_trajectory.csv", comment);
  write_kinematics_csv(out.tracking.log, cfg.output_dir / "kinematics.csv", comment);
  write_displacement_csv(out.tracking.log, cfg.output_dir / "displacement.csv", comment);
  write_pwm_csv(out.tracking.commands[kLeft], cfg.output_dir / "commands_left.csv", comment);
  write_pwm_csv(out.tracking.commands[kRight], cfg.output_dir / "commands_right.csv", comment);
  std::cout << fmt::format("condition {}: displacement {:.3f} m, success {}, speed {:.2f} cm/s, alpha {:.3f} / {:.3f}\n",
                           o.condition, out.stats.final_displacement, out.stats.success, out.stats.speed,
                           out.dfa[kLeft].alpha, out.dfa[kRight].alpha);
  return 0;
}

// Machine-readable error record on stderr and, when --out is set, in <out>/error.json.
int emit_error(const Options& o, std::string_view code, std::string_view message, int status) {
  const nlohmann::json err{{"error", code}, {"message", message}};
  std::cerr << err.dump() << '\n';
  if (!o.out.empty()) {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    std::ofstream(fs::path(o.out) / "error.json") << err.dump() << '\n';
  }
  return status;
}

int cmd_trial(const Options& o) {
  const auto cfg = resolve(o);
  const auto rec =
      run_trial(cfg, seed_of(o, cfg), babbling_kind_from_string(o.kind), condition_from_int(o.condition));
  if (rec.failed) return emit_error(o, rec.error_code, rec.error_message, 2);
  std::cout << fmt::format("trial written to {}: success {}, speed {:.2f} cm/s\n", rec.directory.string(),
                           rec.stats.success, rec.stats.speed);
  return 0;
}

int cmd_experiment(const Options& o) {
  const auto cfg = resolve(o);
  const auto rec = run_experiment(cfg);
  std::ifstream report(cfg.output_dir / "report.txt");
  std::cout << report.rdbuf();
  std::size_t failed = 0;
  for (const auto& t : rec.trials) failed += t.failed ? 1 : 0;
  if (failed) std::cerr << fmt::format("{} of {} trials failed\n", failed, rec.trials.size());
  return 0;
}

int cmd_analyze(const Options& o) {
  if (o.input.empty()) throw Error(ErrorCode::InvalidArgument, "analyze needs --input <kinematics.csv>");
  const auto cfg = resolve(o);
  const fs::path in = o.input;
  const fs::path disp = in.parent_path() / "displacement.csv";
  const auto log = read_kinematics_csv(in, fs::exists(disp) ? disp : fs::path{});
  nlohmann::json j;
  const auto stats = trial_stats(log.displacement, log.sample_rate, cfg.tracking.success_distance);
  j["success"] = stats.success;
  j["travel_time_s"] = stats.travel_time;
  j["speed_cm_s"] = stats.speed;
  j["displacement_m"] = stats.final_displacement;
  const auto skip = static_cast<std::size_t>(cfg.tracking_skip * log.sample_rate);
  std::optional<Trajectory> region;
  if (!o.desired.empty()) region = read_trajectory_csv(o.desired);
  for (std::size_t l = 0; l < kLegs; ++l) {
    const char* leg = l == kLeft ? "left" : "right";
    const auto series = endpoint_distance_series(log, l);
    const auto d = dfa(std::span(series).subspan(std::min(skip, series.size())), cfg.dfa);
    j["alpha"][leg] = d.alpha;
    j["alpha_r2"][leg] = d.fit_r2;
    if (region) {
      std::vector<FootPoint> feet;
      for (const auto& s : log.legs[l]) feet.push_back(s.foot);
      j["spread"][leg] = spread(feet, *region).ratio;
    }
  }
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    write_json(fs::path(o.out) / "analysis.json", j);
  }
  std::cout << j.dump(1) << '\n';
  return 0;
}

int cmd_report(const Options& o) {
  if (o.input.empty()) throw Error(ErrorCode::InvalidArgument, "report needs --input <run_dir>");
  const auto rec = load_run(o.input);
  const fs::path dest = o.out.empty() ? fs::path(o.input) : fs::path(o.out);
  report(rec, dest);
  std::ifstream text(dest / "report.txt");
  std::cout << text.rdbuf();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Babbling, inverse-map training and gait tracking for a simulated tendon-driven biped"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "INI run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "trial seed (default: first configured seed)");
    sub->add_option("--out", o.out, "output directory");
  };
  auto with_kind = [&](CLI::App* sub) {
    sub->add_option("--kind", o.kind, "babbling kind")->check(CLI::IsMember({"naive", "natural"}));
  };
  auto with_condition = [&](CLI::App* sub) {
    sub->add_option("--condition", o.condition, "1 in air, 2 slight contact, 3 one cm under ground")
        ->check(CLI::IsMember({1, 2, 3}));
  };

  auto* babble_cmd = app.add_subcommand("babble", "generate motor babbling PWM sequences");
  common(babble_cmd);
  with_kind(babble_cmd);
  babble_cmd->add_option("--duration", o.duration, "babbling length in seconds");

  auto* rollout_cmd = app.add_subcommand("rollout", "replay babbling on the hanging plant and log kinematics");
  common(rollout_cmd);
  with_kind(rollout_cmd);
  rollout_cmd->add_option("--duration", o.duration, "babbling length in seconds");
  rollout_cmd->add_option("--input", o.input, "directory holding babble_pwm_{left,right}.csv");

  auto* train_cmd = app.add_subcommand("train", "babble, roll out and train one inverse map per leg");
  common(train_cmd);
  with_kind(train_cmd);
  train_cmd->add_option("--duration", o.duration, "babbling length in seconds");

  auto* track_cmd = app.add_subcommand("track", "track the desired cycle under one ground condition");
  common(track_cmd);
  with_kind(track_cmd);
  with_condition(track_cmd);
  track_cmd->add_option("--net-left", o.net_left, "left-leg checkpoint")->check(CLI::ExistingFile);
  track_cmd->add_option("--net-right", o.net_right, "right-leg checkpoint")->check(CLI::ExistingFile);

  auto* trial_cmd = app.add_subcommand("trial", "full pipeline for one seed, kind and condition");
  common(trial_cmd);
  with_kind(trial_cmd);
  with_condition(trial_cmd);

  auto* exp_cmd = app.add_subcommand("experiment", "all kinds x seeds x conditions plus the report");
  common(exp_cmd);

  auto* analyze_cmd = app.add_subcommand("analyze", "DFA, trial statistics and spread for a kinematics CSV");
  common(analyze_cmd);
  analyze_cmd->add_option("--input", o.input, "kinematics CSV")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--desired", o.desired, "desired trajectory CSV for spread")->check(CLI::ExistingFile);

  auto* report_cmd = app.add_subcommand("report", "rebuild summary tables and report from a run directory");
  common(report_cmd);
  report_cmd->add_option("--input", o.input, "run directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    nlohmann::json err{{"error", "UsageError"}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return 64;
  }

  try {
    if (*babble_cmd) return cmd_babble(o);
    if (*rollout_cmd) return cmd_rollout(o);
    if (*train_cmd) return cmd_train(o);
    if (*track_cmd) return cmd_track(o);
    if (*trial_cmd) return cmd_trial(o);
    if (*exp_cmd) return cmd_experiment(o);
    if (*analyze_cmd) return cmd_analyze(o);
    if (*report_cmd) return cmd_report(o);
  } catch (const Error& e) {
    return emit_error(o, to_string(e.code()), e.what(), 2);
  } catch (const std::exception& e) {
    return emit_error(o, "InternalError", e.what(), 1);
  }
  return 0;
}
