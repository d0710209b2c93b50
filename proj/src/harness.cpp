#include "g2p/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <fmt/os.h>

#include "g2p/error.hpp"
#include "g2p/random.hpp"
#include "json.hpp"

namespace g2p {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kBabbleStream = 1000;
constexpr std::uint64_t kTrainStream = 2000;

std::string artifact_comment(const std::string& hash, std::uint64_t seed, BabblingKind kind) {
  return fmt::format("config_hash={} seed={} kind={}", hash, seed, to_string(kind));
}

fs::path trial_dir(const ExperimentConfig& cfg, BabblingKind kind, int trial_index, std::uint64_t seed) {
  return cfg.output_dir / "trials" / fmt::format("{}_t{}_s{}", to_string(kind), trial_index, seed);
}

fs::path condition_dir(const fs::path& trial, Condition c) {
  return trial / fmt::format("condition_{}", static_cast<int>(c));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

struct PreparedTrial {
  BabbleData data;
  std::array<TrainResult, kLegs> nets;
  std::array<SpreadResult, kLegs> spread;
};

PreparedTrial prepare(const ExperimentConfig& cfg, BabblingKind kind, std::uint64_t seed, const fs::path& dir,
                      const std::string& hash) {
  fs::create_directories(dir);
  const std::string comment = artifact_comment(hash, seed, kind);
  PreparedTrial p;
  p.data = babble(cfg, kind, seed);
  write_pwm_csv(p.data.pwm[kLeft], dir / "babble_pwm_left.csv", comment);
  write_pwm_csv(p.data.pwm[kRight], dir / "babble_pwm_right.csv", comment);
  write_kinematics_csv(p.data.log, dir / "babble_kinematics.csv", comment);

  const Trajectory region = desired_for(cfg, Condition::InAir);
  write_trajectory_csv(region, dir / "desired_trajectory.csv", comment);
  for (std::size_t l = 0; l < kLegs; ++l) {
    std::vector<FootPoint> feet;
    feet.reserve(p.data.log.size());
    for (const auto& s : p.data.log.legs[l]) feet.push_back(s.foot);
    p.spread[l] = spread(feet, region);
  }

  p.nets = train_legs(cfg, p.data);
  for (std::size_t l = 0; l < kLegs; ++l) {
    Checkpoint ckpt{p.nets[l].net, p.nets[l].history, derive_seed(seed, kTrainStream + l),
                    fmt::format("{} babbling, seed {}, {} leg, {}", to_string(kind), seed, l == kLeft ? "left" : "right",
                                comment)};
    save_checkpoint(ckpt, dir / (l == kLeft ? "net_left.json" : "net_right.json"));
  }
  return p;
}

void persist_condition(const ConditionOutcome& out, const fs::path& dir, const std::string& comment,
                       const TrialRecord& rec) {
  fs::create_directories(dir);
  write_trajectory_csv(out.desired, dir / "desired_trajectory.csv", comment);
  write_kinematics_csv(out.tracking.log, dir / "kinematics.csv", comment);
  write_displacement_csv(out.tracking.log, dir / "displacement.csv", comment);
  write_pwm_csv(out.tracking.commands[kLeft], dir / "commands_left.csv", comment);
  write_pwm_csv(out.tracking.commands[kRight], dir / "commands_right.csv", comment);

  auto dfa_out = fmt::output_file((dir / "dfa.csv").string());
  dfa_out.print("# {}\n", comment);
  dfa_out.print("leg,scale,fluctuation\n");
  for (std::size_t l = 0; l < kLegs; ++l)
    for (std::size_t k = 0; k < out.dfa[l].scales.size(); ++k)
      dfa_out.print("{},{},{:.9g}\n", l == kLeft ? "left" : "right", out.dfa[l].scales[k], out.dfa[l].fluctuations[k]);
  dfa_out.close();

  nlohmann::json j;
  j["kind"] = to_string(rec.kind);
  j["trial"] = rec.trial;
  j["seed"] = rec.seed;
  j["condition"] = static_cast<int>(rec.condition);
  j["hip_height_m"] = out.desired.hip_height;
  j["success"] = out.stats.success;
  j["travel_time_s"] = out.stats.travel_time;
  j["speed_cm_s"] = out.stats.speed;
  j["displacement_m"] = out.stats.final_displacement;
  for (std::size_t l = 0; l < kLegs; ++l) {
    const char* leg = l == kLeft ? "left" : "right";
    j["alpha"][leg] = out.dfa[l].alpha;
    j["alpha_r2"][leg] = out.dfa[l].fit_r2;
    j["rms_error_m"][leg] = out.rms_error[l];
    j["alpha_intercept"][leg] = out.dfa[l].intercept;
    j["spread"][leg] = rec.spread[l].ratio;
    j["spread_occupied"][leg] = rec.spread[l].occupied;
    j["spread_total"][leg] = rec.spread[l].total;
    j["babble_limit_events"][leg] = rec.babble_limit_events[l];
  }
  write_text(dir / "trial.json", j.dump(1) + "\n");
}

void mark_failure(const fs::path& dir, const TrialRecord& rec) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  nlohmann::json j{{"error", rec.error_code}, {"message", rec.error_message}};
  std::ofstream out(dir / "FAILED");
  out << j.dump() << '\n';
}

std::vector<TrialRecord> run_kind_trial(const ExperimentConfig& cfg, const std::string& hash, BabblingKind kind,
                                        int trial_index, std::uint64_t seed,
                                        const std::vector<Condition>& conditions) {
  std::vector<TrialRecord> records;
  for (Condition c : conditions) {
    TrialRecord r;
    r.kind = kind;
    r.trial = trial_index;
    r.seed = seed;
    r.condition = c;
    r.directory = condition_dir(trial_dir(cfg, kind, trial_index, seed), c);
    records.push_back(r);
  }
  const fs::path dir = trial_dir(cfg, kind, trial_index, seed);
  const std::string comment = artifact_comment(hash, seed, kind);
  std::optional<PreparedTrial> prepared;
  auto fail_all = [&](const std::string& code, const std::string& msg) {
    for (auto& r : records) {
      r.failed = true;
      r.error_code = code;
      r.error_message = msg;
    }
    TrialRecord marker = records.front();
    mark_failure(dir, marker);
  };
  try {
    prepared = prepare(cfg, kind, seed, dir, hash);
  } catch (const Error& e) {
    fail_all(std::string(to_string(e.code())), e.what());
    return records;
  } catch (const std::exception& e) {
    fail_all("InternalError", e.what());
    return records;
  }
  const std::array<Mlp, kLegs> nets{prepared->nets[kLeft].net, prepared->nets[kRight].net};
  for (auto& r : records) {
    r.spread = prepared->spread;
    r.babble_limit_events = {prepared->data.log.limit_events(kLeft), prepared->data.log.limit_events(kRight)};
    try {
      const ConditionOutcome out = track_condition(cfg, nets, r.condition);
      r.stats = out.stats;
      r.dfa = out.dfa;
      r.rms_error = out.rms_error;
      persist_condition(out, r.directory, comment, r);
    } catch (const Error& e) {
      r.failed = true;
      r.error_code = std::string(to_string(e.code()));
      r.error_message = e.what();
      mark_failure(r.directory, r);
    } catch (const std::exception& e) {
      r.failed = true;
      r.error_code = "InternalError";
      r.error_message = e.what();
      mark_failure(r.directory, r);
    }
  }
  return records;
}

}  // namespace

BabbleData babble(const ExperimentConfig& cfg, BabblingKind kind, std::uint64_t seed) {
  BabbleData d;
  d.kind = kind;
  d.seed = seed;
  for (std::size_t l = 0; l < kLegs; ++l) {
    const auto leg_seed = derive_seed(seed, kBabbleStream + l);
    d.pwm[l] = kind == BabblingKind::Naive ? generate_naive(cfg.babble_duration, leg_seed, cfg.naive)
                                           : generate_natural(cfg.babble_duration, leg_seed, cfg.natural);
  }
  d.log = run_open_loop(PlantState::hanging(), d.pwm[kLeft], d.pwm[kRight], cfg.plant);
  return d;
}

Dataset make_dataset(const BabbleData& data, std::size_t leg) {
  Dataset ds;
  const Mlp scaling;
  const auto& samples = data.log.legs.at(leg);
  const auto& pwm = data.pwm.at(leg);
  ds.inputs.reserve(samples.size());
  ds.targets.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& j = samples[i].joints;
    ds.inputs.push_back({j.q_hip, j.q_knee, j.qd_hip, j.qd_knee, j.qdd_hip, j.qdd_knee});
    const Pwm3 p = pwm.at(i);
    ds.targets.push_back({scaling.to_unit(p[0]), scaling.to_unit(p[1]), scaling.to_unit(p[2])});
  }
  ds.provenance = fmt::format("{} babbling seed {} leg {}", to_string(data.kind), data.seed, leg);
  return ds;
}

std::array<TrainResult, kLegs> train_legs(const ExperimentConfig& cfg, const BabbleData& data) {
  std::array<TrainResult, kLegs> out;
  for (std::size_t l = 0; l < kLegs; ++l) {
    TrainConfig tc = cfg.net;
    tc.seed = derive_seed(data.seed, kTrainStream + l);
    out[l] = train(make_dataset(data, l), tc);
  }
  return out;
}

Trajectory desired_for(const ExperimentConfig& cfg, Condition condition) {
  return place_for_condition(desired_trajectory(cfg.plant.geometry, cfg.shape, cfg.trajectory_samples), condition,
                             0.0, cfg.placement);
}

double tracking_rms_error(const KinematicsLog& log, std::size_t leg, const Trajectory& desired, double phase_offset,
                          double skip) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const double t = static_cast<double>(i) / log.sample_rate;
    if (t < skip) continue;
    const FootPoint want = desired.at_phase(t / desired.period + phase_offset);
    const FootPoint got = log.legs[leg][i].foot;
    acc += (want.x - got.x) * (want.x - got.x) + (want.z - got.z) * (want.z - got.z);
    ++n;
  }
  return n ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
}

ConditionOutcome track_condition(const ExperimentConfig& cfg, const std::array<Mlp, kLegs>& nets,
                                 Condition condition) {
  ConditionOutcome out;
  out.condition = condition;
  out.desired = desired_for(cfg, condition);
  out.tracking = run_tracking(nets[kLeft], nets[kRight], out.desired, cfg.plant, cfg.tracking);
  out.stats = trial_stats(out.tracking.log.displacement, out.tracking.log.sample_rate, cfg.tracking.success_distance);
  const auto skip = static_cast<std::size_t>(std::llround(cfg.tracking_skip * out.tracking.log.sample_rate));
  for (std::size_t l = 0; l < kLegs; ++l) {
    const auto series = endpoint_distance_series(out.tracking.log, l);
    out.dfa[l] = dfa(std::span(series).subspan(std::min(skip, series.size())), cfg.dfa);
    out.rms_error[l] = tracking_rms_error(out.tracking.log, l, out.desired,
                                          l == kLeft ? 0.0 : cfg.tracking.right_leg_phase, cfg.tracking_skip);
  }
  return out;
}

TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t seed, BabblingKind kind, Condition condition,
                      int trial_index) {
  return run_kind_trial(cfg, config_hash(cfg), kind, trial_index, seed, {condition}).front();
}

RunRecord run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunRecord record;
  record.config = cfg;
  record.config_hash = config_hash(cfg);
  fs::create_directories(cfg.output_dir);

  struct Task {
    BabblingKind kind;
    int trial;
  };
  std::vector<Task> tasks;
  for (BabblingKind k : cfg.kinds)
    for (int t = 0; t < cfg.trials; ++t) tasks.push_back({k, t});
  std::vector<std::vector<TrialRecord>> results(tasks.size());

  unsigned workers = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++)
      results[i] = run_kind_trial(cfg, record.config_hash, tasks[i].kind, tasks[i].trial,
                                  cfg.seeds[static_cast<std::size_t>(tasks[i].trial)], cfg.conditions);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& r : results)
    for (auto& t : r) record.trials.push_back(std::move(t));
  report(record, cfg.output_dir);
  return record;
}

std::vector<GroupSummary> summarize(const RunRecord& record) {
  std::vector<GroupSummary> groups;
  for (BabblingKind k : record.config.kinds)
    for (Condition c : record.config.conditions) {
      GroupSummary g;
      g.kind = k;
      g.condition = c;
      double speed_sum = 0.0, spread_sum = 0.0, err_sum = 0.0;
      int ok = 0;
      for (const auto& t : record.trials) {
        if (t.kind != k || t.condition != c) continue;
        ++g.trials;
        if (t.failed) {
          ++g.failures;
          continue;
        }
        ++ok;
        if (t.stats.success) {
          ++g.successes;
          speed_sum += t.stats.speed;
        }
        for (std::size_t l = 0; l < kLegs; ++l) {
          spread_sum += t.spread[l].ratio;
          err_sum += t.rms_error[l];
          g.alphas.push_back(t.dfa[l].alpha);
        }
      }
      g.success_rate = g.trials ? static_cast<double>(g.successes) / g.trials : 0.0;
      g.mean_speed = g.successes ? speed_sum / g.successes : 0.0;
      if (ok) {
        g.mean_spread = spread_sum / (2.0 * ok);
        g.mean_rms_error = err_sum / (2.0 * ok);
        g.mean_alpha = mean(g.alphas);
        g.alpha_variance = g.alphas.size() >= 2 ? sample_variance(g.alphas) : 0.0;
      }
      groups.push_back(std::move(g));
    }
  return groups;
}

const GroupSummary* find_group(const std::vector<GroupSummary>& groups, BabblingKind kind, Condition condition) {
  for (const auto& g : groups)
    if (g.kind == kind && g.condition == condition) return &g;
  return nullptr;
}

void report(const RunRecord& record, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string head = fmt::format("# schema={} config_hash={}\n", record.schema, record.config_hash);
  const auto groups = summarize(record);

  std::string summary = head +
      "kind,condition,trials,successes,failures,success_rate,mean_speed_cm_s,mean_spread,mean_alpha,alpha_variance,"
      "mean_rms_error_m\n";
  for (const auto& g : groups)
    summary += fmt::format("{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.9f},{:.6f}\n", to_string(g.kind),
                           static_cast<int>(g.condition), g.trials, g.successes, g.failures, g.success_rate,
                           g.mean_speed, g.mean_spread, g.mean_alpha, g.alpha_variance, g.mean_rms_error);
  write_text(dir / "summary.csv", summary);

  std::string trials = head +
      "kind,trial,seed,condition,status,success,travel_time_s,speed_cm_s,displacement_m,rms_error_left_m,"
      "rms_error_right_m,babble_limit_events_left,babble_limit_events_right,directory\n";
  std::string dfa_csv = head + "kind,trial,seed,condition,leg,alpha,fit_r2,scales,fluctuations\n";
  std::string spread_csv = head + "kind,trial,seed,leg,spread,occupied_pixels,region_pixels\n";
  for (const auto& t : record.trials) {
    const auto rel = fs::relative(t.directory, dir).generic_string();
    trials += fmt::format("{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{}\n", to_string(t.kind), t.trial,
                          t.seed, static_cast<int>(t.condition), t.failed ? "failed:" + t.error_code : "ok",
                          t.stats.success ? 1 : 0, t.stats.travel_time, t.stats.speed, t.stats.final_displacement,
                          t.rms_error[kLeft], t.rms_error[kRight], t.babble_limit_events[kLeft],
                          t.babble_limit_events[kRight], rel);
    if (t.failed) continue;
    for (std::size_t l = 0; l < kLegs; ++l) {
      std::string scales, fl;
      for (std::size_t k = 0; k < t.dfa[l].scales.size(); ++k) {
        scales += fmt::format("{}{}", k ? ";" : "", t.dfa[l].scales[k]);
        fl += fmt::format("{}{:.9g}", k ? ";" : "", t.dfa[l].fluctuations[k]);
      }
      dfa_csv += fmt::format("{},{},{},{},{},{:.9f},{:.9f},{},{}\n", to_string(t.kind), t.trial, t.seed,
                             static_cast<int>(t.condition), l == kLeft ? "left" : "right", t.dfa[l].alpha,
                             t.dfa[l].fit_r2, scales, fl);
    }
  }
  // Spread depends only on the babbling, so one row per (kind, trial, leg).
  for (const auto& t : record.trials) {
    if (t.failed || t.condition != record.config.conditions.front()) continue;
    for (std::size_t l = 0; l < kLegs; ++l)
      spread_csv += fmt::format("{},{},{},{},{:.6f},{},{}\n", to_string(t.kind), t.trial, t.seed,
                                l == kLeft ? "left" : "right", t.spread[l].ratio, t.spread[l].occupied,
                                t.spread[l].total);
  }
  write_text(dir / "trials.csv", trials);
  write_text(dir / "dfa.csv", dfa_csv);
  write_text(dir / "spread.csv", spread_csv);

  std::string tests = head + "comparison,kind_a,condition_a,kind_b,condition_b,n_a,n_b,mean_a,mean_b,t,df,p\n";
  std::string text = fmt::format("Run {} (config {})\n\n", record.schema, record.config_hash);
  auto compare = [&](BabblingKind ka, Condition ca, BabblingKind kb, Condition cb, const std::string& label) {
    const auto* a = find_group(groups, ka, ca);
    const auto* b = find_group(groups, kb, cb);
    if (!a || !b || a->alphas.size() < 2 || b->alphas.size() < 2) return;
    const auto w = welch_test(a->alphas, b->alphas);
    tests += fmt::format("{},{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6g}\n", label, to_string(ka),
                         static_cast<int>(ca), to_string(kb), static_cast<int>(cb), a->alphas.size(),
                         b->alphas.size(), w.mean_a, w.mean_b, w.t, w.df, w.p);
    text += fmt::format("  {:<38} alpha {:.3f} vs {:.3f}  t={:+.3f} df={:.1f} p={:.4f}\n", label, w.mean_a, w.mean_b,
                        w.t, w.df, w.p);
  };

  text += "Babbling spread (fraction of desired-loop pixels visited)\n";
  for (BabblingKind k : record.config.kinds)
    if (const auto* g = find_group(groups, k, record.config.conditions.front()))
      text += fmt::format("  {:<8} mean spread {:.3f}\n", to_string(k), g->mean_spread);
  text += "\nTracking outcomes per group\n";
  for (const auto& g : groups)
    text += fmt::format("  {:<8} condition {}  success {}/{} ({:.0f}%)  mean speed {:.2f} cm/s  rms error {:.1f} mm  "
                        "alpha {:.3f} (var {:.5f})\n",
                        to_string(g.kind), static_cast<int>(g.condition), g.successes, g.trials,
                        100.0 * g.success_rate, g.mean_speed, 1000.0 * g.mean_rms_error, g.mean_alpha,
                        g.alpha_variance);
  text += "\nDFA comparisons (Welch, two-sided, leg series)\n";
  for (BabblingKind k : record.config.kinds) {
    compare(k, Condition::UnderGround1cm, k, Condition::SlightContact, fmt::format("{} c3 vs c2", to_string(k)));
    compare(k, Condition::SlightContact, k, Condition::InAir, fmt::format("{} c2 vs c1", to_string(k)));
  }
  for (Condition c : record.config.conditions)
    compare(BabblingKind::Natural, c, BabblingKind::Naive, c,
            fmt::format("natural vs naive c{}", static_cast<int>(c)));
  write_text(dir / "tests.csv", tests);
  write_text(dir / "report.txt", text);

  nlohmann::json m;
  m["schema"] = record.schema;
  m["config_hash"] = record.config_hash;
  m["config"] = to_ini(record.config);
  m["files"] = {"summary.csv", "trials.csv", "dfa.csv", "spread.csv", "tests.csv", "report.txt"};
  m["trials"] = nlohmann::json::array();
  for (const auto& t : record.trials)
    m["trials"].push_back({{"kind", to_string(t.kind)},
                           {"trial", t.trial},
                           {"seed", t.seed},
                           {"condition", static_cast<int>(t.condition)},
                           {"directory", fs::relative(t.directory, dir).generic_string()},
                           {"status", t.failed ? "failed" : "ok"},
                           {"error", t.error_code}});
  write_text(dir / "manifest.json", m.dump(1) + "\n");
}

RunRecord load_run(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(ErrorCode::IoError, "missing " + (dir / "manifest.json").string());
  RunRecord record;
  try {
    const auto m = nlohmann::json::parse(in);
    record.schema = m.at("schema").get<std::string>();
    if (record.schema != kRunSchema) throw Error(ErrorCode::IoError, "unsupported run schema " + record.schema);
    record.config = parse_config(m.at("config").get<std::string>());
    record.config_hash = m.at("config_hash").get<std::string>();
    for (const auto& e : m.at("trials")) {
      TrialRecord t;
      t.kind = babbling_kind_from_string(e.at("kind").get<std::string>());
      t.trial = e.at("trial").get<int>();
      t.seed = e.at("seed").get<std::uint64_t>();
      t.condition = condition_from_int(e.at("condition").get<int>());
      t.directory = dir / e.at("directory").get<std::string>();
      if (e.at("status").get<std::string>() != "ok") {
        t.failed = true;
        t.error_code = e.at("error").get<std::string>();
        std::ifstream fin(t.directory / "FAILED");
        if (fin) t.error_message = nlohmann::json::parse(fin).value("message", "");
        record.trials.push_back(std::move(t));
        continue;
      }
      std::ifstream tin(t.directory / "trial.json");
      if (!tin) throw Error(ErrorCode::IoError, "missing " + (t.directory / "trial.json").string());
      const auto j = nlohmann::json::parse(tin);
      t.stats.success = j.at("success").get<bool>();
      t.stats.travel_time = j.at("travel_time_s").get<double>();
      t.stats.speed = j.at("speed_cm_s").get<double>();
      t.stats.final_displacement = j.at("displacement_m").get<double>();
      for (std::size_t l = 0; l < kLegs; ++l) {
        const char* leg = l == kLeft ? "left" : "right";
        t.dfa[l].alpha = j.at("alpha").at(leg).get<double>();
        t.dfa[l].fit_r2 = j.at("alpha_r2").at(leg).get<double>();
        t.dfa[l].intercept = j.at("alpha_intercept").at(leg).get<double>();
        t.rms_error[l] = j.at("rms_error_m").at(leg).get<double>();
        t.spread[l].ratio = j.at("spread").at(leg).get<double>();
        t.spread[l].occupied = j.at("spread_occupied").at(leg).get<std::size_t>();
        t.spread[l].total = j.at("spread_total").at(leg).get<std::size_t>();
        t.babble_limit_events[l] = j.at("babble_limit_events").at(leg).get<std::size_t>();
      }
      std::ifstream din(t.directory / "dfa.csv");
      std::string line;
      while (std::getline(din, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("leg,", 0) == 0) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const std::size_t l = line.substr(0, c1) == "left" ? kLeft : kRight;
        t.dfa[l].scales.push_back(std::stoi(line.substr(c1 + 1, c2 - c1 - 1)));
        t.dfa[l].fluctuations.push_back(std::stod(line.substr(c2 + 1)));
      }
      record.trials.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed run record: ") + e.what());
  }
  return record;
}

}  // namespace g2p
