// Command-line front end: scenario simulation, estimation over logs,
// trajectory evaluation and CSV extraction.
//
// Exit codes: 0 success, 1 unusable input (bad arguments, config or log),
// 2 runtime failure while processing.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qse/config.hpp"
#include "qse/log.hpp"
#include "qse/metrics.hpp"
#include "qse/pipeline.hpp"
#include "qse/sim.hpp"

namespace {

using nlohmann::json;

int cmdSimulate(const std::string& config_path, const std::string& out_path) {
  const qse::AppConfig cfg = qse::loadConfig(config_path);
  const qse::RobotModel model = qse::RobotModel::byName(cfg.model_name);
  qse::Simulator sim(model, cfg.scenario);
  qse::LogWriter writer(out_path);
  std::uint64_t n = 0;
  sim.run([&](const qse::LogEvent& ev) {
    writer.write(ev);
    ++n;
  });
  writer.flush();
  std::cout << "wrote " << n << " records to " << out_path << "\n";
  return 0;
}

int cmdEstimate(const std::string& config_path, const std::string& in_path,
                const std::string& out_path, bool proprioceptive_only, bool no_slip_detection) {
  qse::AppConfig cfg = qse::loadConfig(config_path);
  if (proprioceptive_only) cfg.pipeline.settings.use_extero = false;
  if (no_slip_detection) cfg.pipeline.settings.slip_detection = false;

  const qse::RobotModel model = qse::RobotModel::byName(cfg.model_name);
  qse::Pipeline pipeline(model, cfg.pipeline);

  const std::vector<qse::LogEvent> events = qse::readLog(in_path);
  qse::LogWriter writer(out_path);
  for (const qse::LogEvent& ev : events) {
    if (auto est = pipeline.processEvent(ev)) writer.write(*est);
  }
  writer.flush();

  const qse::PipelineDiagnostics& d = pipeline.diagnostics();
  const qse::HealthStatus h = pipeline.health();
  std::cout << "imu_ticks=" << d.imu_ticks << " joint_updates=" << d.joint_updates
            << " extero_updates=" << d.extero_updates
            << " dropped_out_of_order=" << d.out_of_order_dropped
            << " gated_accel=" << pipeline.attitude().diagnostics().gated_accel
            << " singular_jacobian=" << pipeline.contact().diagnostics().singular_jacobian
            << " singular_innovation=" << pipeline.fusion().diagnostics().singular_innovation
            << " psd_projections=" << h.psd_projections << "\n";
  return 0;
}

json statsToJson(const qse::ErrorStats& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"rmse", s.rmse}, {"max", s.max}};
}

int cmdEval(const std::string& est_path, const std::string& gt_path,
            std::vector<double> rpe_windows, bool no_align, bool as_json) {
  const auto gt = qse::extractPoses(qse::readLog(gt_path), "ground_truth");
  const auto est = qse::extractPoses(qse::readLog(est_path), "estimate");

  qse::EvalOptions opt;
  opt.align = !no_align;
  if (!rpe_windows.empty()) opt.rpe_windows = std::move(rpe_windows);
  const qse::EvalReport rep = qse::evaluate(gt, est, opt);

  if (as_json) {
    json j;
    j["matched"] = rep.matched;
    j["duration_s"] = rep.duration;
    j["path_length_m"] = rep.path_length;
    j["estimate_rate_hz"] = rep.estimate_rate;
    j["ate_trans_m"] = statsToJson(rep.ate_trans);
    j["ate_rot_deg"] = statsToJson(rep.ate_rot_deg);
    j["rpe"] = json::array();
    for (const qse::RpeResult& r : rep.rpe) {
      j["rpe"].push_back({{"window_m", r.window},
                          {"count", r.count},
                          {"trans_m", statsToJson(r.trans)},
                          {"rot_deg", statsToJson(r.rot_deg)}});
    }
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  std::printf("matched poses : %d (%.1f s, %.2f m path, %.1f Hz)\n", rep.matched, rep.duration,
              rep.path_length, rep.estimate_rate);
  std::printf("%-18s %10s %10s %10s %10s\n", "metric", "mean", "median", "rmse", "max");
  auto row = [](const char* name, const qse::ErrorStats& s) {
    std::printf("%-18s %10.6f %10.6f %10.6f %10.6f\n", name, s.mean, s.median, s.rmse, s.max);
  };
  row("ATE trans [m]", rep.ate_trans);
  row("ATE rot [deg]", rep.ate_rot_deg);
  for (const qse::RpeResult& r : rep.rpe) {
    char name[64];
    if (r.count == 0) {
      std::printf("RPE %gm             (no complete window on a %.2f m path)\n", r.window,
                  rep.path_length);
      continue;
    }
    std::snprintf(name, sizeof(name), "RPE %gm [m]", r.window);
    row(name, r.trans);
    std::snprintf(name, sizeof(name), "RPE %gm [deg]", r.window);
    row(name, r.rot_deg);
  }
  return 0;
}

void writeCsvField(std::ostream& os, double v) { os << json(v).dump(); }

int cmdPlotData(const std::string& in_path, const std::string& channels_arg) {
  const std::vector<qse::LogEvent> events = qse::readLog(in_path);

  std::vector<std::string> channels;
  std::string tok;
  for (char c : channels_arg + ",") {
    if (c == ',') {
      if (!tok.empty()) channels.push_back(tok);
      tok.clear();
    } else {
      tok += c;
    }
  }
  if (channels.empty()) throw qse::LogError("no channels requested");
  static const std::vector<std::string> known = {
      "imu", "joints", "extero_pose", "extero_twist", "desired_foot", "ground_truth", "estimate"};
  for (const std::string& ch : channels) {
    if (std::find(known.begin(), known.end(), ch) == known.end()) {
      throw qse::LogError("unknown channel: " + ch);
    }
  }

  // Long-format CSV: one row per scalar, easy to pivot.
  std::cout << "t,channel,field,value\n";
  auto emit = [](double t, const char* ch, const std::string& field, double v) {
    std::cout << t << ',' << ch << ',' << field << ',';
    writeCsvField(std::cout, v);
    std::cout << '\n';
  };
  auto emitVec = [&](double t, const char* ch, const char* base, const auto& v, int n) {
    static const char* axis = "xyzw";
    for (int i = 0; i < n; ++i) {
      emit(t, ch, std::string(base) + (n <= 4 ? std::string(1, axis[i]) : std::to_string(i)), v[i]);
    }
  };

  for (const qse::LogEvent& ev : events) {
    const char* ch = qse::eventChannel(ev);
    if (std::find(channels.begin(), channels.end(), ch) == channels.end()) continue;
    const double t = qse::eventTime(ev);
    if (const auto* e = std::get_if<qse::ImuSample>(&ev)) {
      emitVec(t, ch, "w", e->gyro, 3);
      emitVec(t, ch, "f", e->accel, 3);
    } else if (const auto* e = std::get_if<qse::JointSample>(&ev)) {
      emitVec(t, ch, "q", e->q, 12);
      emitVec(t, ch, "qd", e->qd, 12);
      emitVec(t, ch, "tau", e->tau, 12);
    } else if (const auto* e = std::get_if<qse::ExteroPoseSample>(&ev)) {
      emitVec(t, ch, "p", e->pos, 3);
      const double q[4] = {e->att.w(), e->att.x(), e->att.y(), e->att.z()};
      for (int i = 0; i < 4; ++i) emit(t, ch, std::string("q") + "wxyz"[i], q[i]);
    } else if (const auto* e = std::get_if<qse::ExteroTwistSample>(&ev)) {
      emitVec(t, ch, "v", e->vel, 3);
    } else if (const auto* e = std::get_if<qse::DesiredFootSample>(&ev)) {
      for (int leg = 0; leg < qse::kNumLegs; ++leg) {
        emitVec(t, ch, ("foot" + std::to_string(leg) + "_").c_str(), e->pos[leg], 3);
      }
    } else if (const auto* e = std::get_if<qse::GroundTruthSample>(&ev)) {
      emitVec(t, ch, "p", e->pos, 3);
      emitVec(t, ch, "v", e->vel, 3);
      const double q[4] = {e->att.w(), e->att.x(), e->att.y(), e->att.z()};
      for (int i = 0; i < 4; ++i) emit(t, ch, std::string("q") + "wxyz"[i], q[i]);
      for (int i = 0; i < qse::kNumLegs; ++i) {
        emit(t, ch, "contact" + std::to_string(i), e->contact[i] ? 1.0 : 0.0);
        emit(t, ch, "slip" + std::to_string(i), e->slip[i] ? 1.0 : 0.0);
      }
    } else if (const auto* e = std::get_if<qse::EstimateSample>(&ev)) {
      emitVec(t, ch, "p", e->pos, 3);
      emitVec(t, ch, "v", e->vel, 3);
      emitVec(t, ch, "bg", e->gyro_bias, 3);
      const double q[4] = {e->att.w(), e->att.x(), e->att.y(), e->att.z()};
      for (int i = 0; i < 4; ++i) emit(t, ch, std::string("q") + "wxyz"[i], q[i]);
      for (int i = 0; i < qse::kNumLegs; ++i) {
        emit(t, ch, "contact" + std::to_string(i), e->contact[i] ? 1.0 : 0.0);
        emit(t, ch, "slip" + std::to_string(i), e->slip[i] ? 1.0 : 0.0);
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadruped state-estimation toolkit"};
  app.require_subcommand(1);

  std::string config_path, in_path, out_path, est_path, gt_path, channels;
  bool proprio_only = false, no_slip = false, no_align = false, as_json = false;
  std::vector<double> rpe_windows;

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic scenario log");
  sim->add_option("--config", config_path, "JSON config")->required();
  sim->add_option("--out", out_path, "output log path")->required();

  CLI::App* est = app.add_subcommand("estimate", "run the estimator over a log");
  est->add_option("--config", config_path, "JSON config")->required();
  est->add_option("--in", in_path, "input log path")->required();
  est->add_option("--out", out_path, "output estimate log path")->required();
  est->add_flag("--proprioceptive-only", proprio_only, "ignore exteroceptive channels");
  est->add_flag("--no-slip-detection", no_slip, "disable slip handling");

  CLI::App* ev = app.add_subcommand("eval", "compare an estimate log against ground truth");
  ev->add_option("--est", est_path, "estimate log")->required();
  ev->add_option("--gt", gt_path, "ground-truth log")->required();
  ev->add_option("--rpe-window", rpe_windows, "relative-error window(s) in metres");
  ev->add_flag("--no-align", no_align, "skip SE(3) alignment");
  ev->add_flag("--json", as_json, "print the report as JSON");

  CLI::App* plot = app.add_subcommand("plot-data", "dump channels as CSV");
  plot->add_option("--in", in_path, "input log path")->required();
  plot->add_option("--channels", channels, "comma-separated channel list")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmdSimulate(config_path, out_path);
    if (est->parsed()) return cmdEstimate(config_path, in_path, out_path, proprio_only, no_slip);
    if (ev->parsed()) return cmdEval(est_path, gt_path, rpe_windows, no_align, as_json);
    if (plot->parsed()) return cmdPlotData(in_path, channels);
  } catch (const qse::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const qse::LogError& e) {
    std::cerr << "log error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
