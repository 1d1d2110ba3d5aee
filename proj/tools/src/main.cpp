// legsim command-line front end. Settings resolve as: built-in defaults,
// then --config FILE, then --set key=value overrides, then dedicated flags.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "legsim/errors.hpp"
#include "legsim/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int workers = 0;  // 0 picks the hardware thread count
};

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

legsim::ExperimentConfig base_config(const Common& c) {
  legsim::ExperimentConfig cfg;
  if (!c.config_path.empty()) cfg = legsim::load_config(c.config_path, cfg);
  for (const auto& o : c.overrides) legsim::apply_override(cfg, o);
  return cfg;
}

void finish(const Common& c, const std::string& command,
            const std::vector<legsim::Artifact>& artifacts, int workers) {
  const std::string dir = legsim::resolve_output_dir(c.out_dir);
  legsim::write_artifacts(dir, command, artifacts, workers);
  for (const auto& a : artifacts) std::cout << dir << "/" << a.name << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-legged locomotion simulator: terrain generation, runs, sweeps, PPO "
               "training and controller comparison"};
  app.set_version_flag("--version", std::string(legsim::version()));
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config_path, "JSON config file applied over the defaults");
  app.add_option("--set", common.overrides,
                 "Override one config key, e.g. --set robot.swing_lift=0.03 (repeatable)");
  app.add_option("--out", common.out_dir,
                 std::string("Output directory (default: $") + legsim::kOutputDirEnv + " or " +
                     legsim::kDefaultOutputDir + ")");

  std::optional<std::uint64_t> seed;
  std::optional<int> cycles;

  // gen-terrain
  auto* gen = app.add_subcommand("gen-terrain", "Write a seeded block terrain as JSON and CSV");
  std::optional<double> rugosity;
  std::optional<double> sigma;
  bool flat = false;
  std::string size;
  auto* o_rg = gen->add_option("--rugosity", rugosity, "Lab terrain with cell std 12.5*R_g cm");
  auto* o_sigma = gen->add_option("--sigma", sigma, "Training terrain with cell std SIGMA cm");
  auto* o_flat = gen->add_flag("--flat", flat, "Flat terrain");
  o_rg->excludes(o_sigma)->excludes(o_flat);
  o_sigma->excludes(o_flat);
  gen->add_option("--size", size, "Field size in metres, e.g. 10x3");
  gen->add_option("--seed", seed, "Terrain seed");

  // run
  auto* run = app.add_subcommand("run", "Run one controller for a number of cycles");
  std::string controller;
  std::string checkpoint;
  std::string terrain_label;
  std::optional<double> a_v;
  std::optional<double> theta_body;
  std::optional<double> theta_leg;
  run->add_option("--controller", controller, "open_loop, linear or policy")
      ->check(CLI::IsMember({"open_loop", "linear", "policy"}));
  run->add_option("--checkpoint", checkpoint, "Policy checkpoint (policy controller)");
  run->add_option("--terrain", terrain_label, "flat, rg<R_g> or sigma<cm>");
  run->add_option("--seed", seed, "Terrain seed");
  run->add_option("--cycles", cycles, "Motion cycles to run");
  run->add_option("--a-v", a_v, "Open-loop vertical wave amplitude (deg)");
  run->add_option("--theta-body", theta_body, "Horizontal body wave amplitude (deg)");
  run->add_option("--theta-leg", theta_leg, "Leg stepping amplitude (deg)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Open-loop grid over A_v, terrains and seeds");
  std::optional<std::string> a_v_list;
  std::optional<std::string> terrain_list;
  std::optional<std::string> seed_list;
  sweep->add_option("--a-v", a_v_list, "Comma-separated A_v values (deg)");
  sweep->add_option("--terrains", terrain_list, "Comma-separated terrain labels");
  sweep->add_option("--seeds", seed_list, "Seeds, e.g. 0-9,20");
  sweep->add_option("--cycles", cycles, "Motion cycles per run");
  sweep->add_option("--workers", common.workers, "Worker threads (results do not depend on it)");

  // train
  auto* train = app.add_subcommand("train", "Train a PPO policy");
  std::optional<int> updates;
  std::optional<int> train_workers;
  std::optional<int> checkpoint_every;
  bool quiet = false;
  train->add_option("--updates", updates, "PPO updates");
  train->add_option("--seed", seed, "Training seed");
  train->add_option("--workers", train_workers,
                    "Rollout workers; part of the experiment, changes the result");
  train->add_option("--checkpoint-every", checkpoint_every, "Extra checkpoint every N updates");
  train->add_flag("--quiet", quiet, "No progress on stderr");

  // eval
  auto* eval = app.add_subcommand("eval", "Compare policy, linear and open-loop controllers");
  std::optional<std::string> sigma_list;
  eval->add_option("--checkpoint", checkpoint, "Policy checkpoint");
  eval->add_option("--sigmas", sigma_list, "Comma-separated sigma values (cm)");
  eval->add_option("--seeds", seed_list, "Seeds, e.g. 1000-1009");
  eval->add_option("--cycles", cycles, "Motion cycles per run");
  eval->add_option("--workers", common.workers, "Worker threads (results do not depend on it)");

  // config
  auto* show = app.add_subcommand("config", "Print the resolved config as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    legsim::ExperimentConfig cfg = base_config(common);
    if (seed) cfg.seed = *seed;
    if (cycles) cfg.cycles = *cycles;
    const int workers = common.workers > 0 ? common.workers : default_workers();

    if (*gen) {
      if (!size.empty()) {
        const auto [x, y] = legsim::parse_size(size);
        cfg.terrain.extent_x = x;
        cfg.terrain.extent_y = y;
      }
      if (rugosity) cfg.terrain = {legsim::TerrainKind::rugosity, *rugosity,
                                   cfg.terrain.extent_x, cfg.terrain.extent_y};
      if (sigma) cfg.terrain = {legsim::TerrainKind::rl_sigma, *sigma, cfg.terrain.extent_x,
                                cfg.terrain.extent_y};
      if (flat) cfg.terrain = {legsim::TerrainKind::flat, 0.0, cfg.terrain.extent_x,
                               cfg.terrain.extent_y};
      finish(common, "gen-terrain", legsim::gen_terrain_artifacts(cfg), 1);
    } else if (*run) {
      if (!controller.empty()) cfg.controller.kind = legsim::controller_kind_from_string(controller);
      if (!checkpoint.empty()) cfg.controller.checkpoint = checkpoint;
      if (!terrain_label.empty()) {
        cfg.terrain = legsim::parse_terrain_label(terrain_label, cfg.terrain.extent_x,
                                                  cfg.terrain.extent_y);
      }
      if (a_v) cfg.gait.a_v_deg = *a_v;
      if (theta_body) cfg.gait.theta_body_amp_deg = *theta_body;
      if (theta_leg) cfg.gait.theta_leg_amp_deg = *theta_leg;
      finish(common, "run", legsim::run_artifacts(cfg), 1);
    } else if (*sweep) {
      if (a_v_list) cfg.sweep.a_v_deg = legsim::parse_double_list(*a_v_list);
      if (terrain_list) {
        cfg.sweep.terrains.clear();
        std::string item;
        std::istringstream in(*terrain_list);
        while (std::getline(in, item, ',')) cfg.sweep.terrains.push_back(item);
      }
      if (seed_list) cfg.sweep.seeds = legsim::parse_seed_list(*seed_list);
      finish(common, "sweep", legsim::sweep_artifacts(cfg, workers), workers);
    } else if (*train) {
      if (updates) cfg.train.ppo.total_updates = *updates;
      if (train_workers) cfg.train.ppo.workers = *train_workers;
      if (checkpoint_every) cfg.train.checkpoint_every = *checkpoint_every;
      const int total = cfg.train.ppo.total_updates;
      auto progress = [&](const legsim::CurveRow& row) {
        if (quiet) return;
        if ((row.update + 1) % 10 == 0 || row.update + 1 == total) {
          std::fprintf(stderr, "update %d/%d  mean reward %.5f  entropy %.3f\n", row.update + 1,
                       total, row.mean_reward, row.entropy);
        }
      };
      finish(common, "train", legsim::train_artifacts(cfg, progress), cfg.train.ppo.workers);
    } else if (*eval) {
      if (!checkpoint.empty()) cfg.eval.checkpoint = checkpoint;
      if (sigma_list) cfg.eval.sigmas_cm = legsim::parse_double_list(*sigma_list);
      if (seed_list) cfg.eval.seeds = legsim::parse_seed_list(*seed_list);
      finish(common, "eval", legsim::eval_artifacts(cfg, workers), workers);
    } else if (*show) {
      cfg.validate();
      std::cout << legsim::config_to_json(cfg, 2) << "\n";
    }
  } catch (const legsim::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const legsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
