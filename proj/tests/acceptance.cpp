// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "legsim/controllers.hpp"
#include "legsim/evaluation.hpp"
#include "legsim/experiment.hpp"
#include "legsim/gait.hpp"
#include "legsim/ppo.hpp"
#include "legsim/rng.hpp"
#include "legsim/sim.hpp"
#include "legsim/terrain.hpp"

using namespace legsim;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int hardware_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(std::min(n, 16u));
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> s;
  for (int k = 0; k < count; ++k) s.push_back(first + static_cast<std::uint64_t>(k));
  return s;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double sample_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Verdict gait_exactness() {
  GaitParams p;
  p.duty = 0.5;
  p.theta_leg_amp = deg_to_rad(30);
  p.theta_body_amp = deg_to_rad(15);
  p.a_v = deg_to_rad(20);
  Rng rng(1);
  double leg_err = 0.0;
  double wave_err = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double tau_b = rng.uniform(-50.0, 50.0);
    const double tau_c = coordinate_phases(tau_b, p).tau_c;
    for (int i = 1; i <= p.n_pairs; ++i) {
      const double shift = kTwoPi * (p.xi / p.n_pairs) * (i - 1);
      leg_err = std::max(leg_err, std::abs(leg_shoulder_angle(p, tau_c, i, Side::left) -
                                           p.theta_leg_amp * std::cos(tau_c - shift)));
      leg_err = std::max(leg_err, std::abs(leg_shoulder_angle(p, tau_c, i, Side::right) -
                                           p.theta_leg_amp * std::cos(tau_c - shift + kPi)));
    }
    for (int j = 1; j < p.n_pairs; ++j) {
      const double phase = kTwoPi * (p.xi / p.n_pairs) * (j - 1);
      wave_err = std::max(wave_err, std::abs(horizontal_body_angle(p, tau_b, j) -
                                             p.theta_body_amp * std::cos(tau_b - phase)));
      wave_err = std::max(wave_err, std::abs(vertical_body_angle(p, tau_b, j) -
                                             p.a_v * std::cos(2.0 * tau_b - 2.0 * phase)));
    }
  }
  return {leg_err <= 1e-12 && wave_err <= 1e-12,
          "max leg error " + fmt("%.2e", leg_err) + ", max body-wave error " +
              fmt("%.2e", wave_err) + " over 1e4 phases"};
}

Verdict seam_continuity() {
  Rng rng(2);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    GaitParams p;
    p.duty = rng.uniform(0.05, 0.95);
    p.theta_leg_amp = deg_to_rad(rng.uniform(5, 35));
    const double seam = kTwoPi * p.duty;
    for (double s : {0.0, seam}) {
      const double below = leg_shoulder_angle(p, s - 1e-12, 1, Side::left);
      const double above = leg_shoulder_angle(p, s + 1e-12, 1, Side::left);
      const double at = leg_shoulder_angle(p, s, 1, Side::left);
      worst = std::max({worst, std::abs(below - above), std::abs(at - below)});
    }
  }
  return {worst <= 1e-9, "max two-sided gap " + fmt("%.2e", worst) + " over 50 duties"};
}

Verdict terrain_statistics() {
  bool ok = true;
  std::string detail;
  for (auto [rg, target] : {std::pair{0.17, 2.125}, std::pair{0.32, 4.0}}) {
    const HeightField h = generate_block_terrain(rg, 10.0, 3.0, 7);
    const double sd = sample_std(h.heights) * 100.0;
    ok = ok && std::abs(sd - target) <= 0.05 * target;
    detail += "R_g " + fmt("%.2f", rg) + " std " + fmt("%.3f", sd) + " cm (target " +
              fmt("%.3f", target) + ") ";
  }
  return {ok, detail};
}

double grid_residual(const std::vector<FootConstraint>& cs, const BodyPose& pose) {
  Twist best;
  double best_r = twist_residual(cs, pose, best);
  Twist centre;
  for (double step = 0.1; step >= 1e-4; step /= 4.0) {
    for (int i = -12; i <= 12; ++i) {
      for (int j = -12; j <= 12; ++j) {
        for (int k = -12; k <= 12; ++k) {
          const Twist t{centre.vx + i * step, centre.vy + j * step, centre.omega + k * step};
          const double r = twist_residual(cs, pose, t);
          if (r < best_r) {
            best_r = r;
            best = t;
          }
        }
      }
    }
    centre = best;
  }
  return best_r;
}

Verdict twist_oracle() {
  const RobotConfig cfg;
  Rng rng(3);
  int worse = 0;
  double max_gap = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    GaitParams g;
    g.theta_leg_amp = deg_to_rad(rng.uniform(5, 35));
    g.theta_body_amp = deg_to_rad(rng.uniform(0, 25));
    const double tau = rng.uniform(0, kTwoPi);
    const BodyPose pose{rng.uniform(-2, 2), rng.uniform(-1, 1), 0.0, rng.uniform(-kPi, kPi)};
    const JointFrameSample f = sample_frame(g, tau);
    const auto feet = frame_feet(cfg, pose, f);
    const auto vel = body_frame_foot_velocities(cfg, g, tau);
    std::vector<Vec2> points;
    std::vector<Vec2> commands;
    std::vector<FootConstraint> cs;
    const double c = std::cos(pose.yaw);
    const double s = std::sin(pose.yaw);
    for (std::size_t k = 0; k < feet.size(); ++k) {
      // Random stance subset, at least two feet.
      if (!(f.ideal_contact[k] || rng.uniform(0, 1) < 0.3) && points.size() >= 2) continue;
      points.push_back({feet[k].x, feet[k].y});
      commands.push_back(vel[k]);
      cs.push_back({points.back(), {c * vel[k].x - s * vel[k].y, s * vel[k].x + c * vel[k].y}, 1.0});
    }
    const Twist t = solve_twist(points, commands, pose);
    const double mine = twist_residual(cs, pose, t);
    const double oracle = grid_residual(cs, pose);
    if (mine > oracle) ++worse;
    max_gap = std::max(max_gap, mine - oracle);
  }
  return {worse == 0, std::to_string(worse) + "/100 configurations above the grid oracle, "
                          "max(solve - oracle) " + fmt("%.2e", max_gap)};
}

Verdict beta_semantics() {
  const RobotConfig cfg;
  const HeightField flat = flat_terrain(10, 3);
  GaitParams still;
  still.theta_body_amp = 0.0;
  still.a_v = 0.0;
  SimState st = start_state(flat, cfg);
  const double flat_beta = run_cycle(st, cfg, still, flat).beta;

  const GaitParams g;  // fixed open-loop amplitudes
  std::vector<double> means;
  for (double sigma : {2.0, 4.0, 6.0, 8.0}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const HeightField h = generate_rl_terrain(sigma, 10, 3, seed);
      SimState s = start_state(h, cfg);
      double b = 0.0;
      int n = 0;
      for (int c = 0; c < 8; ++c) {
        const CycleOutcome out = run_cycle(s, cfg, g, h);
        b += out.beta;
        ++n;
        if (out.terminal) break;
      }
      total += b / n;
    }
    means.push_back(total / 10.0);
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < means.size(); ++k) decreasing = decreasing && means[k] < means[k - 1];
  std::string detail = "flat beta " + fmt("%.17g", flat_beta) + "; mean beta sigma 2/4/6/8:";
  for (double m : means) detail += " " + fmt("%.4f", m);
  return {flat_beta == 1.0 && decreasing, detail};
}

Verdict speed_beta_linearity() {
  const std::vector<double> sigmas{2.0, 4.0, 6.0, 8.0};
  const auto seeds = seed_range(0, 10);
  const Correlation c = measure_speed_beta_correlation(RobotConfig{}, GaitParams{}, sigmas, seeds);
  return {!c.degenerate && c.r > 0.7,
          "Pearson r " + fmt("%.4f", c.r) + " over " + std::to_string(c.samples) + " runs"};
}

struct Comparison {
  // mean v_f and mean reward per controller and sigma
  std::vector<std::vector<double>> v_f;
  std::vector<std::vector<double>> reward;
};

Comparison compare(const std::vector<Controller>& controllers, const std::vector<double>& sigmas,
                   const std::vector<std::uint64_t>& seeds) {
  std::vector<TerrainSpec> terrains;
  for (double s : sigmas) terrains.push_back({TerrainKind::rl_sigma, s, 10.0, 3.0});
  const auto cells = evaluate(controllers, terrains, seeds, 8, RobotConfig{}, GaitParams{},
                              SimOptions{}, hardware_workers());
  Comparison out;
  out.v_f.assign(controllers.size(), std::vector<double>(sigmas.size(), 0.0));
  out.reward = out.v_f;
  const double n = static_cast<double>(seeds.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const std::size_t ti = (k / seeds.size()) % sigmas.size();
    out.v_f[cells[k].controller][ti] += cells[k].summary.mean_v_f / n;
    out.reward[cells[k].controller][ti] += cells[k].summary.mean_reward / n;
  }
  return out;
}

Verdict linear_benefit() {
  const AmplitudeCommand base;  // A_v = 0
  const std::vector<Controller> cs{Controller::open_loop(base),
                                   Controller::linear(LinearGain{}, base)};
  const Comparison c = compare(cs, {4.0, 6.0}, seed_range(1000, 10));
  bool ok = true;
  std::string detail;
  for (std::size_t t = 0; t < 2; ++t) {
    const double gain = c.v_f[1][t] / c.v_f[0][t] - 1.0;
    ok = ok && gain >= 0.10;
    detail += "sigma " + std::string(t == 0 ? "4" : "6") + ": linear " + fmt("%.4f", c.v_f[1][t]) +
              " vs open-loop " + fmt("%.4f", c.v_f[0][t]) + " (" + fmt("%+.1f", 100 * gain) +
              "%) ";
  }
  return {ok, detail};
}

SampleBatch random_batch(const PolicyParams& p, Rng& rng, std::size_t n) {
  SampleBatch b;
  for (std::size_t i = 0; i < n; ++i) {
    const Observation obs{rng.uniform(0, 0.6), rng.uniform(0, 0.4), rng.uniform(0.1, 0.6),
                          rng.uniform(0, 1)};
    const auto mean = policy_mean(p, obs);
    std::array<double, kActionDim> u{};
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = mean[k] + 0.5 * rng.normal();
    b.observations.push_back(obs.as_array());
    b.actions.push_back(u);
    b.old_log_probs.push_back(gaussian_log_prob(u, mean, p.log_std) + rng.uniform(-0.3, 0.3));
    b.advantages.push_back(rng.normal());
    b.returns.push_back(rng.normal());
  }
  return b;
}

Verdict ppo_correctness() {
  // Finite-difference gradient check on a network under 200 parameters.
  Rng rng(4);
  PolicyParams p = PolicyParams::initial(3, {3});
  for (double& w : p.policy.parameters()) w += 0.3 * rng.normal();
  const SampleBatch batch = random_batch(p, rng, 50);
  std::vector<double> grad;
  ppo_objective(p, batch, 0.2, 0.5, 0.01, &grad);
  const std::vector<double> base = p.flatten();
  double worst = 0.0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    const double h = 1e-6;
    std::vector<double> plus = base;
    std::vector<double> minus = base;
    plus[k] += h;
    minus[k] -= h;
    PolicyParams pp = p;
    PolicyParams pm = p;
    pp.assign(plus);
    pm.assign(minus);
    const double fd = (ppo_objective(pp, batch, 0.2, 0.5, 0.01).total -
                       ppo_objective(pm, batch, 0.2, 0.5, 0.01).total) /
                      (2 * h);
    worst = std::max(worst, std::abs(fd - grad[k]) /
                                std::max({std::abs(fd), std::abs(grad[k]), 1e-4}));
  }

  const double up = ppo_loss(std::vector<double>{std::log(1.5)}, std::vector<double>{0.0},
                             std::vector<double>{2.0}, 0.2);
  const double down = ppo_loss(std::vector<double>{std::log(0.5)}, std::vector<double>{0.0},
                               std::vector<double>{-1.0}, 0.2);

  RolloutBuffer buf;
  const double r[3] = {1.0, -0.5, 2.0};
  const double v[3] = {0.2, 0.4, -0.1};
  const bool d[3] = {false, true, false};
  for (int t = 0; t < 3; ++t) buf.push(Observation{}, {0, 0, 0}, 0.0, r[t], v[t], d[t]);
  const Advantages adv = compute_gae(buf, 0.9, 0.8, 0.6);
  const double a2 = 2.0 + 0.9 * 0.6 - (-0.1);
  const double a1 = -0.5 - 0.4;
  const double a0 = 1.0 + 0.9 * 0.4 - 0.2 + 0.9 * 0.8 * a1;
  const bool gae_ok = adv.advantages[0] == a0 && adv.advantages[1] == a1 && adv.advantages[2] == a2;

  // Instrumented training step: the configured gamma and epsilon must reach
  // the estimator and the loss.
  ExperimentConfig cfg;
  cfg.train.ppo.total_updates = 1;
  cfg.train.ppo.horizon = 8;
  cfg.train.ppo.minibatch_size = 4;
  cfg.train.ppo.epochs_per_update = 1;
  cfg.sim.k_substeps = 16;
  double seen_gamma = 0.0;
  std::vector<double> seen_eps;
  TrainHooks hooks;
  hooks.on_gae = [&](double g, double) { seen_gamma = g; };
  hooks.on_loss = [&](double e) { seen_eps.push_back(e); };
  train(cfg.train_config(), cfg.env_config(), hooks);
  const bool wired = seen_gamma == 0.99 && !seen_eps.empty() &&
                     std::all_of(seen_eps.begin(), seen_eps.end(), [](double e) { return e == 0.2; });

  const bool ok = worst < 1e-4 && up == 2.4 && down == -0.8 && gae_ok && wired;
  return {ok, "gradient rel. error " + fmt("%.2e", worst) + "; ppo_loss " + fmt("%.17g", up) +
                  ", " + fmt("%.17g", down) + "; GAE " + (gae_ok ? "exact" : "MISMATCH") +
                  "; gamma " + fmt("%.2f", seen_gamma) + " and eps " +
                  fmt("%.2f", seen_eps.empty() ? 0.0 : seen_eps.front()) + " reached the loss"};
}

struct Trained {
  std::shared_ptr<const PolicyParams> params;
  int updates = 0;
  double seconds = 0.0;
};

Trained train_policy() {
  ExperimentConfig cfg;
  cfg.seed = 0;
  cfg.train.ppo.total_updates = 300;
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult r = train(cfg.train_config(), cfg.env_config());
  Trained out;
  out.params = std::make_shared<const PolicyParams>(std::move(r.params));
  out.updates = cfg.train.ppo.total_updates;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

Comparison held_out(const Trained& policy) {
  const AmplitudeCommand base;
  const std::vector<Controller> cs{Controller::policy(policy.params),
                                   Controller::linear(LinearGain{}, base),
                                   Controller::open_loop(base)};
  return compare(cs, {2.0, 4.0, 6.0, 8.0}, seed_range(1000, 30));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Verdict learning_benefit(const Trained& policy, const Comparison& c) {
  const double pol = mean_of(c.reward[0]);
  const double lin = mean_of(c.reward[1]);
  const double open = mean_of(c.reward[2]);
  const bool ok = pol - lin >= 0.15 * std::abs(lin) && pol - open >= 0.15 * std::abs(open);
  return {ok, "mean reward policy " + fmt("%.4f", pol) + ", linear " + fmt("%.4f", lin) +
                  ", open-loop " + fmt("%.4f", open) + " (" + std::to_string(policy.updates) +
                  " updates, seed 0, trained in " + fmt("%.0f", policy.seconds) + " s)"};
}

Verdict speed_collapse(const Comparison& c) {
  const char* names[3] = {"policy", "linear", "open-loop"};
  bool ok = true;
  std::string detail = "v_f(sigma 8)/v_f(sigma 2):";
  for (std::size_t k = 0; k < 3; ++k) {
    const double ratio = c.v_f[k][3] / c.v_f[k][0];
    ok = ok && ratio < 0.5;
    detail += std::string(" ") + names[k] + " " + fmt("%.3f", ratio);
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism(const Trained& policy) {
  std::vector<std::string> diffs;
  auto same = [&](const std::string& what, const std::vector<Artifact>& a,
                  const std::vector<Artifact>& b) {
    bool eq = a.size() == b.size();
    for (std::size_t k = 0; eq && k < a.size(); ++k) eq = a[k].contents == b[k].contents;
    if (!eq) diffs.push_back(what);
  };
  ExperimentConfig cfg;
  cfg.terrain = parse_terrain_label("rg0.32");
  cfg.seed = 7;
  same("gen-terrain", gen_terrain_artifacts(cfg), gen_terrain_artifacts(cfg));
  cfg.terrain = parse_terrain_label("sigma6");
  cfg.controller.kind = ControllerKind::linear;
  same("run", run_artifacts(cfg), run_artifacts(cfg));
  const int workers = std::max(hardware_workers(), 4);
  same("sweep serial vs parallel", sweep_artifacts(cfg, 1), sweep_artifacts(cfg, workers));

  ExperimentConfig tiny;
  tiny.train.ppo.total_updates = 2;
  tiny.train.ppo.horizon = 8;
  tiny.train.ppo.minibatch_size = 4;
  tiny.train.ppo.workers = 2;
  same("train", train_artifacts(tiny), train_artifacts(tiny));

  const fs::path dir = fs::temp_directory_path() / "legsim_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  save_checkpoint(*policy.params, (dir / "policy.json").string());
  ExperimentConfig ev;
  ev.eval.checkpoint = (dir / "policy.json").string();
  ev.eval.seeds = {1000, 1001, 1002};
  same("eval serial vs parallel", eval_artifacts(ev, 1), eval_artifacts(ev, workers));

#ifdef LEGSIM_CLI_PATH
  auto cli = [&](const std::string& args) {
    const std::string cmd = std::string(LEGSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const std::string sweep = "sweep --seeds 0-3 --cycles 4 --out ";
  if (!cli(sweep + (dir / "s1").string() + " --workers 1") ||
      !cli(sweep + (dir / "s4").string() + " --workers 4") ||
      !cli(sweep + (dir / "s4b").string() + " --workers 4")) {
    diffs.push_back("cli sweep failed to run");
  } else if (slurp(dir / "s1" / "sweep.csv") != slurp(dir / "s4" / "sweep.csv") ||
             slurp(dir / "s4" / "sweep.csv") != slurp(dir / "s4b" / "sweep.csv")) {
    diffs.push_back("cli sweep");
  }
#endif
  fs::remove_all(dir);

  std::string detail = "gen-terrain, run, sweep (1 vs " + std::to_string(workers) +
                       " workers), train, eval";
#ifdef LEGSIM_CLI_PATH
  detail += ", CLI sweep";
#endif
  if (diffs.empty()) return {true, detail + ": byte-identical on rerun"};
  std::string list;
  for (const auto& d : diffs) list += (list.empty() ? "" : ", ") + d;
  return {false, "differences in " + list};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* id, const char* name, const std::function<Verdict()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failures;
    std::printf("%-4s %s  %s: %s [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), s);
    std::fflush(stdout);
  };

  report("AC1", "gait exactness", gait_exactness);
  report("AC2", "seam continuity", seam_continuity);
  report("AC3", "terrain statistics", terrain_statistics);
  report("AC4", "twist oracle", twist_oracle);
  report("AC5", "beta semantics", beta_semantics);
  report("AC6", "speed-beta linearity", speed_beta_linearity);
  report("AC7", "linear controller benefit", linear_benefit);
  report("AC8", "PPO correctness", ppo_correctness);

  Trained policy;
  Comparison held;
  bool trained = false;
  std::string train_error;
  try {
    policy = train_policy();
    held = held_out(policy);
    trained = true;
  } catch (const std::exception& e) {
    train_error = e.what();
  }
  auto needs_policy = [&](const std::function<Verdict()>& f) {
    return [&, f] { return trained ? f() : Verdict{false, "training failed: " + train_error}; };
  };
  report("AC9", "learning benefit", needs_policy([&] { return learning_benefit(policy, held); }));
  report("AC10", "speed collapse at high roughness",
         needs_policy([&] { return speed_collapse(held); }));
  report("AC11", "determinism", needs_policy([&] { return determinism(policy); }));

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
