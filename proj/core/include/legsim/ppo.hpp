#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "legsim/amplitudes.hpp"
#include "legsim/mlp.hpp"
#include "legsim/policy.hpp"
#include "legsim/rng.hpp"
#include "legsim/sim.hpp"
#include "legsim/terrain.hpp"

namespace legsim {

/// PPO hyperparameters.
struct TrainConfig {
  double gamma = 0.99;
  double clip_eps = 0.2;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  int epochs_per_update = 10;
  int minibatch_size = 64;
  int horizon = 256;
  int total_updates = 200;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  std::vector<int> hidden{64, 64};
  double init_log_std = -0.5;
  int workers = 1;  // rollout workers; the horizon is split evenly between them
  std::uint64_t seed = 0;

  void validate() const;
};

/// The one-cycle MDP: every step applies a command for one motion cycle.
struct EnvConfig {
  RobotConfig robot;
  GaitParams gait;  // amplitudes are overwritten by each command
  SimOptions sim;
  SigmaSchedule schedule;
  int episode_cap = 32;
  double extent_x = 10.0;
  double extent_y = 3.0;
  // A fixed training sigma (cm) disables the periodic terrain redraw.
  std::optional<double> fixed_sigma_cm;

  void validate() const;
};

// v_f - 0.6 |v_l|
double reward(double v_f, double v_l);

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  double v_f = 0.0;
  double v_l = 0.0;
};

/// One environment instance. A new terrain with a fresh sigma is drawn
/// whenever the global step count reaches a multiple of schedule.every; that
/// step also ends the episode.
class Environment {
 public:
  Environment(EnvConfig cfg, std::uint64_t seed, std::uint64_t worker = 0);

  // Starts an episode, redrawing the terrain when the schedule asks for it.
  Observation reset();
  StepResult step(const AmplitudeCommand& cmd);

  double sigma_cm() const { return sigma_cm_; }
  long total_steps() const { return total_steps_; }
  int episode_steps() const { return episode_steps_; }
  const HeightField& terrain() const { return terrain_; }

 private:
  void draw_terrain(double sigma_cm);

  EnvConfig cfg_;
  Rng rng_;
  HeightField terrain_;
  SimState state_;
  double sigma_cm_ = 0.0;
  long total_steps_ = 0;
  int episode_steps_ = 0;
  bool has_terrain_ = false;
  bool active_ = false;
};

/// Per-step records of one rollout segment. Actions are the unsquashed
/// Gaussian samples.
struct RolloutBuffer {
  std::vector<std::array<double, kObsDim>> observations;
  std::vector<std::array<double, kActionDim>> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<bool> dones;

  std::size_t size() const { return rewards.size(); }
  void push(const Observation& obs, const std::array<double, kActionDim>& action,
            double log_prob, double reward, double value, bool done);
  void append(const RolloutBuffer& other);
  // Throws ConfigError when lengths disagree or a reward is not finite.
  void validate() const;
};

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t,
// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}, returns = A + V. The
// value after the last step is `bootstrap_value`. Unnormalized.
Advantages compute_gae(const RolloutBuffer& buffer, double gamma, double lambda,
                       double bootstrap_value);

// In-place mean 0, std 1 (population std); only centred when the spread is
// negligible.
void normalize_advantages(std::vector<double>& advantages);

// Mean over samples of min(r A, clip(r, 1 - eps, 1 + eps) A),
// r = exp(new - old).
double ppo_loss(std::span<const double> log_probs_new, std::span<const double> log_probs_old,
                std::span<const double> advantages, double clip_eps);

/// Training samples fed to the objective.
struct SampleBatch {
  std::vector<std::array<double, kObsDim>> observations;
  std::vector<std::array<double, kActionDim>> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return old_log_probs.size(); }
};

struct ObjectiveTerms {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double total = 0.0;  // surrogate - c_v value_loss + c_e entropy, maximized
};

// Objective on `batch`. When `grad` is given it receives d(total)/dparams in
// PolicyParams::flatten() layout.
ObjectiveTerms ppo_objective(const PolicyParams& params, const SampleBatch& batch,
                             double clip_eps, double value_coef, double entropy_coef,
                             std::vector<double>* grad = nullptr);

struct UpdateStats {
  ObjectiveTerms first;  // objective before the first gradient step
  ObjectiveTerms last;   // objective of the final minibatch
  double clip_eps = 0.0;
  long optimizer_steps = 0;
};

class NonFiniteUpdate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CurveRow {
  int update = 0;
  double mean_reward = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double sigma_current = 0.0;
};

/// Optional callbacks reporting which hyperparameters reached the estimator
/// and the loss.
struct TrainHooks {
  std::function<void(double gamma, double lambda)> on_gae;
  std::function<void(double clip_eps)> on_loss;
  // After every update, with that update's curve row.
  std::function<void(const CurveRow& row, const PolicyParams& params)> on_update;
};

// epochs_per_update passes of shuffled minibatch ascent. On a non-finite
// objective the parameters are left untouched and NonFiniteUpdate is thrown.
UpdateStats update(PolicyParams& params, Adam& optimizer, const SampleBatch& batch,
                   const TrainConfig& cfg, Rng& shuffle_rng, const TrainHooks& hooks = {});

struct TrainResult {
  PolicyParams params;
  std::vector<CurveRow> curve;
};

TrainResult train(const TrainConfig& cfg, const EnvConfig& env, const TrainHooks& hooks = {});

std::string curve_csv_header();
std::string curve_row_csv(const CurveRow& row);

}  // namespace legsim
