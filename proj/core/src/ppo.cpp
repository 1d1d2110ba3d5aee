#include "legsim/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "legsim/errors.hpp"
#include "legsim/format.hpp"

namespace legsim {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("TrainConfig: " + what); };
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must lie in (0, 1)");
  if (!(clip_eps > 0.0)) fail("clip_eps must be positive");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda must lie in [0, 1]");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (epochs_per_update < 1) fail("epochs_per_update must be at least 1");
  if (minibatch_size < 1) fail("minibatch_size must be at least 1");
  if (horizon < 1) fail("horizon must be at least 1");
  if (total_updates < 0) fail("total_updates must be nonnegative");
  if (!(value_coef >= 0.0) || !(entropy_coef >= 0.0)) fail("loss coefficients must be nonnegative");
  if (hidden.empty()) fail("need at least one hidden layer");
  for (int h : hidden) {
    if (h < 1) fail("hidden layer widths must be positive");
  }
  if (!(init_log_std >= kLogStdMin && init_log_std <= kLogStdMax)) {
    fail("init_log_std must lie in [-5, 2]");
  }
  if (workers < 1) fail("workers must be at least 1");
  if (horizon % workers != 0) fail("horizon must be a multiple of workers");
}

void EnvConfig::validate() const {
  robot.validate();
  gait.validate();
  sim.validate();
  if (robot.n_pairs != gait.n_pairs) throw ConfigError("EnvConfig: robot and gait disagree on N");
  if (schedule.every < 1) throw ConfigError("EnvConfig: resample interval must be at least 1");
  if (!(schedule.sigma_min_cm >= 0.0 && schedule.sigma_min_cm <= schedule.sigma_max_cm &&
        schedule.sigma_max_cm <= kRlSigmaMaxCm)) {
    throw ConfigError("EnvConfig: sigma range must lie inside [0, 12] cm");
  }
  if (episode_cap < 1) throw ConfigError("EnvConfig: episode_cap must be at least 1");
  if (fixed_sigma_cm && !(*fixed_sigma_cm >= 0.0 && *fixed_sigma_cm <= kRlSigmaMaxCm)) {
    throw ConfigError("EnvConfig: fixed sigma must lie in [0, 12] cm");
  }
}

double reward(double v_f, double v_l) { return v_f - 0.6 * std::abs(v_l); }

Environment::Environment(EnvConfig cfg, std::uint64_t seed, std::uint64_t worker)
    : cfg_(std::move(cfg)), rng_(Rng::stream(seed, "env", worker)) {
  cfg_.validate();
  cfg_.sim.record_contacts = false;
}

void Environment::draw_terrain(double sigma_cm) {
  sigma_cm_ = sigma_cm;
  const std::uint64_t terrain_seed = rng_.next_u64();
  terrain_ = sigma_cm > 0.0
                 ? generate_rl_terrain(sigma_cm, cfg_.extent_x, cfg_.extent_y, terrain_seed)
                 : flat_terrain(cfg_.extent_x, cfg_.extent_y, kRlTerrainMean);
  has_terrain_ = true;
}

Observation Environment::reset() {
  if (cfg_.fixed_sigma_cm) {
    if (!has_terrain_) draw_terrain(*cfg_.fixed_sigma_cm);
  } else if (auto sigma = resample_schedule(total_steps_, cfg_.schedule, rng_)) {
    draw_terrain(*sigma);
  } else if (!has_terrain_) {
    draw_terrain(rng_.uniform(cfg_.schedule.sigma_min_cm, cfg_.schedule.sigma_max_cm));
  }
  state_ = start_state(terrain_, cfg_.robot);
  episode_steps_ = 0;
  active_ = true;
  return AmplitudeCommand{}.observe(1.0);
}

StepResult Environment::step(const AmplitudeCommand& cmd) {
  if (!active_) throw ContractError("Environment::step called without an active episode");
  cmd.validate();
  const GaitParams gait = cmd.apply_to(cfg_.gait);
  const CycleOutcome out = run_cycle(state_, cfg_.robot, gait, terrain_, cfg_.sim);
  ++total_steps_;
  ++episode_steps_;
  StepResult r;
  r.v_f = out.v_f;
  r.v_l = out.v_l;
  r.reward = reward(out.v_f, out.v_l);
  r.obs = cmd.observe(out.beta);
  const bool redraw = !cfg_.fixed_sigma_cm && total_steps_ % cfg_.schedule.every == 0;
  r.done = out.terminal || episode_steps_ >= cfg_.episode_cap || redraw;
  if (r.done) active_ = false;
  return r;
}

void RolloutBuffer::push(const Observation& obs, const std::array<double, kActionDim>& action,
                         double log_prob, double r, double value, bool done) {
  observations.push_back(obs.as_array());
  actions.push_back(action);
  log_probs.push_back(log_prob);
  rewards.push_back(r);
  values.push_back(value);
  dones.push_back(done);
}

void RolloutBuffer::append(const RolloutBuffer& other) {
  observations.insert(observations.end(), other.observations.begin(), other.observations.end());
  actions.insert(actions.end(), other.actions.begin(), other.actions.end());
  log_probs.insert(log_probs.end(), other.log_probs.begin(), other.log_probs.end());
  rewards.insert(rewards.end(), other.rewards.begin(), other.rewards.end());
  values.insert(values.end(), other.values.begin(), other.values.end());
  dones.insert(dones.end(), other.dones.begin(), other.dones.end());
}

void RolloutBuffer::validate() const {
  const std::size_t n = rewards.size();
  if (observations.size() != n || actions.size() != n || log_probs.size() != n ||
      values.size() != n || dones.size() != n) {
    throw ConfigError("RolloutBuffer: arrays differ in length");
  }
  for (double r : rewards) {
    if (!std::isfinite(r)) throw ConfigError("RolloutBuffer: non-finite reward");
  }
}

Advantages compute_gae(const RolloutBuffer& buffer, double gamma, double lambda,
                       double bootstrap_value) {
  buffer.validate();
  const std::size_t n = buffer.size();
  if (n == 0) throw ConfigError("compute_gae: empty buffer");
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double live = buffer.dones[t] ? 0.0 : 1.0;
    const double delta = buffer.rewards[t] + gamma * next_value * live - buffer.values[t];
    const double adv = delta + gamma * lambda * live * next_adv;
    out.advantages[t] = adv;
    out.returns[t] = adv + buffer.values[t];
    next_value = buffer.values[t];
    next_adv = adv;
  }
  return out;
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  constexpr double kTinySpread = 1e-12;
  for (double& a : advantages) a = sd > kTinySpread ? (a - mean) / sd : a - mean;
}

double ppo_loss(std::span<const double> log_probs_new, std::span<const double> log_probs_old,
                std::span<const double> advantages, double clip_eps) {
  if (log_probs_new.size() != log_probs_old.size() || log_probs_new.size() != advantages.size()) {
    throw ConfigError("ppo_loss: inputs differ in length");
  }
  if (advantages.empty()) throw ConfigError("ppo_loss: no samples");
  double total = 0.0;
  for (std::size_t i = 0; i < advantages.size(); ++i) {
    const double r = std::exp(log_probs_new[i] - log_probs_old[i]);
    const double clipped = std::clamp(r, 1.0 - clip_eps, 1.0 + clip_eps);
    total += std::min(r * advantages[i], clipped * advantages[i]);
  }
  return total / static_cast<double>(advantages.size());
}

ObjectiveTerms ppo_objective(const PolicyParams& params, const SampleBatch& batch,
                             double clip_eps, double value_coef, double entropy_coef,
                             std::vector<double>* grad) {
  const std::size_t n = batch.size();
  if (n == 0) throw ConfigError("ppo_objective: empty batch");
  if (batch.observations.size() != n || batch.actions.size() != n ||
      batch.advantages.size() != n || batch.returns.size() != n) {
    throw ConfigError("ppo_objective: batch arrays differ in length");
  }
  const std::size_t n_policy = params.policy.parameter_count();
  const std::size_t n_value = params.value.parameter_count();
  std::span<double> g_policy;
  std::span<double> g_log_std;
  std::span<double> g_value;
  if (grad) {
    grad->assign(params.parameter_count(), 0.0);
    g_policy = {grad->data(), n_policy};
    g_log_std = {grad->data() + n_policy, static_cast<std::size_t>(kActionDim)};
    g_value = {grad->data() + n_policy + kActionDim, n_value};
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  std::array<double, kActionDim> inv_var{};
  for (int k = 0; k < kActionDim; ++k) inv_var[k] = std::exp(-2.0 * params.log_std[k]);

  ObjectiveTerms terms;
  Mlp::Cache policy_cache;
  Mlp::Cache value_cache;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& raw = batch.observations[i];
    const Observation obs{raw[0], raw[1], raw[2], raw[3]};
    const auto x = params.normalizer.apply(obs);
    const auto mean = params.policy.forward(x, policy_cache);
    const double value = params.value.forward(x, value_cache)[0];
    const auto& u = batch.actions[i];
    const double log_prob = gaussian_log_prob(u, mean, params.log_std);
    const double ratio = std::exp(log_prob - batch.old_log_probs[i]);
    const double adv = batch.advantages[i];
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv;
    terms.surrogate += std::min(unclipped, clipped) * inv_n;
    const double err = value - batch.returns[i];
    terms.value_loss += err * err * inv_n;

    if (!grad) continue;
    // The clipped branch has zero slope in the ratio wherever it is the min.
    const double d_log_prob = unclipped <= clipped ? unclipped * inv_n : 0.0;
    if (d_log_prob != 0.0) {
      std::array<double, kActionDim> d_mean{};
      for (int k = 0; k < kActionDim; ++k) {
        const double diff = u[k] - mean[k];
        d_mean[k] = d_log_prob * diff * inv_var[k];
        g_log_std[k] += d_log_prob * (diff * diff * inv_var[k] - 1.0);
      }
      params.policy.backward(policy_cache, d_mean, g_policy);
    }
    const double d_value = -value_coef * 2.0 * err * inv_n;
    params.value.backward(value_cache, std::array<double, 1>{d_value}, g_value);
  }
  terms.entropy = gaussian_entropy(params.log_std);
  if (grad) {
    for (int k = 0; k < kActionDim; ++k) g_log_std[k] += entropy_coef;
  }
  terms.total = terms.surrogate - value_coef * terms.value_loss + entropy_coef * terms.entropy;
  return terms;
}

namespace {

SampleBatch gather(const SampleBatch& batch, std::span<const std::size_t> idx) {
  SampleBatch out;
  for (std::size_t i : idx) {
    out.observations.push_back(batch.observations[i]);
    out.actions.push_back(batch.actions[i]);
    out.old_log_probs.push_back(batch.old_log_probs[i]);
    out.advantages.push_back(batch.advantages[i]);
    out.returns.push_back(batch.returns[i]);
  }
  return out;
}

bool finite_terms(const ObjectiveTerms& t) {
  return std::isfinite(t.total) && std::isfinite(t.surrogate) && std::isfinite(t.value_loss);
}

}  // namespace

UpdateStats update(PolicyParams& params, Adam& optimizer, const SampleBatch& batch,
                   const TrainConfig& cfg, Rng& shuffle_rng, const TrainHooks& hooks) {
  if (batch.size() == 0) throw ConfigError("update: empty batch");
  if (hooks.on_loss) hooks.on_loss(cfg.clip_eps);
  const PolicyParams before = params;
  UpdateStats stats;
  stats.clip_eps = cfg.clip_eps;
  stats.first = ppo_objective(params, batch, cfg.clip_eps, cfg.value_coef, cfg.entropy_coef);
  if (!finite_terms(stats.first)) throw NonFiniteUpdate("update: non-finite objective before step");

  std::vector<std::size_t> order(batch.size());
  std::vector<double> grad;
  std::vector<double> flat = params.flatten();
  const auto mb = static_cast<std::size_t>(cfg.minibatch_size);
  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Fisher-Yates with the portable stream keeps shuffles bit-reproducible.
    for (std::size_t k = order.size(); k > 1; --k) {
      const auto j = static_cast<std::size_t>(shuffle_rng.next_u64() % k);
      std::swap(order[k - 1], order[j]);
    }
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::size_t stop = std::min(order.size(), start + mb);
      const SampleBatch minibatch =
          gather(batch, std::span<const std::size_t>(order.data() + start, stop - start));
      const ObjectiveTerms t = ppo_objective(params, minibatch, cfg.clip_eps, cfg.value_coef,
                                             cfg.entropy_coef, &grad);
      bool finite = finite_terms(t);
      for (double g : grad) finite = finite && std::isfinite(g);
      if (!finite) {
        params = before;
        throw NonFiniteUpdate("update: non-finite objective or gradient at epoch " +
                              std::to_string(epoch) + ", surrogate " +
                              format_double(t.surrogate) + ", value loss " +
                              format_double(t.value_loss));
      }
      for (double& g : grad) g = -g;
      optimizer.step(flat, grad);
      const std::size_t ls = params.policy.parameter_count();
      for (int k = 0; k < kActionDim; ++k) {
        flat[ls + k] = std::clamp(flat[ls + k], kLogStdMin, kLogStdMax);
      }
      params.assign(flat);
      stats.last = t;
      ++stats.optimizer_steps;
    }
  }
  return stats;
}

namespace {

struct WorkerState {
  Environment env;
  Rng action_rng;
  Observation obs;
};

RolloutBuffer collect(const PolicyParams& params, WorkerState& w, int steps,
                      double& bootstrap) {
  RolloutBuffer buf;
  for (int s = 0; s < steps; ++s) {
    const auto mean = policy_mean(params, w.obs);
    std::array<double, kActionDim> u{};
    for (int k = 0; k < kActionDim; ++k) {
      u[k] = mean[k] + std::exp(params.log_std[k]) * w.action_rng.normal();
    }
    const double log_prob = gaussian_log_prob(u, mean, params.log_std);
    const auto x = params.normalizer.apply(w.obs);
    const double value = params.value.forward(x)[0];
    const StepResult r = w.env.step(squash(u));
    buf.push(w.obs, u, log_prob, r.reward, value, r.done);
    w.obs = r.done ? w.env.reset() : r.obs;
  }
  // After a done the next observation starts a fresh episode, so the
  // bootstrap is masked by the done flag inside compute_gae.
  bootstrap = params.value.forward(params.normalizer.apply(w.obs))[0];
  return buf;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const EnvConfig& env, const TrainHooks& hooks) {
  cfg.validate();
  env.validate();
  TrainResult result;
  result.params = PolicyParams::initial(cfg.seed, cfg.hidden, cfg.init_log_std);
  if (cfg.total_updates == 0) return result;

  std::vector<WorkerState> workers;
  workers.reserve(static_cast<std::size_t>(cfg.workers));
  for (int w = 0; w < cfg.workers; ++w) {
    workers.push_back({Environment(env, cfg.seed, static_cast<std::uint64_t>(w)),
                       Rng::stream(cfg.seed, "actions", static_cast<std::uint64_t>(w)), {}});
    workers.back().obs = workers.back().env.reset();
  }
  Adam optimizer(result.params.parameter_count(), cfg.learning_rate);
  Rng shuffle_rng = Rng::stream(cfg.seed, "shuffle");
  const int per_worker = cfg.horizon / cfg.workers;

  for (int u = 0; u < cfg.total_updates; ++u) {
    std::vector<RolloutBuffer> parts(workers.size());
    std::vector<double> bootstraps(workers.size(), 0.0);
    if (workers.size() == 1) {
      parts[0] = collect(result.params, workers[0], per_worker, bootstraps[0]);
    } else {
      std::vector<std::thread> threads;
      std::vector<std::exception_ptr> errors(workers.size());
      for (std::size_t w = 0; w < workers.size(); ++w) {
        threads.emplace_back([&, w] {
          try {
            parts[w] = collect(result.params, workers[w], per_worker, bootstraps[w]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    if (hooks.on_gae) hooks.on_gae(cfg.gamma, cfg.gae_lambda);
    SampleBatch batch;
    double reward_sum = 0.0;
    for (std::size_t w = 0; w < parts.size(); ++w) {
      const Advantages adv = compute_gae(parts[w], cfg.gamma, cfg.gae_lambda, bootstraps[w]);
      batch.observations.insert(batch.observations.end(), parts[w].observations.begin(),
                                parts[w].observations.end());
      batch.actions.insert(batch.actions.end(), parts[w].actions.begin(), parts[w].actions.end());
      batch.old_log_probs.insert(batch.old_log_probs.end(), parts[w].log_probs.begin(),
                                 parts[w].log_probs.end());
      batch.advantages.insert(batch.advantages.end(), adv.advantages.begin(),
                              adv.advantages.end());
      batch.returns.insert(batch.returns.end(), adv.returns.begin(), adv.returns.end());
      reward_sum += std::accumulate(parts[w].rewards.begin(), parts[w].rewards.end(), 0.0);
    }
    normalize_advantages(batch.advantages);
    const UpdateStats stats = update(result.params, optimizer, batch, cfg, shuffle_rng, hooks);

    CurveRow row;
    row.update = u;
    row.mean_reward = reward_sum / static_cast<double>(batch.size());
    row.surrogate = stats.first.surrogate;
    row.value_loss = stats.first.value_loss;
    row.entropy = stats.first.entropy;
    row.sigma_current = workers[0].env.sigma_cm();
    result.curve.push_back(row);
    if (hooks.on_update) hooks.on_update(row, result.params);
  }
  return result;
}

std::string curve_csv_header() {
  return "update,mean_reward,surrogate,value_loss,entropy,sigma_current\n";
}

std::string curve_row_csv(const CurveRow& row) {
  return std::to_string(row.update) + "," + format_double(row.mean_reward) + "," +
         format_double(row.surrogate) + "," + format_double(row.value_loss) + "," +
         format_double(row.entropy) + "," + format_double(row.sigma_current) + "\n";
}

}  // namespace legsim
