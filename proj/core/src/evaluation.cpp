#include "legsim/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "legsim/errors.hpp"
#include "legsim/format.hpp"
#include "legsim/ppo.hpp"

namespace legsim {

std::string to_string(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::flat:
      return "flat";
    case TerrainKind::rugosity:
      return "rugosity";
    case TerrainKind::rl_sigma:
      return "rl_sigma";
  }
  return "unknown";
}

TerrainKind terrain_kind_from_string(const std::string& name) {
  if (name == "flat") return TerrainKind::flat;
  if (name == "rugosity") return TerrainKind::rugosity;
  if (name == "rl_sigma") return TerrainKind::rl_sigma;
  throw ConfigError("unknown terrain kind '" + name + "' (expected flat, rugosity or rl_sigma)");
}

void TerrainSpec::validate() const {
  constexpr double kMinExtent = 0.5;
  if (!(extent_x >= kMinExtent) || !(extent_y >= kMinExtent)) {
    throw ConfigError("terrain extents must be at least 0.5 m");
  }
  if (kind == TerrainKind::rugosity && !(value >= 0.0)) {
    throw ConfigError("rugosity must be nonnegative");
  }
  if (kind == TerrainKind::rl_sigma && !(value >= 0.0 && value <= kRlSigmaMaxCm)) {
    throw ConfigError("sigma must lie in [0, 12] cm");
  }
}

HeightField TerrainSpec::generate(std::uint64_t seed) const {
  validate();
  switch (kind) {
    case TerrainKind::flat:
      return flat_terrain(extent_x, extent_y);
    case TerrainKind::rugosity:
      return generate_block_terrain(value, extent_x, extent_y, seed);
    case TerrainKind::rl_sigma:
      return generate_rl_terrain(value, extent_x, extent_y, seed);
  }
  throw ConfigError("unknown terrain kind");
}

std::string TerrainSpec::label() const {
  switch (kind) {
    case TerrainKind::flat:
      return "flat";
    case TerrainKind::rugosity:
      return "rg" + format_double(value);
    case TerrainKind::rl_sigma:
      return "sigma" + format_double(value);
  }
  return "unknown";
}

std::vector<CycleRecord> run_controller(const Controller& controller, const HeightField& terrain,
                                        const RobotConfig& robot, const GaitParams& base,
                                        const SimOptions& sim, int cycles) {
  if (cycles < 1) throw ConfigError("run_controller: cycles must be at least 1");
  std::vector<CycleRecord> records;
  SimState state = start_state(terrain, robot);
  Observation obs = controller.initial().observe(1.0);
  for (int c = 0; c < cycles; ++c) {
    const AmplitudeCommand cmd = controller.next(obs);
    const CycleOutcome out = run_cycle(state, robot, cmd.apply_to(base), terrain, sim);
    CycleRecord r;
    r.cycle = c;
    r.command = cmd;
    r.v_f = out.v_f;
    r.v_l = out.v_l;
    r.beta = out.beta;
    r.dx = out.dx;
    r.dy = out.dy;
    r.reward = reward(out.v_f, out.v_l);
    r.terminal = out.terminal;
    records.push_back(r);
    if (out.terminal) break;
    obs = cmd.observe(out.beta);
  }
  return records;
}

RunSummary summarize(const std::vector<CycleRecord>& records) {
  RunSummary s;
  s.cycles = static_cast<int>(records.size());
  if (records.empty()) return s;
  for (const auto& r : records) {
    s.mean_v_f += r.v_f;
    s.mean_v_l += r.v_l;
    s.mean_beta += r.beta;
    s.mean_reward += r.reward;
    s.terminal = s.terminal || r.terminal;
  }
  const double n = static_cast<double>(records.size());
  s.mean_v_f /= n;
  s.mean_v_l /= n;
  s.mean_beta /= n;
  s.mean_reward /= n;
  return s;
}

std::vector<EvalCell> evaluate(const std::vector<Controller>& controllers,
                               const std::vector<TerrainSpec>& terrains,
                               const std::vector<std::uint64_t>& seeds, int cycles,
                               const RobotConfig& robot, const GaitParams& base,
                               const SimOptions& sim, int workers) {
  if (controllers.empty() || terrains.empty() || seeds.empty()) {
    throw ConfigError("evaluate: controllers, terrains and seeds must be nonempty");
  }
  if (workers < 1) throw ConfigError("evaluate: workers must be at least 1");
  std::vector<EvalCell> cells;
  for (std::size_t c = 0; c < controllers.size(); ++c) {
    for (const auto& t : terrains) {
      for (std::uint64_t seed : seeds) cells.push_back({c, t, seed, {}});
    }
  }
  SimOptions quiet = sim;
  quiet.record_contacts = false;
  auto run_cell = [&](EvalCell& cell) {
    const HeightField terrain = cell.terrain.generate(cell.seed);
    cell.summary = summarize(
        run_controller(controllers[cell.controller], terrain, robot, base, quiet, cycles));
  };
  parallel_for(cells.size(), workers, [&](std::size_t k) { run_cell(cells[k]); });
  return cells;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) throw ConfigError("parallel_for: workers must be at least 1");
  if (workers == 1 || count < 2) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t k = next++; k < count; k = next++) fn(k);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

MeanCi mean_ci95(const std::vector<double>& xs) {
  MeanCi out;
  out.n = xs.size();
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return out;
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  var /= n - 1.0;
  constexpr double kZ95 = 1.959963984540054;
  out.half_width = kZ95 * std::sqrt(var / n);
  return out;
}

}  // namespace legsim
