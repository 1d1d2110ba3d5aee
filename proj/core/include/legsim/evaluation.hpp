#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "legsim/controllers.hpp"
#include "legsim/sim.hpp"
#include "legsim/terrain.hpp"

namespace legsim {

enum class TerrainKind { flat, rugosity, rl_sigma };

std::string to_string(TerrainKind kind);
TerrainKind terrain_kind_from_string(const std::string& name);

/// Which terrain to build for a run; `value` is R_g for rugosity fields and
/// sigma in cm for training-style fields.
struct TerrainSpec {
  TerrainKind kind = TerrainKind::rl_sigma;
  double value = 4.0;
  double extent_x = 10.0;
  double extent_y = 3.0;

  void validate() const;
  HeightField generate(std::uint64_t seed) const;
  // Short stable label such as "flat", "rg0.32" or "sigma4".
  std::string label() const;
};

struct CycleRecord {
  int cycle = 0;
  AmplitudeCommand command;
  double v_f = 0.0;
  double v_l = 0.0;
  double beta = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double reward = 0.0;
  bool terminal = false;
};

struct RunSummary {
  int cycles = 0;
  double mean_v_f = 0.0;
  double mean_v_l = 0.0;
  double mean_beta = 0.0;
  double mean_reward = 0.0;
  bool terminal = false;
};

// Runs up to `cycles` motion cycles from the start pose. The controller sees
// (initial amplitudes, beta = 1) before the first cycle and afterwards the
// amplitudes it applied with the measured beta. Stops after a terminal cycle.
std::vector<CycleRecord> run_controller(const Controller& controller, const HeightField& terrain,
                                        const RobotConfig& robot, const GaitParams& base,
                                        const SimOptions& sim, int cycles);

RunSummary summarize(const std::vector<CycleRecord>& records);

struct EvalCell {
  std::size_t controller = 0;  // index into the controller list
  TerrainSpec terrain;
  std::uint64_t seed = 0;
  RunSummary summary;
};

// Calls fn(0) ... fn(count - 1) on `workers` threads. Each index runs once;
// callers keep results in per-index slots so scheduling cannot change them.
// The first exception from any worker is rethrown after all have joined.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

// Every (controller, terrain, seed) combination, each on the terrain
// generated from that seed. Cells are independent and may run on `workers`
// threads; the result is ordered by controller, terrain, seed regardless.
std::vector<EvalCell> evaluate(const std::vector<Controller>& controllers,
                               const std::vector<TerrainSpec>& terrains,
                               const std::vector<std::uint64_t>& seeds, int cycles,
                               const RobotConfig& robot, const GaitParams& base,
                               const SimOptions& sim, int workers = 1);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // normal-approximation 95% interval
  std::size_t n = 0;
};

MeanCi mean_ci95(const std::vector<double>& xs);

}  // namespace legsim
