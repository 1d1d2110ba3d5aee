#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "legsim/controllers.hpp"
#include "legsim/evaluation.hpp"
#include "legsim/ppo.hpp"

namespace legsim {

// Malformed command-line input such as an empty seed list. Maps to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr const char* kOutputDirEnv = "LEGSIM_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "legsim_out";

/// Gait amplitudes in degrees, as written in config files.
struct GaitSpec {
  double theta_leg_amp_deg = 30.0;
  double theta_body_amp_deg = 10.0;
  double a_v_deg = 0.0;
  double xi = 1.0;
  double duty = 0.5;
  double cycle_period = 3.0;

  GaitParams params(int n_pairs) const;
  AmplitudeCommand command() const;
};

struct ControllerSpec {
  ControllerKind kind = ControllerKind::open_loop;
  double k_p_deg = -50.0;  // degrees of A_v per unit beta
  double beta_0 = 0.9;
  double a_v_min_deg = 0.0;
  double a_v_max_deg = 35.0;
  std::string checkpoint;  // policy controllers only

  LinearGain gain() const;
};

struct SweepSpec {
  std::vector<double> a_v_deg{0.0, 10.0, 20.0};
  std::vector<std::string> terrains{"flat", "rg0.32"};  // labels, see parse_terrain_label
  std::vector<std::uint64_t> seeds{0, 1, 2};
};

struct TrainSpec {
  TrainConfig ppo;  // ppo.seed is taken from ExperimentConfig::seed
  int episode_cap = 32;
  SigmaSchedule schedule;
  std::optional<double> fixed_sigma_cm;
  int checkpoint_every = 0;  // 0 writes only the final checkpoint
};

struct EvalSpec {
  std::string checkpoint;
  std::vector<double> sigmas_cm{2.0, 4.0, 6.0, 8.0};
  std::vector<std::uint64_t> seeds{1000, 1001, 1002, 1003, 1004,
                                   1005, 1006, 1007, 1008, 1009};
};

/// Everything that determines an experiment's results. The output directory
/// and worker counts for sweeps and evaluations are execution details and
/// live outside it.
struct ExperimentConfig {
  RobotConfig robot;
  GaitSpec gait;
  SimOptions sim;
  ControllerSpec controller;
  TerrainSpec terrain;
  int cycles = 8;
  std::uint64_t seed = 0;
  SweepSpec sweep;
  TrainSpec train;
  EvalSpec eval;

  GaitParams gait_params() const { return gait.params(robot.n_pairs); }
  EnvConfig env_config() const;
  TrainConfig train_config() const;
  // Throws ConfigError on any invalid field.
  void validate() const;
};

// Full resolved config as JSON text; compact unless `indent` >= 0.
std::string config_to_json(const ExperimentConfig& cfg, int indent = -1);

// Applies a (possibly partial) JSON document on top of `base`. Unknown keys
// and wrong types raise ConfigError naming the offending key.
ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& base = {});

// Reads a config file; a missing or unreadable file is a ConfigError.
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base = {});

// Applies "dotted.key=value"; value is parsed as JSON, falling back to a string.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// "flat", "rg<R_g>" or "sigma<cm>".
TerrainSpec parse_terrain_label(const std::string& label, double extent_x = 10.0,
                                double extent_y = 3.0);

// Comma-separated items, each a number or an inclusive range "a-b".
// Empty input is a UsageError.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

// "<x>x<y>" in metres, e.g. "10x3".
std::pair<double, double> parse_size(const std::string& text);

// Flag value if given, else $LEGSIM_OUTPUT_DIR, else "legsim_out".
std::string resolve_output_dir(const std::string& flag_value);

/// One output file: name relative to the output directory and its bytes.
struct Artifact {
  std::string name;
  std::string contents;
};

std::vector<Artifact> gen_terrain_artifacts(const ExperimentConfig& cfg);
std::vector<Artifact> run_artifacts(const ExperimentConfig& cfg);
// Rows that fail are recorded with status "error" and the sweep goes on.
std::vector<Artifact> sweep_artifacts(const ExperimentConfig& cfg, int workers = 1);
std::vector<Artifact> train_artifacts(const ExperimentConfig& cfg,
                                      const std::function<void(const CurveRow&)>& progress = {});
std::vector<Artifact> eval_artifacts(const ExperimentConfig& cfg, int workers = 1);

// Writes the artifacts plus a "<command>.meta.json" sidecar that carries the
// timestamp, so the artifacts themselves stay byte-reproducible.
void write_artifacts(const std::string& dir, const std::string& command,
                     const std::vector<Artifact>& artifacts, int workers = 1);

const char* version();

}  // namespace legsim
