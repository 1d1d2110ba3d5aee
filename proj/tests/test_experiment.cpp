#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "legsim/errors.hpp"
#include "legsim/experiment.hpp"

using namespace legsim;
namespace fs = std::filesystem;

namespace {

const Artifact& find(const std::vector<Artifact>& as, const std::string& name) {
  const auto it =
      std::find_if(as.begin(), as.end(), [&](const Artifact& a) { return a.name == name; });
  if (it == as.end()) throw std::runtime_error("missing artifact " + name);
  return *it;
}

// Data rows of a CSV with a leading "# ..." config line and a header.
std::vector<std::map<std::string, std::string>> csv_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      continue;
    }
    std::map<std::string, std::string> row;
    for (std::size_t k = 0; k < header.size() && k < cells.size(); ++k) row[header[k]] = cells[k];
    rows.push_back(row);
  }
  return rows;
}

ExperimentConfig tiny_train_config() {
  ExperimentConfig cfg;
  cfg.train.ppo.total_updates = 2;
  cfg.train.ppo.horizon = 8;
  cfg.train.ppo.minibatch_size = 4;
  cfg.train.ppo.epochs_per_update = 1;
  cfg.train.ppo.hidden = {4};
  cfg.sim.k_substeps = 16;
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  ExperimentConfig cfg;
  cfg.seed = 42;
  cfg.robot.swing_lift = 0.03;
  cfg.gait.a_v_deg = 12.5;
  cfg.sim.stub_depth = 0.05;
  cfg.controller.kind = ControllerKind::linear;
  cfg.terrain = parse_terrain_label("rg0.17");
  cfg.train.fixed_sigma_cm = 3.0;
  cfg.sweep.seeds = {4, 5};
  const std::string text = config_to_json(cfg);
  const ExperimentConfig back = config_from_json(text);
  EXPECT_EQ(config_to_json(back), text);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.train_config().seed, 42u);
  EXPECT_EQ(back.controller.kind, ControllerKind::linear);
  EXPECT_EQ(back.terrain.label(), "rg0.17");
}

TEST(Config, PartialDocumentKeepsBase) {
  ExperimentConfig base;
  base.cycles = 5;
  const ExperimentConfig cfg = config_from_json(R"({"gait": {"theta_leg_amp_deg": 20}})", base);
  EXPECT_EQ(cfg.cycles, 5);
  EXPECT_EQ(cfg.gait.theta_leg_amp_deg, 20.0);
  EXPECT_EQ(cfg.gait.theta_body_amp_deg, 10.0);
}

TEST(Config, UnknownKeysAndBadTypesNameTheKey) {
  try {
    config_from_json(R"({"robot": {"wheel_count": 4}})");
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("robot.wheel_count"), std::string::npos) << e.what();
  }
  try {
    config_from_json(R"({"sim": {"k_substeps": "many"}})");
    FAIL() << "wrong type accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("sim.k_substeps"), std::string::npos) << e.what();
  }
  EXPECT_THROW(config_from_json("{not json"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/legsim.json"), ConfigError);
}

TEST(Config, ValidateRejectsOutOfBoundsCommand) {
  ExperimentConfig cfg;
  cfg.gait.theta_leg_amp_deg = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.cycles = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Overrides, DottedAssignments) {
  ExperimentConfig cfg;
  apply_override(cfg, "robot.swing_lift=0.03");
  apply_override(cfg, "controller.kind=linear");
  apply_override(cfg, "sweep.seeds=[7,8]");
  EXPECT_EQ(cfg.robot.swing_lift, 0.03);
  EXPECT_EQ(cfg.controller.kind, ControllerKind::linear);
  EXPECT_EQ(cfg.sweep.seeds, (std::vector<std::uint64_t>{7, 8}));
  EXPECT_THROW(apply_override(cfg, "robot.bogus=1"), ConfigError);
  EXPECT_THROW(apply_override(cfg, "no_equals_sign"), UsageError);
  EXPECT_THROW(apply_override(cfg, "robot..swing_lift=1"), UsageError);
}

TEST(Parsing, SeedAndNumberLists) {
  EXPECT_EQ(parse_seed_list("0-2,5"), (std::vector<std::uint64_t>{0, 1, 2, 5}));
  EXPECT_EQ(parse_seed_list(" 9 "), (std::vector<std::uint64_t>{9}));
  EXPECT_THROW(parse_seed_list(""), UsageError);
  EXPECT_THROW(parse_seed_list("3-1"), UsageError);
  EXPECT_THROW(parse_seed_list("1,,2"), UsageError);
  EXPECT_THROW(parse_seed_list("-4"), UsageError);
  EXPECT_EQ(parse_double_list("0,10.5,20"), (std::vector<double>{0.0, 10.5, 20.0}));
  EXPECT_THROW(parse_double_list("1,x"), UsageError);
}

TEST(Parsing, TerrainLabelsAndSizes) {
  EXPECT_EQ(parse_terrain_label("flat").kind, TerrainKind::flat);
  const TerrainSpec rg = parse_terrain_label("rg0.32", 4, 2);
  EXPECT_EQ(rg.kind, TerrainKind::rugosity);
  EXPECT_EQ(rg.value, 0.32);
  EXPECT_EQ(rg.extent_x, 4.0);
  EXPECT_EQ(parse_terrain_label("sigma6").value, 6.0);
  EXPECT_THROW(parse_terrain_label("gravel"), ConfigError);
  EXPECT_THROW(parse_terrain_label("rgx"), ConfigError);
  EXPECT_EQ(parse_size("10x3"), (std::pair{10.0, 3.0}));
  EXPECT_THROW(parse_size("10by3"), UsageError);
}

TEST(OutputDir, FlagThenEnvironmentThenDefault) {
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(resolve_output_dir(""), kDefaultOutputDir);
  ::setenv(kOutputDirEnv, "/tmp/from_env", 1);
  EXPECT_EQ(resolve_output_dir(""), "/tmp/from_env");
  EXPECT_EQ(resolve_output_dir("explicit"), "explicit");
  ::unsetenv(kOutputDirEnv);
}

TEST(Artifacts, TerrainFilesAreReproducibleAndCarryConfig) {
  ExperimentConfig cfg;
  cfg.terrain = parse_terrain_label("rg0.32");
  cfg.seed = 7;
  const auto a = gen_terrain_artifacts(cfg);
  const auto b = gen_terrain_artifacts(cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].contents, b[k].contents);
  const std::string& csv = find(a, "terrain.csv").contents;
  EXPECT_EQ(csv.rfind("# legsim gen-terrain config {", 0), 0u);
  EXPECT_NE(find(a, "terrain.json").contents.find("\"config\""), std::string::npos);

  cfg.terrain = parse_terrain_label("rg0");
  for (const auto& row : csv_rows(find(gen_terrain_artifacts(cfg), "terrain.csv").contents)) {
    EXPECT_EQ(std::stod(row.at("height_m")), 0.0);
  }
}

TEST(Artifacts, RunOnFlatGroundHasFullContact) {
  ExperimentConfig cfg;
  cfg.terrain = parse_terrain_label("flat");
  cfg.cycles = 4;
  const auto rows = csv_rows(find(run_artifacts(cfg), "run_cycles.csv").contents);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& row : rows) EXPECT_EQ(std::stod(row.at("beta")), 1.0);
}

TEST(Artifacts, ControllerChangesTrajectoryNotTerrain) {
  ExperimentConfig cfg;
  cfg.terrain = parse_terrain_label("sigma6");
  cfg.cycles = 3;
  cfg.seed = 2;
  ExperimentConfig lin = cfg;
  lin.controller.kind = ControllerKind::linear;
  EXPECT_NE(find(run_artifacts(cfg), "run_cycles.csv").contents,
            find(run_artifacts(lin), "run_cycles.csv").contents);
  const auto terrain_rows = [](const ExperimentConfig& c) {
    return csv_rows(find(gen_terrain_artifacts(c), "terrain.csv").contents);
  };
  EXPECT_EQ(terrain_rows(cfg), terrain_rows(lin));
}

TEST(Artifacts, SweepIsIndependentOfWorkerCount) {
  ExperimentConfig cfg;
  cfg.cycles = 2;
  cfg.sweep.seeds = {0, 1};
  const auto serial = sweep_artifacts(cfg, 1);
  const auto parallel = sweep_artifacts(cfg, 4);
  EXPECT_EQ(find(serial, "sweep.csv").contents, find(parallel, "sweep.csv").contents);
  EXPECT_EQ(csv_rows(find(serial, "sweep.csv").contents).size(), 3u * 2u * 2u);
  cfg.sweep.seeds.clear();
  EXPECT_THROW(sweep_artifacts(cfg), UsageError);
}

TEST(Artifacts, FlatSweepIsInsensitiveToVerticalWave) {
  ExperimentConfig cfg;
  cfg.sweep.terrains = {"flat"};
  cfg.sweep.seeds = {0};
  std::vector<double> speeds;
  for (const auto& row : csv_rows(find(sweep_artifacts(cfg, 3), "sweep.csv").contents)) {
    speeds.push_back(std::stod(row.at("mean_v_f")));
  }
  ASSERT_EQ(speeds.size(), 3u);
  const auto [lo, hi] = std::minmax_element(speeds.begin(), speeds.end());
  EXPECT_LE(*hi - *lo, 0.05 * *hi);
}

TEST(Artifacts, RoughSweepFavoursVerticalWave) {
  ExperimentConfig cfg;
  cfg.sweep.terrains = {"rg0.32"};
  std::map<double, double> total;
  for (const auto& row : csv_rows(find(sweep_artifacts(cfg, 4), "sweep.csv").contents)) {
    total[std::stod(row.at("a_v_deg"))] += std::stod(row.at("mean_v_f"));
  }
  const auto best = std::max_element(total.begin(), total.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
  EXPECT_GT(best->first, 0.0);
}

TEST(Artifacts, TrainAndEvalAreReproducible) {
  const ExperimentConfig cfg = tiny_train_config();
  const auto a = train_artifacts(cfg);
  const auto b = train_artifacts(cfg);
  EXPECT_EQ(find(a, "train_curve.csv").contents, find(b, "train_curve.csv").contents);
  EXPECT_EQ(find(a, "checkpoint.json").contents, find(b, "checkpoint.json").contents);
  EXPECT_EQ(csv_rows(find(a, "train_curve.csv").contents).size(), 2u);

  TempDir dir("legsim_test_eval");
  const fs::path ckpt = dir.path / "checkpoint.json";
  std::ofstream(ckpt) << find(a, "checkpoint.json").contents;
  ExperimentConfig ev = cfg;
  ev.eval.checkpoint = ckpt.string();
  ev.eval.seeds = {1000, 1001};
  ev.cycles = 2;
  const auto e1 = eval_artifacts(ev, 1);
  const auto e2 = eval_artifacts(ev, 3);
  EXPECT_EQ(find(e1, "eval.csv").contents, find(e2, "eval.csv").contents);
  EXPECT_EQ(find(e1, "eval_runs.csv").contents, find(e2, "eval_runs.csv").contents);
  const auto rows = csv_rows(find(e1, "eval.csv").contents);
  ASSERT_EQ(rows.size(), 3u * 4u);
  EXPECT_EQ(rows.front().at("controller"), "policy");

  ev.eval.checkpoint = (dir.path / "missing.json").string();
  EXPECT_THROW(eval_artifacts(ev), ConfigError);
}

TEST(Artifacts, WriteAddsTimestampSidecar) {
  TempDir dir("legsim_test_write");
  const std::vector<Artifact> as{{"a.csv", "x,y\n1,2\n"}};
  write_artifacts((dir.path / "out").string(), "demo", as);
  EXPECT_EQ(slurp(dir.path / "out" / "a.csv"), "x,y\n1,2\n");
  EXPECT_TRUE(fs::exists(dir.path / "out" / "demo.meta.json"));
}

#ifdef LEGSIM_CLI_PATH

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " " + std::string(LEGSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  TempDir dir("legsim_test_cli");
  const std::string out = " --out " + dir.path.string();
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("sweep --seeds ''" + out), 2);
  EXPECT_EQ(run_cli("--set robot.bogus=1 config"), 3);
  EXPECT_EQ(run_cli("--config /nonexistent.json config"), 3);
  EXPECT_EQ(run_cli("eval --checkpoint /nonexistent.json" + out), 3);
  EXPECT_EQ(run_cli("run --theta-leg 0" + out), 3);
  EXPECT_EQ(run_cli("gen-terrain --rugosity 0.32 --flat"), 2);
}

TEST(Cli, GenTerrainIsByteReproducibleAndHonoursEnvDir) {
  TempDir dir("legsim_test_cli_gen");
  const fs::path a = dir.path / "a";
  const fs::path b = dir.path / "b";
  const std::string flags = "gen-terrain --rugosity 0.32 --size 10x3 --seed 7";
  ASSERT_EQ(run_cli(flags + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli(flags, std::string(kOutputDirEnv) + "=" + b.string()), 0);
  EXPECT_EQ(slurp(a / "terrain.csv"), slurp(b / "terrain.csv"));
  EXPECT_EQ(slurp(a / "terrain.json"), slurp(b / "terrain.json"));
  EXPECT_FALSE(slurp(a / "terrain.csv").empty());
}

#endif
