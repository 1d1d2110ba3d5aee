#include "legsim/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "legsim/errors.hpp"
#include "legsim/format.hpp"

#ifndef LEGSIM_VERSION
#define LEGSIM_VERSION "unknown"
#endif

namespace legsim {

namespace {

using json = nlohmann::ordered_json;

std::string elevation_name(ElevationModel m) {
  switch (m) {
    case ElevationModel::chain:
      return "chain";
    case ElevationModel::local:
      return "local";
    case ElevationModel::conform:
      return "conform";
  }
  return "unknown";
}

ElevationModel elevation_from_name(const std::string& name) {
  if (name == "chain") return ElevationModel::chain;
  if (name == "local") return ElevationModel::local;
  if (name == "conform") return ElevationModel::conform;
  throw ConfigError("config key 'robot.elevation': unknown model '" + name +
                    "' (expected chain, local or conform)");
}

json to_json_doc(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["cycles"] = c.cycles;
  const RobotConfig& r = c.robot;
  j["robot"] = {{"n_pairs", r.n_pairs},
                {"link_length", r.link_length},
                {"hip_half_width", r.hip_half_width},
                {"leg_length", r.leg_length},
                {"swing_lift", r.swing_lift},
                {"standing_height", r.standing_height},
                {"swing_floor", r.swing_floor},
                {"elevation", elevation_name(r.elevation)},
                {"heave", r.heave}};
  const GaitSpec& g = c.gait;
  j["gait"] = {{"theta_leg_amp_deg", g.theta_leg_amp_deg},
               {"theta_body_amp_deg", g.theta_body_amp_deg},
               {"a_v_deg", g.a_v_deg},
               {"xi", g.xi},
               {"duty", g.duty},
               {"cycle_period", g.cycle_period}};
  const SimOptions& s = c.sim;
  j["sim"] = {{"k_substeps", s.k_substeps},
              {"contact_eps", s.contact_eps},
              {"tikhonov", s.tikhonov},
              {"support_feet", s.support.support_feet},
              {"leg_compliance", s.support.leg_compliance},
              {"belly_clearance", s.support.belly_clearance},
              {"stub_weight", s.stub_weight},
              {"stub_depth", s.stub_depth},
              {"body_drag", s.body_drag}};
  const ControllerSpec& k = c.controller;
  j["controller"] = {{"kind", to_string(k.kind)},
                     {"k_p_deg", k.k_p_deg},
                     {"beta_0", k.beta_0},
                     {"a_v_min_deg", k.a_v_min_deg},
                     {"a_v_max_deg", k.a_v_max_deg},
                     {"checkpoint", k.checkpoint}};
  j["terrain"] = {{"kind", to_string(c.terrain.kind)},
                  {"value", c.terrain.value},
                  {"extent_x", c.terrain.extent_x},
                  {"extent_y", c.terrain.extent_y}};
  j["sweep"] = {{"a_v_deg", c.sweep.a_v_deg},
                {"terrains", c.sweep.terrains},
                {"seeds", c.sweep.seeds}};
  const TrainConfig& p = c.train.ppo;
  j["train"] = {{"gamma", p.gamma},
                {"clip_eps", p.clip_eps},
                {"gae_lambda", p.gae_lambda},
                {"learning_rate", p.learning_rate},
                {"epochs_per_update", p.epochs_per_update},
                {"minibatch_size", p.minibatch_size},
                {"horizon", p.horizon},
                {"total_updates", p.total_updates},
                {"value_coef", p.value_coef},
                {"entropy_coef", p.entropy_coef},
                {"hidden", p.hidden},
                {"init_log_std", p.init_log_std},
                {"workers", p.workers},
                {"episode_cap", c.train.episode_cap},
                {"resample_every", c.train.schedule.every},
                {"sigma_min_cm", c.train.schedule.sigma_min_cm},
                {"sigma_max_cm", c.train.schedule.sigma_max_cm},
                {"fixed_sigma_cm", c.train.fixed_sigma_cm ? json(*c.train.fixed_sigma_cm)
                                                          : json(nullptr)},
                {"checkpoint_every", c.train.checkpoint_every}};
  j["eval"] = {{"checkpoint", c.eval.checkpoint},
               {"sigmas_cm", c.eval.sigmas_cm},
               {"seeds", c.eval.seeds}};
  return j;
}

// Rejects keys of `patch` that the default document does not have.
void check_keys(const json& patch, const json& reference, const std::string& path) {
  if (!patch.is_object()) {
    throw ConfigError("config " + (path.empty() ? std::string("document") : "key '" + path + "'") +
                      ": expected an object");
  }
  for (const auto& [key, value] : patch.items()) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!reference.contains(key)) throw ConfigError("unknown config key '" + full + "'");
    if (reference.at(key).is_object() && !value.is_null()) check_keys(value, reference.at(key), full);
  }
}

/// Typed field access with errors naming the dotted key.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {}

  Reader sub(const char* key) const {
    const json& v = at(key);
    if (!v.is_object()) fail(key, "expected an object");
    return Reader(v, name(key));
  }
  double number(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  std::optional<double> optional_number(const char* key) const {
    if (!obj_.contains(key) || obj_.at(key).is_null()) return std::nullopt;
    return number(key);
  }
  int integer(const char* key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    const auto i = v.get<std::int64_t>();
    if (i < -2147483647 || i > 2147483647) fail(key, "integer out of range");
    return static_cast<int>(i);
  }
  std::uint64_t unsigned_integer(const char* key) const {
    const json& v = at(key);
    if (!v.is_number_unsigned()) fail(key, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::string string(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const char* key) const {
    std::vector<double> out;
    for (const auto& v : array(key)) {
      if (!v.is_number()) fail(key, "expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  std::vector<int> integers(const char* key) const {
    std::vector<int> out;
    for (const auto& v : array(key)) {
      if (!v.is_number_integer()) fail(key, "expected an array of integers");
      out.push_back(v.get<int>());
    }
    return out;
  }
  std::vector<std::uint64_t> unsigned_integers(const char* key) const {
    std::vector<std::uint64_t> out;
    for (const auto& v : array(key)) {
      if (!v.is_number_unsigned()) fail(key, "expected an array of nonnegative integers");
      out.push_back(v.get<std::uint64_t>());
    }
    return out;
  }
  std::vector<std::string> strings(const char* key) const {
    std::vector<std::string> out;
    for (const auto& v : array(key)) {
      if (!v.is_string()) fail(key, "expected an array of strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

 private:
  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const char* key, const std::string& what) const {
    throw ConfigError("config key '" + name(key) + "': " + what);
  }
  const json& at(const char* key) const {
    if (!obj_.contains(key)) fail(key, "missing");
    return obj_.at(key);
  }
  const json& array(const char* key) const {
    const json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array");
    return v;
  }

  const json& obj_;
  std::string path_;
};

ExperimentConfig from_json_doc(const json& doc) {
  ExperimentConfig c;
  const Reader top(doc, "");
  c.seed = top.unsigned_integer("seed");
  c.cycles = top.integer("cycles");

  const Reader r = top.sub("robot");
  c.robot.n_pairs = r.integer("n_pairs");
  c.robot.link_length = r.number("link_length");
  c.robot.hip_half_width = r.number("hip_half_width");
  c.robot.leg_length = r.number("leg_length");
  c.robot.swing_lift = r.number("swing_lift");
  c.robot.standing_height = r.number("standing_height");
  c.robot.swing_floor = r.number("swing_floor");
  c.robot.elevation = elevation_from_name(r.string("elevation"));
  c.robot.heave = r.number("heave");

  const Reader g = top.sub("gait");
  c.gait.theta_leg_amp_deg = g.number("theta_leg_amp_deg");
  c.gait.theta_body_amp_deg = g.number("theta_body_amp_deg");
  c.gait.a_v_deg = g.number("a_v_deg");
  c.gait.xi = g.number("xi");
  c.gait.duty = g.number("duty");
  c.gait.cycle_period = g.number("cycle_period");

  const Reader s = top.sub("sim");
  c.sim.k_substeps = s.integer("k_substeps");
  c.sim.contact_eps = s.number("contact_eps");
  c.sim.tikhonov = s.number("tikhonov");
  c.sim.support.support_feet = s.integer("support_feet");
  c.sim.support.leg_compliance = s.number("leg_compliance");
  c.sim.support.belly_clearance = s.number("belly_clearance");
  c.sim.stub_weight = s.number("stub_weight");
  c.sim.stub_depth = s.number("stub_depth");
  c.sim.body_drag = s.number("body_drag");

  const Reader k = top.sub("controller");
  try {
    c.controller.kind = controller_kind_from_string(k.string("kind"));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config key 'controller.kind': ") + e.what());
  }
  c.controller.k_p_deg = k.number("k_p_deg");
  c.controller.beta_0 = k.number("beta_0");
  c.controller.a_v_min_deg = k.number("a_v_min_deg");
  c.controller.a_v_max_deg = k.number("a_v_max_deg");
  c.controller.checkpoint = k.string("checkpoint");

  const Reader t = top.sub("terrain");
  try {
    c.terrain.kind = terrain_kind_from_string(t.string("kind"));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config key 'terrain.kind': ") + e.what());
  }
  c.terrain.value = t.number("value");
  c.terrain.extent_x = t.number("extent_x");
  c.terrain.extent_y = t.number("extent_y");

  const Reader w = top.sub("sweep");
  c.sweep.a_v_deg = w.numbers("a_v_deg");
  c.sweep.terrains = w.strings("terrains");
  c.sweep.seeds = w.unsigned_integers("seeds");

  const Reader p = top.sub("train");
  TrainConfig& ppo = c.train.ppo;
  ppo.gamma = p.number("gamma");
  ppo.clip_eps = p.number("clip_eps");
  ppo.gae_lambda = p.number("gae_lambda");
  ppo.learning_rate = p.number("learning_rate");
  ppo.epochs_per_update = p.integer("epochs_per_update");
  ppo.minibatch_size = p.integer("minibatch_size");
  ppo.horizon = p.integer("horizon");
  ppo.total_updates = p.integer("total_updates");
  ppo.value_coef = p.number("value_coef");
  ppo.entropy_coef = p.number("entropy_coef");
  ppo.hidden = p.integers("hidden");
  ppo.init_log_std = p.number("init_log_std");
  ppo.workers = p.integer("workers");
  c.train.episode_cap = p.integer("episode_cap");
  c.train.schedule.every = p.integer("resample_every");
  c.train.schedule.sigma_min_cm = p.number("sigma_min_cm");
  c.train.schedule.sigma_max_cm = p.number("sigma_max_cm");
  c.train.fixed_sigma_cm = p.optional_number("fixed_sigma_cm");
  c.train.checkpoint_every = p.integer("checkpoint_every");

  const Reader e = top.sub("eval");
  c.eval.checkpoint = e.string("checkpoint");
  c.eval.sigmas_cm = e.numbers("sigmas_cm");
  c.eval.seeds = e.unsigned_integers("seeds");
  return c;
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(std::string(what) + " not found or unreadable: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!text.empty() && text.back() == sep) out.push_back("");
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + text + "' is not a number");
  }
  if (used != text.size()) throw UsageError(what + ": '" + text + "' is not a number");
  return v;
}

std::uint64_t parse_unsigned(const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw UsageError("seed list: '" + text + "' is not a nonnegative integer");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw UsageError("seed list: '" + text + "' is out of range");
  }
}

std::string csv_preamble(const ExperimentConfig& cfg, const std::string& command) {
  return "# legsim " + command + " config " + config_to_json(cfg) + "\n";
}

json config_doc(const ExperimentConfig& cfg) { return to_json_doc(cfg); }

// Error text that fits in one CSV field.
std::string csv_field(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  }
  return s;
}

// Degrees rounded to 1e-9 so that 30 deg prints as 30 after the radian round trip.
std::string deg(double rad) { return format_double(std::round(rad_to_deg(rad) * 1e9) / 1e9); }

Controller build_controller(const ExperimentConfig& cfg) {
  const AmplitudeCommand base = cfg.gait.command();
  switch (cfg.controller.kind) {
    case ControllerKind::open_loop:
      return Controller::open_loop(base);
    case ControllerKind::linear:
      return Controller::linear(cfg.controller.gain(), base);
    case ControllerKind::policy:
      return Controller::policy(
          std::make_shared<const PolicyParams>(load_checkpoint(cfg.controller.checkpoint)));
  }
  throw ConfigError("unknown controller kind");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

GaitParams GaitSpec::params(int n_pairs) const {
  GaitParams g;
  g.theta_leg_amp = deg_to_rad(theta_leg_amp_deg);
  g.theta_body_amp = deg_to_rad(theta_body_amp_deg);
  g.a_v = deg_to_rad(a_v_deg);
  g.xi = xi;
  g.duty = duty;
  g.n_pairs = n_pairs;
  g.cycle_period = cycle_period;
  return g;
}

AmplitudeCommand GaitSpec::command() const {
  AmplitudeCommand c;
  c.a_v = deg_to_rad(a_v_deg);
  c.theta_body_amp = deg_to_rad(theta_body_amp_deg);
  c.theta_leg_amp = deg_to_rad(theta_leg_amp_deg);
  return c;
}

LinearGain ControllerSpec::gain() const {
  LinearGain g;
  g.k_p = deg_to_rad(k_p_deg);
  g.beta_0 = beta_0;
  g.a_v_bounds = {deg_to_rad(a_v_min_deg), deg_to_rad(a_v_max_deg)};
  return g;
}

EnvConfig ExperimentConfig::env_config() const {
  EnvConfig e;
  e.robot = robot;
  e.gait = gait_params();
  e.sim = sim;
  e.sim.record_contacts = false;
  e.schedule = train.schedule;
  e.episode_cap = train.episode_cap;
  e.extent_x = terrain.extent_x;
  e.extent_y = terrain.extent_y;
  e.fixed_sigma_cm = train.fixed_sigma_cm;
  return e;
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t = train.ppo;
  t.seed = seed;
  return t;
}

void ExperimentConfig::validate() const {
  robot.validate();
  gait_params().validate();
  try {
    gait.command().validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config section 'gait': ") + e.what());
  }
  sim.validate();
  controller.gain().validate();
  terrain.validate();
  if (cycles < 1) throw ConfigError("config key 'cycles': must be at least 1");
  if (controller.kind == ControllerKind::policy) {
    if (controller.checkpoint.empty()) {
      throw ConfigError("config key 'controller.checkpoint': required for a policy controller");
    }
    if (!std::filesystem::is_regular_file(controller.checkpoint)) {
      throw ConfigError("checkpoint not found: " + controller.checkpoint);
    }
  }
  train_config().validate();
  env_config().validate();
  if (train.checkpoint_every < 0) {
    throw ConfigError("config key 'train.checkpoint_every': must be nonnegative");
  }
  for (const auto& label : sweep.terrains) parse_terrain_label(label, terrain.extent_x, terrain.extent_y);
  for (double s : eval.sigmas_cm) {
    TerrainSpec{TerrainKind::rl_sigma, s, terrain.extent_x, terrain.extent_y}.validate();
  }
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
  return to_json_doc(cfg).dump(indent);
}

ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& base) {
  json patch;
  try {
    patch = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  json doc = to_json_doc(base);
  check_keys(patch, doc, "");
  doc.merge_patch(patch);
  return from_json_doc(doc);
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  return config_from_json(read_file(path, "config file"), base);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("override '" + assignment + "' must look like key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json patch = value;
  const auto keys = split(path, '.');
  for (auto it = keys.rbegin(); it != keys.rend(); ++it) {
    if (it->empty()) throw UsageError("override '" + assignment + "' has an empty key");
    json wrapped = json::object();
    wrapped[*it] = std::move(patch);
    patch = std::move(wrapped);
  }
  cfg = config_from_json(patch.dump(), cfg);
}

TerrainSpec parse_terrain_label(const std::string& label, double extent_x, double extent_y) {
  TerrainSpec t;
  t.extent_x = extent_x;
  t.extent_y = extent_y;
  auto value_after = [&](std::size_t prefix) {
    try {
      return parse_number(label.substr(prefix), "terrain label");
    } catch (const UsageError&) {
      throw ConfigError("terrain label '" + label + "': expected a number after the prefix");
    }
  };
  if (label == "flat") {
    t.kind = TerrainKind::flat;
    t.value = 0.0;
  } else if (label.rfind("rg", 0) == 0) {
    t.kind = TerrainKind::rugosity;
    t.value = value_after(2);
  } else if (label.rfind("sigma", 0) == 0) {
    t.kind = TerrainKind::rl_sigma;
    t.value = value_after(5);
  } else {
    throw ConfigError("terrain label '" + label + "': expected flat, rg<R_g> or sigma<cm>");
  }
  t.validate();
  return t;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  if (trim(text).empty()) throw UsageError("seed list is empty");
  std::vector<std::uint64_t> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) throw UsageError("seed list '" + text + "' has an empty item");
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_unsigned(item));
      continue;
    }
    const std::uint64_t lo = parse_unsigned(trim(item.substr(0, dash)));
    const std::uint64_t hi = parse_unsigned(trim(item.substr(dash + 1)));
    if (hi < lo) throw UsageError("seed range '" + item + "' is descending");
    if (hi - lo >= 1000000) throw UsageError("seed range '" + item + "' is too long");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  if (trim(text).empty()) throw UsageError("number list is empty");
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) throw UsageError("number list '" + text + "' has an empty item");
    out.push_back(parse_number(item, "number list"));
  }
  return out;
}

std::pair<double, double> parse_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw UsageError("size '" + text + "' must look like 10x3");
  return {parse_number(trim(text.substr(0, x)), "size"),
          parse_number(trim(text.substr(x + 1)), "size")};
}

std::string resolve_output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return kDefaultOutputDir;
}

std::vector<Artifact> gen_terrain_artifacts(const ExperimentConfig& cfg) {
  cfg.terrain.validate();
  const HeightField h = cfg.terrain.generate(cfg.seed);
  json doc = json::parse(height_field_to_json(h));
  doc["config"] = config_doc(cfg);
  return {{"terrain.json", doc.dump() + "\n"},
          {"terrain.csv", csv_preamble(cfg, "gen-terrain") + height_field_to_csv(h)}};
}

std::vector<Artifact> run_artifacts(const ExperimentConfig& cfg) {
  cfg.validate();
  const Controller controller = build_controller(cfg);
  const HeightField terrain = cfg.terrain.generate(cfg.seed);
  SimOptions sim = cfg.sim;
  sim.record_contacts = false;
  const auto records =
      run_controller(controller, terrain, cfg.robot, cfg.gait_params(), sim, cfg.cycles);
  const RunSummary s = summarize(records);

  std::string csv = csv_preamble(cfg, "run");
  csv += "cycle,a_v_deg,theta_body_deg,theta_leg_deg,v_f,v_l,beta,dx,dy,reward,terminal\n";
  for (const auto& r : records) {
    csv += std::to_string(r.cycle) + "," + deg(r.command.a_v) + "," +
           deg(r.command.theta_body_amp) + "," + deg(r.command.theta_leg_amp) + "," +
           format_double(r.v_f) + "," + format_double(r.v_l) + "," + format_double(r.beta) + "," +
           format_double(r.dx) + "," + format_double(r.dy) + "," + format_double(r.reward) + "," +
           (r.terminal ? "1" : "0") + "\n";
  }
  json summary;
  summary["config"] = config_doc(cfg);
  summary["terrain"] = {{"label", cfg.terrain.label()}, {"seed", cfg.seed}};
  summary["summary"] = {{"cycles", s.cycles},
                        {"mean_v_f", s.mean_v_f},
                        {"mean_v_l", s.mean_v_l},
                        {"mean_beta", s.mean_beta},
                        {"mean_reward", s.mean_reward},
                        {"terminal", s.terminal}};
  return {{"run_cycles.csv", csv}, {"run_summary.json", summary.dump(1) + "\n"}};
}

std::vector<Artifact> sweep_artifacts(const ExperimentConfig& cfg, int workers) {
  if (cfg.sweep.seeds.empty()) throw UsageError("sweep: the seed list is empty");
  if (cfg.sweep.a_v_deg.empty()) throw UsageError("sweep: the A_v list is empty");
  if (cfg.sweep.terrains.empty()) throw UsageError("sweep: the terrain list is empty");
  cfg.validate();

  struct Row {
    double a_v_deg = 0.0;
    std::string terrain;
    std::uint64_t seed = 0;
    std::optional<RunSummary> summary;
    std::string error;
  };
  std::vector<Row> rows;
  for (double a : cfg.sweep.a_v_deg) {
    for (const auto& t : cfg.sweep.terrains) {
      for (std::uint64_t seed : cfg.sweep.seeds) rows.push_back({a, t, seed, std::nullopt, ""});
    }
  }
  SimOptions sim = cfg.sim;
  sim.record_contacts = false;
  parallel_for(rows.size(), workers, [&](std::size_t k) {
    Row& row = rows[k];
    try {
      GaitSpec g = cfg.gait;
      g.a_v_deg = row.a_v_deg;
      const Controller c = Controller::open_loop(g.command());
      const TerrainSpec spec =
          parse_terrain_label(row.terrain, cfg.terrain.extent_x, cfg.terrain.extent_y);
      const HeightField terrain = spec.generate(row.seed);
      row.summary =
          summarize(run_controller(c, terrain, cfg.robot, g.params(cfg.robot.n_pairs), sim,
                                   cfg.cycles));
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  std::string csv = csv_preamble(cfg, "sweep");
  csv += "a_v_deg,terrain,seed,status,cycles,mean_v_f,mean_v_l,mean_beta,terminal,error\n";
  for (const auto& r : rows) {
    csv += format_double(r.a_v_deg) + "," + r.terrain + "," + std::to_string(r.seed) + ",";
    if (r.summary) {
      const RunSummary& s = *r.summary;
      csv += "ok," + std::to_string(s.cycles) + "," + format_double(s.mean_v_f) + "," +
             format_double(s.mean_v_l) + "," + format_double(s.mean_beta) + "," +
             (s.terminal ? "1" : "0") + ",\n";
    } else {
      csv += "error,0,,,,," + csv_field(r.error) + "\n";
    }
  }
  return {{"sweep.csv", csv}};
}

std::vector<Artifact> train_artifacts(const ExperimentConfig& cfg,
                                      const std::function<void(const CurveRow&)>& progress) {
  cfg.validate();
  const std::string config_json = config_to_json(cfg);
  std::vector<Artifact> out;
  TrainHooks hooks;
  hooks.on_update = [&](const CurveRow& row, const PolicyParams& params) {
    if (progress) progress(row);
    const int every = cfg.train.checkpoint_every;
    if (every > 0 && (row.update + 1) % every == 0) {
      char name[48];
      std::snprintf(name, sizeof(name), "checkpoint_u%05d.json", row.update + 1);
      out.push_back({name, checkpoint_to_json(params, config_json)});
    }
  };
  const TrainResult result = train(cfg.train_config(), cfg.env_config(), hooks);
  std::string csv = csv_preamble(cfg, "train") + curve_csv_header();
  for (const auto& row : result.curve) csv += curve_row_csv(row);
  out.push_back({"train_curve.csv", csv});
  out.push_back({"checkpoint.json", checkpoint_to_json(result.params, config_json)});
  return out;
}

std::vector<Artifact> eval_artifacts(const ExperimentConfig& cfg, int workers) {
  if (cfg.eval.seeds.empty()) throw UsageError("eval: the seed list is empty");
  if (cfg.eval.sigmas_cm.empty()) throw UsageError("eval: the sigma list is empty");
  if (cfg.eval.checkpoint.empty()) throw ConfigError("eval: a policy checkpoint is required");
  cfg.validate();
  const auto params = std::make_shared<const PolicyParams>(load_checkpoint(cfg.eval.checkpoint));
  const AmplitudeCommand base = cfg.gait.command();
  const std::vector<Controller> controllers{Controller::policy(params),
                                            Controller::linear(cfg.controller.gain(), base),
                                            Controller::open_loop(base)};
  std::vector<TerrainSpec> terrains;
  for (double s : cfg.eval.sigmas_cm) {
    terrains.push_back({TerrainKind::rl_sigma, s, cfg.terrain.extent_x, cfg.terrain.extent_y});
  }
  const auto cells = evaluate(controllers, terrains, cfg.eval.seeds, cfg.cycles, cfg.robot,
                              cfg.gait_params(), cfg.sim, workers);

  std::string runs = csv_preamble(cfg, "eval");
  runs += "controller,sigma_cm,seed,cycles,mean_v_f,mean_v_l,mean_beta,mean_reward,terminal\n";
  // Keyed by (controller, terrain) in evaluation order.
  std::vector<std::vector<const EvalCell*>> groups(controllers.size() * terrains.size());
  const std::size_t per_group = cfg.eval.seeds.size();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const EvalCell& c = cells[k];
    groups[k / per_group].push_back(&c);
    const RunSummary& s = c.summary;
    runs += to_string(controllers[c.controller].kind()) + "," + format_double(c.terrain.value) +
            "," + std::to_string(c.seed) + "," + std::to_string(s.cycles) + "," +
            format_double(s.mean_v_f) + "," + format_double(s.mean_v_l) + "," +
            format_double(s.mean_beta) + "," + format_double(s.mean_reward) + "," +
            (s.terminal ? "1" : "0") + "\n";
  }

  std::string table = csv_preamble(cfg, "eval");
  table += "controller,sigma_cm,runs,mean_v_f,ci95_v_f,mean_beta,mean_reward,ci95_reward\n";
  for (const auto& group : groups) {
    std::vector<double> vf;
    std::vector<double> rew;
    double beta = 0.0;
    for (const EvalCell* c : group) {
      vf.push_back(c->summary.mean_v_f);
      rew.push_back(c->summary.mean_reward);
      beta += c->summary.mean_beta;
    }
    const MeanCi v = mean_ci95(vf);
    const MeanCi r = mean_ci95(rew);
    const EvalCell& first = *group.front();
    table += to_string(controllers[first.controller].kind()) + "," +
             format_double(first.terrain.value) + "," + std::to_string(group.size()) + "," +
             format_double(v.mean) + "," + format_double(v.half_width) + "," +
             format_double(beta / static_cast<double>(group.size())) + "," +
             format_double(r.mean) + "," + format_double(r.half_width) + "\n";
  }
  return {{"eval.csv", table}, {"eval_runs.csv", runs}};
}

void write_artifacts(const std::string& dir, const std::string& command,
                     const std::vector<Artifact>& artifacts, int workers) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  json files = json::array();
  for (const auto& a : artifacts) {
    const auto path = std::filesystem::path(dir) / a.name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << a.contents;
    if (!out) throw std::runtime_error("failed writing " + path.string());
    files.push_back(a.name);
  }
  json meta;
  meta["command"] = command;
  meta["version"] = version();
  meta["created_utc"] = utc_timestamp();
  meta["output_dir"] = dir;
  meta["workers"] = workers;
  meta["files"] = files;
  const auto path = std::filesystem::path(dir) / (command + ".meta.json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << meta.dump(1) << "\n";
}

const char* version() { return LEGSIM_VERSION; }

}  // namespace legsim
