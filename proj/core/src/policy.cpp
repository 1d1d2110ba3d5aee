#include "legsim/policy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "legsim/errors.hpp"
#include "legsim/rng.hpp"

namespace legsim {

namespace {

using json = nlohmann::ordered_json;

json layers_to_json(const Mlp& net, bool weights) {
  json out = json::array();
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const auto values = weights ? net.weights(l) : net.biases(l);
    out.push_back(std::vector<double>(values.begin(), values.end()));
  }
  return out;
}

void layers_from_json(Mlp& net, const json& doc, bool weights, const char* what) {
  if (!doc.is_array() || doc.size() != net.layers()) {
    throw ConfigError(std::string("checkpoint: ") + what + " has the wrong layer count");
  }
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const auto values = doc[l].get<std::vector<double>>();
    auto dest = weights ? net.weights(l) : net.biases(l);
    if (values.size() != dest.size()) {
      throw ConfigError(std::string("checkpoint: ") + what + " layer " + std::to_string(l) +
                        " has " + std::to_string(values.size()) + " entries, expected " +
                        std::to_string(dest.size()));
    }
    std::copy(values.begin(), values.end(), dest.begin());
  }
}

}  // namespace

ObsNormalizer ObsNormalizer::standard() {
  ObsNormalizer n;
  for (std::size_t k = 0; k < kActionRanges.size(); ++k) {
    n.mean[k] = kActionRanges[k].mid();
    n.scale[k] = 0.5 * (kActionRanges[k].hi - kActionRanges[k].lo);
  }
  n.mean[3] = 0.5;
  n.scale[3] = 0.5;
  return n;
}

std::array<double, kObsDim> ObsNormalizer::apply(const Observation& obs) const {
  const auto raw = obs.as_array();
  std::array<double, kObsDim> out{};
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (raw[k] - mean[k]) / scale[k];
  return out;
}

PolicyParams PolicyParams::initial(std::uint64_t seed, const std::vector<int>& hidden,
                                   double log_std) {
  std::vector<int> policy_sizes{kObsDim};
  policy_sizes.insert(policy_sizes.end(), hidden.begin(), hidden.end());
  std::vector<int> value_sizes = policy_sizes;
  policy_sizes.push_back(kActionDim);
  value_sizes.push_back(1);
  PolicyParams p;
  p.policy = Mlp(policy_sizes);
  p.value = Mlp(value_sizes);
  Rng policy_rng = Rng::stream(seed, "policy_init");
  Rng value_rng = Rng::stream(seed, "value_init");
  p.policy.initialize(policy_rng, 0.01);
  p.value.initialize(value_rng, 1.0);
  p.log_std.fill(log_std);
  p.validate();
  return p;
}

void PolicyParams::validate() const {
  if (policy.layers() == 0 || policy.input_size() != kObsDim ||
      policy.output_size() != kActionDim) {
    throw ConfigError("PolicyParams: policy network must map 4 observations to 3 actions");
  }
  if (value.layers() == 0 || value.input_size() != kObsDim || value.output_size() != 1) {
    throw ConfigError("PolicyParams: value network must map 4 observations to 1 value");
  }
  for (double v : policy.parameters()) {
    if (!std::isfinite(v)) throw ConfigError("PolicyParams: non-finite policy parameter");
  }
  for (double v : value.parameters()) {
    if (!std::isfinite(v)) throw ConfigError("PolicyParams: non-finite value parameter");
  }
  for (double s : log_std) {
    if (!(s >= kLogStdMin && s <= kLogStdMax)) {
      throw ConfigError("PolicyParams: log_std outside [-5, 2]");
    }
  }
  for (double s : normalizer.scale) {
    if (!(s != 0.0) || !std::isfinite(s)) {
      throw ConfigError("PolicyParams: observation scale must be finite and nonzero");
    }
  }
}

std::size_t PolicyParams::parameter_count() const {
  return policy.parameter_count() + kActionDim + value.parameter_count();
}

std::vector<double> PolicyParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  flat.insert(flat.end(), policy.parameters().begin(), policy.parameters().end());
  flat.insert(flat.end(), log_std.begin(), log_std.end());
  flat.insert(flat.end(), value.parameters().begin(), value.parameters().end());
  return flat;
}

void PolicyParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw ConfigError("PolicyParams: flat parameter vector has the wrong size");
  }
  auto it = flat.begin();
  std::copy(it, it + static_cast<long>(policy.parameter_count()), policy.parameters().begin());
  it += static_cast<long>(policy.parameter_count());
  std::copy(it, it + kActionDim, log_std.begin());
  it += kActionDim;
  std::copy(it, flat.end(), value.parameters().begin());
}

std::array<double, kActionDim> policy_mean(const PolicyParams& params, const Observation& obs) {
  const auto x = params.normalizer.apply(obs);
  const auto out = params.policy.forward(x);
  return {out[0], out[1], out[2]};
}

double gaussian_log_prob(std::span<const double> u, std::span<const double> mean,
                         std::span<const double> log_std) {
  const double log_two_pi = std::log(kTwoPi);
  double total = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double z = (u[k] - mean[k]) * std::exp(-log_std[k]);
    total += -0.5 * z * z - log_std[k] - 0.5 * log_two_pi;
  }
  return total;
}

double gaussian_entropy(std::span<const double> log_std) {
  double total = 0.0;
  for (double s : log_std) total += 0.5 + 0.5 * std::log(kTwoPi) + s;
  return total;
}

std::string checkpoint_to_json(const PolicyParams& params, const std::string& config_json) {
  params.validate();
  json doc;
  doc["version"] = kCheckpointVersion;
  doc["layer_sizes"] = {{"policy", params.policy.layer_sizes()},
                        {"value", params.value.layer_sizes()}};
  doc["weights"] = {{"policy", layers_to_json(params.policy, true)},
                    {"value", layers_to_json(params.value, true)}};
  doc["biases"] = {{"policy", layers_to_json(params.policy, false)},
                   {"value", layers_to_json(params.value, false)}};
  doc["log_std"] = params.log_std;
  doc["obs_normalizer"] = {{"mean", params.normalizer.mean}, {"scale", params.normalizer.scale}};
  doc["config"] = json::parse(config_json);
  return doc.dump(1) + "\n";
}

PolicyParams checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ConfigError("checkpoint: version " + std::to_string(version) +
                        " is not supported (expected " + std::to_string(kCheckpointVersion) +
                        ")");
    }
    PolicyParams p;
    p.policy = Mlp(doc.at("layer_sizes").at("policy").get<std::vector<int>>());
    p.value = Mlp(doc.at("layer_sizes").at("value").get<std::vector<int>>());
    layers_from_json(p.policy, doc.at("weights").at("policy"), true, "policy weights");
    layers_from_json(p.value, doc.at("weights").at("value"), true, "value weights");
    layers_from_json(p.policy, doc.at("biases").at("policy"), false, "policy biases");
    layers_from_json(p.value, doc.at("biases").at("value"), false, "value biases");
    p.log_std = doc.at("log_std").get<std::array<double, kActionDim>>();
    p.normalizer.mean = doc.at("obs_normalizer").at("mean").get<std::array<double, kObsDim>>();
    p.normalizer.scale = doc.at("obs_normalizer").at("scale").get<std::array<double, kObsDim>>();
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void save_checkpoint(const PolicyParams& params, const std::string& path,
                     const std::string& config_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << checkpoint_to_json(params, config_json);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint not found: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return checkpoint_from_json(text.str());
}

}  // namespace legsim
