#include "legsim/controllers.hpp"

#include <algorithm>
#include <cmath>

#include "legsim/errors.hpp"
#include "legsim/rng.hpp"

namespace legsim {

namespace {

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

void Observation::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("Observation: beta outside [0, 1]");
  if (!std::isfinite(a_v) || !std::isfinite(theta_body_amp) || !std::isfinite(theta_leg_amp)) {
    throw ConfigError("Observation: non-finite amplitude");
  }
}

bool AmplitudeCommand::within_bounds() const {
  return kAvRange.contains(a_v) && kBodyRange.contains(theta_body_amp) &&
         kLegRange.contains(theta_leg_amp);
}

void AmplitudeCommand::validate() const {
  if (!within_bounds()) {
    throw ConfigError("AmplitudeCommand outside bounds: a_v in [0, 35] deg, body in [0, 25] deg, "
                      "leg in [5, 35] deg");
  }
}

GaitParams AmplitudeCommand::apply_to(GaitParams base) const {
  base.a_v = a_v;
  base.theta_body_amp = theta_body_amp;
  base.theta_leg_amp = theta_leg_amp;
  return base;
}

AmplitudeCommand squash(const std::array<double, 3>& u) {
  std::array<double, 3> a{};
  for (std::size_t k = 0; k < 3; ++k) {
    const AmplitudeRange& r = kActionRanges[k];
    a[k] = r.lo + (r.hi - r.lo) * sigmoid(u[k]);
  }
  return {a[0], a[1], a[2]};
}

std::array<double, 3> unsquash(const AmplitudeCommand& cmd) {
  const auto a = cmd.as_array();
  std::array<double, 3> u{};
  for (std::size_t k = 0; k < 3; ++k) {
    const AmplitudeRange& r = kActionRanges[k];
    const double s = (a[k] - r.lo) / (r.hi - r.lo);
    if (!(s > 0.0 && s < 1.0)) throw RangeError("unsquash: command on or beyond a range edge");
    u[k] = std::log(s / (1.0 - s));
  }
  return u;
}

void LinearGain::validate() const {
  if (!(beta_0 > 0.0 && beta_0 <= 1.0)) throw ConfigError("LinearGain: beta_0 must lie in (0, 1]");
  if (!std::isfinite(k_p)) throw ConfigError("LinearGain: k_p must be finite");
  if (!(a_v_bounds.lo <= a_v_bounds.hi) || !kAvRange.contains(a_v_bounds.lo) ||
      !kAvRange.contains(a_v_bounds.hi)) {
    throw ConfigError("LinearGain: a_v bounds must be an interval inside [0, 35] deg");
  }
}

AmplitudeCommand open_loop_next(const AmplitudeCommand& fixed, const Observation&) {
  return fixed;
}

AmplitudeCommand linear_next(const LinearGain& g, const Observation& obs,
                             const AmplitudeCommand& hold) {
  AmplitudeCommand cmd = hold;
  cmd.a_v = std::clamp(g.k_p * (obs.beta - g.beta_0), g.a_v_bounds.lo, g.a_v_bounds.hi);
  return cmd;
}

AmplitudeCommand policy_next(const PolicyParams& params, const Observation& obs,
                             bool deterministic, Rng* rng) {
  auto u = policy_mean(params, obs);
  if (!deterministic) {
    if (rng == nullptr) throw ContractError("policy_next: stochastic mode needs an Rng");
    for (std::size_t k = 0; k < u.size(); ++k) u[k] += std::exp(params.log_std[k]) * rng->normal();
  }
  return squash(u);
}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::open_loop:
      return "open_loop";
    case ControllerKind::linear:
      return "linear";
    case ControllerKind::policy:
      return "policy";
  }
  return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& name) {
  if (name == "open_loop") return ControllerKind::open_loop;
  if (name == "linear") return ControllerKind::linear;
  if (name == "policy") return ControllerKind::policy;
  throw ConfigError("unknown controller '" + name + "' (expected open_loop, linear or policy)");
}

Controller Controller::open_loop(const AmplitudeCommand& fixed) {
  fixed.validate();
  Controller c;
  c.kind_ = ControllerKind::open_loop;
  c.base_ = fixed;
  return c;
}

Controller Controller::linear(const LinearGain& gain, const AmplitudeCommand& hold) {
  gain.validate();
  hold.validate();
  Controller c;
  c.kind_ = ControllerKind::linear;
  c.gain_ = gain;
  c.base_ = hold;
  return c;
}

Controller Controller::policy(std::shared_ptr<const PolicyParams> params) {
  if (!params) throw ConfigError("Controller: missing policy parameters");
  params->validate();
  Controller c;
  c.kind_ = ControllerKind::policy;
  c.params_ = std::move(params);
  return c;
}

AmplitudeCommand Controller::next(const Observation& obs) const {
  switch (kind_) {
    case ControllerKind::open_loop:
      return open_loop_next(base_, obs);
    case ControllerKind::linear:
      return linear_next(gain_, obs, base_);
    case ControllerKind::policy:
      return policy_next(*params_, obs, true);
  }
  return base_;
}

}  // namespace legsim
