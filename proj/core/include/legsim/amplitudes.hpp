#pragma once

#include <array>

#include "legsim/gait.hpp"
#include "legsim/units.hpp"

namespace legsim {

/// What a controller sees at a cycle boundary: the amplitudes just applied
/// and the contact ratio they produced.
struct Observation {
  double a_v = 0.0;
  double theta_body_amp = 0.0;
  double theta_leg_amp = 0.0;
  double beta = 1.0;

  std::array<double, 4> as_array() const { return {a_v, theta_body_amp, theta_leg_amp, beta}; }
  void validate() const;
};

struct AmplitudeRange {
  double lo;
  double hi;
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

inline const AmplitudeRange kAvRange{0.0, deg_to_rad(35.0)};
inline const AmplitudeRange kBodyRange{0.0, deg_to_rad(25.0)};
inline const AmplitudeRange kLegRange{deg_to_rad(5.0), deg_to_rad(35.0)};
// Ranges in action order: a_v, theta_body_amp, theta_leg_amp.
inline const std::array<AmplitudeRange, 3> kActionRanges{kAvRange, kBodyRange, kLegRange};

/// Wave amplitudes for the next motion cycle.
struct AmplitudeCommand {
  double a_v = 0.0;
  double theta_body_amp = deg_to_rad(10.0);
  double theta_leg_amp = deg_to_rad(30.0);

  std::array<double, 3> as_array() const { return {a_v, theta_body_amp, theta_leg_amp}; }
  bool within_bounds() const;
  // Throws ConfigError when outside the amplitude ranges.
  void validate() const;
  GaitParams apply_to(GaitParams base) const;
  Observation observe(double beta) const { return {a_v, theta_body_amp, theta_leg_amp, beta}; }
};

// Bounded map of an unconstrained action onto the amplitude ranges:
// lo + (hi - lo) * sigmoid(u).
AmplitudeCommand squash(const std::array<double, 3>& u);

// Inverse of squash for commands strictly inside the ranges.
std::array<double, 3> unsquash(const AmplitudeCommand& cmd);

}  // namespace legsim
