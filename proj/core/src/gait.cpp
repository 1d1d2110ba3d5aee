#include "legsim/gait.hpp"

#include <cmath>
#include <string>

#include "legsim/errors.hpp"

namespace legsim {

namespace {

void check_leg_index(const GaitParams& p, int i) {
  if (i < 1 || i > p.n_pairs) {
    throw IndexError("leg index " + std::to_string(i) + " outside [1, " +
                     std::to_string(p.n_pairs) + "]");
  }
}

void check_joint_index(const GaitParams& p, int j) {
  if (j < 1 || j > p.n_pairs - 1) {
    throw IndexError("body joint index " + std::to_string(j) + " outside [1, " +
                     std::to_string(p.n_pairs - 1) + "]");
  }
}

// Reference stepping curve of leg 1 (left) as a function of its own phase.
double stepping_curve(double amplitude, double duty, double tau) {
  const double phase = wrap_two_pi(tau);
  const double seam = kTwoPi * duty;
  if (phase < seam) return amplitude * std::cos(phase / (2.0 * duty));
  return -amplitude * std::cos((phase - seam) / (2.0 * (1.0 - duty)));
}

}  // namespace

void GaitParams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("GaitParams: " + what); };
  if (!(theta_leg_amp >= 0.0) || !(theta_body_amp >= 0.0) || !(a_v >= 0.0)) {
    fail("wave amplitudes must be nonnegative");
  }
  if (!(duty > 0.0 && duty < 1.0)) fail("duty factor must lie in (0, 1)");
  if (n_pairs < 2) fail("need at least 2 leg pairs");
  if (!(cycle_period > 0.0)) fail("cycle_period must be positive");
  if (!(xi > 0.0)) fail("xi must be positive");
}

double leg_phase(const GaitParams& p, double tau_c, int i, Side side) {
  check_leg_index(p, i);
  double phase = tau_c - kTwoPi * (p.xi / p.n_pairs) * (i - 1);
  if (side == Side::right) phase += kPi;
  return phase;
}

double leg_shoulder_angle(const GaitParams& p, double tau_c, int i, Side side) {
  return stepping_curve(p.theta_leg_amp, p.duty, leg_phase(p, tau_c, i, side));
}

double horizontal_body_angle(const GaitParams& p, double tau_b, int j) {
  check_joint_index(p, j);
  return p.theta_body_amp * std::cos(tau_b - kTwoPi * (p.xi / p.n_pairs) * (j - 1));
}

double vertical_body_angle(const GaitParams& p, double tau_b, int j) {
  check_joint_index(p, j);
  return p.a_v * std::cos(2.0 * tau_b - 4.0 * kPi * (p.xi / p.n_pairs) * (j - 1));
}

GaitPhase coordinate_phases(double tau_b, const GaitParams& p) {
  return {tau_b, tau_b - (p.xi / p.n_pairs + 0.5) * kPi};
}

bool ideal_contact(const GaitParams& p, double tau_c, int i, Side side) {
  return wrap_two_pi(leg_phase(p, tau_c, i, side)) < kTwoPi * p.duty;
}

double swing_progress(const GaitParams& p, double tau_c, int i, Side side) {
  const double phase = wrap_two_pi(leg_phase(p, tau_c, i, side));
  const double seam = kTwoPi * p.duty;
  if (phase < seam) return 0.0;
  return (phase - seam) / (kTwoPi * (1.0 - p.duty));
}

JointFrameSample sample_frame(const GaitParams& p, double tau_b) {
  const int n = p.n_pairs;
  const GaitPhase phase = coordinate_phases(tau_b, p);
  JointFrameSample frame;
  frame.tau_b = tau_b;
  frame.shoulder_angles.resize(2 * n);
  frame.ideal_contact.resize(2 * n);
  frame.swing_progress.resize(2 * n);
  for (Side side : {Side::left, Side::right}) {
    for (int i = 1; i <= n; ++i) {
      const int slot = leg_slot(n, i, side);
      frame.shoulder_angles[slot] = leg_shoulder_angle(p, phase.tau_c, i, side);
      frame.ideal_contact[slot] = ideal_contact(p, phase.tau_c, i, side);
      frame.swing_progress[slot] = swing_progress(p, phase.tau_c, i, side);
    }
  }
  frame.body_yaw_angles.resize(n - 1);
  frame.body_pitch_angles.resize(n - 1);
  for (int j = 1; j < n; ++j) {
    frame.body_yaw_angles[j - 1] = horizontal_body_angle(p, tau_b, j);
    frame.body_pitch_angles[j - 1] = vertical_body_angle(p, tau_b, j);
  }
  return frame;
}

std::vector<JointFrameSample> sample_cycle(const GaitParams& p, int k_substeps,
                                           double tau0) {
  if (k_substeps < 8) {
    throw ConfigError("sample_cycle needs at least 8 substeps, got " +
                      std::to_string(k_substeps));
  }
  p.validate();
  std::vector<JointFrameSample> frames;
  frames.reserve(k_substeps);
  for (int m = 0; m < k_substeps; ++m) {
    frames.push_back(sample_frame(p, tau0 + kTwoPi * m / k_substeps));
  }
  return frames;
}

}  // namespace legsim
