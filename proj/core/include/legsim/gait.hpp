#pragma once

#include <vector>

#include "legsim/units.hpp"

namespace legsim {

enum class Side { left, right };

/// Wave amplitudes and gait constants. The three amplitudes are what the
/// controllers modulate from cycle to cycle.
struct GaitParams {
  double theta_leg_amp = deg_to_rad(30.0);   // shoulder stepping amplitude
  double theta_body_amp = deg_to_rad(10.0);  // lateral (yaw) body wave
  double a_v = 0.0;                          // vertical (pitch) body wave
  double xi = 1.0;                           // spatial waves along the body
  double duty = 0.5;                         // stance fraction of a cycle
  int n_pairs = 8;
  double cycle_period = 3.0;  // seconds per full 2*pi body phase

  // Throws ConfigError when an invariant does not hold.
  void validate() const;
};

struct GaitPhase {
  double tau_b = 0.0;  // body phase
  double tau_c = 0.0;  // contact phase
};

/// Joint targets and ideal contact pattern at one body phase. Per-leg arrays
/// hold the N left legs followed by the N right legs.
struct JointFrameSample {
  double tau_b = 0.0;
  std::vector<double> shoulder_angles;
  std::vector<double> body_yaw_angles;
  std::vector<double> body_pitch_angles;
  std::vector<bool> ideal_contact;
  std::vector<double> swing_progress;  // 0 in stance, [0, 1) through swing
};

// Flat index of leg `i` (1-based) on `side` into the 2N per-leg arrays.
inline int leg_slot(int n_pairs, int i, Side side) {
  return side == Side::left ? i - 1 : n_pairs + i - 1;
}

// Phase of leg (i, side) after the traveling-wave and antiphase shifts.
double leg_phase(const GaitParams& p, double tau_c, int i, Side side);

// Piecewise sinusoidal stepping pattern. Positive angles point the leg
// forward; the maximum is reached at the swing-to-stance transition.
double leg_shoulder_angle(const GaitParams& p, double tau_c, int i, Side side);

double horizontal_body_angle(const GaitParams& p, double tau_b, int j);

// Twice the temporal and spatial frequency of the horizontal wave.
double vertical_body_angle(const GaitParams& p, double tau_b, int j);

// Body-leg coordination that keeps the stance legs retracting.
GaitPhase coordinate_phases(double tau_b, const GaitParams& p);

bool ideal_contact(const GaitParams& p, double tau_c, int i, Side side);

// Fraction of the swing phase already completed, 0 while in stance.
double swing_progress(const GaitParams& p, double tau_c, int i, Side side);

JointFrameSample sample_frame(const GaitParams& p, double tau_b);

// `k_substeps` frames at tau_b = tau0 + 2*pi*m/k for m = 0..k-1.
std::vector<JointFrameSample> sample_cycle(const GaitParams& p, int k_substeps,
                                           double tau0 = 0.0);

}  // namespace legsim
