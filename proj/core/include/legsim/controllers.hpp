#pragma once

#include <memory>
#include <string>

#include "legsim/amplitudes.hpp"
#include "legsim/policy.hpp"

namespace legsim {

class Rng;

/// Proportional contact-ratio feedback on the vertical wave amplitude.
struct LinearGain {
  double k_p = deg_to_rad(-50.0);  // rad per unit beta
  double beta_0 = 0.9;
  AmplitudeRange a_v_bounds = kAvRange;

  void validate() const;
};

// Returns `fixed` whatever the observation.
AmplitudeCommand open_loop_next(const AmplitudeCommand& fixed, const Observation& obs);

// a_v = clamp(k_p * (beta - beta_0)); the leg and body amplitudes stay at
// `hold`.
AmplitudeCommand linear_next(const LinearGain& g, const Observation& obs,
                             const AmplitudeCommand& hold = {});

// Gaussian policy head squashed onto the amplitude ranges. Deterministic
// mode uses the mean; otherwise a sample is drawn from `rng`.
AmplitudeCommand policy_next(const PolicyParams& params, const Observation& obs,
                             bool deterministic, Rng* rng = nullptr);

enum class ControllerKind { open_loop, linear, policy };

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& name);

/// One of the three interchangeable controllers, immutable once built.
class Controller {
 public:
  static Controller open_loop(const AmplitudeCommand& fixed);
  static Controller linear(const LinearGain& gain, const AmplitudeCommand& hold);
  static Controller policy(std::shared_ptr<const PolicyParams> params);

  ControllerKind kind() const { return kind_; }
  // Command for the next cycle. Policies act deterministically.
  AmplitudeCommand next(const Observation& obs) const;
  // Amplitudes applied before the first observation exists.
  AmplitudeCommand initial() const { return base_; }

 private:
  ControllerKind kind_ = ControllerKind::open_loop;
  AmplitudeCommand base_;
  LinearGain gain_;
  std::shared_ptr<const PolicyParams> params_;
};

}  // namespace legsim
