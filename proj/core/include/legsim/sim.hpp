#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "legsim/gait.hpp"
#include "legsim/kinematics.hpp"
#include "legsim/terrain.hpp"

namespace legsim {

/// How the body comes to rest on the terrain. The defaults of this struct
/// give the rigid model: the lowest stance foot touches and none penetrates.
struct SupportModel {
  // The body rests on its `support_feet`-th highest stance foot...
  int support_feet = 1;
  // ...but no stance foot may sink more than this into the ground (m).
  double leg_compliance = 0.0;
  // Segment underside below the backbone (m); a segment resting on a block
  // holds the whole body up. Negative disables belly contact.
  double belly_clearance = -1.0;
};

/// Quasi-kinematic contact model constants. Weights are relative to a
/// propelling stance foot, which has weight 1.
struct SimOptions {
  int k_substeps = 64;
  double contact_eps = 0.005;  // m, foot-terrain clearance counted as contact
  double tikhonov = 1e-6;      // twist normal-equation regularization
  SupportModel support{3, 0.03, 0.02};
  double stub_weight = 3.0;  // swing foot caught on a block, held in place
  // Burial depth (m) at which a stub weighs twice stub_weight; the weight
  // grows with depth squared. 0 keeps it fixed.
  double stub_depth = 0.04;
  double body_drag = 3.0;    // passive resistance at the foot centroid
  bool record_contacts = true;

  void validate() const;
};

struct SimState {
  BodyPose pose;
  double tau_b = 0.0;
  long cycle_index = 0;
  std::uint64_t rng_stream = 0;
};

struct Twist {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
};

/// One no-slip constraint: a foot at `point` whose velocity relative to the
/// body is `command` (world axes) and should be cancelled by the body motion.
struct FootConstraint {
  Vec2 point;
  Vec2 command;
  double weight = 1.0;
};

struct ContactSample {
  std::vector<bool> actual;
  std::vector<bool> ideal;
};

struct CycleOutcome {
  double v_f = 0.0;  // m per cycle along the heading at cycle start
  double v_l = 0.0;  // m per cycle along the left normal of that heading
  double beta = 1.0;
  double dx = 0.0;
  double dy = 0.0;
  double yaw_change = 0.0;
  bool terminal = false;
  int substeps_completed = 0;
  std::vector<ContactSample> contact_log;
};

// Thrown by detect_contacts when a foot leaves the height field.
class OutOfBounds : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backbone height for the current frame under `support`. With the default
// rigid model the lowest ideal-stance foot touches the terrain exactly.
double settle_body(const SimState& state, const RobotConfig& cfg, const HeightField& terrain,
                   const JointFrameSample& frame, const SupportModel& support = {});

// Lowers each segment by up to its reach (ElevationModel::conform) until one
// of its stance feet or its underside meets the ground.
void conform_segments(const RobotConfig& cfg, const HeightField& terrain,
                      const JointFrameSample& frame, std::vector<SegmentFrame>& segments,
                      std::vector<Vec3>& feet, double belly_clearance);

std::vector<bool> detect_contacts(std::span<const Vec3> feet, const HeightField& terrain,
                                  double eps = 0.005);

// Least-squares planar twist about `pose` that cancels the commanded foot
// velocities. `commanded_vels` are in the body frame of `pose`.
Twist solve_twist(std::span<const Vec2> stance_feet, std::span<const Vec2> commanded_vels,
                  const BodyPose& pose, double tikhonov = 1e-6);

Twist solve_twist(std::span<const FootConstraint> constraints, const BodyPose& pose,
                  double tikhonov = 1e-6);

// Sum of weighted squared slip velocities left by `twist`.
double twist_residual(std::span<const FootConstraint> constraints, const BodyPose& pose,
                      const Twist& twist);

CycleOutcome run_cycle(SimState& state, const RobotConfig& cfg, const GaitParams& gait,
                       const HeightField& terrain, const SimOptions& options = {});

// Start pose centred across the field, `margin_x` metres from its -x edge,
// facing +x.
SimState start_state(const HeightField& terrain, const RobotConfig& cfg,
                     double margin_x = 0.3);

struct Correlation {
  double r = 0.0;
  bool degenerate = false;  // one of the series has zero variance
  std::size_t samples = 0;
};

Correlation pearson(std::span<const double> xs, std::span<const double> ys);

// Pearson correlation of per-cycle v_f against beta over one cycle on each
// (sigma, seed) training terrain.
Correlation measure_speed_beta_correlation(const RobotConfig& cfg, const GaitParams& gait,
                                           std::span<const double> sigmas_cm,
                                           std::span<const std::uint64_t> seeds,
                                           const SimOptions& options = {});

}  // namespace legsim
