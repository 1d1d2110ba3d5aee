#pragma once

#include <span>
#include <vector>

#include "legsim/gait.hpp"

namespace legsim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// How the pitch joints raise and lower the segments.
enum class ElevationModel {
  chain,  // rigid chain: z follows the cumulative pitch from the head
  local,  // each segment heaves with its own joint: z = heave * L * sin(pitch)
  conform,  // level backbone; see segment_reach
};

/// Robot dimensions in metres. Defaults give a body about 0.8 m long so that
/// individual feet land on different 10 cm terrain blocks.
struct RobotConfig {
  int n_pairs = 8;
  double link_length = 0.10;
  double hip_half_width = 0.06;
  double leg_length = 0.08;
  double swing_lift = 0.02;
  double standing_height = 0.05;
  // Share of swing_lift held at lift-off and touch-down; 1 gives a binary lift.
  double swing_floor = 0.3;
  ElevationModel elevation = ElevationModel::conform;
  double heave = -2.0;  // local and conform models

  void validate() const;
};

struct BodyPose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;    // backbone reference height of the head segment
  double yaw = 0.0;  // wrapped to (-pi, pi]
};

struct SegmentFrame {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double z = 0.0;
  double pitch = 0.0;  // inclination of the segment, positive nose down
};

// Head segment at `pose`; every following segment sits one link behind its
// predecessor, turned by the yaw joint between them and inclined by the
// cumulative pitch of the joints in front of it. Segment heights follow
// cfg.elevation.
std::vector<SegmentFrame> backbone_frames(const RobotConfig& cfg, const BodyPose& pose,
                                          std::span<const double> yaw_joints,
                                          std::span<const double> pitch_joints);

// Downward reach of every segment under ElevationModel::conform:
// max(0, -heave * L * sin(pitch)) using the segment's own joint (the last
// segment shares the last joint). Zero for the other models.
std::vector<double> segment_reach(const RobotConfig& cfg, std::span<const double> pitch_joints);

Vec3 hip_point(const RobotConfig& cfg, const SegmentFrame& frame, Side side);

// Height of a swinging foot above its stance height at `progress` through
// the swing.
double swing_height(const RobotConfig& cfg, double progress);

// World foot positions, left legs 1..N then right legs 1..N. Without
// `swing_progress` a swinging foot is raised by the full swing_lift.
std::vector<Vec3> foot_positions(const RobotConfig& cfg, std::span<const SegmentFrame> frames,
                                 std::span<const double> shoulders,
                                 const std::vector<bool>& in_swing,
                                 std::span<const double> swing_progress = {});

// Feet of a complete gait frame placed at `pose`.
std::vector<Vec3> frame_feet(const RobotConfig& cfg, const BodyPose& pose,
                             const JointFrameSample& frame);

// Planar velocity of every foot relative to the head frame at body phase
// tau_b, by central difference over phase (m/s).
std::vector<Vec2> body_frame_foot_velocities(const RobotConfig& cfg, const GaitParams& p,
                                             double tau_b);

// Velocity of one stance foot relative to the body. Throws ContractError
// when the leg is swinging at tau_b.
Vec2 commanded_foot_velocity(const RobotConfig& cfg, const GaitParams& p, double tau_b,
                             int i, Side side);

}  // namespace legsim
