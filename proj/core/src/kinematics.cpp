#include "legsim/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "legsim/errors.hpp"

namespace legsim {

void RobotConfig::validate() const {
  if (n_pairs < 2) throw ConfigError("RobotConfig: need at least 2 leg pairs");
  if (!(link_length > 0.0) || !(hip_half_width > 0.0) || !(leg_length > 0.0) ||
      !(swing_lift > 0.0) || !(standing_height > 0.0)) {
    throw ConfigError("RobotConfig: all lengths must be positive");
  }
  if (!(swing_floor >= 0.0 && swing_floor <= 1.0)) {
    throw ConfigError("RobotConfig: swing_floor must lie in [0, 1]");
  }
  if (!std::isfinite(heave)) throw ConfigError("RobotConfig: heave must be finite");
}

std::vector<SegmentFrame> backbone_frames(const RobotConfig& cfg, const BodyPose& pose,
                                          std::span<const double> yaw_joints,
                                          std::span<const double> pitch_joints) {
  const auto joints = static_cast<std::size_t>(cfg.n_pairs - 1);
  if (yaw_joints.size() != joints || pitch_joints.size() != joints) {
    throw ConfigError("backbone_frames: expected " + std::to_string(joints) +
                      " yaw and pitch joint angles");
  }
  std::vector<SegmentFrame> frames(static_cast<std::size_t>(cfg.n_pairs));
  frames[0] = {pose.x, pose.y, pose.yaw, pose.z, 0.0};
  for (std::size_t k = 0; k < joints; ++k) {
    const SegmentFrame& prev = frames[k];
    SegmentFrame& next = frames[k + 1];
    next.heading = prev.heading + yaw_joints[k];
    next.pitch = prev.pitch + pitch_joints[k];
    const double planar = cfg.link_length * std::cos(next.pitch);
    next.x = prev.x - planar * std::cos(prev.heading);
    next.y = prev.y - planar * std::sin(prev.heading);
    next.z = prev.z - cfg.link_length * std::sin(next.pitch);
  }
  if (cfg.elevation == ElevationModel::conform) {
    for (auto& f : frames) f.z = pose.z;
  } else if (cfg.elevation == ElevationModel::local) {
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const double joint = pitch_joints[std::min(k, joints - 1)];
      frames[k].z = pose.z + cfg.heave * cfg.link_length * std::sin(joint);
    }
  }
  return frames;
}

std::vector<double> segment_reach(const RobotConfig& cfg, std::span<const double> pitch_joints) {
  const auto n = static_cast<std::size_t>(cfg.n_pairs);
  std::vector<double> reach(n, 0.0);
  if (cfg.elevation != ElevationModel::conform || pitch_joints.empty()) return reach;
  for (std::size_t k = 0; k < n; ++k) {
    const double joint = pitch_joints[std::min(k, pitch_joints.size() - 1)];
    reach[k] = std::max(0.0, -cfg.heave * cfg.link_length * std::sin(joint));
  }
  return reach;
}

Vec3 hip_point(const RobotConfig& cfg, const SegmentFrame& frame, Side side) {
  const double sign = side == Side::left ? 1.0 : -1.0;
  return {frame.x - sign * cfg.hip_half_width * std::sin(frame.heading),
          frame.y + sign * cfg.hip_half_width * std::cos(frame.heading), frame.z};
}

double swing_height(const RobotConfig& cfg, double progress) {
  return cfg.swing_lift *
         (cfg.swing_floor + (1.0 - cfg.swing_floor) * std::sin(kPi * progress));
}

std::vector<Vec3> foot_positions(const RobotConfig& cfg, std::span<const SegmentFrame> frames,
                                 std::span<const double> shoulders,
                                 const std::vector<bool>& in_swing,
                                 std::span<const double> swing_progress) {
  const auto n = static_cast<std::size_t>(cfg.n_pairs);
  if (frames.size() != n || shoulders.size() != 2 * n || in_swing.size() != 2 * n ||
      (!swing_progress.empty() && swing_progress.size() != 2 * n)) {
    throw ConfigError("foot_positions: expected " + std::to_string(n) + " frames and " +
                      std::to_string(2 * n) + " legs");
  }
  std::vector<Vec3> feet(2 * n);
  for (Side side : {Side::left, Side::right}) {
    const double sign = side == Side::left ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t slot = side == Side::left ? k : n + k;
      const SegmentFrame& f = frames[k];
      const Vec3 hip = hip_point(cfg, f, side);
      const double fwd = cfg.leg_length * std::sin(shoulders[slot]);
      const double lat = sign * cfg.leg_length * std::cos(shoulders[slot]);
      const double ch = std::cos(f.heading);
      const double sh = std::sin(f.heading);
      feet[slot].x = hip.x + fwd * ch - lat * sh;
      feet[slot].y = hip.y + fwd * sh + lat * ch;
      double lift = 0.0;
      if (in_swing[slot]) {
        lift = swing_progress.empty() ? cfg.swing_lift : swing_height(cfg, swing_progress[slot]);
      }
      feet[slot].z = hip.z - cfg.standing_height + lift;
    }
  }
  return feet;
}

std::vector<Vec3> frame_feet(const RobotConfig& cfg, const BodyPose& pose,
                             const JointFrameSample& frame) {
  const auto frames =
      backbone_frames(cfg, pose, frame.body_yaw_angles, frame.body_pitch_angles);
  std::vector<bool> in_swing(frame.ideal_contact.size());
  for (std::size_t s = 0; s < in_swing.size(); ++s) in_swing[s] = !frame.ideal_contact[s];
  return foot_positions(cfg, frames, frame.shoulder_angles, in_swing, frame.swing_progress);
}

std::vector<Vec2> body_frame_foot_velocities(const RobotConfig& cfg, const GaitParams& p,
                                             double tau_b) {
  constexpr double kPhaseStep = 1e-5;
  const BodyPose origin{};
  const auto ahead = frame_feet(cfg, origin, sample_frame(p, tau_b + kPhaseStep));
  const auto behind = frame_feet(cfg, origin, sample_frame(p, tau_b - kPhaseStep));
  const double phase_rate = kTwoPi / p.cycle_period;
  const double scale = phase_rate / (2.0 * kPhaseStep);
  std::vector<Vec2> vel(ahead.size());
  for (std::size_t s = 0; s < vel.size(); ++s) {
    vel[s] = {(ahead[s].x - behind[s].x) * scale, (ahead[s].y - behind[s].y) * scale};
  }
  return vel;
}

Vec2 commanded_foot_velocity(const RobotConfig& cfg, const GaitParams& p, double tau_b,
                             int i, Side side) {
  const GaitPhase phase = coordinate_phases(tau_b, p);
  if (!ideal_contact(p, phase.tau_c, i, side)) {
    throw ContractError("commanded_foot_velocity: leg " + std::to_string(i) +
                        (side == Side::left ? " left" : " right") + " is swinging");
  }
  return body_frame_foot_velocities(cfg, p, tau_b)[leg_slot(p.n_pairs, i, side)];
}

}  // namespace legsim
