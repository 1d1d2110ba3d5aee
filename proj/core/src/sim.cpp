#include "legsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "legsim/errors.hpp"

namespace legsim {
namespace {

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace

void SimOptions::validate() const {
  if (k_substeps < 8) throw ConfigError("SimOptions: k_substeps must be at least 8");
  if (!(contact_eps >= 0.0)) throw ConfigError("SimOptions: contact_eps must be nonnegative");
  if (!(tikhonov > 0.0)) throw ConfigError("SimOptions: tikhonov must be positive");
  if (support.support_feet < 1) throw ConfigError("SimOptions: support_feet must be at least 1");
  if (!(support.leg_compliance >= 0.0)) {
    throw ConfigError("SimOptions: leg_compliance must be nonnegative");
  }
  if (!(stub_depth >= 0.0)) throw ConfigError("SimOptions: stub_depth must be nonnegative");
  if (!(stub_weight >= 0.0) || !(body_drag >= 0.0)) {
    throw ConfigError("SimOptions: constraint weights must be nonnegative");
  }
}

double settle_body(const SimState& state, const RobotConfig& cfg, const HeightField& terrain,
                   const JointFrameSample& frame, const SupportModel& support) {
  BodyPose pose = state.pose;
  pose.z = 0.0;
  const auto segments =
      backbone_frames(cfg, pose, frame.body_yaw_angles, frame.body_pitch_angles);
  std::vector<bool> in_swing(frame.ideal_contact.size());
  for (std::size_t s = 0; s < in_swing.size(); ++s) in_swing[s] = !frame.ideal_contact[s];
  const auto feet =
      foot_positions(cfg, segments, frame.shoulder_angles, in_swing, frame.swing_progress);
  std::vector<double> touch;
  for (std::size_t s = 0; s < feet.size(); ++s) {
    if (!frame.ideal_contact[s]) continue;
    touch.push_back(height_at(terrain, feet[s].x, feet[s].y) - feet[s].z);
  }
  if (touch.empty()) {
    throw DegenerateSupportError("no ideal-stance foot at tau_b = " +
                                 std::to_string(frame.tau_b));
  }
  std::sort(touch.begin(), touch.end(), std::greater<>());
  const auto rank = std::min(static_cast<std::size_t>(std::max(support.support_feet, 1)),
                             touch.size());
  double z = std::max(touch[rank - 1], touch[0] - support.leg_compliance);
  if (support.belly_clearance >= 0.0) {
    for (const SegmentFrame& f : segments) {
      if (!terrain.contains(f.x, f.y)) continue;
      z = std::max(z, height_at(terrain, f.x, f.y) + support.belly_clearance - f.z);
    }
  }
  return z;
}

std::vector<bool> detect_contacts(std::span<const Vec3> feet, const HeightField& terrain,
                                  double eps) {
  std::vector<bool> contact(feet.size());
  for (std::size_t s = 0; s < feet.size(); ++s) {
    if (!terrain.contains(feet[s].x, feet[s].y)) {
      std::ostringstream msg;
      msg << "foot " << s << " left the terrain at (" << feet[s].x << ", " << feet[s].y << ")";
      throw OutOfBounds(msg.str());
    }
    contact[s] = feet[s].z - height_at(terrain, feet[s].x, feet[s].y) <= eps;
  }
  return contact;
}

Twist solve_twist(std::span<const FootConstraint> constraints, const BodyPose& pose,
                  double tikhonov) {
  if (constraints.empty()) return {};
  Eigen::Matrix3d normal = Eigen::Matrix3d::Identity() * tikhonov;
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (const auto& c : constraints) {
    const double rx = c.point.x - pose.x;
    const double ry = c.point.y - pose.y;
    // Rows of the slip Jacobian d(v_foot)/d(vx, vy, omega).
    const Eigen::Vector3d row_x(1.0, 0.0, -ry);
    const Eigen::Vector3d row_y(0.0, 1.0, rx);
    normal += c.weight * (row_x * row_x.transpose() + row_y * row_y.transpose());
    rhs -= c.weight * (row_x * c.command.x + row_y * c.command.y);
  }
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("solve_twist: singular normal matrix");
  }
  const Eigen::Vector3d sol = ldlt.solve(rhs);
  if (!sol.allFinite()) throw NumericalError("solve_twist: non-finite twist");
  return {sol[0], sol[1], sol[2]};
}

Twist solve_twist(std::span<const Vec2> stance_feet, std::span<const Vec2> commanded_vels,
                  const BodyPose& pose, double tikhonov) {
  if (stance_feet.size() != commanded_vels.size()) {
    throw ConfigError("solve_twist: feet and commands differ in length");
  }
  std::vector<FootConstraint> constraints(stance_feet.size());
  for (std::size_t k = 0; k < stance_feet.size(); ++k) {
    constraints[k] = {stance_feet[k], rotate(commanded_vels[k], pose.yaw), 1.0};
  }
  return solve_twist(constraints, pose, tikhonov);
}

double twist_residual(std::span<const FootConstraint> constraints, const BodyPose& pose,
                      const Twist& t) {
  double total = 0.0;
  for (const auto& c : constraints) {
    const double rx = c.point.x - pose.x;
    const double ry = c.point.y - pose.y;
    const double sx = t.vx - t.omega * ry + c.command.x;
    const double sy = t.vy + t.omega * rx + c.command.y;
    total += c.weight * (sx * sx + sy * sy);
  }
  return total;
}

void conform_segments(const RobotConfig& cfg, const HeightField& terrain,
                      const JointFrameSample& frame, std::vector<SegmentFrame>& segments,
                      std::vector<Vec3>& feet, double belly_clearance) {
  const auto reach = segment_reach(cfg, frame.body_pitch_angles);
  const std::size_t n = segments.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (reach[k] <= 0.0) continue;
    double drop = reach[k];
    for (std::size_t slot : {k, n + k}) {
      if (!frame.ideal_contact[slot]) continue;
      drop = std::min(drop, feet[slot].z - height_at(terrain, feet[slot].x, feet[slot].y));
    }
    if (belly_clearance >= 0.0 && terrain.contains(segments[k].x, segments[k].y)) {
      drop = std::min(drop, segments[k].z - belly_clearance -
                                height_at(terrain, segments[k].x, segments[k].y));
    }
    if (drop <= 0.0) continue;
    segments[k].z -= drop;
    feet[k].z -= drop;
    feet[n + k].z -= drop;
  }
}

CycleOutcome run_cycle(SimState& state, const RobotConfig& cfg, const GaitParams& gait,
                       const HeightField& terrain, const SimOptions& options) {
  options.validate();
  gait.validate();
  cfg.validate();
  if (cfg.n_pairs != gait.n_pairs) {
    throw ConfigError("run_cycle: robot and gait disagree on the number of leg pairs");
  }
  const int k = options.k_substeps;
  const double dtau = kTwoPi / k;
  const double dt = gait.cycle_period / k;
  const std::size_t legs = 2 * static_cast<std::size_t>(gait.n_pairs);

  CycleOutcome out;
  const BodyPose start = state.pose;
  long matches = 0;
  std::vector<FootConstraint> constraints;
  constraints.reserve(legs + 1);
  std::vector<bool> in_swing(legs);

  for (int m = 0; m < k; ++m) {
    const JointFrameSample frame = sample_frame(gait, state.tau_b);
    for (std::size_t s = 0; s < legs; ++s) in_swing[s] = !frame.ideal_contact[s];
    std::vector<SegmentFrame> segments;
    std::vector<Vec3> feet;
    std::vector<bool> contact;
    try {
      state.pose.z = settle_body(state, cfg, terrain, frame, options.support);
      segments =
          backbone_frames(cfg, state.pose, frame.body_yaw_angles, frame.body_pitch_angles);
      feet = foot_positions(cfg, segments, frame.shoulder_angles, in_swing,
                            frame.swing_progress);
      conform_segments(cfg, terrain, frame, segments, feet, options.support.belly_clearance);
      contact = detect_contacts(feet, terrain, options.contact_eps);
    } catch (const RangeError&) {
      out.terminal = true;
      break;
    } catch (const OutOfBounds&) {
      out.terminal = true;
      break;
    }

    const auto vel = body_frame_foot_velocities(cfg, gait, state.tau_b);
    constraints.clear();
    bool propelled = false;
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t s = 0; s < legs; ++s) {
      if (contact[s] == frame.ideal_contact[s]) ++matches;
      cx += feet[s].x;
      cy += feet[s].y;
      if (!contact[s]) continue;
      if (frame.ideal_contact[s]) {
        constraints.push_back({{feet[s].x, feet[s].y}, rotate(vel[s], state.pose.yaw), 1.0});
        propelled = true;
      } else if (options.stub_weight > 0.0) {
        // A swing foot buried deep against a block is held harder than a graze.
        double w = options.stub_weight;
        if (options.stub_depth > 0.0) {
          const double depth = height_at(terrain, feet[s].x, feet[s].y) - feet[s].z;
          const double r = std::max(depth, 0.0) / options.stub_depth;
          w *= 1.0 + r * r;
        }
        constraints.push_back({{feet[s].x, feet[s].y}, {0.0, 0.0}, w});
      }
    }
    Twist twist;
    if (propelled) {
      if (options.body_drag > 0.0) {
        const double inv = 1.0 / static_cast<double>(legs);
        constraints.push_back({{cx * inv, cy * inv}, {0.0, 0.0}, options.body_drag});
      }
      twist = solve_twist(constraints, state.pose, options.tikhonov);
    }
    if (options.record_contacts) out.contact_log.push_back({contact, frame.ideal_contact});

    state.pose.x += twist.vx * dt;
    state.pose.y += twist.vy * dt;
    state.pose.yaw = wrap_pi(state.pose.yaw + twist.omega * dt);
    out.yaw_change += twist.omega * dt;
    state.tau_b += dtau;
    ++out.substeps_completed;
  }

  out.dx = state.pose.x - start.x;
  out.dy = state.pose.y - start.y;
  const double ch = std::cos(start.yaw);
  const double sh = std::sin(start.yaw);
  out.v_f = out.dx * ch + out.dy * sh;
  out.v_l = -out.dx * sh + out.dy * ch;
  out.beta = out.substeps_completed > 0
                 ? static_cast<double>(matches) /
                       (static_cast<double>(legs) * out.substeps_completed)
                 : 0.0;
  ++state.cycle_index;
  return out;
}

SimState start_state(const HeightField& terrain, const RobotConfig& cfg, double margin_x) {
  SimState s;
  const double body = cfg.link_length * (cfg.n_pairs - 1) + cfg.leg_length;
  s.pose.x = terrain.origin_x + margin_x + body;
  s.pose.y = terrain.origin_y + 0.5 * terrain.extent_y();
  s.pose.yaw = 0.0;
  return s;
}

Correlation pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw StatisticsError("pearson: series differ in length");
  if (xs.size() < 2) throw StatisticsError("pearson: need at least 2 samples");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - mx;
    const double dy = ys[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  Correlation c;
  c.samples = xs.size();
  constexpr double kTiny = 1e-300;
  if (sxx <= kTiny || syy <= kTiny) {
    c.degenerate = true;
    return c;
  }
  c.r = sxy / std::sqrt(sxx * syy);
  return c;
}

Correlation measure_speed_beta_correlation(const RobotConfig& cfg, const GaitParams& gait,
                                           std::span<const double> sigmas_cm,
                                           std::span<const std::uint64_t> seeds,
                                           const SimOptions& options) {
  std::vector<double> speeds;
  std::vector<double> betas;
  SimOptions quiet = options;
  quiet.record_contacts = false;
  for (double sigma : sigmas_cm) {
    for (std::uint64_t seed : seeds) {
      const HeightField terrain = generate_rl_terrain(sigma, 10.0, 3.0, seed);
      SimState state = start_state(terrain, cfg);
      const CycleOutcome o = run_cycle(state, cfg, gait, terrain, quiet);
      speeds.push_back(o.v_f);
      betas.push_back(o.beta);
    }
  }
  return pearson(speeds, betas);
}

}  // namespace legsim
