#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "evstab/core.hpp"
#include "evstab/frame.hpp"
#include "evstab/imu.hpp"

namespace evstab {

// Per-event rotational warp. With rel the offset from the principal point and
// rho the focal length in pixels, each tilt axis contributes a translation
//   T = rel - rho * tan(atan(rel / rho) - rot)
// and the roll angle psi contributes an in-plane rotation about the principal
// point. The warped position is R(psi) * rel - T + c_o. Small-angle nonlinear
// in rel: off-center pixels move farther than central ones.

double incidence_angle(double rel, double rho);

// Errors: TangentDomain when atan(rel / rho) - rot is too close to +-pi/2.
double translation_component(double rel, double rot, double rho);

// Continuous warped coordinates; the x tilt term uses theta, the y tilt term
// uses phi (or psi under BetaAxes::Psi). Identity when rot is exactly zero.
// Errors: TangentDomain.
Eigen::Vector2d warp_event(const Event& ev, const RotationAngles& rot,
                           const CameraModel& cam,
                           BetaAxes beta_axes = BetaAxes::Phi);

// Amplify the displacement by gamma, round half away from zero, and drop the
// event if the rounded coordinates leave [0, width) x [0, height).
std::optional<Event> scale_and_round(const Event& orig,
                                     const Eigen::Vector2d& warped, double gamma,
                                     std::int32_t width, std::int32_t height);

struct CompensationResult {
  EventStream stream;  // kept events, sorted by timestamp (stable)
  std::vector<EventFrame> frames;  // one per group intersecting the event span
  std::vector<std::pair<std::uint64_t, std::uint64_t>> group_spans;
  std::int64_t dropped = 0;  // warped out of bounds or outside tangent validity
  GroupSet groups;
  std::vector<std::size_t> kept;  // input index of each surviving event

  struct Timings {
    double grouping_us = 0.0;
    double warping_us = 0.0;
    double accumulation_us = 0.0;
  } timings;
};

// Stabilize a stream against the reference pose chosen by cfg.warp_reference
// (default: the start of the IMU span). Events are owned by the group whose
// time window contains them; each intersecting group accumulates one frame.
// Invariant: stream event count + dropped = input event count.
// Errors: ImuDoesNotCoverEvents, EmptySequence, plus anything group_imu or
// validate_camera raises.
CompensationResult compensate_stream(const EventStream& stream,
                                     const ImuSequence& imu,
                                     const CameraModel& cam,
                                     const CompensationConfig& cfg);

}  // namespace evstab
