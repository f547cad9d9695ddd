#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "evstab/core.hpp"

namespace evstab {

// Rotate gyro and accelerometer readings into the camera frame.
// Errors: NonOrthonormalRotation.
ImuSequence to_camera_frame(const ImuSequence& seq, const Eigen::Matrix3d& r_ci);

// Trapezoidal integral of the linearly interpolated angular velocity over
// [t0, t1], per axis. Requires t0 <= t1 and both inside the sampled span;
// errors: SpanOutsideSequence, EmptySequence.
RotationAngles integrate_rotation(const ImuSequence& seq, std::uint64_t t0,
                                  std::uint64_t t1);

enum class GroupKind { Stable, Active };

const char* to_string(GroupKind kind);

struct Group {
  GroupKind kind = GroupKind::Stable;
  int first = 0;  // inclusive sample indices into the sequence
  int last = 0;
  std::uint64_t t_start = 0;  // timestamps of the first and last samples
  std::uint64_t t_end = 0;
  int n_imu = 0;
  double gamma = 1.0;
};

struct GroupSet {
  std::vector<Group> groups;
  // Axis of max mean |omega| within each group. Segmentation itself uses the
  // whole-sequence dominant axis.
  std::vector<Axis> dominant_axis;
};

// Whole-sequence axis of largest mean |omega|; ties pick x before y before z.
Axis dominant_axis(const ImuSequence& seq);

// Stage 1: maximal runs of Stable (|omega_d| <= t_stable) and Active samples
// along the whole-sequence dominant axis d.
std::vector<Group> segment_stable_active(const ImuSequence& seq, double t_stable);

// Stage 2, applied to one Active group's dominant-axis values:
//   - split at sign changes,
//   - split each constant-sign segment after its first peak |omega|
//     (an empty deceleration phase is dropped),
//   - split each phase after the smallest j whose cumulative signed sum
//     reaches half the phase total (an empty half is dropped; if no prefix
//     reaches the threshold the phase stays whole).
// Returns inclusive local index ranges covering [0, omega.size()).
std::vector<std::pair<int, int>> refine_active_group(std::span<const double> omega);

// Stage 3: left-to-right merge of groups shorter than n_min into their
// successor (the last group merges backward), then recursive midpoint
// bisection of groups longer than n_max. A whole sequence shorter than n_min
// stays as one group.
std::vector<Group> regularize_groups(std::vector<Group> groups,
                                     const ImuSequence& seq, int n_min, int n_max);

// gamma_min + (gamma_max - gamma_min) / (a * n_imu + b); antitone in n_imu.
double scaling_factor(int n_imu, const CompensationConfig& cfg);

// Full adaptive grouping: segment, refine every Active group, regularize,
// then assign each group its scaling factor and dominant axis.
// Errors: EmptySequence, InvariantViolation.
GroupSet group_imu(const ImuSequence& seq, const CompensationConfig& cfg);

}  // namespace evstab
