#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace evstab {

// All timestamps are integer microseconds. All angle math is double precision.

enum class ErrorKind {
  // stream and frame validation
  UnsortedTimestamps,
  OutOfBoundsCoordinate,
  InvalidPolarity,
  TimestampOutsideSpan,
  // serialization
  CoordinateOverflow,
  BadMagic,
  BadVersion,
  TruncatedPayload,
  ParseError,
  NonMonotonicTimestamps,
  // configuration
  UnknownKey,
  TypeMismatch,
  InvariantViolation,
  // imu and warping
  NonOrthonormalRotation,
  SpanOutsideSequence,
  EmptySequence,
  TangentDomain,
  ImuDoesNotCoverEvents,
  // keyframe sampling
  KExceedsFrameCount,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& detail);

struct Event {
  std::uint64_t t = 0;  // microseconds
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int8_t p = 1;  // +1 or -1

  bool operator==(const Event&) const = default;
};

struct EventStream {
  std::int32_t width = 0;
  std::int32_t height = 0;
  // Sorted by t; equal timestamps keep insertion order.
  std::vector<Event> events;

  bool operator==(const EventStream&) const = default;
};

// Throws on the first violation: UnsortedTimestamps, OutOfBoundsCoordinate,
// InvalidPolarity. Details carry the offending event index.
void validate_stream(const EventStream& stream);

struct ImuSample {
  std::uint64_t t = 0;  // microseconds
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();  // rad/s, gyro
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();  // m/s^2
};

struct ImuSequence {
  std::vector<ImuSample> samples;  // timestamps strictly increasing

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
};

void validate_imu(const ImuSequence& seq);

// Integrated body rotation over a time span, camera frame.
struct RotationAngles {
  double phi = 0.0;    // about camera x
  double theta = 0.0;  // about camera y
  double psi = 0.0;    // about camera z

  bool is_zero() const { return phi == 0.0 && theta == 0.0 && psi == 0.0; }
};

enum class Axis { X, Y, Z };

const char* to_string(Axis axis);

struct CameraModel {
  double focal_length = 0.004;    // meters
  double pixel_pitch = 1.85e-5;   // meters per pixel
  double cx = 173.0;              // principal point, pixels
  double cy = 130.0;
  std::int32_t width = 346;
  std::int32_t height = 260;
  Eigen::Matrix3d r_ci = Eigen::Matrix3d::Identity();  // IMU frame -> camera frame

  // Focal length in pixel units; the single intrinsic the warp needs.
  double rho() const { return focal_length / pixel_pitch; }
};

// InvariantViolation on non-positive intrinsics or dimensions,
// NonOrthonormalRotation if r_ci is not a proper rotation (1e-9 tolerance).
void validate_camera(const CameraModel& cam);

// Which integrated angle feeds the y-axis tilt term of the warp. Phi pairs
// x-tilt with theta and y-tilt with phi; Psi substitutes psi for phi.
enum class BetaAxes { Phi, Psi };

// Reference pose the stream is aligned to: the start, midpoint, or end of the
// IMU span covering the events.
enum class WarpReference { Start, Mid, End };

struct CompensationConfig {
  double gamma_min = 2.0;
  double gamma_max = 5.0;
  double a = 0.15;
  double b = 3.0;
  double t_stable = 3.0;  // rad/s, stability threshold on the dominant axis
  int n_min = 5;          // group size bounds, IMU samples
  int n_max = 50;
  double constant_depth = 1.0;  // meters; carried for documentation, unused by the warp
  BetaAxes beta_axes = BetaAxes::Phi;
  WarpReference warp_reference = WarpReference::Start;
  // Scale rounded displacements by the group gamma. Off by default: the
  // one-shot warp keeps full precision until the final rounding, so
  // amplification only moves events off their exact targets.
  bool apply_scaling = false;
};

void validate_config(const CompensationConfig& cfg);

struct IgsConfig {
  int k = 8;  // number of keyframes to select
  double w_rel = 0.1;
  double w_q = 0.1;
  double w_u = 0.6;
  double w_d = 0.1;
  double tau = 1.0;   // temporal suppression scale, fraction of sequence length
  int hist_bins = 8;  // side length of the pooled diversity histogram
};

void validate_config(const IgsConfig& cfg);

}  // namespace evstab
