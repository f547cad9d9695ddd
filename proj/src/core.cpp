#include "evstab/core.hpp"

#include <cmath>
#include <sstream>

namespace evstab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnsortedTimestamps: return "UnsortedTimestamps";
    case ErrorKind::OutOfBoundsCoordinate: return "OutOfBoundsCoordinate";
    case ErrorKind::InvalidPolarity: return "InvalidPolarity";
    case ErrorKind::TimestampOutsideSpan: return "TimestampOutsideSpan";
    case ErrorKind::CoordinateOverflow: return "CoordinateOverflow";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::BadVersion: return "BadVersion";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::NonOrthonormalRotation: return "NonOrthonormalRotation";
    case ErrorKind::SpanOutsideSequence: return "SpanOutsideSequence";
    case ErrorKind::EmptySequence: return "EmptySequence";
    case ErrorKind::TangentDomain: return "TangentDomain";
    case ErrorKind::ImuDoesNotCoverEvents: return "ImuDoesNotCoverEvents";
    case ErrorKind::KExceedsFrameCount: return "KExceedsFrameCount";
  }
  return "UnknownError";
}

const char* to_string(Axis axis) {
  switch (axis) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind) {}

void fail(ErrorKind kind, const std::string& detail) {
  throw Error(kind, detail);
}

void validate_stream(const EventStream& stream) {
  if (stream.width < 1 || stream.height < 1)
    fail(ErrorKind::InvariantViolation,
         "stream dimensions must be positive, got " +
             std::to_string(stream.width) + "x" + std::to_string(stream.height));
  std::uint64_t prev_t = 0;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const Event& e = stream.events[i];
    if (e.x < 0 || e.x >= stream.width || e.y < 0 || e.y >= stream.height)
      fail(ErrorKind::OutOfBoundsCoordinate,
           "event " + std::to_string(i) + " at (" + std::to_string(e.x) + ", " +
               std::to_string(e.y) + ") outside " + std::to_string(stream.width) +
               "x" + std::to_string(stream.height));
    if (e.p != 1 && e.p != -1)
      fail(ErrorKind::InvalidPolarity, "event " + std::to_string(i) +
                                           " has polarity " + std::to_string(e.p));
    if (i > 0 && e.t < prev_t)
      fail(ErrorKind::UnsortedTimestamps,
           "event " + std::to_string(i) + " at t=" + std::to_string(e.t) +
               " after t=" + std::to_string(prev_t));
    prev_t = e.t;
  }
}

void validate_imu(const ImuSequence& seq) {
  for (std::size_t i = 0; i < seq.samples.size(); ++i) {
    const ImuSample& s = seq.samples[i];
    if (!s.omega.allFinite() || !s.accel.allFinite())
      fail(ErrorKind::InvariantViolation,
           "sample " + std::to_string(i) + " has non-finite components");
    if (i > 0 && s.t <= seq.samples[i - 1].t)
      fail(ErrorKind::NonMonotonicTimestamps,
           "sample " + std::to_string(i) + " at t=" + std::to_string(s.t) +
               " does not advance past t=" +
               std::to_string(seq.samples[i - 1].t));
  }
}

void validate_camera(const CameraModel& cam) {
  if (!(cam.focal_length > 0.0) || !(cam.pixel_pitch > 0.0))
    fail(ErrorKind::InvariantViolation, "focal length and pixel pitch must be positive");
  if (cam.width < 1 || cam.height < 1)
    fail(ErrorKind::InvariantViolation, "sensor dimensions must be positive");
  if (!std::isfinite(cam.cx) || !std::isfinite(cam.cy))
    fail(ErrorKind::InvariantViolation, "principal point must be finite");
  const Eigen::Matrix3d residual =
      cam.r_ci * cam.r_ci.transpose() - Eigen::Matrix3d::Identity();
  if (residual.cwiseAbs().maxCoeff() > 1e-9)
    fail(ErrorKind::NonOrthonormalRotation,
         "r_ci * r_ci^T deviates from identity by " +
             std::to_string(residual.cwiseAbs().maxCoeff()));
  if (std::abs(cam.r_ci.determinant() - 1.0) > 1e-9)
    fail(ErrorKind::NonOrthonormalRotation,
         "r_ci determinant " + std::to_string(cam.r_ci.determinant()));
}

void validate_config(const CompensationConfig& cfg) {
  if (!(cfg.gamma_min > 0.0))
    fail(ErrorKind::InvariantViolation, "gamma_min must be positive");
  if (!(cfg.gamma_max > cfg.gamma_min))
    fail(ErrorKind::InvariantViolation, "gamma_max must exceed gamma_min");
  if (!(cfg.a > 0.0) || !(cfg.b > 0.0))
    fail(ErrorKind::InvariantViolation, "scaling constants a and b must be positive");
  // Keeps the scaling factor inside (gamma_min, gamma_max] for every n >= 1.
  if (cfg.a + cfg.b < 1.0)
    fail(ErrorKind::InvariantViolation, "a + b must be at least 1");
  if (!(cfg.t_stable >= 0.0))
    fail(ErrorKind::InvariantViolation, "t_stable must be non-negative");
  if (cfg.n_min < 1 || cfg.n_max < cfg.n_min)
    fail(ErrorKind::InvariantViolation,
         "need 1 <= n_min <= n_max, got n_min=" + std::to_string(cfg.n_min) +
             " n_max=" + std::to_string(cfg.n_max));
  if (!(cfg.constant_depth > 0.0))
    fail(ErrorKind::InvariantViolation, "constant_depth must be positive");
}

void validate_config(const IgsConfig& cfg) {
  if (cfg.k < 1) fail(ErrorKind::InvariantViolation, "k must be >= 1");
  if (cfg.w_rel < 0.0 || cfg.w_q < 0.0 || cfg.w_u < 0.0 || cfg.w_d < 0.0)
    fail(ErrorKind::InvariantViolation, "score weights must be non-negative");
  if (cfg.w_rel + cfg.w_q + cfg.w_u + cfg.w_d <= 0.0)
    fail(ErrorKind::InvariantViolation, "at least one score weight must be positive");
  if (!(cfg.tau > 0.0)) fail(ErrorKind::InvariantViolation, "tau must be positive");
  if (cfg.hist_bins < 1)
    fail(ErrorKind::InvariantViolation, "hist_bins must be >= 1");
}

}  // namespace evstab
