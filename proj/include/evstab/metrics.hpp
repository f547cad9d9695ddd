#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evstab/core.hpp"
#include "evstab/frame.hpp"
#include "evstab/imu.hpp"

namespace evstab {

// Events per distinct active pixel; 0 for an empty stream or frame.
double pixel_event_density(const EventStream& stream);
double pixel_event_density(const EventFrame& frame);

// Population variance of the per-pixel total count over all width x height
// pixels, inactive pixels included.
double frame_contrast(const EventFrame& frame);

struct GridSearchResult {
  double best_angle = 0.0;
  std::vector<double> curve;  // contrast per candidate, range start upward
};

// Brute-force contrast maximization over one rotation axis. Each candidate is
// a terminal angle reached at constant angular rate across the stream's time
// span; every event is warped by its time-proportional share, rounded at
// gamma = 1, and accumulated. Candidates run lo, lo + step, ..., hi
// (floor((hi - lo) / step) + 1 of them); ties keep the smaller angle.
// Errors: InvariantViolation for step <= 0 or hi < lo.
GridSearchResult grid_search_rotation(const EventStream& stream,
                                      const CameraModel& cam, Axis axis,
                                      double lo, double hi, double step);

struct DensityReport {
  std::string axis = "unspecified";  // yaw, pitch, roll, or unspecified
  double raw = 0.0;
  double compensated = 0.0;
  double ratio = 0.0;  // defined only when raw > 0
};

struct BenchReport {
  std::int64_t event_count = 0;
  int reps = 0;
  double wall_time_us = 0.0;  // median over reps
  double throughput_eps = 0.0;
  double grouping_us = 0.0;
  double warping_us = 0.0;
  double accumulation_us = 0.0;
  bool deterministic = false;  // identical outputs across reps
};

// Median-of-reps compensation timing with per-stage breakdown.
// Errors: InvariantViolation for reps < 1.
BenchReport bench_compensation(const EventStream& stream, const ImuSequence& imu,
                               const CameraModel& cam,
                               const CompensationConfig& cfg, int reps);

}  // namespace evstab
