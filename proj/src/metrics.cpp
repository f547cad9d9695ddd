#include "evstab/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "evstab/warp.hpp"

namespace evstab {

namespace {

double count_variance(const Eigen::ArrayXXi& counts) {
  if (counts.size() == 0) return 0.0;
  const Eigen::ArrayXXd v = counts.cast<double>();
  const double mean = v.mean();
  return (v - mean).square().sum() / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  return 0.5 * (v[m - 1] + v[m]);
}

bool frames_equal(const EventFrame& a, const EventFrame& b) {
  return a.width == b.width && a.height == b.height && a.t_start == b.t_start &&
         a.t_end == b.t_end && (a.pos_count == b.pos_count).all() &&
         (a.neg_count == b.neg_count).all() && (a.mean_ts == b.mean_ts).all();
}

bool results_equal(const CompensationResult& a, const CompensationResult& b) {
  if (a.stream.events != b.stream.events) return false;
  if (a.dropped != b.dropped || a.kept != b.kept) return false;
  if (a.frames.size() != b.frames.size()) return false;
  for (std::size_t i = 0; i < a.frames.size(); ++i)
    if (!frames_equal(a.frames[i], b.frames[i])) return false;
  return true;
}

}  // namespace

double pixel_event_density(const EventStream& stream) {
  validate_stream(stream);
  if (stream.events.empty()) return 0.0;
  std::vector<char> active(
      static_cast<std::size_t>(stream.width) * static_cast<std::size_t>(stream.height),
      0);
  for (const Event& e : stream.events)
    active[static_cast<std::size_t>(e.y) * static_cast<std::size_t>(stream.width) +
           static_cast<std::size_t>(e.x)] = 1;
  const auto pixels = std::count(active.begin(), active.end(), 1);
  return static_cast<double>(stream.events.size()) / static_cast<double>(pixels);
}

double pixel_event_density(const EventFrame& frame) {
  return frame_stats(frame).density;
}

double frame_contrast(const EventFrame& frame) {
  return count_variance(frame.pos_count + frame.neg_count);
}

GridSearchResult grid_search_rotation(const EventStream& stream,
                                      const CameraModel& cam, Axis axis,
                                      double lo, double hi, double step) {
  validate_stream(stream);
  validate_camera(cam);
  if (!(step > 0.0))
    fail(ErrorKind::InvariantViolation, "grid step must be positive");
  if (hi < lo)
    fail(ErrorKind::InvariantViolation, "grid upper bound below lower bound");

  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  const bool empty = stream.events.empty();
  const std::uint64_t t0 = empty ? 0 : stream.events.front().t;
  const std::uint64_t t1 = empty ? 0 : stream.events.back().t;
  const double span = static_cast<double>(t1 - t0);

  GridSearchResult res;
  res.curve.reserve(static_cast<std::size_t>(n));
  res.best_angle = lo;
  double best = -1.0;

  for (int i = 0; i < n; ++i) {
    const double angle = lo + i * step;
    Eigen::ArrayXXi counts = Eigen::ArrayXXi::Zero(stream.height, stream.width);
    for (const Event& e : stream.events) {
      // Constant angular velocity: the candidate is the pose reached at the
      // end of the stream, so each event unrotates by its elapsed fraction.
      const double frac = span > 0.0 ? static_cast<double>(e.t - t0) / span : 1.0;
      RotationAngles rot;
      switch (axis) {
        case Axis::X: rot.phi = angle * frac; break;
        case Axis::Y: rot.theta = angle * frac; break;
        case Axis::Z: rot.psi = angle * frac; break;
      }
      try {
        const Eigen::Vector2d w = warp_event(e, rot, cam);
        const auto moved = scale_and_round(e, w, 1.0, stream.width, stream.height);
        if (moved) counts(moved->y, moved->x) += 1;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::TangentDomain) throw;
      }
    }
    const double contrast = count_variance(counts);
    res.curve.push_back(contrast);
    if (contrast > best) {  // strict > keeps the smaller angle on ties
      best = contrast;
      res.best_angle = angle;
    }
  }
  return res;
}

BenchReport bench_compensation(const EventStream& stream, const ImuSequence& imu,
                               const CameraModel& cam,
                               const CompensationConfig& cfg, int reps) {
  if (reps < 1) fail(ErrorKind::InvariantViolation, "reps must be >= 1");

  BenchReport report;
  report.event_count = stream.events.size();
  report.reps = reps;
  report.deterministic = true;

  std::vector<double> wall, grouping, warping, accumulation;
  CompensationResult first;
  for (int r = 0; r < reps; ++r) {
    const auto begin = std::chrono::steady_clock::now();
    CompensationResult res = compensate_stream(stream, imu, cam, cfg);
    const auto end = std::chrono::steady_clock::now();
    wall.push_back(std::chrono::duration<double, std::micro>(end - begin).count());
    grouping.push_back(static_cast<double>(res.timings.grouping_us));
    warping.push_back(static_cast<double>(res.timings.warping_us));
    accumulation.push_back(static_cast<double>(res.timings.accumulation_us));
    if (r == 0)
      first = std::move(res);
    else if (!results_equal(first, res))
      report.deterministic = false;
  }

  report.wall_time_us = median_of(wall);
  report.grouping_us = median_of(grouping);
  report.warping_us = median_of(warping);
  report.accumulation_us = median_of(accumulation);
  report.throughput_eps =
      report.wall_time_us > 0.0
          ? static_cast<double>(report.event_count) / (report.wall_time_us * 1e-6)
          : 0.0;
  return report;
}

}  // namespace evstab
