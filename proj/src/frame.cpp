#include "evstab/frame.hpp"

#include <string>

namespace evstab {

EventFrame accumulate_frame(std::span<const Event> events, std::int32_t width,
                            std::int32_t height, std::uint64_t t_start,
                            std::uint64_t t_end) {
  if (width < 1 || height < 1)
    fail(ErrorKind::InvariantViolation, "frame dimensions must be positive");
  if (t_end < t_start)
    fail(ErrorKind::InvariantViolation, "frame span must not be inverted");

  EventFrame frame;
  frame.width = width;
  frame.height = height;
  frame.t_start = t_start;
  frame.t_end = t_end;
  frame.pos_count = Eigen::ArrayXXi::Zero(height, width);
  frame.neg_count = Eigen::ArrayXXi::Zero(height, width);
  frame.mean_ts = Eigen::ArrayXXd::Zero(height, width);

  const double span = static_cast<double>(t_end - t_start);
  Eigen::ArrayXXd ts_sum = Eigen::ArrayXXd::Zero(height, width);

  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height)
      fail(ErrorKind::OutOfBoundsCoordinate,
           "event " + std::to_string(i) + " at (" + std::to_string(e.x) + ", " +
               std::to_string(e.y) + ")");
    if (e.t < t_start || e.t > t_end)
      fail(ErrorKind::TimestampOutsideSpan,
           "event " + std::to_string(i) + " at t=" + std::to_string(e.t) +
               " outside [" + std::to_string(t_start) + ", " +
               std::to_string(t_end) + "]");
    if (e.p > 0)
      frame.pos_count(e.y, e.x) += 1;
    else
      frame.neg_count(e.y, e.x) += 1;
    const double norm =
        span > 0.0 ? static_cast<double>(e.t - t_start) / span : 0.0;
    ts_sum(e.y, e.x) += norm;
  }

  const Eigen::ArrayXXi total = frame.pos_count + frame.neg_count;
  frame.mean_ts = (total > 0)
                      .select(ts_sum / total.cast<double>().max(1.0),
                              Eigen::ArrayXXd::Zero(height, width));
  return frame;
}

EventFrame accumulate_frame(const EventStream& stream, std::uint64_t t_start,
                            std::uint64_t t_end) {
  return accumulate_frame(std::span<const Event>(stream.events), stream.width,
                          stream.height, t_start, t_end);
}

FrameStats frame_stats(const EventFrame& frame) {
  FrameStats stats;
  const Eigen::ArrayXXi total = frame.pos_count + frame.neg_count;
  stats.event_count = total.cast<std::int64_t>().sum();
  stats.active_pixels = (total > 0).count();
  stats.density = stats.active_pixels > 0
                      ? static_cast<double>(stats.event_count) /
                            static_cast<double>(stats.active_pixels)
                      : 0.0;
  return stats;
}

}  // namespace evstab
