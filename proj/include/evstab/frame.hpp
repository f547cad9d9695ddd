#pragma once

#include <cstdint>
#include <span>

#include "evstab/core.hpp"

namespace evstab {

// Dense accumulation of an event slice: per-pixel positive and negative
// counts plus the mean normalized timestamp in [0, 1] (0 where no events).
struct EventFrame {
  std::int32_t width = 0;
  std::int32_t height = 0;
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 0;
  Eigen::ArrayXXi pos_count;  // height rows x width cols
  Eigen::ArrayXXi neg_count;
  Eigen::ArrayXXd mean_ts;
};

// Every event must fall inside the frame bounds and inside [t_start, t_end];
// errors: OutOfBoundsCoordinate, TimestampOutsideSpan. Normalized time is
// (t - t_start) / (t_end - t_start), defined as 0 when the span is empty.
EventFrame accumulate_frame(std::span<const Event> events, std::int32_t width,
                            std::int32_t height, std::uint64_t t_start,
                            std::uint64_t t_end);

EventFrame accumulate_frame(const EventStream& stream, std::uint64_t t_start,
                            std::uint64_t t_end);

struct FrameStats {
  std::int64_t event_count = 0;
  std::int64_t active_pixels = 0;
  double density = 0.0;  // events per active pixel; 0 for an empty frame
};

FrameStats frame_stats(const EventFrame& frame);

}  // namespace evstab
