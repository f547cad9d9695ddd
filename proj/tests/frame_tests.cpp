#include "doctest.h"

#include <algorithm>
#include <random>

#include "evstab/frame.hpp"
#include "test_support.hpp"

using namespace evstab;
using testutil::ev;
using testutil::make_stream;

TEST_CASE("empty accumulation yields all-zero channels") {
  const EventFrame f = accumulate_frame(std::span<const Event>{}, 8, 6, 0, 100);
  CHECK(f.pos_count.sum() == 0);
  CHECK(f.neg_count.sum() == 0);
  CHECK(f.mean_ts.abs().sum() == 0.0);
  CHECK(f.width == 8);
  CHECK(f.height == 6);
  const FrameStats st = frame_stats(f);
  CHECK(st.event_count == 0);
  CHECK(st.active_pixels == 0);
  CHECK(st.density == 0.0);
}

TEST_CASE("opposite polarities at one pixel average their normalized times") {
  const std::vector<Event> events = {ev(0, 4, 4, 1), ev(100, 4, 4, -1)};
  const EventFrame f = accumulate_frame(events, 10, 10, 0, 100);
  CHECK(f.pos_count(4, 4) == 1);
  CHECK(f.neg_count(4, 4) == 1);
  CHECK(f.mean_ts(4, 4) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.mean_ts(0, 0) == 0.0);
}

TEST_CASE("channel sums conserve the event count") {
  std::mt19937 rng(11);
  std::vector<Event> events;
  for (int i = 0; i < 500; ++i)
    events.push_back(ev(static_cast<std::uint64_t>(i), static_cast<int>(rng() % 20),
                        static_cast<int>(rng() % 15), (rng() & 1) ? 1 : -1));
  const EventFrame f = accumulate_frame(events, 20, 15, 0, 499);
  CHECK(f.pos_count.sum() + f.neg_count.sum() == 500);
  CHECK(frame_stats(f).event_count == 500);
}

TEST_CASE("accumulation is order independent") {
  std::mt19937 rng(23);
  std::vector<Event> events;
  for (int i = 0; i < 300; ++i)
    events.push_back(ev(rng() % 1000, static_cast<int>(rng() % 12),
                        static_cast<int>(rng() % 9), (rng() & 1) ? 1 : -1));
  std::vector<Event> shuffled = events;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  const EventFrame a = accumulate_frame(events, 12, 9, 0, 1000);
  const EventFrame b = accumulate_frame(shuffled, 12, 9, 0, 1000);
  CHECK((a.pos_count == b.pos_count).all());
  CHECK((a.neg_count == b.neg_count).all());
  CHECK((a.mean_ts - b.mean_ts).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("coincident span collapses normalized time to zero") {
  const std::vector<Event> one = {ev(50, 1, 1, 1)};
  const EventFrame f = accumulate_frame(one, 4, 4, 50, 50);
  CHECK(f.mean_ts(1, 1) == 0.0);
  CHECK(f.pos_count(1, 1) == 1);
}

TEST_CASE("events outside the frame span are rejected") {
  const std::vector<Event> one = {ev(5, 1, 1, 1)};
  try {
    accumulate_frame(one, 4, 4, 10, 20);
    FAIL("expected a typed error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TimestampOutsideSpan);
  }
}

TEST_CASE("out-of-raster coordinates are rejected") {
  const std::vector<Event> one = {ev(5, 9, 0, 1)};
  try {
    accumulate_frame(one, 4, 4, 0, 10);
    FAIL("expected a typed error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfBoundsCoordinate);
  }
}

TEST_CASE("density counts events per active pixel") {
  // 10 events over 4 distinct pixels
  std::vector<Event> events;
  for (int i = 0; i < 10; ++i) events.push_back(ev(i, i % 4, 0, 1));
  const EventFrame f = accumulate_frame(events, 8, 2, 0, 9);
  const FrameStats st = frame_stats(f);
  CHECK(st.active_pixels == 4);
  CHECK(st.density == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(st.density >= 1.0);
}

TEST_CASE("whole stream accumulation matches the span of its events") {
  const auto s = make_stream(6, 6, {ev(10, 0, 0, 1), ev(30, 5, 5, -1)});
  const EventFrame f = accumulate_frame(s, 10, 30);
  CHECK(f.t_start == 10);
  CHECK(f.t_end == 30);
  CHECK(f.pos_count(0, 0) == 1);
  CHECK(f.neg_count(5, 5) == 1);
  CHECK(f.mean_ts(5, 5) == doctest::Approx(1.0));
}
