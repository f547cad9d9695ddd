#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "evstab/synth.hpp"
#include "evstab/warp.hpp"
#include "test_support.hpp"

using namespace evstab;
using testutil::kind_of;

namespace {

Scene center_point_scene() {
  Scene scene;
  scene.points.emplace_back(0.0, 0.0, 1.0);  // projects to the principal point
  return scene;
}

// Mean over points (with enough hits) of the per-point position spread.
// An empty kept vector means the events map to provenance one-to-one.
double mean_point_spread(const EventStream& stream,
                         const std::vector<int>& provenance,
                         const std::vector<std::size_t>& kept) {
  std::map<int, std::vector<Eigen::Vector2d>> hits;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const std::size_t src = kept.empty() ? i : kept[i];
    const int id = provenance[src];
    if (id < 0) continue;
    hits[id].emplace_back(stream.events[i].x, stream.events[i].y);
  }
  double sum = 0.0;
  int used = 0;
  for (const auto& [id, pts] : hits) {
    if (pts.size() < 4) continue;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    double sq = 0.0;
    for (const auto& p : pts) sq += (p - mean).squaredNorm();
    sum += std::sqrt(sq / static_cast<double>(pts.size()));
    ++used;
  }
  REQUIRE(used > 0);
  return sum / used;
}

}  // namespace

TEST_CASE("trajectory validation") {
  Trajectory traj;
  CHECK_NOTHROW(validate_trajectory(traj));
  traj.duration = 0.0;
  CHECK(kind_of([&] { validate_trajectory(traj); }) ==
        ErrorKind::InvariantViolation);
  traj.duration = 1.0;
  traj.imu_rate = 50.0;
  CHECK(kind_of([&] { validate_trajectory(traj); }) ==
        ErrorKind::InvariantViolation);
  traj.imu_rate = 1000.0;
  traj.amplitude = 1.3;  // beyond pi/3
  CHECK(kind_of([&] { validate_trajectory(traj); }) ==
        ErrorKind::InvariantViolation);
}

TEST_CASE("scene points sit at the requested depth inside the margin") {
  const CameraModel cam;
  const Scene scene = make_scene(40, cam, 60.0, 2.5, 9);
  REQUIRE(scene.points.size() == 40);
  for (const Eigen::Vector3d& p : scene.points) {
    CHECK(p.z() == 2.5);
    const double u = cam.cx + cam.rho() * p.x() / p.z();
    const double v = cam.cy + cam.rho() * p.y() / p.z();
    CHECK(u >= 60.0);
    CHECK(u <= cam.width - 1 - 60.0);
    CHECK(v >= 60.0);
    CHECK(v <= cam.height - 1 - 60.0);
  }
  const Scene again = make_scene(40, cam, 60.0, 2.5, 9);
  CHECK((scene.points[7] - again.points[7]).norm() == 0.0);
  const Scene other = make_scene(40, cam, 60.0, 2.5, 10);
  CHECK((scene.points[0] - other.points[0]).norm() != 0.0);
}

TEST_CASE("a margin wider than the sensor is rejected") {
  CHECK(kind_of([] { make_scene(4, CameraModel{}, 200.0, 1.0, 1); }) ==
        ErrorKind::InvariantViolation);
}

TEST_CASE("trajectory sampling covers the duration at the requested rate") {
  Trajectory traj;
  traj.duration = 1.0;
  traj.imu_rate = 1000.0;
  const TrajectorySamples samples = make_trajectory(traj);
  CHECK(samples.imu.samples.size() == 1001);
  CHECK(samples.imu.samples.front().t == 0);
  CHECK(samples.imu.samples.back().t == 1000000);
  for (const ImuSample& s : samples.imu.samples) {
    CHECK((s.accel - Eigen::Vector3d(0.0, 0.0, -9.81)).norm() == 0.0);
    CHECK(s.omega.x() == 0.0);  // default axis is y
    CHECK(s.omega.z() == 0.0);
  }
  // Analytic angle peaks at a quarter period.
  CHECK(samples.angle(0.25 / traj.frequency) ==
        doctest::Approx(traj.amplitude).epsilon(1e-12));
  CHECK(samples.angle(0.0) == 0.0);
}

TEST_CASE("a yaw ramp over a centered point emits one event per pixel crossed") {
  const CameraModel cam;
  Trajectory traj;
  traj.profile = Profile::Ramp;
  traj.axis = Axis::Y;
  traj.amplitude = std::atan(3.5 / cam.rho());  // track ends at x = 176.5

  SUBCASE("increasing track") {
    const RenderResult r = render(center_point_scene(), traj, cam);
    REQUIRE(r.events.events.size() == 3);
    std::vector<int> xs;
    for (const Event& e : r.events.events) {
      CHECK(e.p == 1);
      CHECK(e.y == 130);
      xs.push_back(e.x);
    }
    CHECK(xs == std::vector<int>{174, 175, 176});
    CHECK(r.provenance == std::vector<int>{0, 0, 0});
    for (std::size_t i = 1; i < r.events.events.size(); ++i)
      CHECK(r.events.events[i - 1].t < r.events.events[i].t);
  }
  SUBCASE("decreasing track mirrors the polarity") {
    traj.amplitude = -traj.amplitude;
    const RenderResult r = render(center_point_scene(), traj, cam);
    REQUIRE(r.events.events.size() == 3);
    std::vector<int> xs;
    for (const Event& e : r.events.events) {
      CHECK(e.p == -1);
      CHECK(e.y == 130);
      xs.push_back(e.x);
    }
    CHECK(xs == std::vector<int>{172, 171, 170});
  }
}

TEST_CASE("wider sweeps never emit fewer events") {
  const CameraModel cam;
  const Scene scene = make_scene(10, cam, 80.0, 1.0, 4);
  Trajectory traj;
  traj.profile = Profile::Ramp;
  traj.amplitude = 0.02;
  const std::size_t narrow = render(scene, traj, cam).events.events.size();
  traj.amplitude = 0.04;
  const std::size_t wide = render(scene, traj, cam).events.events.size();
  CHECK(narrow > 0);
  CHECK(wide >= narrow);
}

TEST_CASE("a motionless trajectory emits nothing") {
  Trajectory traj;
  traj.profile = Profile::Ramp;
  traj.amplitude = 0.0;
  const RenderResult r = render(center_point_scene(), traj, CameraModel{});
  CHECK(r.events.events.empty());
  CHECK(!r.imu.samples.empty());
}

TEST_CASE("rendering is deterministic for a fixed seed") {
  const CameraModel cam;
  const Scene scene = make_scene(15, cam, 70.0, 1.0, 21);
  Trajectory traj;
  traj.amplitude = 0.2;
  const RenderResult a = render(scene, traj, cam, 500.0, 3);
  const RenderResult b = render(scene, traj, cam, 500.0, 3);
  REQUIRE(a.events.events.size() == b.events.events.size());
  CHECK(a.events.events == b.events.events);
  CHECK(a.provenance == b.provenance);
  REQUIRE(a.imu.samples.size() == b.imu.samples.size());
  for (std::size_t i = 0; i < a.imu.samples.size(); ++i)
    CHECK((a.imu.samples[i].omega - b.imu.samples[i].omega).norm() == 0.0);
}

TEST_CASE("noise events carry no provenance and respect the rate") {
  const CameraModel cam;
  const Scene scene = make_scene(5, cam, 80.0, 1.0, 2);
  Trajectory traj;
  traj.amplitude = 0.1;
  traj.duration = 0.5;
  const RenderResult r = render(scene, traj, cam, 2000.0, 77);
  const long long stray =
      std::count(r.provenance.begin(), r.provenance.end(), -1);
  CHECK(stray == 1000);  // noise_rate * duration
  CHECK(r.provenance.size() == r.events.events.size());
  CHECK_NOTHROW(validate_stream(r.events));
}

TEST_CASE("a roll trajectory renders a valid stream") {
  const CameraModel cam;
  const Scene scene = make_scene(12, cam, 70.0, 1.0, 33);
  Trajectory traj;
  traj.axis = Axis::Z;
  traj.amplitude = 0.3;
  const RenderResult r = render(scene, traj, cam);
  CHECK(r.events.events.size() > 100);
  CHECK_NOTHROW(validate_stream(r.events));
  bool pos = false, neg = false;
  for (const Event& e : r.events.events) (e.p > 0 ? pos : neg) = true;
  CHECK(pos);
  CHECK(neg);
}

TEST_CASE("compensating a rendered stream collapses each point") {
  const CameraModel cam;
  const Scene scene = make_scene(20, cam, 60.0, 1.0, 42);
  Trajectory traj;
  traj.amplitude = 0.2618;  // 15 degrees
  traj.frequency = 2.0;
  traj.duration = 0.5;
  const RenderResult r = render(scene, traj, cam);
  REQUIRE(r.events.events.size() > 500);

  const double raw = mean_point_spread(r.events, r.provenance, {});
  CHECK(raw >= 3.0);

  const CompensationResult res =
      compensate_stream(r.events, r.imu, cam, CompensationConfig{});
  CHECK(res.stream.events.size() + static_cast<std::size_t>(res.dropped) ==
        r.events.events.size());
  const double fixed = mean_point_spread(res.stream, r.provenance, res.kept);
  CHECK(fixed <= 1.0);
  CHECK(fixed < raw / 3.0);
}
