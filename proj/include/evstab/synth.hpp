#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "evstab/core.hpp"

namespace evstab {

// Synthetic static scene: world points at constant depth whose zero-rotation
// pinhole projections land at least margin_px inside the sensor.
struct Scene {
  std::vector<Eigen::Vector3d> points;
  std::uint64_t seed = 0;
};

enum class Profile { Sinusoid, Ramp, Constant };

const char* to_string(Profile profile);

struct Trajectory {
  Profile profile = Profile::Sinusoid;
  Axis axis = Axis::Y;
  // Peak angle for Sinusoid, final angle for Ramp and Constant (rad).
  double amplitude = 0.1;
  double frequency = 1.0;  // Hz; Sinusoid only
  double duration = 1.0;   // seconds
  double imu_rate = 1000.0;  // Hz
};

// InvariantViolation unless duration > 0, imu_rate >= 100, |amplitude| < pi/3.
void validate_trajectory(const Trajectory& traj);

Scene make_scene(int n_points, const CameraModel& cam, double margin_px,
                 double depth, std::uint64_t seed);

struct TrajectorySamples {
  ImuSequence imu;  // exact angular velocities; accel fixed at [0, 0, -9.81]
  std::function<double(double)> angle;  // analytic integrated angle, rad(sec)
};

TrajectorySamples make_trajectory(const Trajectory& traj);

struct RenderResult {
  EventStream events;
  ImuSequence imu;
  std::vector<int> provenance;  // scene point index per event
};

// Edge-crossing event model: each scene point's continuous image track emits
// one event per integer pixel boundary it crosses, timestamped at the
// crossing (1 us resolution), polarity the sign of the coordinate velocity.
// The track is the exact forward motion the warp inverts, so compensating a
// rendered stream with its own IMU collapses each point. Crossings that land
// outside the sensor are discarded. noise_rate > 0 adds that many uniform
// random events per second.
// Errors: TangentDomain if the trajectory drives any point outside tangent
// validity, InvariantViolation for bad parameters.
RenderResult render(const Scene& scene, const Trajectory& traj,
                    const CameraModel& cam, double noise_rate = 0.0,
                    std::uint64_t noise_seed = 1);

}  // namespace evstab
