#include "evstab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace evstab {

namespace {

constexpr double kPi = std::numbers::pi;

struct AngleModel {
  Profile profile;
  double amplitude;
  double frequency;
  double duration;

  double angle(double t) const {
    if (profile == Profile::Sinusoid)
      return amplitude * std::sin(2.0 * kPi * frequency * t);
    return amplitude * t / duration;  // Ramp and Constant share the linear form
  }

  double rate(double t) const {
    if (profile == Profile::Sinusoid)
      return amplitude * 2.0 * kPi * frequency *
             std::cos(2.0 * kPi * frequency * t);
    return amplitude / duration;
  }

  // Boundaries of the maximal time intervals on which angle() is monotone.
  std::vector<double> breakpoints() const {
    std::vector<double> b{0.0};
    if (profile == Profile::Sinusoid) {
      for (int m = 0;; ++m) {
        const double t = (2.0 * m + 1.0) / (4.0 * frequency);
        if (t >= duration) break;
        b.push_back(t);
      }
    }
    b.push_back(duration);
    return b;
  }
};

}  // namespace

const char* to_string(Profile profile) {
  switch (profile) {
    case Profile::Sinusoid: return "sinusoid";
    case Profile::Ramp: return "ramp";
    case Profile::Constant: return "constant";
  }
  return "?";
}

void validate_trajectory(const Trajectory& traj) {
  if (!(traj.duration > 0.0))
    fail(ErrorKind::InvariantViolation, "trajectory duration must be positive");
  if (!(traj.imu_rate >= 100.0))
    fail(ErrorKind::InvariantViolation, "imu_rate must be at least 100 Hz");
  if (!(std::abs(traj.amplitude) < kPi / 3.0))
    fail(ErrorKind::InvariantViolation, "peak angle must stay below pi/3 rad");
  if (traj.profile == Profile::Sinusoid && !(traj.frequency > 0.0))
    fail(ErrorKind::InvariantViolation, "sinusoid frequency must be positive");
}

Scene make_scene(int n_points, const CameraModel& cam, double margin_px,
                 double depth, std::uint64_t seed) {
  validate_camera(cam);
  if (n_points < 1)
    fail(ErrorKind::InvariantViolation, "scene needs at least one point");
  if (!(depth > 0.0))
    fail(ErrorKind::InvariantViolation, "scene depth must be positive");
  const double x_hi = cam.width - 1 - margin_px;
  const double y_hi = cam.height - 1 - margin_px;
  if (!(margin_px >= 0.0) || x_hi < margin_px || y_hi < margin_px)
    fail(ErrorKind::InvariantViolation,
         "margin " + std::to_string(margin_px) + " leaves no interior");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(margin_px, x_hi);
  std::uniform_real_distribution<double> uy(margin_px, y_hi);
  const double rho = cam.rho();
  Scene scene;
  scene.seed = seed;
  scene.points.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double u = ux(rng);
    const double v = uy(rng);
    scene.points.emplace_back((u - cam.cx) * depth / rho,
                              (v - cam.cy) * depth / rho, depth);
  }
  return scene;
}

TrajectorySamples make_trajectory(const Trajectory& traj) {
  validate_trajectory(traj);
  const AngleModel model{traj.profile, traj.amplitude, traj.frequency,
                         traj.duration};
  const double dur_us = traj.duration * 1e6;
  const int axis = static_cast<int>(traj.axis);

  TrajectorySamples out;
  std::uint64_t prev_t = 0;
  for (std::uint64_t i = 0;; ++i) {
    std::uint64_t t = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(i) * 1e6 / traj.imu_rate));
    if (i > 0 && t <= prev_t) t = prev_t + 1;
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();
    omega[axis] = model.rate(static_cast<double>(t) * 1e-6);
    out.imu.samples.push_back({t, omega, Eigen::Vector3d(0.0, 0.0, -9.81)});
    prev_t = t;
    if (static_cast<double>(t) >= dur_us) break;
  }
  out.angle = [model](double sec) { return model.angle(sec); };
  return out;
}

RenderResult render(const Scene& scene, const Trajectory& traj,
                    const CameraModel& cam, double noise_rate,
                    std::uint64_t noise_seed) {
  validate_camera(cam);
  validate_trajectory(traj);
  if (!(noise_rate >= 0.0))
    fail(ErrorKind::InvariantViolation, "noise_rate must be non-negative");
  if (scene.points.empty())
    fail(ErrorKind::InvariantViolation, "cannot render an empty scene");

  const AngleModel model{traj.profile, traj.amplitude, traj.frequency,
                         traj.duration};
  const double rho = cam.rho();

  struct Rec {
    Event e;
    int point;
  };
  std::vector<Rec> recs;

  const std::vector<double> angle_bp = model.breakpoints();
  double ang_lo = 0.0, ang_hi = 0.0;
  for (double t : angle_bp) {
    ang_lo = std::min(ang_lo, model.angle(t));
    ang_hi = std::max(ang_hi, model.angle(t));
  }

  for (int pid = 0; pid < static_cast<int>(scene.points.size()); ++pid) {
    const Eigen::Vector3d& p = scene.points[static_cast<std::size_t>(pid)];
    const double u0 = cam.cx + rho * p.x() / p.z();
    const double v0 = cam.cy + rho * p.y() / p.z();
    const double rx0 = u0 - cam.cx;
    const double ry0 = v0 - cam.cy;

    if (traj.axis == Axis::X || traj.axis == Axis::Y) {
      const double alpha0 =
          std::atan((traj.axis == Axis::Y ? rx0 : ry0) / rho);
      if (std::abs(alpha0 + ang_lo) >= kPi / 2.0 - 1e-9 ||
          std::abs(alpha0 + ang_hi) >= kPi / 2.0 - 1e-9)
        fail(ErrorKind::TangentDomain,
             "trajectory drives point " + std::to_string(pid) +
                 " outside tangent validity");
    }

    // Observed image track: the exact forward motion the warp inverts.
    auto track = [&](double sec) -> Eigen::Vector2d {
      const double ang = model.angle(sec);
      switch (traj.axis) {
        case Axis::Y:
          return {cam.cx + rho * std::tan(std::atan(rx0 / rho) + ang), v0};
        case Axis::X:
          return {u0, cam.cy + rho * std::tan(std::atan(ry0 / rho) + ang)};
        case Axis::Z: {
          const double c = std::cos(ang);
          const double s = std::sin(ang);
          return {cam.cx + c * rx0 + s * ry0, cam.cy - s * rx0 + c * ry0};
        }
      }
      return {u0, v0};
    };

    // Segment boundaries where either image coordinate may change direction:
    // angle extrema, plus (under roll) angles where a coordinate's derivative
    // with respect to the roll angle vanishes.
    std::vector<double> bounds = angle_bp;
    if (traj.axis == Axis::Z && (rx0 != 0.0 || ry0 != 0.0)) {
      const double delta = std::atan2(ry0, rx0);
      std::vector<double> crit_angles;
      for (int m = -3; m <= 3; ++m) {
        crit_angles.push_back(delta + m * kPi);
        crit_angles.push_back(delta + kPi / 2.0 + m * kPi);
      }
      for (std::size_t s = 0; s + 1 < angle_bp.size(); ++s) {
        const double ta = angle_bp[s];
        const double tb = angle_bp[s + 1];
        const double aa = model.angle(ta);
        const double ab = model.angle(tb);
        const double a_min = std::min(aa, ab);
        const double a_max = std::max(aa, ab);
        for (double crit : crit_angles) {
          if (crit <= a_min || crit >= a_max) continue;
          double lo = ta, hi = tb;
          const bool inc = ab > aa;
          for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((model.angle(mid) >= crit) == inc)
              hi = mid;
            else
              lo = mid;
          }
          bounds.push_back(hi);
        }
      }
      std::sort(bounds.begin(), bounds.end());
    }

    auto emit = [&](double ta, double tb, bool x_coord) {
      auto coord = [&](double sec) {
        const Eigen::Vector2d q = track(sec);
        return x_coord ? q.x() : q.y();
      };
      const double ca = coord(ta);
      const double cb = coord(tb);
      if (ca == cb) return;
      const bool inc = cb > ca;
      // Crossed boundaries: integers in (ca, cb] going up, [cb, ca) going
      // down, enumerated in time order.
      const long long k_first =
          inc ? static_cast<long long>(std::floor(ca)) + 1
              : static_cast<long long>(std::ceil(ca)) - 1;
      const long long k_last = inc ? static_cast<long long>(std::floor(cb))
                                   : static_cast<long long>(std::ceil(cb));
      const long long step = inc ? 1 : -1;
      for (long long k = k_first; inc ? k <= k_last : k >= k_last; k += step) {
        double lo = ta, hi = tb;
        for (int it = 0; it < 48; ++it) {
          const double mid = 0.5 * (lo + hi);
          if ((coord(mid) >= static_cast<double>(k)) == inc)
            hi = mid;
          else
            lo = mid;
        }
        const double t_cross = hi;
        const Eigen::Vector2d q = track(t_cross);
        const long long ex = x_coord ? k : std::llround(q.x());
        const long long ey = x_coord ? std::llround(q.y()) : k;
        if (ex < 0 || ex >= cam.width || ey < 0 || ey >= cam.height) continue;
        Event e;
        e.t = static_cast<std::uint64_t>(std::llround(t_cross * 1e6));
        e.x = static_cast<std::int32_t>(ex);
        e.y = static_cast<std::int32_t>(ey);
        e.p = inc ? 1 : -1;
        recs.push_back({e, pid});
      }
    };

    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
      if (bounds[s + 1] <= bounds[s]) continue;
      if (traj.axis == Axis::Y) {
        emit(bounds[s], bounds[s + 1], true);
      } else if (traj.axis == Axis::X) {
        emit(bounds[s], bounds[s + 1], false);
      } else {
        emit(bounds[s], bounds[s + 1], true);
        emit(bounds[s], bounds[s + 1], false);
      }
    }
  }

  if (noise_rate > 0.0) {
    std::mt19937_64 rng(noise_seed * 0x9e3779b97f4a7c15ULL + scene.seed);
    const std::uint64_t dur_us =
        static_cast<std::uint64_t>(std::llround(traj.duration * 1e6));
    const long long n = std::llround(noise_rate * traj.duration);
    std::uniform_int_distribution<std::uint64_t> dt(0, dur_us);
    std::uniform_int_distribution<std::int32_t> dx(0, cam.width - 1);
    std::uniform_int_distribution<std::int32_t> dy(0, cam.height - 1);
    std::uniform_int_distribution<int> dp(0, 1);
    for (long long i = 0; i < n; ++i) {
      Event e;
      e.t = dt(rng);
      e.x = dx(rng);
      e.y = dy(rng);
      e.p = dp(rng) ? 1 : -1;
      recs.push_back({e, -1});  // noise carries no provenance
    }
  }

  std::stable_sort(recs.begin(), recs.end(),
                   [](const Rec& a, const Rec& b) { return a.e.t < b.e.t; });

  RenderResult out;
  out.imu = make_trajectory(traj).imu;
  out.events.width = cam.width;
  out.events.height = cam.height;
  out.events.events.reserve(recs.size());
  out.provenance.reserve(recs.size());
  for (const Rec& r : recs) {
    out.events.events.push_back(r.e);
    out.provenance.push_back(r.point);
  }
  validate_stream(out.events);
  return out;
}

}  // namespace evstab
