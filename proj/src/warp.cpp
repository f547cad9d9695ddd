#include "evstab/warp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

namespace evstab {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
// Keeps tan() finite; beta this close to +-pi/2 maps off any real sensor.
constexpr double kTangentMargin = 1e-9;

double elapsed_us(std::chrono::steady_clock::time_point a,
                  std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::micro>(b - a).count();
}

}  // namespace

double incidence_angle(double rel, double rho) { return std::atan(rel / rho); }

double translation_component(double rel, double rot, double rho) {
  const double beta = std::atan(rel / rho) - rot;
  if (std::abs(beta) >= kHalfPi - kTangentMargin)
    fail(ErrorKind::TangentDomain,
         "view angle " + std::to_string(beta) + " rad too close to +-pi/2");
  return rel - rho * std::tan(beta);
}

Eigen::Vector2d warp_event(const Event& ev, const RotationAngles& rot,
                           const CameraModel& cam, BetaAxes beta_axes) {
  if (rot.is_zero())
    return {static_cast<double>(ev.x), static_cast<double>(ev.y)};
  if (std::abs(rot.phi) >= kHalfPi || std::abs(rot.theta) >= kHalfPi ||
      std::abs(rot.psi) >= kHalfPi)
    fail(ErrorKind::TangentDomain, "integrated rotation beyond +-pi/2");

  const double rho = cam.rho();
  const double rx = static_cast<double>(ev.x) - cam.cx;
  const double ry = static_cast<double>(ev.y) - cam.cy;
  const double tx = translation_component(rx, rot.theta, rho);
  const double rot_y = beta_axes == BetaAxes::Phi ? rot.phi : rot.psi;
  const double ty = translation_component(ry, rot_y, rho);
  const double c = std::cos(rot.psi);
  const double s = std::sin(rot.psi);
  return {c * rx - s * ry - tx + cam.cx, s * rx + c * ry - ty + cam.cy};
}

std::optional<Event> scale_and_round(const Event& orig,
                                     const Eigen::Vector2d& warped, double gamma,
                                     std::int32_t width, std::int32_t height) {
  if (!(gamma >= 1.0))
    fail(ErrorKind::InvariantViolation, "gamma must be >= 1");
  const double fx = orig.x + gamma * (warped.x() - orig.x);
  const double fy = orig.y + gamma * (warped.y() - orig.y);
  const long long ix = std::llround(fx);  // half away from zero
  const long long iy = std::llround(fy);
  if (ix < 0 || ix >= width || iy < 0 || iy >= height) return std::nullopt;
  Event out = orig;
  out.x = static_cast<std::int32_t>(ix);
  out.y = static_cast<std::int32_t>(iy);
  return out;
}

CompensationResult compensate_stream(const EventStream& stream,
                                     const ImuSequence& imu,
                                     const CameraModel& cam,
                                     const CompensationConfig& cfg) {
  using clock = std::chrono::steady_clock;
  validate_camera(cam);
  validate_config(cfg);

  CompensationResult res;
  res.stream.width = stream.width;
  res.stream.height = stream.height;

  const auto grouping_start = clock::now();
  const ImuSequence imu_cam = to_camera_frame(imu, cam.r_ci);
  res.groups = group_imu(imu_cam, cfg);
  res.timings.grouping_us = elapsed_us(grouping_start, clock::now());

  const auto& samples = imu_cam.samples;
  const auto& groups = res.groups.groups;
  if (!stream.events.empty()) {
    if (samples.size() < 2)
      fail(ErrorKind::EmptySequence, "integration needs at least 2 IMU samples");
    if (stream.events.front().t < samples.front().t ||
        stream.events.back().t > samples.back().t)
      fail(ErrorKind::ImuDoesNotCoverEvents,
           "events span [" + std::to_string(stream.events.front().t) + ", " +
               std::to_string(stream.events.back().t) + "], IMU covers [" +
               std::to_string(samples.front().t) + ", " +
               std::to_string(samples.back().t) + "]");
  }

  std::uint64_t t_ref = samples.front().t;
  switch (cfg.warp_reference) {
    case WarpReference::Start: break;
    case WarpReference::Mid:
      t_ref += (samples.back().t - samples.front().t) / 2;
      break;
    case WarpReference::End:
      t_ref = samples.back().t;
      break;
  }

  // Cumulative trapezoid integral at each sample; the pose angle at any t is
  // prefix[i] plus a partial trapezoid, so the per-event integration below is
  // O(1) amortized for a sorted stream.
  std::vector<Eigen::Vector3d> prefix(samples.size(), Eigen::Vector3d::Zero());
  for (std::size_t i = 1; i < samples.size(); ++i)
    prefix[i] = prefix[i - 1] +
                (samples[i - 1].omega + samples[i].omega) *
                    (0.5e-6 * static_cast<double>(samples[i].t - samples[i - 1].t));
  auto angle_at = [&](std::size_t seg, std::uint64_t t) -> Eigen::Vector3d {
    const ImuSample& a = samples[seg];
    const ImuSample& b = samples[seg + 1];
    const double w =
        static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
    const Eigen::Vector3d omega_t = a.omega + w * (b.omega - a.omega);
    return prefix[seg] +
           (a.omega + omega_t) * (0.5e-6 * static_cast<double>(t - a.t));
  };
  auto segment_of = [&](std::uint64_t t) -> std::size_t {
    std::size_t seg = 0;
    while (seg + 2 < samples.size() && samples[seg + 1].t <= t) ++seg;
    return seg;
  };
  const Eigen::Vector3d ref_angle =
      samples.size() >= 2 ? angle_at(segment_of(t_ref), t_ref)
                          : Eigen::Vector3d::Zero();

  const auto warping_start = clock::now();
  std::vector<std::uint32_t> group_of;
  group_of.reserve(stream.events.size());
  res.stream.events.reserve(stream.events.size());
  res.kept.reserve(stream.events.size());

  std::size_t seg = 0;
  std::uint32_t gi = 0;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const Event& e = stream.events[i];
    while (gi + 1 < groups.size() && e.t >= groups[gi + 1].t_start) ++gi;
    while (seg + 2 < samples.size() && samples[seg + 1].t <= e.t) ++seg;

    const Eigen::Vector3d ang = angle_at(seg, e.t) - ref_angle;
    const RotationAngles rot{ang.x(), ang.y(), ang.z()};
    const double gamma = cfg.apply_scaling ? groups[gi].gamma : 1.0;
    try {
      const Eigen::Vector2d warped = warp_event(e, rot, cam, cfg.beta_axes);
      if (auto out = scale_and_round(e, warped, gamma, stream.width, stream.height)) {
        res.stream.events.push_back(*out);
        res.kept.push_back(i);
        group_of.push_back(gi);
      } else {
        ++res.dropped;
      }
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::TangentDomain) throw;
      ++res.dropped;  // unwarpable under this rotation
    }
  }
  res.timings.warping_us = elapsed_us(warping_start, clock::now());

  const auto accumulation_start = clock::now();
  if (!stream.events.empty()) {
    const std::uint64_t ev0 = stream.events.front().t;
    const std::uint64_t ev1 = stream.events.back().t;
    std::size_t cursor = 0;
    for (std::uint32_t g = 0; g < groups.size(); ++g) {
      const bool is_last = g + 1 == groups.size();
      const std::uint64_t own_start = groups[g].t_start;
      const std::uint64_t own_end = is_last ? groups[g].t_end : groups[g + 1].t_start;
      const bool intersects =
          own_start <= ev1 && (is_last ? own_end >= ev0 : own_end > ev0);
      if (!intersects) continue;

      std::size_t begin = cursor;
      while (cursor < group_of.size() && group_of[cursor] == g) ++cursor;
      res.frames.push_back(accumulate_frame(
          std::span<const Event>(res.stream.events.data() + begin, cursor - begin),
          stream.width, stream.height, own_start, own_end));
      res.group_spans.emplace_back(own_start, own_end);
    }
  }
  res.timings.accumulation_us = elapsed_us(accumulation_start, clock::now());
  return res;
}

}  // namespace evstab
