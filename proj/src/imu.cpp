#include "evstab/imu.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace evstab {

namespace {

Group make_group(const ImuSequence& seq, GroupKind kind, int first, int last) {
  Group g;
  g.kind = kind;
  g.first = first;
  g.last = last;
  g.t_start = seq.samples[first].t;
  g.t_end = seq.samples[last].t;
  g.n_imu = last - first + 1;
  return g;
}

Axis span_dominant_axis(const ImuSequence& seq, int first, int last) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (int i = first; i <= last; ++i) acc += seq.samples[i].omega.cwiseAbs();
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (acc[k] > acc[best]) best = k;  // ties keep the earliest axis
  return static_cast<Axis>(best);
}

}  // namespace

const char* to_string(GroupKind kind) {
  return kind == GroupKind::Stable ? "stable" : "active";
}

ImuSequence to_camera_frame(const ImuSequence& seq, const Eigen::Matrix3d& r_ci) {
  const Eigen::Matrix3d residual =
      r_ci * r_ci.transpose() - Eigen::Matrix3d::Identity();
  if (residual.cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(r_ci.determinant() - 1.0) > 1e-9)
    fail(ErrorKind::NonOrthonormalRotation,
         "extrinsic rotation is not a proper rotation matrix");
  ImuSequence out;
  out.samples.reserve(seq.samples.size());
  for (const ImuSample& s : seq.samples)
    out.samples.push_back({s.t, r_ci * s.omega, r_ci * s.accel});
  return out;
}

RotationAngles integrate_rotation(const ImuSequence& seq, std::uint64_t t0,
                                  std::uint64_t t1) {
  if (seq.samples.size() < 2)
    fail(ErrorKind::EmptySequence, "integration needs at least 2 samples");
  if (t0 > t1)
    fail(ErrorKind::SpanOutsideSequence,
         "inverted span [" + std::to_string(t0) + ", " + std::to_string(t1) + "]");
  const auto& samples = seq.samples;
  if (t0 < samples.front().t || t1 > samples.back().t)
    fail(ErrorKind::SpanOutsideSequence,
         "[" + std::to_string(t0) + ", " + std::to_string(t1) +
             "] outside sampled [" + std::to_string(samples.front().t) + ", " +
             std::to_string(samples.back().t) + "]");

  // Largest i with samples[i].t <= t, clamped so [i, i+1] is a segment.
  auto segment_of = [&](std::uint64_t t) -> std::size_t {
    auto it = std::upper_bound(
        samples.begin(), samples.end(), t,
        [](std::uint64_t v, const ImuSample& s) { return v < s.t; });
    std::size_t i = static_cast<std::size_t>(it - samples.begin()) - 1;
    return std::min(i, samples.size() - 2);
  };
  auto omega_at = [&](std::size_t i, std::uint64_t t) -> Eigen::Vector3d {
    const ImuSample& a = samples[i];
    const ImuSample& b = samples[i + 1];
    const double w = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
    return a.omega + w * (b.omega - a.omega);
  };
  auto trapezoid = [](const Eigen::Vector3d& wa, const Eigen::Vector3d& wb,
                      std::uint64_t ta, std::uint64_t tb) -> Eigen::Vector3d {
    return (wa + wb) * (0.5e-6 * static_cast<double>(tb - ta));
  };

  const std::size_t i0 = segment_of(t0);
  const std::size_t i1 = segment_of(t1);
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  if (i0 == i1) {
    acc = trapezoid(omega_at(i0, t0), omega_at(i0, t1), t0, t1);
  } else {
    acc = trapezoid(omega_at(i0, t0), samples[i0 + 1].omega, t0, samples[i0 + 1].t);
    for (std::size_t i = i0 + 1; i < i1; ++i)
      acc += trapezoid(samples[i].omega, samples[i + 1].omega, samples[i].t,
                       samples[i + 1].t);
    acc += trapezoid(samples[i1].omega, omega_at(i1, t1), samples[i1].t, t1);
  }
  return {acc.x(), acc.y(), acc.z()};
}

Axis dominant_axis(const ImuSequence& seq) {
  if (seq.empty())
    fail(ErrorKind::EmptySequence, "dominant axis of an empty sequence");
  return span_dominant_axis(seq, 0, static_cast<int>(seq.size()) - 1);
}

std::vector<Group> segment_stable_active(const ImuSequence& seq, double t_stable) {
  if (seq.empty()) fail(ErrorKind::EmptySequence, "cannot segment an empty sequence");
  const int d = static_cast<int>(dominant_axis(seq));
  const int n = static_cast<int>(seq.size());
  auto kind_of = [&](int i) {
    return std::abs(seq.samples[i].omega[d]) <= t_stable ? GroupKind::Stable
                                                         : GroupKind::Active;
  };
  std::vector<Group> out;
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || kind_of(i) != kind_of(start)) {
      out.push_back(make_group(seq, kind_of(start), start, i - 1));
      start = i;
    }
  }
  return out;
}

std::vector<std::pair<int, int>> refine_active_group(std::span<const double> omega) {
  const int n = static_cast<int>(omega.size());
  if (n == 0) return {};

  // Sign runs. Active samples are never exactly zero (|omega| > t_stable >= 0)
  // but zeros would side with the positives.
  auto sgn = [](double v) { return v < 0.0 ? -1 : 1; };
  std::vector<std::pair<int, int>> runs;
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || sgn(omega[i]) != sgn(omega[start])) {
      runs.emplace_back(start, i - 1);
      start = i;
    }
  }

  // Peak split: acceleration phase [a, k], deceleration phase [k+1, b].
  std::vector<std::pair<int, int>> phases;
  for (const auto& [a, b] : runs) {
    int k = a;
    for (int i = a + 1; i <= b; ++i)
      if (std::abs(omega[i]) > std::abs(omega[k])) k = i;
    phases.emplace_back(a, k);
    if (k + 1 <= b) phases.emplace_back(k + 1, b);
  }

  // Energy split after the smallest prefix reaching half the signed total;
  // a phase with no qualifying prefix stays whole.
  std::vector<std::pair<int, int>> out;
  for (const auto& [a, b] : phases) {
    double total = 0.0;
    for (int i = a; i <= b; ++i) total += omega[i];
    const double half = 0.5 * total;
    int j = b;
    double cum = 0.0;
    for (int i = a; i <= b; ++i) {
      cum += omega[i];
      if (cum >= half) {
        j = i;
        break;
      }
    }
    out.emplace_back(a, j);
    if (j + 1 <= b) out.emplace_back(j + 1, b);
  }
  return out;
}

std::vector<Group> regularize_groups(std::vector<Group> groups,
                                     const ImuSequence& seq, int n_min,
                                     int n_max) {
  if (n_min < 1 || n_max < n_min)
    fail(ErrorKind::InvariantViolation, "need 1 <= n_min <= n_max");
  if (groups.empty()) return groups;

  // Merge pass: a short group is absorbed by its successor (taking the
  // successor's kind); a short final group merges backward.
  std::vector<Group> merged;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    Group g = groups[i];
    while (g.n_imu < n_min && i + 1 < groups.size()) {
      ++i;
      g = make_group(seq, groups[i].kind, g.first, groups[i].last);
    }
    if (g.n_imu < n_min && !merged.empty()) {
      const Group& prev = merged.back();
      merged.back() = make_group(seq, prev.kind, prev.first, g.last);
    } else {
      merged.push_back(g);
    }
  }

  // Split pass: recursive midpoint bisection, left half floor-sized.
  std::vector<Group> out;
  auto split = [&](auto&& self, const Group& g) -> void {
    if (g.n_imu <= n_max) {
      out.push_back(g);
      return;
    }
    const int left = g.n_imu / 2;
    self(self, make_group(seq, g.kind, g.first, g.first + left - 1));
    self(self, make_group(seq, g.kind, g.first + left, g.last));
  };
  for (const Group& g : merged) split(split, g);
  return out;
}

double scaling_factor(int n_imu, const CompensationConfig& cfg) {
  if (n_imu < 0)
    fail(ErrorKind::InvariantViolation, "n_imu must be non-negative");
  return cfg.gamma_min + (cfg.gamma_max - cfg.gamma_min) / (cfg.a * n_imu + cfg.b);
}

GroupSet group_imu(const ImuSequence& seq, const CompensationConfig& cfg) {
  validate_config(cfg);
  if (seq.empty()) fail(ErrorKind::EmptySequence, "cannot group an empty sequence");
  validate_imu(seq);

  const int d = static_cast<int>(dominant_axis(seq));
  std::vector<Group> refined;
  for (const Group& g : segment_stable_active(seq, cfg.t_stable)) {
    if (g.kind == GroupKind::Stable) {
      refined.push_back(g);
      continue;
    }
    std::vector<double> vals(static_cast<std::size_t>(g.n_imu));
    for (int i = 0; i < g.n_imu; ++i)
      vals[static_cast<std::size_t>(i)] = seq.samples[g.first + i].omega[d];
    for (const auto& [a, b] : refine_active_group(vals))
      refined.push_back(make_group(seq, GroupKind::Active, g.first + a, g.first + b));
  }

  GroupSet set;
  set.groups = regularize_groups(std::move(refined), seq, cfg.n_min, cfg.n_max);
  set.dominant_axis.reserve(set.groups.size());
  for (Group& g : set.groups) {
    g.gamma = scaling_factor(g.n_imu, cfg);
    set.dominant_axis.push_back(span_dominant_axis(seq, g.first, g.last));
  }
  return set;
}

}  // namespace evstab
