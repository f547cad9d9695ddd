#include "evstab/igs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evstab/metrics.hpp"

namespace evstab {

namespace {

Eigen::VectorXd minmax_normalize(const Eigen::VectorXd& v) {
  if (v.size() == 0) return v;
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  if (hi == lo) return Eigen::VectorXd::Constant(v.size(), 0.5);
  return (v.array() - lo) / (hi - lo);
}

Eigen::VectorXd pooled_histogram(const EventFrame& f, int bins) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(bins * bins);
  for (int y = 0; y < f.height; ++y) {
    const int by = static_cast<int>(static_cast<std::int64_t>(y) * bins / f.height);
    for (int x = 0; x < f.width; ++x) {
      const int bx = static_cast<int>(static_cast<std::int64_t>(x) * bins / f.width);
      h[by * bins + bx] += f.pos_count(y, x) + f.neg_count(y, x);
    }
  }
  return h;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 && nb == 0.0) return 1.0;  // two empty frames look identical
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

struct Workspace {
  Eigen::VectorXd rel;
  Eigen::VectorXd qual;
  std::vector<Eigen::VectorXd> hists;
};

Workspace build_workspace(const std::vector<EventFrame>& frames,
                          const IgsConfig& cfg) {
  const int n = static_cast<int>(frames.size());
  Eigen::VectorXd counts(n), contrast(n);
  Workspace ws;
  ws.hists.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& f = frames[static_cast<std::size_t>(i)];
    counts[i] = static_cast<double>(frame_stats(f).event_count);
    contrast[i] = frame_contrast(f);
    ws.hists.push_back(pooled_histogram(f, cfg.hist_bins));
  }
  ws.rel = minmax_normalize(counts);
  ws.qual = minmax_normalize(contrast);
  return ws;
}

std::pair<double, double> suppression_from(const Workspace& ws, int i,
                                           const std::vector<int>& selected,
                                           int n, const IgsConfig& cfg) {
  if (selected.empty()) return {0.0, 0.0};
  int d = std::numeric_limits<int>::max();
  double max_sim = -1.0;
  for (int j : selected) {
    d = std::min(d, std::abs(i - j));
    max_sim = std::max(max_sim, cosine_similarity(ws.hists[static_cast<std::size_t>(i)],
                                                  ws.hists[static_cast<std::size_t>(j)]));
  }
  const double scale = cfg.tau * static_cast<double>(n) / static_cast<double>(cfg.k);
  const double uni = 1.0 - std::exp(-static_cast<double>(d) / scale);
  const double div = 1.0 - max_sim;
  return {uni, div};
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> intrinsic_scores(
    const std::vector<EventFrame>& frames) {
  const int n = static_cast<int>(frames.size());
  Eigen::VectorXd counts(n), contrast(n);
  for (int i = 0; i < n; ++i) {
    const auto& f = frames[static_cast<std::size_t>(i)];
    counts[i] = static_cast<double>(frame_stats(f).event_count);
    contrast[i] = frame_contrast(f);
  }
  return {minmax_normalize(counts), minmax_normalize(contrast)};
}

std::pair<double, double> suppression_scores(int i, const std::vector<int>& selected,
                                             const std::vector<EventFrame>& frames,
                                             const IgsConfig& cfg) {
  validate_config(cfg);
  const int n = static_cast<int>(frames.size());
  if (i < 0 || i >= n)
    fail(ErrorKind::InvariantViolation, "frame index out of range");
  const Workspace ws = build_workspace(frames, cfg);
  return suppression_from(ws, i, selected, n, cfg);
}

double combined_score(double rel, double qual, double uni, double div,
                      const IgsConfig& cfg) {
  return cfg.w_rel * rel + cfg.w_q * qual + cfg.w_u * uni + cfg.w_d * div;
}

FrameScores score_frames(const std::vector<EventFrame>& frames,
                         const std::vector<int>& selected, const IgsConfig& cfg) {
  validate_config(cfg);
  const int n = static_cast<int>(frames.size());
  const Workspace ws = build_workspace(frames, cfg);
  FrameScores s;
  s.rel = ws.rel;
  s.qual = ws.qual;
  s.uni = Eigen::VectorXd::Zero(n);
  s.div = Eigen::VectorXd::Zero(n);
  s.comb = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const auto [uni, div] = suppression_from(ws, i, selected, n, cfg);
    s.uni[i] = uni;
    s.div[i] = div;
    s.comb[i] = combined_score(s.rel[i], s.qual[i], uni, div, cfg);
  }
  return s;
}

std::vector<int> igs_select(const std::vector<EventFrame>& frames,
                            const IgsConfig& cfg) {
  validate_config(cfg);
  const int n = static_cast<int>(frames.size());
  if (cfg.k > n)
    fail(ErrorKind::KExceedsFrameCount,
         "k=" + std::to_string(cfg.k) + " exceeds " + std::to_string(n) +
             " frames");

  const Workspace ws = build_workspace(frames, cfg);
  std::vector<int> selected;
  selected.reserve(static_cast<std::size_t>(cfg.k));
  std::vector<bool> taken(static_cast<std::size_t>(n), false);

  // First pick rests on intrinsic merit alone; strict > keeps the lowest
  // index on ties.
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double s = cfg.w_rel * ws.rel[i] + cfg.w_q * ws.qual[i];
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  selected.push_back(best);
  taken[static_cast<std::size_t>(best)] = true;

  while (static_cast<int>(selected.size()) < cfg.k) {
    best = -1;
    best_score = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      const auto [uni, div] = suppression_from(ws, i, selected, n, cfg);
      const double s = combined_score(ws.rel[i], ws.qual[i], uni, div, cfg);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    selected.push_back(best);
    taken[static_cast<std::size_t>(best)] = true;
  }

  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace evstab
