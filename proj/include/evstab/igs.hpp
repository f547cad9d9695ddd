#pragma once

#include <utility>
#include <vector>

#include "evstab/core.hpp"
#include "evstab/frame.hpp"

namespace evstab {

// Per-frame scores for one greedy iteration.
struct FrameScores {
  Eigen::VectorXd rel;   // min-max normalized event count
  Eigen::VectorXd qual;  // min-max normalized contrast (count variance)
  Eigen::VectorXd uni;   // temporal uniqueness vs the selected set
  Eigen::VectorXd div;   // spatial diversity vs the selected set
  Eigen::VectorXd comb;  // weighted combination
};

// Min-max normalized event count and contrast; a degenerate axis (all equal)
// normalizes to 0.5.
std::pair<Eigen::VectorXd, Eigen::VectorXd> intrinsic_scores(
    const std::vector<EventFrame>& frames);

// Temporal uniqueness 1 - exp(-d / (tau * N / K)) with d the index distance to
// the nearest selected frame, and diversity 1 - max cosine similarity of
// pooled count histograms against the selected set. Two all-zero histograms
// count as identical (similarity 1); zero versus non-zero as disjoint (0).
std::pair<double, double> suppression_scores(int i, const std::vector<int>& selected,
                                             const std::vector<EventFrame>& frames,
                                             const IgsConfig& cfg);

double combined_score(double rel, double qual, double uni, double div,
                      const IgsConfig& cfg);

// All scores for one iteration given the current selected set. With an empty
// selected set uni and div are zero and comb carries intrinsic terms only.
FrameScores score_frames(const std::vector<EventFrame>& frames,
                         const std::vector<int>& selected, const IgsConfig& cfg);

// Iterative greedy selection of cfg.k keyframes: the first pick maximizes
// intrinsic merit alone, later picks the full combined score; ties prefer the
// lowest index. Returns ascending distinct indices.
// Errors: KExceedsFrameCount, InvariantViolation.
std::vector<int> igs_select(const std::vector<EventFrame>& frames,
                            const IgsConfig& cfg);

}  // namespace evstab
