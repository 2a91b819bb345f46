#pragma once

#include <cstddef>
#include <span>

namespace recallkit {

/// 2pr / (p + r); 0 when both are 0.
double f1(double precision, double recall);

/// Binary confusion counts with rich (label 1) as the positive class.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  double precision() const;  // 0 when nothing was predicted positive
  double recall() const;     // 0 when there are no positives
  double f1() const { return recallkit::f1(precision(), recall()); }

  /// Same counts with nonrich as the positive class.
  Confusion flipped() const { return {tn, fn, tp, fp}; }

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Throws ArgumentError on length mismatch, empty input, or labels other than 0/1.
Confusion confusion(std::span<const int> y_true, std::span<const int> y_pred);

/// Per-class precision/recall/F1 averaged with class-support weights.
struct WeightedScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

WeightedScores weighted_scores(const Confusion& c);

}  // namespace recallkit
