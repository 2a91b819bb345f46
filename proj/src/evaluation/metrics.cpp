#include "recallkit/metrics.hpp"

#include "recallkit/error.hpp"

namespace recallkit {

double f1(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

double Confusion::precision() const {
  return tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
}

double Confusion::recall() const {
  return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
}

Confusion confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ArgumentError("confusion: " + std::to_string(y_true.size()) + " labels vs " +
                        std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw ArgumentError("confusion: empty input");
  Confusion c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw ArgumentError("confusion: labels must be 0 or 1");
    if (t == 1) {
      ++(p == 1 ? c.tp : c.fn);
    } else {
      ++(p == 1 ? c.fp : c.tn);
    }
  }
  return c;
}

WeightedScores weighted_scores(const Confusion& c) {
  const double n = static_cast<double>(c.total());
  if (n == 0.0) return {};
  const double w_rich = static_cast<double>(c.tp + c.fn) / n;
  const double w_non = static_cast<double>(c.tn + c.fp) / n;
  const Confusion other = c.flipped();
  return {w_rich * c.precision() + w_non * other.precision(),
          w_rich * c.recall() + w_non * other.recall(),
          w_rich * c.f1() + w_non * other.f1()};
}

}  // namespace recallkit
