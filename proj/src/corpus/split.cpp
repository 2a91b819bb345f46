#include <algorithm>
#include <cmath>
#include <vector>

#include "recallkit/corpus.hpp"
#include "recallkit/error.hpp"
#include "recallkit/random.hpp"

namespace recallkit {

std::optional<Split> SplitAssignment::split_of(const ImageRecord& record) const {
  const DayKey key{record.user_id, record.day_id};
  if (train_days.contains(key)) return Split::train;
  if (val_days.contains(key)) return Split::val;
  if (test_days.contains(key)) return Split::test;
  return std::nullopt;
}

SplitAssignment day_split(const std::vector<ImageRecord>& images, SplitRatios ratios,
                          std::uint64_t seed) {
  if (images.empty()) throw ArgumentError("day_split: empty corpus");
  if (!(ratios.train > 0.0 && ratios.val > 0.0 && ratios.test > 0.0)) {
    throw ArgumentError("day_split: every ratio must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-6) {
    throw ArgumentError("day_split: ratios must sum to 1");
  }

  std::set<DayKey> unique;
  for (const auto& rec : images) unique.insert({rec.user_id, rec.day_id});
  const std::size_t total = unique.size();
  if (total < 3) {
    throw ValidationError("day_split: need at least 3 distinct days, found " +
                          std::to_string(total));
  }

  // Every split keeps at least one day; validation/test shrink if train would be empty.
  auto rounded = [total](double r) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(r * total)));
  };
  std::size_t n_val = rounded(ratios.val);
  std::size_t n_test = rounded(ratios.test);
  while (n_val + n_test > total - 1) {
    if (n_val >= n_test && n_val > 1) {
      --n_val;
    } else {
      --n_test;
    }
  }

  std::vector<DayKey> days(unique.begin(), unique.end());
  Rng rng(seed);
  rng.shuffle(days);

  SplitAssignment out;
  out.seed = seed;
  for (std::size_t i = 0; i < days.size(); ++i) {
    if (i < n_val) {
      out.val_days.insert(days[i]);
    } else if (i < n_val + n_test) {
      out.test_days.insert(days[i]);
    } else {
      out.train_days.insert(days[i]);
    }
  }
  return out;
}

}  // namespace recallkit
