#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ghsim/core/random.hpp"

namespace ghsim {

inline constexpr double kDefaultHalfLifeDays = 30.0;

/// Weight of an event aged `age_days`: 0.5^(age / half_life).
inline double decay_weight(double age_days, double half_life_days = kDefaultHalfLifeDays) {
  return std::exp2(-age_days / half_life_days);
}

/// Items ordered by score (descending, ties by item id), sampled with
/// probability proportional to score.
class RankModel {
 public:
  RankModel() = default;

  /// scores[i] is the score of item i; zero-score items are kept but never drawn.
  explicit RankModel(std::vector<double> scores) : scores_(std::move(scores)) {
    items_.resize(scores_.size());
    std::iota(items_.begin(), items_.end(), 0u);
    std::stable_sort(items_.begin(), items_.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return scores_[a] > scores_[b]; });
    sampler_.assign(scores_);
  }

  bool empty() const { return sampler_.empty(); }
  std::size_t size() const { return scores_.size(); }
  const std::vector<std::uint32_t>& items() const { return items_; }
  double score(std::uint32_t item) const { return scores_[item]; }
  double total() const { return sampler_.total(); }
  double probability(std::uint32_t item) const { return sampler_.probability(item); }

  template <class G>
  std::uint32_t sample(G& g) const {
    if (empty()) fail(ErrorCode::EmptyRank, "rank model has no positive scores");
    return static_cast<std::uint32_t>(sampler_.sample(g));
  }

  template <class Archive>
  void save(Archive& ar) const {
    ar(scores_);
  }
  template <class Archive>
  void load(Archive& ar) {
    std::vector<double> s;
    ar(s);
    *this = RankModel(std::move(s));
  }

 private:
  std::vector<double> scores_;
  std::vector<std::uint32_t> items_;
  DiscreteSampler sampler_;
};

}  // namespace ghsim
