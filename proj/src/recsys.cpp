#include "seqleak/recsys.hpp"

#include <algorithm>
#include <stdexcept>

#include "seqleak/risk.hpp"

namespace seqleak {

KnnRecommender::KnnRecommender(int k, double exploration, std::vector<Vec> catalog,
                               bool no_repeat)
    : k_(k), exploration_(exploration), catalog_(std::move(catalog)), no_repeat_(no_repeat) {
  if (k_ < 1) throw std::invalid_argument("recommender: k must be >= 1");
  if (exploration_ < 0.0 || exploration_ > 1.0)
    throw std::invalid_argument("recommender: exploration must be in [0,1]");
  if (catalog_.empty()) throw std::invalid_argument("recommender: empty catalog");
}

std::size_t KnnRecommender::history_before(std::int64_t upto_time) const {
  // History is time-ordered, so the prefix below upto_time is contiguous.
  std::size_t n = history_.size();
  while (n > 0 && history_[n - 1].time >= upto_time) --n;
  return n;
}

std::vector<std::int64_t> KnnRecommender::neighbors(const Vec& user, const Vec& item,
                                                    std::int64_t upto_time) const {
  const std::size_t n = history_before(upto_time);
  if (n < static_cast<std::size_t>(k_))
    throw std::logic_error("recommender: cold start, fewer than k prior observations");

  // Exact linear scan; (distance, time) pairs sorted so ties go to the
  // earlier time stamp.
  std::vector<std::pair<double, std::int64_t>> best;
  best.reserve(k_ + 1);
  for (std::size_t j = 0; j < n; ++j) {
    const Interaction& h = history_[j];
    const double d = pair_distance(user, item, h.user, h.item);
    const std::pair<double, std::int64_t> cand{d, h.time};
    if (best.size() == static_cast<std::size_t>(k_) && !(cand < best.back())) continue;
    best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
    if (best.size() > static_cast<std::size_t>(k_)) best.pop_back();
  }
  std::vector<std::int64_t> stamps;
  stamps.reserve(best.size());
  for (const auto& [d, t] : best) stamps.push_back(t);
  return stamps;
}

std::optional<int> KnnRecommender::classify(const Vec& user, const Vec& item,
                                            std::int64_t upto_time) const {
  if (history_before(upto_time) < static_cast<std::size_t>(k_)) return std::nullopt;
  const auto stamps = neighbors(user, item, upto_time);
  std::size_t ones = 0;
  for (std::int64_t t : stamps) {
    // History prefix is time-ordered; binary search by time.
    const auto it = std::lower_bound(history_.begin(), history_.end(), t,
                                     [](const Interaction& h, std::int64_t x) { return h.time < x; });
    ones += it->label != 0;
  }
  return majority_count(ones, stamps.size());
}

std::vector<double> KnnRecommender::recommendation_probabilities(const Vec& user,
                                                                 std::int64_t time) const {
  const std::size_t n_items = catalog_.size();
  std::vector<double> probs(n_items, 1.0 / static_cast<double>(n_items));
  if (history_before(time) < static_cast<std::size_t>(k_)) return probs;  // cold start

  std::vector<std::uint8_t> liked(n_items, 0);
  std::size_t n_pos = 0;
  for (std::size_t c = 0; c < n_items; ++c) {
    const int pred = *classify(user, catalog_[c], time);
    liked[c] = static_cast<std::uint8_t>(pred);
    n_pos += pred;
  }
  const std::size_t n_neg = n_items - n_pos;
  if (n_pos == 0 && exploration_ == 0.0) return probs;  // degenerate, stay uniform

  const double denom =
      exploration_ * static_cast<double>(n_neg) + static_cast<double>(n_pos);
  for (std::size_t c = 0; c < n_items; ++c)
    probs[c] = liked[c] ? 1.0 / denom : exploration_ / denom;
  return probs;
}

std::size_t KnnRecommender::recommend_index(const Vec& user, std::int64_t time,
                                            RngStream& rng) const {
  std::vector<double> probs = recommendation_probabilities(user, time);

  if (no_repeat_) {
    // Zero out items already shown to an identical user vector; renormalize.
    double kept = 0.0;
    for (std::size_t c = 0; c < catalog_.size(); ++c) {
      bool seen = false;
      for (const Interaction& h : history_)
        if (h.user == user && h.item == catalog_[c]) { seen = true; break; }
      if (seen) probs[c] = 0.0;
      kept += probs[c];
    }
    if (kept <= 0.0) {
      probs.assign(catalog_.size(), 1.0 / static_cast<double>(catalog_.size()));
    } else {
      for (double& p : probs) p /= kept;
    }
  }

  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    acc += probs[c];
    if (u < acc) return c;
  }
  return probs.size() - 1;  // guard against accumulated rounding
}

Vec KnnRecommender::recommend(const Vec& user, std::int64_t time, RngStream& rng) const {
  return catalog_[recommend_index(user, time, rng)];
}

void KnnRecommender::observe(const Interaction& interaction) {
  if (!history_.empty() && interaction.time <= history_.back().time)
    throw std::invalid_argument("recommender: out-of-order observation");
  if (interaction.time < 1)
    throw std::invalid_argument("recommender: time must be >= 1");
  history_.push_back(interaction);
}

}  // namespace seqleak
