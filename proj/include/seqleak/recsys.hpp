#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seqleak/rng.hpp"
#include "seqleak/types.hpp"

namespace seqleak {

// k-NN feedback classifier over observed interactions plus the
// exploration-weighted item sampler. One instance is single-owner and mutated
// strictly in time order; independent instances may run in parallel.
class KnnRecommender {
 public:
  // exploration in [0,1]: 1 = no preference between predicted-liked and
  // predicted-disliked items, 0 = only predicted-liked items.
  KnnRecommender(int k, double exploration, std::vector<Vec> catalog, bool no_repeat = false);

  // Time stamps of the k observed interactions closest to (user, item) under
  // ||u-u'||^2 + ||i-i'||^2, restricted to history with time < upto_time.
  // Distance ties break toward the smaller time stamp. Throws when fewer than
  // k prior entries exist (cold start); classify/recommend guard for that.
  std::vector<std::int64_t> neighbors(const Vec& user, const Vec& item,
                                      std::int64_t upto_time) const;

  // Majority label of the k nearest observed interactions; nullopt on cold
  // start.
  std::optional<int> classify(const Vec& user, const Vec& item, std::int64_t upto_time) const;

  // Samples a catalog item: predicted-liked items carry weight 1, predicted-
  // disliked items weight `exploration`. Cold start, or exploration == 0 with
  // no predicted-liked item, falls back to uniform over the catalog.
  std::size_t recommend_index(const Vec& user, std::int64_t time, RngStream& rng) const;
  Vec recommend(const Vec& user, std::int64_t time, RngStream& rng) const;

  // Appends one observed interaction; its time must exceed all history times.
  void observe(const Interaction& interaction);

  int k() const { return k_; }
  double exploration() const { return exploration_; }
  const std::vector<Vec>& catalog() const { return catalog_; }
  const std::vector<Interaction>& history() const { return history_; }

  // Per-item probabilities implied by the exploration rule for the classifier
  // state at `time` for this user; sums to 1 over the catalog. Used by tests
  // and by the posterior attack's likelihood.
  std::vector<double> recommendation_probabilities(const Vec& user, std::int64_t time) const;

 private:
  std::size_t history_before(std::int64_t upto_time) const;

  int k_;
  double exploration_;
  std::vector<Vec> catalog_;
  bool no_repeat_;
  std::vector<Interaction> history_;
};

}  // namespace seqleak
