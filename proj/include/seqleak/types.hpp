#pragma once

#include <cstdint>
#include <vector>

namespace seqleak {

using Vec = std::vector<double>;

// Hidden/predicted test labels, index-aligned with the chronological order of
// the test split.
using LabelVector = std::vector<std::uint8_t>;

enum class Split : std::uint8_t { train = 0, test = 1 };

// One timestamped (user, item, label) triple; the atom of every dataset.
struct Interaction {
  Vec user;
  Vec item;
  std::int64_t time = 0;  // unique within a dataset, >= 1
  std::uint8_t label = 0;
};

// Squared-distance between user-item pairs: ||u-u'||^2 + ||i-i'||^2.
double pair_distance(const Vec& u1, const Vec& i1, const Vec& u2, const Vec& i2);

// Chronologically ordered interactions with a train/test tag per entry.
struct SequentialDataset {
  std::vector<Interaction> interactions;
  std::vector<Split> splits;

  std::size_t size() const { return interactions.size(); }
  bool empty() const { return interactions.empty(); }
  std::size_t user_dim() const;
  std::size_t item_dim() const;

  std::vector<std::size_t> test_indices() const;
  LabelVector test_labels() const;
  std::size_t test_size() const;

  // Throws std::invalid_argument when the invariants are broken: parallel
  // arrays, ascending unique positive times, constant vector dimensions.
  void validate() const;
};

// The attacker-visible side of a dataset: ordered test features, no labels.
struct TestFeatures {
  std::vector<Vec> users;
  std::vector<Vec> items;
  std::vector<std::int64_t> times;

  std::size_t size() const { return users.size(); }
};

TestFeatures test_features(const SequentialDataset& ds);

}  // namespace seqleak
