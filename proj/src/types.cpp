#include "seqleak/types.hpp"

#include <stdexcept>
#include <string>

namespace seqleak {

double pair_distance(const Vec& u1, const Vec& i1, const Vec& u2, const Vec& i2) {
  if (u1.size() != u2.size() || i1.size() != i2.size())
    throw std::invalid_argument("pair_distance: dimension mismatch");
  double d = 0.0;
  for (std::size_t j = 0; j < u1.size(); ++j) {
    const double diff = u1[j] - u2[j];
    d += diff * diff;
  }
  for (std::size_t j = 0; j < i1.size(); ++j) {
    const double diff = i1[j] - i2[j];
    d += diff * diff;
  }
  return d;
}

std::size_t SequentialDataset::user_dim() const {
  return interactions.empty() ? 0 : interactions.front().user.size();
}

std::size_t SequentialDataset::item_dim() const {
  return interactions.empty() ? 0 : interactions.front().item.size();
}

std::vector<std::size_t> SequentialDataset::test_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == Split::test) idx.push_back(i);
  return idx;
}

LabelVector SequentialDataset::test_labels() const {
  LabelVector labels;
  for (std::size_t i = 0; i < splits.size(); ++i)
    if (splits[i] == Split::test) labels.push_back(interactions[i].label);
  return labels;
}

std::size_t SequentialDataset::test_size() const {
  std::size_t n = 0;
  for (Split s : splits)
    if (s == Split::test) ++n;
  return n;
}

void SequentialDataset::validate() const {
  if (interactions.size() != splits.size())
    throw std::invalid_argument("dataset: interactions/splits size mismatch");
  for (std::size_t i = 0; i < interactions.size(); ++i) {
    const Interaction& it = interactions[i];
    if (it.time < 1)
      throw std::invalid_argument("dataset: time must be >= 1 at row " + std::to_string(i));
    if (i > 0 && interactions[i - 1].time >= it.time)
      throw std::invalid_argument("dataset: times not strictly increasing at row " +
                                  std::to_string(i));
    if (it.user.size() != user_dim() || it.item.size() != item_dim())
      throw std::invalid_argument("dataset: inconsistent vector dimensions at row " +
                                  std::to_string(i));
    if (it.label > 1)
      throw std::invalid_argument("dataset: non-binary label at row " + std::to_string(i));
  }
}

TestFeatures test_features(const SequentialDataset& ds) {
  TestFeatures x;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.splits[i] != Split::test) continue;
    x.users.push_back(ds.interactions[i].user);
    x.items.push_back(ds.interactions[i].item);
    x.times.push_back(ds.interactions[i].time);
  }
  return x;
}

}  // namespace seqleak
