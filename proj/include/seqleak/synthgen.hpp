#pragma once

#include <filesystem>
#include <functional>

#include "seqleak/io.hpp"
#include "seqleak/recsys.hpp"
#include "seqleak/rng.hpp"
#include "seqleak/types.hpp"

namespace seqleak {

// Ground-truth feedback world: planted (user, item) centers with labels; the
// feedback for any pair is the majority label of its k* nearest centers.
// Deterministic in (u, i), so preferences are time-invariant.
struct GroundTruth {
  std::vector<Vec> center_users;
  std::vector<Vec> center_items;
  LabelVector center_labels;
  int k_star = 1;

  int true_feedback(const Vec& user, const Vec& item) const;
};

// Uniform-[0,1]^d centers with balanced labels (first half 1, rest 0, order
// irrelevant to the geometry because positions are random).
GroundTruth random_ground_truth(std::size_t n_centers, std::size_t user_dim,
                                std::size_t item_dim, int k_star, RngStream& rng);

std::vector<Vec> random_catalog(std::size_t n_items, std::size_t item_dim, RngStream& rng);

using UserSampler = std::function<Vec(RngStream&)>;
UserSampler uniform_user_sampler(std::size_t user_dim);

// Runs the recommendation loop for n steps: sample user, logging RS picks an
// item, ground truth labels it, RS observes it. Times are 1..n and every
// interaction is tagged `test` (the synthetic experiments treat the whole
// stream as the evaluation pool; a train split, when wanted, is carved
// afterwards).
SequentialDataset simulate(const GroundTruth& gt, KnnRecommender logging_rs, std::size_t n,
                           const UserSampler& sample_user, RngStream& rng);

// Downsamples the test split to exactly n_test interactions, half per label,
// preserving time order. Kept test samples are drawn uniformly per label
// class; discarded ones are removed outright (never retagged as train).
// Throws with per-label counts when a class is too small or n_test is odd.
SequentialDataset balance_test_split(const SequentialDataset& ds, std::size_t n_test,
                                     RngStream& rng);

// Canonical dataset CSV: `time,split,label,u_0..u_{du-1},i_0..i_{di-1}`.
void write_dataset_csv(const SequentialDataset& ds, const std::filesystem::path& path);
SequentialDataset read_dataset_csv(const std::filesystem::path& path);

// Sidecar recording generation parameters and seeds next to a dataset CSV.
void write_dataset_sidecar(const std::filesystem::path& csv_path, const KeyValueMap& params);

}  // namespace seqleak
