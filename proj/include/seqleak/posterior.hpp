#pragma once

#include <cstdint>
#include <vector>

#include "seqleak/attacks.hpp"
#include "seqleak/rng.hpp"
#include "seqleak/types.hpp"

namespace seqleak {

// Attacker-side picture of the logging recommender: the k and exploration it
// is assumed to run with, and the item catalog it is assumed to sample from.
// These are attacker configuration, deliberately decoupled from the true
// logging RS so model-mismatch experiments are possible.
struct AttackerRsModel {
  int k = 1;
  double exploration = 0.1;
  std::vector<Vec> catalog;
};

// Deduplicated items of the test sequence; the natural catalog assumption
// when the attacker knows nothing beyond X_test.
std::vector<Vec> catalog_from_test_items(const TestFeatures& x);

// Evaluates the per-step recommendation likelihood of the assumed k-NN RS
// replayed over the test sequence under hypothesized labels. Neighbor sets
// are label-independent and precomputed once, so factor evaluation is cheap
// inside enumeration loops.
class SequenceLikelihood {
 public:
  SequenceLikelihood(AttackerRsModel model, TestFeatures x);

  std::size_t size() const { return x_.size(); }
  const AttackerRsModel& model() const { return model_; }

  // Likelihood that item_m was recommended at position m (0-based, time order)
  // given labels[0..m-1]; positions with fewer than k predecessors are cold
  // starts and return 1/|catalog|. Only scope(m) entries of `labels` are read.
  double factor(std::size_t m, const LabelVector& labels) const;

  // Indices (< m) whose labels factor(m) depends on.
  const std::vector<std::size_t>& scope(std::size_t m) const { return scope_[m]; }

  // Neighbor set of the recommended pair (u_m, i_m) itself; drives the
  // sequence-aware clustering.
  const std::vector<std::size_t>& own_neighbors(std::size_t m) const {
    return own_neighbors_[m];
  }

 private:
  AttackerRsModel model_;
  TestFeatures x_;
  // [m][catalog index] -> k nearest prefix positions of (u_m, catalog item).
  std::vector<std::vector<std::vector<std::size_t>>> item_neighbors_;
  std::vector<std::vector<std::size_t>> own_neighbors_;
  std::vector<std::vector<std::size_t>> scope_;
};

// Spec-level convenience wrapper; prefer SequenceLikelihood when evaluating
// many hypotheses. `position` is 0-based.
double recommendation_likelihood(const AttackerRsModel& model, const TestFeatures& x,
                                 const LabelVector& labels, std::size_t position);

// Per-cluster joint distributions over test-label assignments.
class PosteriorModel {
 public:
  PosteriorModel(std::size_t n_test, std::vector<std::vector<std::size_t>> clusters,
                 std::vector<std::vector<double>> tables);

  std::size_t n_test() const { return n_test_; }
  const std::vector<std::vector<std::size_t>>& clusters() const { return clusters_; }
  const std::vector<std::vector<double>>& tables() const { return tables_; }

  // Draws one label vector by sampling every cluster's joint independently.
  LabelVector sample(RngStream& rng) const;

  // P(y_m = 1) per position.
  std::vector<double> marginals() const;

 private:
  std::size_t n_test_;
  std::vector<std::vector<std::size_t>> clusters_;  // sorted member positions
  std::vector<std::vector<double>> tables_;         // bit j of index <-> members[j]
};

// Full-joint posterior by enumeration of all 2^n label vectors with a uniform
// prior. Exact; refuses n_test > 20 (use approximate_posterior instead).
PosteriorModel exact_posterior(const AttackerRsModel& model, const TestFeatures& x);

// Sequence-aware clustering into groups of size <= z: repeatedly seed a
// cluster with a random remaining position, pull companions from the seed's
// neighbor set, and fill any shortfall uniformly from the remaining pool.
std::vector<std::vector<std::size_t>> cluster_test_set(const AttackerRsModel& model,
                                                       const TestFeatures& x, std::size_t z,
                                                       RngStream& rng);

struct ApproxPosteriorOptions {
  std::size_t cluster_size = 5;  // z
  // In-cluster factors whose scope leaks outside the cluster are averaged
  // over the outside labels under independent 0.5 priors: exactly when the
  // outside set is small, by seeded Monte Carlo above this cap.
  std::size_t exact_marginal_cap = 14;
  std::size_t mc_marginal_samples = 128;
};

PosteriorModel approximate_posterior(const AttackerRsModel& model, const TestFeatures& x,
                                     const ApproxPosteriorOptions& options, RngStream& rng);

// Samples queries from the posterior instead of uniformly; informative-set
// bookkeeping and majority finalization follow the boosting attack.
class PostBoostAttacker : public Attacker {
 public:
  PostBoostAttacker(PosteriorModel posterior, RngStream rng, std::string name = "postboost");
  double step(Evaluator& evaluator) override;
  LabelVector finalize() const override;
  std::string name() const override { return name_; }
  const PosteriorModel& posterior() const { return posterior_; }

 private:
  PosteriorModel posterior_;
  InformativeSet informative_;
  std::string name_;
};

}  // namespace seqleak
