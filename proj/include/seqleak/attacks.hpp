#pragma once

#include <limits>
#include <string>
#include <vector>

#include "seqleak/evaluators.hpp"
#include "seqleak/rng.hpp"
#include "seqleak/types.hpp"

namespace seqleak {

// Adaptive query-generating agent. Attackers see the number of test samples,
// possibly the ordered test features, and the evaluator's scalar reports —
// never train data or test labels. One attacker/evaluator session is strictly
// sequential.
class Attacker {
 public:
  explicit Attacker(RngStream rng) : rng_(rng), fallback_(rng.derive(0x66616c6c)) {}
  virtual ~Attacker() = default;

  // Generates one query, submits it, updates internal state. Returns the
  // mechanism's report.
  virtual double step(Evaluator& evaluator) = 0;

  // Current final prediction. Const and repeatable: calling it between steps
  // never perturbs the attack's own randomness.
  virtual LabelVector finalize() const = 0;

  virtual std::string name() const = 0;
  const LabelVector& last_query() const { return last_query_; }

 protected:
  LabelVector random_vector(std::size_t n, RngStream& rng) const;

  RngStream rng_;
  RngStream fallback_;  // copied inside finalize() for the empty-state case
  LabelVector last_query_;
};

// Informative-vector bookkeeping shared by the boosting-style attacks: a
// query joins J only when its reported risk is below chance and strictly
// improves the best report seen so far.
class InformativeSet {
 public:
  void record(const LabelVector& query, double reported);
  bool empty() const { return members_ == 0; }
  std::size_t size() const { return members_; }
  double best_reported() const { return best_; }
  // Elementwise majority vote; ties at exactly half resolve to 1.
  LabelVector majority_vote() const;

 private:
  std::vector<std::size_t> vote_counts_;
  std::size_t members_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

// Uniform random queries + majority vote over the informative set.
class BoostAttacker : public Attacker {
 public:
  BoostAttacker(std::size_t n_test, RngStream rng);
  double step(Evaluator& evaluator) override;
  LabelVector finalize() const override;
  std::string name() const override { return "boost"; }
  const InformativeSet& informative() const { return informative_; }

 private:
  std::size_t n_test_;
  InformativeSet informative_;
};

// Random-window boosting: alternates belief-sampled queries with queries that
// force a random window to the window's minority bit, then converts the risk
// difference of the pair into an estimate of the window's positive-label rate.
class WBoostAttacker : public Attacker {
 public:
  WBoostAttacker(std::size_t n_test, std::size_t window, double learning_rate, RngStream rng);
  double step(Evaluator& evaluator) override;
  LabelVector finalize() const override;  // belief thresholded at 0.5, ties -> 1
  std::string name() const override { return "wboost"; }
  const std::vector<double>& belief() const { return belief_; }

 private:
  std::size_t n_test_;
  std::size_t window_;
  double alpha_;
  std::vector<double> belief_;
  std::size_t t_ = 1;  // next query index; odd = belief sample, even = window move
  LabelVector prev_query_;
  double prev_reported_ = 0.0;
};

}  // namespace seqleak
