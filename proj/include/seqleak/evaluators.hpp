#pragma once

#include <memory>
#include <string>
#include <vector>

#include "seqleak/types.hpp"

namespace seqleak {

// Rounds x to the nearest integer multiple of eta (eta > 0). Half-way cases
// round the multiple index half-to-even; ties are detected with a small
// relative tolerance so decimal inputs like 0.015 with eta=0.01 behave as the
// exact rational arithmetic would.
double round_to_multiple(double x, double eta);

struct AuditRow {
  std::size_t t = 0;        // 1-based query index
  double empirical_risk = 0.0;
  double reported = 0.0;
};

// Sealed oracle over the hidden test labels. The only attacker-observable
// output is the scalar returned by submit(); the audit log is harness-side
// bookkeeping and is never handed to attackers.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  // Scores a query against the hidden labels and applies the mechanism's
  // reporting rule. Throws std::invalid_argument on length mismatch.
  double submit(const LabelVector& query);

  std::size_t query_count() const { return log_.size(); }
  std::size_t test_size() const { return hidden_.size(); }
  const std::vector<AuditRow>& audit_log() const { return log_; }
  virtual std::string mechanism() const = 0;

 protected:
  explicit Evaluator(LabelVector hidden_labels);
  virtual double report(double risk) = 0;

 private:
  LabelVector hidden_;
  std::vector<AuditRow> log_;
};

// Reports the empirical risk rounded to a fixed precision on every query.
class KaggleEvaluator : public Evaluator {
 public:
  explicit KaggleEvaluator(LabelVector hidden_labels, double precision = 1e-5);
  std::string mechanism() const override { return "kaggle"; }
  double precision() const { return precision_; }

 protected:
  double report(double risk) override;

 private:
  double precision_;
};

// Reveals a rounded risk only when a submission improves the best-so-far by
// more than eta; otherwise repeats the previous report. Best-so-far starts at
// +infinity so the first submission is always reported.
class LadderEvaluator : public Evaluator {
 public:
  explicit LadderEvaluator(LabelVector hidden_labels, double eta = 0.01);
  std::string mechanism() const override { return "ladder"; }
  double eta() const { return eta_; }
  double best() const { return best_; }

 protected:
  double report(double risk) override;

 private:
  double eta_;
  double best_;
};

std::unique_ptr<Evaluator> make_evaluator(const std::string& mechanism, LabelVector hidden,
                                          double eta, double kaggle_precision);

}  // namespace seqleak
