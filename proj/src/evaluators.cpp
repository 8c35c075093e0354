#include "seqleak/evaluators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "seqleak/risk.hpp"

namespace seqleak {

double round_to_multiple(double x, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("round_to_multiple: eta must be > 0");
  const double q = x / eta;
  const double lo = std::floor(q);
  const double frac = q - lo;
  // Exact .5 fractions rarely survive the division in binary floating point;
  // treat anything within 1e-9 of .5 as a tie and round the index to even.
  const double tie_tol = 1e-9 * std::max(1.0, std::fabs(q));
  double index;
  if (std::fabs(frac - 0.5) <= tie_tol) {
    index = (std::fmod(lo, 2.0) == 0.0) ? lo : lo + 1.0;
  } else {
    index = frac < 0.5 ? lo : lo + 1.0;
  }
  return index * eta;
}

Evaluator::Evaluator(LabelVector hidden_labels) : hidden_(std::move(hidden_labels)) {
  if (hidden_.empty()) throw std::invalid_argument("evaluator: empty hidden labels");
  for (auto b : hidden_)
    if (b > 1) throw std::invalid_argument("evaluator: non-binary hidden label");
}

double Evaluator::submit(const LabelVector& query) {
  if (query.size() != hidden_.size())
    throw std::invalid_argument("evaluator: rejected submission, query length " +
                                std::to_string(query.size()) + " != test size " +
                                std::to_string(hidden_.size()));
  const double risk = empirical_risk(query, hidden_);
  const double reported = report(risk);
  log_.push_back(AuditRow{log_.size() + 1, risk, reported});
  return reported;
}

KaggleEvaluator::KaggleEvaluator(LabelVector hidden_labels, double precision)
    : Evaluator(std::move(hidden_labels)), precision_(precision) {
  if (!(precision_ > 0.0)) throw std::invalid_argument("kaggle: precision must be > 0");
}

double KaggleEvaluator::report(double risk) { return round_to_multiple(risk, precision_); }

LadderEvaluator::LadderEvaluator(LabelVector hidden_labels, double eta)
    : Evaluator(std::move(hidden_labels)),
      eta_(eta),
      best_(std::numeric_limits<double>::infinity()) {
  if (!(eta_ > 0.0)) throw std::invalid_argument("ladder: eta must be > 0");
}

double LadderEvaluator::report(double risk) {
  // Strict improvement test; the 1e-12 guard keeps exact-boundary risks
  // (risk == best - eta in real arithmetic) from passing due to float error.
  if (risk < best_ - eta_ - 1e-12) best_ = round_to_multiple(risk, eta_);
  return best_;
}

std::unique_ptr<Evaluator> make_evaluator(const std::string& mechanism, LabelVector hidden,
                                          double eta, double kaggle_precision) {
  if (mechanism == "kaggle")
    return std::make_unique<KaggleEvaluator>(std::move(hidden), kaggle_precision);
  if (mechanism == "ladder") return std::make_unique<LadderEvaluator>(std::move(hidden), eta);
  throw std::invalid_argument("unknown mechanism: " + mechanism);
}

}  // namespace seqleak
