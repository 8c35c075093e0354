#include "seqleak/risk.hpp"

#include <stdexcept>

namespace seqleak {

double empirical_risk(const LabelVector& predictions, const LabelVector& labels) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("empirical_risk: length mismatch");
  if (predictions.empty())
    throw std::invalid_argument("empirical_risk: empty input");
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    mismatches += predictions[i] != labels[i];
  return static_cast<double>(mismatches) / static_cast<double>(predictions.size());
}

int majority(const std::vector<int>& bits) {
  if (bits.empty()) throw std::invalid_argument("majority: empty input");
  std::size_t ones = 0;
  for (int b : bits) ones += b != 0;
  return majority_count(ones, bits.size());
}

int majority_count(std::size_t ones, std::size_t total) {
  if (total == 0) throw std::invalid_argument("majority: empty input");
  return 2 * ones >= total ? 1 : 0;
}

LabelVector complement(const LabelVector& v) {
  LabelVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] ? 0 : 1;
  return out;
}

}  // namespace seqleak
