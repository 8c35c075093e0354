#pragma once

#include "seqleak/types.hpp"

namespace seqleak {

// Mismatch indicator: 1 if predicted != actual, else 0.
inline double zero_one_loss(int predicted, int actual) {
  return predicted != actual ? 1.0 : 0.0;
}

// Mean zero-one loss over aligned positions. Throws on length mismatch or
// empty input.
double empirical_risk(const LabelVector& predictions, const LabelVector& labels);

// More frequent bit; exact ties resolve to 1. Throws on empty input.
int majority(const std::vector<int>& bits);
int majority_count(std::size_t ones, std::size_t total);

LabelVector complement(const LabelVector& v);

}  // namespace seqleak
