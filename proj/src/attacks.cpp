#include "seqleak/attacks.hpp"

#include <algorithm>
#include <stdexcept>

#include "seqleak/risk.hpp"

namespace seqleak {

LabelVector Attacker::random_vector(std::size_t n, RngStream& rng) const {
  LabelVector v(n);
  for (auto& bit : v) bit = static_cast<std::uint8_t>(rng.next_u64() & 1u);
  return v;
}

void InformativeSet::record(const LabelVector& query, double reported) {
  if (vote_counts_.empty()) vote_counts_.assign(query.size(), 0);
  if (reported < 0.5 && reported < best_) {
    for (std::size_t i = 0; i < query.size(); ++i) vote_counts_[i] += query[i];
    ++members_;
  }
  best_ = std::min(best_, reported);
}

LabelVector InformativeSet::majority_vote() const {
  if (members_ == 0) throw std::logic_error("informative set: empty");
  LabelVector v(vote_counts_.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = static_cast<std::uint8_t>(majority_count(vote_counts_[i], members_));
  return v;
}

BoostAttacker::BoostAttacker(std::size_t n_test, RngStream rng)
    : Attacker(rng), n_test_(n_test) {
  if (n_test_ == 0) throw std::invalid_argument("boost: n_test must be >= 1");
}

double BoostAttacker::step(Evaluator& evaluator) {
  last_query_ = random_vector(n_test_, rng_);
  const double reported = evaluator.submit(last_query_);
  informative_.record(last_query_, reported);
  return reported;
}

LabelVector BoostAttacker::finalize() const {
  if (informative_.empty()) {
    RngStream fb = fallback_;  // documented fallback: a fresh uniform vector
    return random_vector(n_test_, fb);
  }
  return informative_.majority_vote();
}

WBoostAttacker::WBoostAttacker(std::size_t n_test, std::size_t window, double learning_rate,
                               RngStream rng)
    : Attacker(rng),
      n_test_(n_test),
      window_(window),
      alpha_(learning_rate),
      belief_(n_test, 0.5) {
  if (n_test_ == 0) throw std::invalid_argument("wboost: n_test must be >= 1");
  if (window_ < 1 || window_ > n_test_)
    throw std::invalid_argument("wboost: window must be in [1, n_test]");
  if (!(alpha_ > 0.0) || alpha_ > 1.0)
    throw std::invalid_argument("wboost: learning rate must be in (0, 1]");
}

double WBoostAttacker::step(Evaluator& evaluator) {
  LabelVector query(n_test_);
  std::size_t win_start = 0;
  const bool window_move = (t_ % 2 == 0);

  if (!window_move) {
    for (std::size_t m = 0; m < n_test_; ++m)
      query[m] = static_cast<std::uint8_t>(rng_.bernoulli(belief_[m]));
  } else {
    win_start = rng_.uniform_index(n_test_ - window_ + 1);
    std::size_t ones = 0;
    for (std::size_t m = win_start; m < win_start + window_; ++m) ones += prev_query_[m];
    const std::size_t zeros = window_ - ones;

    for (std::size_t m = 0; m < n_test_; ++m) {
      if (m >= win_start && m < win_start + window_) {
        if (ones == zeros)  // exact tie: flip every window bit
          query[m] = prev_query_[m] ? 0 : 1;
        else
          query[m] = ones < zeros ? 1 : 0;  // the window's minority value
      } else {
        query[m] = static_cast<std::uint8_t>(rng_.bernoulli(belief_[m]));
      }
    }
  }

  const double reported = evaluator.submit(query);

  if (window_move) {
    double sum_diff = 0.0;
    for (std::size_t m = win_start; m < win_start + window_; ++m)
      sum_diff += static_cast<double>(query[m]) - static_cast<double>(prev_query_[m]);
    // A zero denominator carries no signal (tie window was flipped in place);
    // skip the update for this pair.
    if (sum_diff != 0.0) {
      const double delta = reported - prev_reported_;
      double b_star =
          0.5 * (1.0 - static_cast<double>(n_test_) * delta / sum_diff);
      b_star = std::clamp(b_star, 0.0, 1.0);
      for (std::size_t m = win_start; m < win_start + window_; ++m)
        belief_[m] = (1.0 - alpha_) * belief_[m] + alpha_ * b_star;
    }
  }

  prev_query_ = query;
  prev_reported_ = reported;
  last_query_ = std::move(query);
  ++t_;
  return reported;
}

LabelVector WBoostAttacker::finalize() const {
  LabelVector v(n_test_);
  for (std::size_t m = 0; m < n_test_; ++m) v[m] = belief_[m] >= 0.5 ? 1 : 0;
  return v;
}

}  // namespace seqleak
