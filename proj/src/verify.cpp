#include "seqleak/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "seqleak/evaluators.hpp"
#include "seqleak/recsys.hpp"
#include "seqleak/risk.hpp"

namespace seqleak::verify {

namespace {

double squared_distance(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d += (a[j] - b[j]) * (a[j] - b[j]);
  return d;
}

// Prediction of the hypothesized RS at (user, item) given prefix 0..m-1,
// via a full sort of all prefix distances.
int oracle_predict(int k, const TestFeatures& x, const LabelVector& hypothesis,
                   std::size_t m, const Vec& user, const Vec& item) {
  std::vector<std::pair<double, std::size_t>> dists;
  dists.reserve(m);
  for (std::size_t j = 0; j < m; ++j)
    dists.emplace_back(squared_distance(user, x.users[j]) + squared_distance(item, x.items[j]),
                       j);
  std::sort(dists.begin(), dists.end());
  std::size_t ones = 0;
  for (int j = 0; j < k; ++j) ones += hypothesis[dists[j].second] != 0;
  return 2 * ones >= static_cast<std::size_t>(k) ? 1 : 0;
}

}  // namespace

double hypothesis_likelihood(int k, double exploration, const std::vector<Vec>& catalog,
                             const TestFeatures& x, const LabelVector& hypothesis) {
  const double n_items = static_cast<double>(catalog.size());
  double likelihood = 1.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    if (m < static_cast<std::size_t>(k)) {
      likelihood *= 1.0 / n_items;
      continue;
    }
    std::size_t n_pos = 0;
    for (const Vec& item : catalog)
      n_pos += oracle_predict(k, x, hypothesis, m, x.users[m], item);
    const std::size_t n_neg = catalog.size() - n_pos;
    if (n_pos == 0 && exploration == 0.0) {
      likelihood *= 1.0 / n_items;
      continue;
    }
    const double denom = exploration * static_cast<double>(n_neg) + static_cast<double>(n_pos);
    const int own = oracle_predict(k, x, hypothesis, m, x.users[m], x.items[m]);
    likelihood *= own ? 1.0 / denom : exploration / denom;
  }
  return likelihood;
}

std::vector<double> brute_force_posterior_table(int k, double exploration,
                                                const std::vector<Vec>& catalog,
                                                const TestFeatures& x) {
  const std::size_t n = x.size();
  std::vector<double> table(std::size_t{1} << n, 0.0);
  LabelVector hypothesis(n, 0);
  for (std::size_t mask = 0; mask < table.size(); ++mask) {
    for (std::size_t m = 0; m < n; ++m)
      hypothesis[m] = static_cast<std::uint8_t>((mask >> m) & 1u);
    table[mask] = hypothesis_likelihood(k, exploration, catalog, x, hypothesis);
  }
  const double total = std::accumulate(table.begin(), table.end(), 0.0);
  if (total > 0.0)
    for (double& w : table) w /= total;
  else
    for (double& w : table) w = 1.0 / static_cast<double>(table.size());
  return table;
}

PlantedInstance random_planted_instance(std::size_t n_test, RngStream& rng) {
  PlantedInstance inst;
  inst.model.k = 1 + static_cast<int>(rng.uniform_index(3));
  inst.model.exploration = 0.05 + 0.95 * rng.uniform();
  const std::size_t n_items = 6 + rng.uniform_index(7);
  for (std::size_t c = 0; c < n_items; ++c)
    inst.model.catalog.push_back(Vec{rng.uniform(), rng.uniform()});
  for (std::size_t m = 0; m < n_test; ++m) {
    inst.x.users.push_back(Vec{rng.uniform(), rng.uniform()});
    // Recommended items come from the catalog, as the generative loop would.
    inst.x.items.push_back(inst.model.catalog[rng.uniform_index(n_items)]);
    inst.x.times.push_back(static_cast<std::int64_t>(m + 1));
  }
  return inst;
}

bool check_posterior_oracle(std::size_t instances, std::uint64_t seed, double tolerance,
                            std::ostream& out) {
  RngStream rng(seed, RngStream::hash_tag("posterior-oracle"));
  double worst = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n_test = 2 + rng.uniform_index(7);  // 2..8
    PlantedInstance inst = random_planted_instance(n_test, rng);
    const PosteriorModel exact = exact_posterior(inst.model, inst.x);
    const std::vector<double> oracle = brute_force_posterior_table(
        inst.model.k, inst.model.exploration, inst.model.catalog, inst.x);
    const std::vector<double>& table = exact.tables().front();
    for (std::size_t mask = 0; mask < oracle.size(); ++mask)
      worst = std::max(worst, std::fabs(table[mask] - oracle[mask]));
  }
  const bool ok = worst <= tolerance;
  out << (ok ? "PASS" : "FAIL") << " posterior-oracle: " << instances
      << " instances, max entrywise gap " << worst << " (tolerance " << tolerance << ")\n";
  return ok;
}

bool check_sampling_identity(std::size_t instances, std::uint64_t seed, std::ostream& out) {
  RngStream rng(seed, RngStream::hash_tag("sampling-identity"));
  double worst = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n_items = 3 + rng.uniform_index(20);
    std::vector<Vec> catalog;
    for (std::size_t c = 0; c < n_items; ++c) catalog.push_back(Vec{rng.uniform(), rng.uniform()});
    KnnRecommender rec(1 + static_cast<int>(rng.uniform_index(3)), rng.uniform(), catalog);
    const std::size_t n_hist = 1 + rng.uniform_index(12);
    for (std::size_t h = 0; h < n_hist; ++h) {
      Interaction it;
      it.time = static_cast<std::int64_t>(h + 1);
      it.user = Vec{rng.uniform(), rng.uniform()};
      it.item = catalog[rng.uniform_index(n_items)];
      it.label = static_cast<std::uint8_t>(rng.next_u64() & 1u);
      rec.observe(it);
    }
    const Vec user{rng.uniform(), rng.uniform()};
    const auto probs =
        rec.recommendation_probabilities(user, static_cast<std::int64_t>(n_hist + 1));
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    worst = std::max(worst, std::fabs(total - 1.0));
  }
  const bool ok = worst <= 1e-12;
  out << (ok ? "PASS" : "FAIL") << " sampling-identity: " << instances
      << " states, max |sum - 1| = " << worst << " (tolerance 1e-12)\n";
  return ok;
}

bool check_cluster_partition(std::size_t instances, std::uint64_t seed, std::ostream& out) {
  RngStream rng(seed, RngStream::hash_tag("cluster-partition"));
  bool ok = true;
  for (std::size_t i = 0; i < instances && ok; ++i) {
    const std::size_t n_test = 5 + rng.uniform_index(60);
    PlantedInstance inst = random_planted_instance(n_test, rng);
    const std::size_t z = 1 + rng.uniform_index(8);
    const auto clusters = cluster_test_set(inst.model, inst.x, z, rng);
    std::vector<std::uint8_t> covered(n_test, 0);
    for (const auto& cluster : clusters) {
      if (cluster.empty() || cluster.size() > z) ok = false;
      for (std::size_t m : cluster) {
        if (m >= n_test || covered[m]) ok = false;
        covered[m] = 1;
      }
    }
    for (std::uint8_t c : covered)
      if (!c) ok = false;
  }
  out << (ok ? "PASS" : "FAIL") << " cluster-partition: " << instances
      << " random instances, disjoint+covering+size<=z\n";
  return ok;
}

bool check_mechanism_properties(std::size_t streams, std::uint64_t seed, std::ostream& out) {
  RngStream rng(seed, RngStream::hash_tag("mechanisms"));
  bool kaggle_ok = true;
  bool ladder_ok = true;
  for (std::size_t s = 0; s < streams; ++s) {
    const std::size_t n = 5 + rng.uniform_index(50);
    LabelVector hidden(n);
    for (auto& b : hidden) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    KaggleEvaluator kaggle(hidden, 1e-5);
    LadderEvaluator ladder(hidden, 0.01);
    double last_report = std::numeric_limits<double>::infinity();
    const std::size_t n_queries = 1 + rng.uniform_index(20);
    for (std::size_t q = 0; q < n_queries; ++q) {
      LabelVector query(n);
      for (auto& b : query) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
      const double truth = empirical_risk(query, hidden);
      if (std::fabs(kaggle.submit(query) - truth) > 1e-5 / 2 + 1e-12) kaggle_ok = false;
      const double reported = ladder.submit(query);
      if (reported > last_report + 1e-12) ladder_ok = false;
      last_report = reported;
    }
  }
  out << (kaggle_ok ? "PASS" : "FAIL")
      << " kaggle-precision: |reported - risk| <= precision/2 on " << streams << " streams\n";
  out << (ladder_ok ? "PASS" : "FAIL") << " ladder-monotone: reports non-increasing on "
      << streams << " streams\n";
  return kaggle_ok && ladder_ok;
}

bool run_verification(std::uint64_t seed, std::ostream& out) {
  bool ok = true;
  ok &= check_posterior_oracle(100, seed, 1e-9, out);
  ok &= check_sampling_identity(200, seed, out);
  ok &= check_cluster_partition(100, seed, out);
  ok &= check_mechanism_properties(500, seed, out);
  return ok;
}

}  // namespace seqleak::verify
