#include "seqleak/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqleak/risk.hpp"

namespace seqleak {

std::vector<Vec> catalog_from_test_items(const TestFeatures& x) {
  std::vector<Vec> catalog;
  for (const Vec& item : x.items)
    if (std::find(catalog.begin(), catalog.end(), item) == catalog.end())
      catalog.push_back(item);
  return catalog;
}

namespace {

// k nearest prefix positions (indices < m) of a (user, item) query; ties
// toward the earlier position, matching the recommender's tie rule.
std::vector<std::size_t> k_nearest_prefix(const TestFeatures& x, const Vec& user,
                                          const Vec& item, std::size_t m, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> best;
  best.reserve(k + 1);
  for (std::size_t j = 0; j < m; ++j) {
    const double d = pair_distance(user, item, x.users[j], x.items[j]);
    const std::pair<double, std::size_t> cand{d, j};
    if (best.size() == k && !(cand < best.back())) continue;
    best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
    if (best.size() > k) best.pop_back();
  }
  std::vector<std::size_t> out;
  out.reserve(best.size());
  for (const auto& [d, j] : best) out.push_back(j);
  return out;
}

}  // namespace

SequenceLikelihood::SequenceLikelihood(AttackerRsModel model, TestFeatures x)
    : model_(std::move(model)), x_(std::move(x)) {
  if (model_.k < 1) throw std::invalid_argument("likelihood: k must be >= 1");
  if (model_.exploration < 0.0 || model_.exploration > 1.0)
    throw std::invalid_argument("likelihood: exploration must be in [0,1]");
  if (model_.catalog.empty()) throw std::invalid_argument("likelihood: empty catalog");

  const std::size_t n = x_.size();
  const std::size_t k = static_cast<std::size_t>(model_.k);
  item_neighbors_.resize(n);
  own_neighbors_.resize(n);
  scope_.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    own_neighbors_[m] = k_nearest_prefix(x_, x_.users[m], x_.items[m], m, k);
    if (m < k) continue;  // cold start: constant factor, empty scope
    item_neighbors_[m].resize(model_.catalog.size());
    std::vector<std::uint8_t> seen(m, 0);
    for (std::size_t c = 0; c < model_.catalog.size(); ++c) {
      item_neighbors_[m][c] = k_nearest_prefix(x_, x_.users[m], model_.catalog[c], m, k);
      for (std::size_t j : item_neighbors_[m][c]) seen[j] = 1;
    }
    for (std::size_t j : own_neighbors_[m]) seen[j] = 1;
    for (std::size_t j = 0; j < m; ++j)
      if (seen[j]) scope_[m].push_back(j);
  }
}

double SequenceLikelihood::factor(std::size_t m, const LabelVector& labels) const {
  const std::size_t n_items = model_.catalog.size();
  const std::size_t k = static_cast<std::size_t>(model_.k);
  if (m >= x_.size()) throw std::out_of_range("likelihood: position out of range");
  if (m < k) return 1.0 / static_cast<double>(n_items);

  auto predict = [&](const std::vector<std::size_t>& neigh) {
    std::size_t ones = 0;
    for (std::size_t j : neigh) ones += labels[j] != 0;
    return majority_count(ones, neigh.size());
  };

  std::size_t n_pos = 0;
  for (std::size_t c = 0; c < n_items; ++c) n_pos += predict(item_neighbors_[m][c]);
  const std::size_t n_neg = n_items - n_pos;

  // Mirrors the recommender's degenerate fallback: nothing predicted liked
  // and no exploration means a uniform pick.
  if (n_pos == 0 && model_.exploration == 0.0) return 1.0 / static_cast<double>(n_items);

  const double denom = model_.exploration * static_cast<double>(n_neg) +
                       static_cast<double>(n_pos);
  return predict(own_neighbors_[m]) ? 1.0 / denom : model_.exploration / denom;
}

double recommendation_likelihood(const AttackerRsModel& model, const TestFeatures& x,
                                 const LabelVector& labels, std::size_t position) {
  SequenceLikelihood engine(model, x);
  if (labels.size() != x.size())
    throw std::invalid_argument("recommendation_likelihood: labels length mismatch");
  return engine.factor(position, labels);
}

PosteriorModel::PosteriorModel(std::size_t n_test,
                               std::vector<std::vector<std::size_t>> clusters,
                               std::vector<std::vector<double>> tables)
    : n_test_(n_test), clusters_(std::move(clusters)), tables_(std::move(tables)) {
  if (clusters_.size() != tables_.size())
    throw std::invalid_argument("posterior: clusters/tables size mismatch");
  std::vector<std::uint8_t> covered(n_test_, 0);
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    const auto& members = clusters_[c];
    if (members.empty()) throw std::invalid_argument("posterior: empty cluster");
    if (tables_[c].size() != (std::size_t{1} << members.size()))
      throw std::invalid_argument("posterior: table size mismatch");
    for (std::size_t m : members) {
      if (m >= n_test_ || covered[m]) throw std::invalid_argument("posterior: not a partition");
      covered[m] = 1;
    }
  }
  for (std::uint8_t c : covered)
    if (!c) throw std::invalid_argument("posterior: uncovered position");
}

LabelVector PosteriorModel::sample(RngStream& rng) const {
  LabelVector v(n_test_, 0);
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = tables_[c].size() - 1;
    for (std::size_t a = 0; a < tables_[c].size(); ++a) {
      acc += tables_[c][a];
      if (u < acc) { pick = a; break; }
    }
    for (std::size_t j = 0; j < clusters_[c].size(); ++j)
      v[clusters_[c][j]] = static_cast<std::uint8_t>((pick >> j) & 1u);
  }
  return v;
}

std::vector<double> PosteriorModel::marginals() const {
  std::vector<double> p(n_test_, 0.0);
  for (std::size_t c = 0; c < clusters_.size(); ++c)
    for (std::size_t a = 0; a < tables_[c].size(); ++a)
      for (std::size_t j = 0; j < clusters_[c].size(); ++j)
        if ((a >> j) & 1u) p[clusters_[c][j]] += tables_[c][a];
  return p;
}

namespace {

// Normalizes in place; an all-zero table (every hypothesis impossible under
// the assumed model) degrades to uniform.
void normalize_table(std::vector<double>& table) {
  double total = 0.0;
  for (double w : table) total += w;
  if (total <= 0.0) {
    const double u = 1.0 / static_cast<double>(table.size());
    for (double& w : table) w = u;
    return;
  }
  for (double& w : table) w /= total;
}

}  // namespace

PosteriorModel exact_posterior(const AttackerRsModel& model, const TestFeatures& x) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("exact_posterior: empty test sequence");
  if (n > 20)
    throw std::invalid_argument(
        "exact_posterior: n_test > 20 is not enumerable; use approximate_posterior");

  SequenceLikelihood engine(model, x);
  const std::size_t n_hyp = std::size_t{1} << n;
  std::vector<double> table(n_hyp, 0.0);
  LabelVector labels(n, 0);
  for (std::size_t mask = 0; mask < n_hyp; ++mask) {
    for (std::size_t m = 0; m < n; ++m)
      labels[m] = static_cast<std::uint8_t>((mask >> m) & 1u);
    double w = 1.0;  // uniform prior cancels in the normalization
    for (std::size_t m = 0; m < n && w > 0.0; ++m) w *= engine.factor(m, labels);
    table[mask] = w;
  }
  normalize_table(table);

  std::vector<std::size_t> all(n);
  for (std::size_t m = 0; m < n; ++m) all[m] = m;
  return PosteriorModel(n, {all}, {std::move(table)});
}

std::vector<std::vector<std::size_t>> cluster_test_set(const AttackerRsModel& model,
                                                       const TestFeatures& x, std::size_t z,
                                                       RngStream& rng) {
  if (z < 1) throw std::invalid_argument("cluster_test_set: z must be >= 1");
  SequenceLikelihood engine(model, x);

  std::vector<std::size_t> pool(x.size());
  for (std::size_t m = 0; m < pool.size(); ++m) pool[m] = m;
  std::vector<std::uint8_t> in_pool(x.size(), 1);

  auto remove_from_pool = [&](std::size_t value) {
    const auto it = std::find(pool.begin(), pool.end(), value);
    pool.erase(it);
    in_pool[value] = 0;
  };

  std::vector<std::vector<std::size_t>> clusters;
  while (!pool.empty()) {
    const std::size_t seed = pool[rng.uniform_index(pool.size())];
    std::vector<std::size_t> cluster{seed};
    remove_from_pool(seed);

    // Companions from the seed's own neighbor set, then uniform fill so
    // clusters stay equal-sized while the pool allows it.
    std::vector<std::size_t> candidates;
    for (std::size_t j : engine.own_neighbors(seed))
      if (in_pool[j]) candidates.push_back(j);
    while (cluster.size() < z && !candidates.empty()) {
      const std::size_t pick = rng.uniform_index(candidates.size());
      const std::size_t chosen = candidates[pick];
      candidates.erase(candidates.begin() + pick);
      cluster.push_back(chosen);
      remove_from_pool(chosen);
    }
    while (cluster.size() < z && !pool.empty()) {
      const std::size_t chosen = pool[rng.uniform_index(pool.size())];
      cluster.push_back(chosen);
      remove_from_pool(chosen);
    }

    std::sort(cluster.begin(), cluster.end());
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

PosteriorModel approximate_posterior(const AttackerRsModel& model, const TestFeatures& x,
                                     const ApproxPosteriorOptions& options, RngStream& rng) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("approximate_posterior: empty test sequence");
  if (options.cluster_size < 1 || options.cluster_size > 20)
    throw std::invalid_argument("approximate_posterior: cluster size must be in [1, 20]");

  SequenceLikelihood engine(model, x);
  auto clusters = cluster_test_set(model, x, options.cluster_size, rng);
  const std::uint64_t call_salt = rng.next_u64();

  std::vector<std::vector<double>> tables(clusters.size());
  LabelVector labels(n, 0);
  for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
    const auto& members = clusters[ci];
    std::vector<std::uint8_t> in_cluster(n, 0);
    for (std::size_t m : members) in_cluster[m] = 1;
    // Per-cluster stream: deterministic, independent of cluster processing order.
    RngStream mc_rng = rng.derive(RngStream::mix(call_salt, ci + 1));

    // Outside-of-cluster scope per member factor, marginalized under
    // independent 0.5 priors: exact enumeration when small, seeded Monte
    // Carlo when the outside set is too large to enumerate.
    std::vector<std::vector<std::size_t>> outside(members.size());
    for (std::size_t mi = 0; mi < members.size(); ++mi)
      for (std::size_t j : engine.scope(members[mi]))
        if (!in_cluster[j]) outside[mi].push_back(j);

    std::vector<double>& table = tables[ci];
    table.assign(std::size_t{1} << members.size(), 0.0);
    for (std::size_t a = 0; a < table.size(); ++a) {
      for (std::size_t j = 0; j < members.size(); ++j)
        labels[members[j]] = static_cast<std::uint8_t>((a >> j) & 1u);
      double w = 1.0;
      for (std::size_t mi = 0; mi < members.size() && w > 0.0; ++mi) {
        const std::size_t m = members[mi];
        const auto& out = outside[mi];
        if (out.empty()) {
          w *= engine.factor(m, labels);
        } else if (out.size() <= options.exact_marginal_cap) {
          double avg = 0.0;
          const std::size_t n_outside = std::size_t{1} << out.size();
          for (std::size_t o = 0; o < n_outside; ++o) {
            for (std::size_t j = 0; j < out.size(); ++j)
              labels[out[j]] = static_cast<std::uint8_t>((o >> j) & 1u);
            avg += engine.factor(m, labels);
          }
          w *= avg / static_cast<double>(n_outside);
        } else {
          double avg = 0.0;
          for (std::size_t s = 0; s < options.mc_marginal_samples; ++s) {
            for (std::size_t j : out)
              labels[j] = static_cast<std::uint8_t>(mc_rng.next_u64() & 1u);
            avg += engine.factor(m, labels);
          }
          w *= avg / static_cast<double>(options.mc_marginal_samples);
        }
      }
      table[a] = w;
    }
    normalize_table(table);
  }

  return PosteriorModel(n, std::move(clusters), std::move(tables));
}

PostBoostAttacker::PostBoostAttacker(PosteriorModel posterior, RngStream rng, std::string name)
    : Attacker(rng), posterior_(std::move(posterior)), name_(std::move(name)) {}

double PostBoostAttacker::step(Evaluator& evaluator) {
  last_query_ = posterior_.sample(rng_);
  const double reported = evaluator.submit(last_query_);
  informative_.record(last_query_, reported);
  return reported;
}

LabelVector PostBoostAttacker::finalize() const {
  if (informative_.empty()) {
    RngStream fb = fallback_;  // no informative query yet: fall back to a posterior draw
    return posterior_.sample(fb);
  }
  return informative_.majority_vote();
}

}  // namespace seqleak
