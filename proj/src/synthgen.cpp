#include "seqleak/synthgen.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "seqleak/risk.hpp"

namespace seqleak {

int GroundTruth::true_feedback(const Vec& user, const Vec& item) const {
  if (center_users.empty()) throw std::logic_error("ground truth: no centers");
  const std::size_t k = std::min<std::size_t>(k_star, center_users.size());
  // (distance, center index); ties toward the lower center index.
  std::vector<std::pair<double, std::size_t>> best;
  best.reserve(k + 1);
  for (std::size_t l = 0; l < center_users.size(); ++l) {
    const double d = pair_distance(user, item, center_users[l], center_items[l]);
    const std::pair<double, std::size_t> cand{d, l};
    if (best.size() == k && !(cand < best.back())) continue;
    best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
    if (best.size() > k) best.pop_back();
  }
  std::size_t ones = 0;
  for (const auto& [d, l] : best) ones += center_labels[l] != 0;
  return majority_count(ones, best.size());
}

GroundTruth random_ground_truth(std::size_t n_centers, std::size_t user_dim,
                                std::size_t item_dim, int k_star, RngStream& rng) {
  if (n_centers < 2) throw std::invalid_argument("ground truth: need at least 2 centers");
  GroundTruth gt;
  gt.k_star = k_star;
  for (std::size_t l = 0; l < n_centers; ++l) {
    Vec u(user_dim), i(item_dim);
    for (auto& x : u) x = rng.uniform();
    for (auto& x : i) x = rng.uniform();
    gt.center_users.push_back(std::move(u));
    gt.center_items.push_back(std::move(i));
    gt.center_labels.push_back(l < n_centers / 2 ? 1 : 0);
  }
  return gt;
}

std::vector<Vec> random_catalog(std::size_t n_items, std::size_t item_dim, RngStream& rng) {
  std::vector<Vec> catalog(n_items);
  for (auto& item : catalog) {
    item.resize(item_dim);
    for (auto& x : item) x = rng.uniform();
  }
  return catalog;
}

UserSampler uniform_user_sampler(std::size_t user_dim) {
  return [user_dim](RngStream& rng) {
    Vec u(user_dim);
    for (auto& x : u) x = rng.uniform();
    return u;
  };
}

SequentialDataset simulate(const GroundTruth& gt, KnnRecommender logging_rs, std::size_t n,
                           const UserSampler& sample_user, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  SequentialDataset ds;
  ds.interactions.reserve(n);
  ds.splits.reserve(n);
  for (std::size_t m = 1; m <= n; ++m) {
    Interaction it;
    it.time = static_cast<std::int64_t>(m);
    it.user = sample_user(rng);
    it.item = logging_rs.recommend(it.user, it.time, rng);
    it.label = static_cast<std::uint8_t>(gt.true_feedback(it.user, it.item));
    logging_rs.observe(it);
    ds.interactions.push_back(std::move(it));
    ds.splits.push_back(Split::test);
  }
  return ds;
}

SequentialDataset balance_test_split(const SequentialDataset& ds, std::size_t n_test,
                                     RngStream& rng) {
  if (n_test == 0 || n_test % 2 != 0)
    throw std::invalid_argument("balance_test_split: n_test must be even and positive");
  const std::size_t per_label = n_test / 2;

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.splits[i] != Split::test) continue;
    (ds.interactions[i].label ? pos : neg).push_back(i);
  }
  if (pos.size() < per_label || neg.size() < per_label) {
    std::ostringstream msg;
    msg << "balance_test_split: need " << per_label << " of each label, test pool has "
        << pos.size() << " positive and " << neg.size() << " negative";
    throw std::runtime_error(msg.str());
  }

  // Uniform subset per label via partial Fisher-Yates; keep flags, then a
  // single pass preserves chronological order.
  auto pick = [&rng](std::vector<std::size_t>& from, std::size_t count) {
    for (std::size_t j = 0; j < count; ++j) {
      const std::size_t swap_with = j + rng.uniform_index(from.size() - j);
      std::swap(from[j], from[swap_with]);
    }
    from.resize(count);
  };
  pick(pos, per_label);
  pick(neg, per_label);

  std::vector<std::uint8_t> keep(ds.size(), 0);
  for (std::size_t i : pos) keep[i] = 1;
  for (std::size_t i : neg) keep[i] = 1;

  SequentialDataset out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.splits[i] == Split::test && !keep[i]) continue;  // discarded outright
    out.interactions.push_back(ds.interactions[i]);
    out.splits.push_back(ds.splits[i]);
  }
  return out;
}

void write_dataset_csv(const SequentialDataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::ostringstream out;
  const std::size_t du = ds.user_dim();
  const std::size_t di = ds.item_dim();
  out << "time,split,label";
  for (std::size_t j = 0; j < du; ++j) out << ",u_" << j;
  for (std::size_t j = 0; j < di; ++j) out << ",i_" << j;
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Interaction& it = ds.interactions[i];
    out << it.time << ',' << (ds.splits[i] == Split::test ? "test" : "train") << ','
        << static_cast<int>(it.label);
    for (double x : it.user) out << ',' << format_double(x);
    for (double x : it.item) out << ',' << format_double(x);
    out << "\n";
  }
  write_text_file(path, out.str());
}

SequentialDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");

  const auto header = split(line, ',');
  if (header.size() < 3 || header[0] != "time" || header[1] != "split" || header[2] != "label")
    throw std::runtime_error(path.string() + ": unexpected header");
  std::size_t du = 0, di = 0;
  for (std::size_t j = 3; j < header.size(); ++j) {
    if (header[j].rfind("u_", 0) == 0) ++du;
    else if (header[j].rfind("i_", 0) == 0) ++di;
    else throw std::runtime_error(path.string() + ": unexpected column " + header[j]);
  }

  SequentialDataset ds;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3 + du + di)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": wrong field count");
    Interaction it;
    it.time = parse_int(fields[0]);
    it.label = static_cast<std::uint8_t>(parse_int(fields[2]));
    for (std::size_t j = 0; j < du; ++j) it.user.push_back(parse_double(fields[3 + j]));
    for (std::size_t j = 0; j < di; ++j) it.item.push_back(parse_double(fields[3 + du + j]));
    if (fields[1] != "train" && fields[1] != "test")
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": unknown split '" + fields[1] + "'");
    ds.interactions.push_back(std::move(it));
    ds.splits.push_back(fields[1] == "test" ? Split::test : Split::train);
  }
  ds.validate();
  return ds;
}

void write_dataset_sidecar(const std::filesystem::path& csv_path, const KeyValueMap& params) {
  std::filesystem::path sidecar = csv_path;
  sidecar += ".config";
  write_key_value_file(sidecar, params);
}

}  // namespace seqleak
