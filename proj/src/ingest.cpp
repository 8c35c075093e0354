#include "seqleak/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "seqleak/io.hpp"
#include "seqleak/synthgen.hpp"

namespace seqleak {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& file, std::size_t lineno,
                             const std::string& what) {
  throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": " + what);
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

Ml100kData parse_ml100k(const std::filesystem::path& dir, const std::string& ratings_file) {
  Ml100kData data;

  const auto user_file = dir / "u.user";
  std::size_t lineno = 0;
  for (const std::string& line : read_lines(user_file)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, '|');
    if (fields.size() != 5) parse_fail(user_file, lineno, "expected 5 pipe-separated fields");
    UserProfile u;
    try {
      u.id = static_cast<int>(parse_int(fields[0]));
      u.age = static_cast<int>(parse_int(fields[1]));
    } catch (const std::exception& e) {
      parse_fail(user_file, lineno, e.what());
    }
    if (fields[2] != "M" && fields[2] != "F")
      parse_fail(user_file, lineno, "gender must be M or F, got '" + fields[2] + "'");
    u.sex = fields[2][0];
    u.occupation = fields[3];
    if (u.occupation.empty()) parse_fail(user_file, lineno, "empty occupation");
    if (!data.users.emplace(u.id, u).second)
      parse_fail(user_file, lineno, "duplicate user id " + fields[0]);
  }

  const auto item_file = dir / "u.item";
  lineno = 0;
  for (const std::string& line : read_lines(item_file)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, '|');
    if (fields.size() < 21) parse_fail(item_file, lineno, "expected at least 21 fields");
    ItemProfile it;
    try {
      it.id = static_cast<int>(parse_int(fields[0]));
    } catch (const std::exception& e) {
      parse_fail(item_file, lineno, e.what());
    }
    it.title = fields[1];
    for (std::size_t g = 0; g < 19; ++g) {
      const std::string& flag = fields[fields.size() - 19 + g];
      if (flag != "0" && flag != "1")
        parse_fail(item_file, lineno, "genre flag must be 0 or 1, got '" + flag + "'");
      it.genres[g] = static_cast<std::uint8_t>(flag == "1");
    }
    if (!data.items.emplace(it.id, it).second)
      parse_fail(item_file, lineno, "duplicate item id " + fields[0]);
  }

  const auto occupation_file = dir / "u.occupation";
  if (std::filesystem::exists(occupation_file)) {
    for (const std::string& line : read_lines(occupation_file))
      if (!line.empty()) data.occupations.push_back(line);
  } else {
    std::set<std::string> distinct;
    for (const auto& [id, u] : data.users) distinct.insert(u.occupation);
    data.occupations.assign(distinct.begin(), distinct.end());
  }

  const auto rating_path = dir / ratings_file;
  lineno = 0;
  for (const std::string& line : read_lines(rating_path)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4) parse_fail(rating_path, lineno, "expected 4 tab-separated fields");
    RawRating r;
    try {
      r.user_id = static_cast<int>(parse_int(fields[0]));
      r.item_id = static_cast<int>(parse_int(fields[1]));
      r.rating = static_cast<int>(parse_int(fields[2]));
      r.timestamp = parse_int(fields[3]);
    } catch (const std::exception& e) {
      parse_fail(rating_path, lineno, e.what());
    }
    if (r.rating < 1 || r.rating > 5)
      parse_fail(rating_path, lineno, "rating out of range 1..5: " + fields[2]);
    if (!data.users.count(r.user_id))
      parse_fail(rating_path, lineno, "unknown user id " + fields[0]);
    if (!data.items.count(r.item_id))
      parse_fail(rating_path, lineno, "unknown item id " + fields[1]);
    data.ratings.push_back(r);
  }

  return data;
}

int binarize(const RawRating& rating) {
  if (rating.rating < 1 || rating.rating > 5)
    throw std::invalid_argument("binarize: rating out of range");
  return rating.rating > 2 ? 1 : 0;
}

Featurizer::Featurizer(const Ml100kData& data, FeaturizerOptions options) : options_(options) {
  if (data.users.empty()) throw std::invalid_argument("featurizer: no users");
  age_min_ = std::numeric_limits<int>::max();
  age_max_ = std::numeric_limits<int>::min();
  for (const auto& [id, u] : data.users) {
    age_min_ = std::min(age_min_, u.age);
    age_max_ = std::max(age_max_, u.age);
  }
  occupation_count_ = data.occupations.size();
  for (std::size_t i = 0; i < data.occupations.size(); ++i)
    occupation_index_.emplace(data.occupations[i], i);
}

std::size_t Featurizer::occupation_index(const std::string& occupation) const {
  const auto it = occupation_index_.find(occupation);
  if (it == occupation_index_.end())
    throw std::invalid_argument("featurizer: unknown occupation '" + occupation + "'");
  return it->second;
}

Vec Featurizer::user_vector(const UserProfile& user) const {
  const double age_span = static_cast<double>(age_max_ - age_min_);
  const double age = age_span > 0.0
                         ? static_cast<double>(user.age - age_min_) / age_span
                         : 0.0;
  const double sex = user.sex == 'F' ? 1.0 : 0.0;
  const std::size_t occ = occupation_index(user.occupation);
  if (!options_.one_hot_occupation) {
    return Vec{age, sex, static_cast<double>(occ) / static_cast<double>(occupation_count_)};
  }
  Vec v{age, sex};
  v.resize(2 + occupation_count_, 0.0);
  v[2 + occ] = 1.0;
  return v;
}

Vec Featurizer::item_vector(const ItemProfile& item) const {
  Vec v(item.genres.size());
  for (std::size_t g = 0; g < item.genres.size(); ++g) v[g] = item.genres[g];
  return v;
}

SequentialDataset build_test(const Ml100kData& data, std::size_t n_test, RngStream& rng,
                             FeaturizerOptions options) {
  if (data.ratings.empty()) throw std::invalid_argument("build_test: no ratings");
  const Featurizer featurizer(data, options);

  // Stable sort keeps file order for equal timestamps.
  std::vector<std::size_t> order(data.ratings.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.ratings[a].timestamp < data.ratings[b].timestamp;
  });

  SequentialDataset ds;
  std::int64_t rank = 0;
  for (std::size_t idx : order) {
    const RawRating& r = data.ratings[idx];
    Interaction it;
    it.time = ++rank;  // rank preserves chronology; raw timestamps may repeat
    it.user = featurizer.user_vector(data.users.at(r.user_id));
    it.item = featurizer.item_vector(data.items.at(r.item_id));
    it.label = static_cast<std::uint8_t>(binarize(r));
    ds.interactions.push_back(std::move(it));
    ds.splits.push_back(Split::test);
  }

  return balance_test_split(ds, n_test, rng);
}

bool ml100k_present(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / "u.data") && std::filesystem::exists(dir / "u.user") &&
         std::filesystem::exists(dir / "u.item");
}

}  // namespace seqleak
