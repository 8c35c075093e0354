#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqleak/rng.hpp"
#include "seqleak/types.hpp"

namespace seqleak {

struct RawRating {
  int user_id = 0;
  int item_id = 0;
  int rating = 0;  // 1..5
  std::int64_t timestamp = 0;
};

struct UserProfile {
  int id = 0;
  int age = 0;
  char sex = 'M';  // 'M' or 'F'
  std::string occupation;
};

struct ItemProfile {
  int id = 0;
  std::string title;
  std::array<std::uint8_t, 19> genres{};
};

struct Ml100kData {
  std::vector<RawRating> ratings;  // file order preserved
  std::unordered_map<int, UserProfile> users;
  std::unordered_map<int, ItemProfile> items;
  std::vector<std::string> occupations;  // from u.occupation, else sorted distinct
};

// Parses the standard ML-100k layout: ratings (tab-separated user, item,
// rating, timestamp), `u.user` (id|age|gender|occupation|zip), `u.item`
// (pipe-separated, last 19 fields are genre flags). `ratings_file` selects
// u.data or one of the prespecified split files (u1.base, u1.test, ...).
// Malformed lines and dangling user/item ids raise with file and line number.
Ml100kData parse_ml100k(const std::filesystem::path& dir,
                        const std::string& ratings_file = "u.data");

// Ratings larger than 2 are positive feedback.
int binarize(const RawRating& rating);

struct FeaturizerOptions {
  // Occupation as one normalized index keeps the user vector 3-dimensional;
  // the one-hot mode exists for sensitivity analysis of that ordinal choice.
  bool one_hot_occupation = false;
};

// Builds side-information vectors: user = (min-max normalized age, sex as
// {0,1}, occupation index / #occupations), item = the 19 genre flags.
class Featurizer {
 public:
  explicit Featurizer(const Ml100kData& data, FeaturizerOptions options = {});

  Vec user_vector(const UserProfile& user) const;
  Vec item_vector(const ItemProfile& item) const;
  std::size_t occupation_index(const std::string& occupation) const;

 private:
  FeaturizerOptions options_;
  int age_min_ = 0;
  int age_max_ = 0;
  std::unordered_map<std::string, std::size_t> occupation_index_;
  std::size_t occupation_count_ = 0;
};

// Chronologically ordered, balanced test set from a prespecified ratings
// file: stable-sorts by (timestamp, file order), assigns rank times 1..n,
// then downsamples to n_test with equal label counts.
SequentialDataset build_test(const Ml100kData& data, std::size_t n_test, RngStream& rng,
                             FeaturizerOptions options = {});

// --- dataset fetching -------------------------------------------------------

inline constexpr const char* kMl100kUrl =
    "https://files.grouplens.org/datasets/movielens/ml-100k.zip";
inline constexpr const char* kMl100kZipMd5 = "0e33842e24a9c977be4e0107933c0723";

bool ml100k_present(const std::filesystem::path& dir);

// Downloads the archive, verifies its MD5 checksum, and extracts the ml-100k
// directory under dest_dir. Throws on network, checksum, or archive errors.
void fetch_ml100k(const std::filesystem::path& dest_dir, const std::string& url = kMl100kUrl,
                  const std::string& expected_md5 = kMl100kZipMd5);

// Exposed for tests: checksum and zip handling used by fetch_ml100k.
std::string md5_hex(const std::string& bytes);
void extract_zip(const std::string& zip_bytes, const std::filesystem::path& dest_dir);

}  // namespace seqleak
