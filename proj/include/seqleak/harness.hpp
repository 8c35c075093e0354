#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "seqleak/attacks.hpp"
#include "seqleak/evaluators.hpp"
#include "seqleak/io.hpp"
#include "seqleak/posterior.hpp"
#include "seqleak/synthgen.hpp"
#include "seqleak/types.hpp"

namespace seqleak {

struct SyntheticConfig {
  std::size_t n_sim = 0;  // 0 = derived from n_test (see simulated_length)
  std::size_t n_test = 10;
  std::size_t user_dim = 2;
  std::size_t item_dim = 2;
  std::size_t catalog_size = 100;
  std::size_t center_count = 50;
  int k_star = 1;
  int k = 1;               // logging RS neighbourhood
  double exploration = 0.1;
  double train_fraction = 0.0;  // tagged train before balancing, excluded from the pool

  std::size_t simulated_length() const;
};

struct Ml100kConfig {
  std::filesystem::path data_dir = "data/ml-100k";
  std::string split = "u1.test";  // ratings file: u.data, u1.base, ua.test, ...
  std::size_t n_test = 1000;
  bool one_hot_occupation = false;
};

struct AttackerConfig {
  std::string kind = "boost";  // boost | wboost | postboost | postboost-approx
  std::size_t window = 50;
  double alpha = 0.3;
  std::size_t cluster_size = 5;
  int assumed_k = 1;
  double assumed_exploration = 0.1;
  std::size_t exact_marginal_cap = 14;
  std::size_t mc_marginal_samples = 128;
};

// One experiment: dataset source x mechanism x attacker, repeated over
// seeded trials. Serializes losslessly to a flat key-value map.
struct ExperimentConfig {
  std::string source = "synthetic";  // synthetic | ml100k | csv
  SyntheticConfig synth;
  Ml100kConfig ml100k;
  std::filesystem::path dataset_csv;

  std::string mechanism = "kaggle";  // kaggle | ladder
  double eta = 0.01;
  double kaggle_precision = 1e-5;

  AttackerConfig attacker;

  std::size_t queries = 100;  // T
  std::size_t repetitions = 1;
  std::uint64_t master_seed = 1;
  std::size_t jobs = 1;

  // Replaces hidden test labels with fresh coin flips; used by the blindness
  // experiments, where sequential structure must carry no information.
  bool coin_flip_labels = false;

  void validate() const;
};

KeyValueMap config_to_kv(const ExperimentConfig& config);
ExperimentConfig config_from_kv(const KeyValueMap& kv);
ExperimentConfig load_config(const std::filesystem::path& file, const KeyValueMap& overrides);

// --- trial execution --------------------------------------------------------

struct TraceRow {
  std::size_t trial = 0;
  std::string attacker;
  std::string mechanism;
  std::size_t t = 0;
  double reported = 0.0;      // what the attacker saw
  double query_risk = 0.0;    // harness-side truth, hidden from the attacker
  double final_risk = 0.0;    // risk of the attacker's current final prediction
};

struct TrialResult {
  std::size_t trial = 0;
  std::vector<TraceRow> rows;
  std::vector<AuditRow> audit;
  LabelVector final_prediction;
  LabelVector hidden_labels;
};

// Deterministic stream roles derived from (master seed, trial).
RngStream trial_stream(const ExperimentConfig& config, std::size_t trial,
                       std::string_view role);

// Builds the trial's dataset (synthetic worlds are re-drawn per trial; csv and
// ml100k sources re-balance per trial where applicable).
SequentialDataset build_trial_dataset(const ExperimentConfig& config, std::size_t trial);

std::unique_ptr<Attacker> make_attacker(const ExperimentConfig& config,
                                        const SequentialDataset& ds, std::size_t trial);

// One full attacker-evaluator session of `queries` submissions.
TrialResult run_trial(const ExperimentConfig& config, std::size_t trial);
TrialResult run_trial_on(const ExperimentConfig& config, std::size_t trial,
                         const SequentialDataset& ds);

struct CurvePoint {
  std::size_t t = 0;
  double mean_risk = 0.0;
  double stderr_risk = 0.0;
  std::size_t n_trials = 0;
};

// Per-query mean and standard error of the submitted query's empirical risk
// across trials. Trials run in a pool of `jobs` workers; aggregation is a
// deterministic reduction over trial indices.
std::vector<CurvePoint> run_experiment(const ExperimentConfig& config,
                                       std::vector<TrialResult>* out_trials = nullptr);

std::vector<CurvePoint> aggregate_curve(const std::vector<TrialResult>& trials);

// --- interchange ------------------------------------------------------------

void write_trace_csv(const std::filesystem::path& path, const std::vector<TrialResult>& trials);
void write_audit_csv(const std::filesystem::path& path, const std::string& mechanism,
                     const std::vector<TrialResult>& trials);
void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve);
std::vector<CurvePoint> read_curve_csv(const std::filesystem::path& path);

struct NamedCurve {
  std::string label;
  std::vector<CurvePoint> points;
};

// Risk-vs-queries chart with a dashed 0.5 chance line; one series per curve.
// Pure function of the curve tables. Throws on empty input.
std::string render_curves_svg(const std::vector<NamedCurve>& curves);

}  // namespace seqleak
