#include "seqleak/harness.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "seqleak/ingest.hpp"
#include "seqleak/risk.hpp"

namespace seqleak {

std::size_t SyntheticConfig::simulated_length() const {
  if (n_sim > 0) return n_sim;
  // Generous default pool so the balanced downsample finds enough of the
  // minority label under positively-biased logging.
  return std::max<std::size_t>(n_test * 5 / 2, n_test + 40);
}

void ExperimentConfig::validate() const {
  if (source != "synthetic" && source != "ml100k" && source != "csv")
    throw std::invalid_argument("config: unknown source '" + source + "'");
  if (mechanism != "kaggle" && mechanism != "ladder")
    throw std::invalid_argument("config: unknown mechanism '" + mechanism + "'");
  const std::string& kind = attacker.kind;
  if (kind != "boost" && kind != "wboost" && kind != "postboost" && kind != "postboost-approx")
    throw std::invalid_argument("config: unknown attacker '" + kind + "'");
  if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
  if (jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
  if (!(eta > 0.0)) throw std::invalid_argument("config: eta must be > 0");
  if (!(kaggle_precision > 0.0))
    throw std::invalid_argument("config: kaggle_precision must be > 0");
  if (synth.train_fraction < 0.0 || synth.train_fraction >= 1.0)
    throw std::invalid_argument("config: train_fraction must be in [0, 1)");
  if (attacker.alpha <= 0.0 || attacker.alpha > 1.0)
    throw std::invalid_argument("config: alpha must be in (0, 1]");
}

KeyValueMap config_to_kv(const ExperimentConfig& c) {
  KeyValueMap kv;
  kv["source"] = c.source;
  kv["n_sim"] = std::to_string(c.synth.n_sim);
  kv["n_test"] = std::to_string(c.synth.n_test);
  kv["user_dim"] = std::to_string(c.synth.user_dim);
  kv["item_dim"] = std::to_string(c.synth.item_dim);
  kv["catalog_size"] = std::to_string(c.synth.catalog_size);
  kv["center_count"] = std::to_string(c.synth.center_count);
  kv["k_star"] = std::to_string(c.synth.k_star);
  kv["k"] = std::to_string(c.synth.k);
  kv["exploration"] = format_double(c.synth.exploration);
  kv["train_fraction"] = format_double(c.synth.train_fraction);
  kv["ml100k_dir"] = c.ml100k.data_dir.string();
  kv["ml100k_split"] = c.ml100k.split;
  kv["ml100k_n_test"] = std::to_string(c.ml100k.n_test);
  kv["one_hot_occupation"] = c.ml100k.one_hot_occupation ? "true" : "false";
  kv["dataset_csv"] = c.dataset_csv.string();
  kv["mechanism"] = c.mechanism;
  kv["eta"] = format_double(c.eta);
  kv["kaggle_precision"] = format_double(c.kaggle_precision);
  kv["attacker"] = c.attacker.kind;
  kv["window"] = std::to_string(c.attacker.window);
  kv["alpha"] = format_double(c.attacker.alpha);
  kv["cluster_size"] = std::to_string(c.attacker.cluster_size);
  kv["assumed_k"] = std::to_string(c.attacker.assumed_k);
  kv["assumed_exploration"] = format_double(c.attacker.assumed_exploration);
  kv["exact_marginal_cap"] = std::to_string(c.attacker.exact_marginal_cap);
  kv["mc_marginal_samples"] = std::to_string(c.attacker.mc_marginal_samples);
  kv["queries"] = std::to_string(c.queries);
  kv["repetitions"] = std::to_string(c.repetitions);
  kv["master_seed"] = std::to_string(c.master_seed);
  kv["jobs"] = std::to_string(c.jobs);
  kv["coin_flip_labels"] = c.coin_flip_labels ? "true" : "false";
  return kv;
}

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' expects true/false, got '" + value +
                              "'");
}

}  // namespace

ExperimentConfig config_from_kv(const KeyValueMap& kv) {
  ExperimentConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "source") c.source = value;
    else if (key == "n_sim") c.synth.n_sim = static_cast<std::size_t>(parse_int(value));
    else if (key == "n_test") c.synth.n_test = static_cast<std::size_t>(parse_int(value));
    else if (key == "user_dim") c.synth.user_dim = static_cast<std::size_t>(parse_int(value));
    else if (key == "item_dim") c.synth.item_dim = static_cast<std::size_t>(parse_int(value));
    else if (key == "catalog_size")
      c.synth.catalog_size = static_cast<std::size_t>(parse_int(value));
    else if (key == "center_count")
      c.synth.center_count = static_cast<std::size_t>(parse_int(value));
    else if (key == "k_star") c.synth.k_star = static_cast<int>(parse_int(value));
    else if (key == "k") c.synth.k = static_cast<int>(parse_int(value));
    else if (key == "exploration") c.synth.exploration = parse_double(value);
    else if (key == "train_fraction") c.synth.train_fraction = parse_double(value);
    else if (key == "ml100k_dir") c.ml100k.data_dir = value;
    else if (key == "ml100k_split") c.ml100k.split = value;
    else if (key == "ml100k_n_test")
      c.ml100k.n_test = static_cast<std::size_t>(parse_int(value));
    else if (key == "one_hot_occupation")
      c.ml100k.one_hot_occupation = parse_bool(key, value);
    else if (key == "dataset_csv") c.dataset_csv = value;
    else if (key == "mechanism") c.mechanism = value;
    else if (key == "eta") c.eta = parse_double(value);
    else if (key == "kaggle_precision") c.kaggle_precision = parse_double(value);
    else if (key == "attacker") c.attacker.kind = value;
    else if (key == "window") c.attacker.window = static_cast<std::size_t>(parse_int(value));
    else if (key == "alpha") c.attacker.alpha = parse_double(value);
    else if (key == "cluster_size")
      c.attacker.cluster_size = static_cast<std::size_t>(parse_int(value));
    else if (key == "assumed_k") c.attacker.assumed_k = static_cast<int>(parse_int(value));
    else if (key == "assumed_exploration") c.attacker.assumed_exploration = parse_double(value);
    else if (key == "exact_marginal_cap")
      c.attacker.exact_marginal_cap = static_cast<std::size_t>(parse_int(value));
    else if (key == "mc_marginal_samples")
      c.attacker.mc_marginal_samples = static_cast<std::size_t>(parse_int(value));
    else if (key == "queries") c.queries = static_cast<std::size_t>(parse_int(value));
    else if (key == "repetitions") c.repetitions = static_cast<std::size_t>(parse_int(value));
    else if (key == "master_seed")
      c.master_seed = static_cast<std::uint64_t>(parse_int(value));
    else if (key == "jobs") c.jobs = static_cast<std::size_t>(parse_int(value));
    else if (key == "coin_flip_labels") c.coin_flip_labels = parse_bool(key, value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file, const KeyValueMap& overrides) {
  KeyValueMap kv;
  if (!file.empty()) kv = read_key_value_file(file);
  for (const auto& [key, value] : overrides) kv[key] = value;  // flags win
  return config_from_kv(kv);
}

RngStream trial_stream(const ExperimentConfig& config, std::size_t trial,
                       std::string_view role) {
  return RngStream(config.master_seed,
                   RngStream::mix(trial + 1, RngStream::hash_tag(role)));
}

namespace {

SequentialDataset build_synthetic(const ExperimentConfig& config, std::size_t trial) {
  const SyntheticConfig& s = config.synth;
  const std::size_t n_sim = s.simulated_length();
  if (n_sim < s.n_test)
    throw std::runtime_error("synthetic: n_sim smaller than n_test");

  // The world (catalog, then centers) depends only on (seed, trial) so the
  // posterior attacker can reconstruct the catalog it is assumed to know.
  // Re-simulating with fresh draws (bounded retries) covers unlucky label
  // skews; every attempt is deterministic in (seed, trial, attempt).
  RngStream world_rng = trial_stream(config, trial, "world");
  const std::vector<Vec> catalog = random_catalog(s.catalog_size, s.item_dim, world_rng);
  const GroundTruth gt =
      random_ground_truth(s.center_count, s.user_dim, s.item_dim, s.k_star, world_rng);

  constexpr std::size_t kMaxAttempts = 64;
  std::string last_error;
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    RngStream sim_rng = trial_stream(config, trial, "simulate").derive(attempt);
    RngStream split_rng = trial_stream(config, trial, "split").derive(attempt);

    KnnRecommender rs(s.k, s.exploration, catalog);
    SequentialDataset ds =
        simulate(gt, std::move(rs), n_sim, uniform_user_sampler(s.user_dim), sim_rng);

    if (s.train_fraction > 0.0) {
      for (std::size_t i = 0; i < ds.size(); ++i)
        if (split_rng.bernoulli(s.train_fraction)) ds.splits[i] = Split::train;
    }
    try {
      return balance_test_split(ds, s.n_test, split_rng);
    } catch (const std::runtime_error& e) {
      last_error = e.what();  // not enough of one label; re-simulate
    }
  }
  throw std::runtime_error("synthetic: failed to draw a balanceable dataset after " +
                           std::to_string(kMaxAttempts) + " attempts (" + last_error + ")");
}

SequentialDataset build_ml100k(const ExperimentConfig& config, std::size_t trial) {
  const Ml100kConfig& m = config.ml100k;
  if (!ml100k_present(m.data_dir))
    throw std::runtime_error("ml100k: dataset not found under " + m.data_dir.string() +
                             " (run `seqleak fetch-ml100k` first)");
  const Ml100kData data = parse_ml100k(m.data_dir, m.split);
  RngStream split_rng = trial_stream(config, trial, "split");
  FeaturizerOptions opts;
  opts.one_hot_occupation = m.one_hot_occupation;
  return build_test(data, m.n_test, split_rng, opts);
}

}  // namespace

SequentialDataset build_trial_dataset(const ExperimentConfig& config, std::size_t trial) {
  if (config.source == "synthetic") return build_synthetic(config, trial);
  if (config.source == "ml100k") return build_ml100k(config, trial);
  return read_dataset_csv(config.dataset_csv);
}

std::unique_ptr<Attacker> make_attacker(const ExperimentConfig& config,
                                        const SequentialDataset& ds, std::size_t trial) {
  RngStream rng = trial_stream(config, trial, "attacker");
  const std::size_t n_test = ds.test_size();
  const AttackerConfig& a = config.attacker;

  if (a.kind == "boost") return std::make_unique<BoostAttacker>(n_test, rng);
  if (a.kind == "wboost")
    return std::make_unique<WBoostAttacker>(n_test, std::min(a.window, n_test), a.alpha, rng);

  // Posterior attacks: the attacker sees X_test plus its assumed RS model.
  // With a synthetic source the attacker enjoys full knowledge of the world's
  // catalog; otherwise the catalog is what X_test reveals.
  const TestFeatures x = test_features(ds);
  AttackerRsModel model;
  model.k = a.assumed_k;
  model.exploration = a.assumed_exploration;
  if (config.source == "synthetic") {
    // Catalog is the first draw from the world stream inside build_trial_dataset.
    RngStream world_rng = trial_stream(config, trial, "world");
    model.catalog =
        random_catalog(config.synth.catalog_size, config.synth.item_dim, world_rng);
  } else {
    model.catalog = catalog_from_test_items(x);
  }

  if (a.kind == "postboost") {
    PosteriorModel posterior = exact_posterior(model, x);
    return std::make_unique<PostBoostAttacker>(std::move(posterior), rng, "postboost");
  }
  ApproxPosteriorOptions opts;
  opts.cluster_size = a.cluster_size;
  opts.exact_marginal_cap = a.exact_marginal_cap;
  opts.mc_marginal_samples = a.mc_marginal_samples;
  RngStream cluster_rng = trial_stream(config, trial, "clustering");
  PosteriorModel posterior = approximate_posterior(model, x, opts, cluster_rng);
  return std::make_unique<PostBoostAttacker>(std::move(posterior), rng, "postboost-approx");
}

TrialResult run_trial(const ExperimentConfig& config, std::size_t trial) {
  return run_trial_on(config, trial, build_trial_dataset(config, trial));
}

TrialResult run_trial_on(const ExperimentConfig& config, std::size_t trial,
                         const SequentialDataset& ds) {
  config.validate();

  LabelVector hidden = ds.test_labels();
  if (config.coin_flip_labels) {
    RngStream coin_rng = trial_stream(config, trial, "coin-labels");
    for (auto& bit : hidden) bit = static_cast<std::uint8_t>(coin_rng.next_u64() & 1u);
  }

  auto evaluator =
      make_evaluator(config.mechanism, hidden, config.eta, config.kaggle_precision);
  auto attacker = make_attacker(config, ds, trial);

  TrialResult result;
  result.trial = trial;
  result.hidden_labels = hidden;
  for (std::size_t t = 1; t <= config.queries; ++t) {
    const double seen = attacker->step(*evaluator);
    const AuditRow& audit = evaluator->audit_log().back();
    TraceRow row;
    row.trial = trial;
    row.attacker = attacker->name();
    row.mechanism = evaluator->mechanism();
    row.t = t;
    row.reported = seen;
    row.query_risk = audit.empirical_risk;
    row.final_risk = empirical_risk(attacker->finalize(), hidden);
    result.rows.push_back(std::move(row));
  }
  result.audit = evaluator->audit_log();
  result.final_prediction = attacker->finalize();
  return result;
}

std::vector<CurvePoint> aggregate_curve(const std::vector<TrialResult>& trials) {
  std::vector<CurvePoint> curve;
  if (trials.empty()) return curve;
  const std::size_t T = trials.front().rows.size();
  for (const TrialResult& trial : trials)
    if (trial.rows.size() != T)
      throw std::invalid_argument("aggregate_curve: ragged trial lengths");

  for (std::size_t t = 0; t < T; ++t) {
    CurvePoint p;
    p.t = t + 1;
    p.n_trials = trials.size();
    double sum = 0.0;
    for (const TrialResult& trial : trials) sum += trial.rows[t].query_risk;
    p.mean_risk = sum / static_cast<double>(trials.size());
    if (trials.size() > 1) {
      double ss = 0.0;
      for (const TrialResult& trial : trials) {
        const double d = trial.rows[t].query_risk - p.mean_risk;
        ss += d * d;
      }
      p.stderr_risk = std::sqrt(ss / static_cast<double>(trials.size() - 1)) /
                      std::sqrt(static_cast<double>(trials.size()));
    }
    curve.push_back(p);
  }
  return curve;
}

std::vector<CurvePoint> run_experiment(const ExperimentConfig& config,
                                       std::vector<TrialResult>* out_trials) {
  config.validate();
  std::vector<TrialResult> trials(config.repetitions);

  if (config.jobs <= 1) {
    for (std::size_t i = 0; i < config.repetitions; ++i) trials[i] = run_trial(config, i);
  } else {
    std::size_t next = 0;
    std::mutex pick_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
      for (;;) {
        std::size_t mine;
        {
          std::lock_guard<std::mutex> lock(pick_mutex);
          if (failure || next >= config.repetitions) return;
          mine = next++;
        }
        try {
          trials[mine] = run_trial(config, mine);
        } catch (...) {
          std::lock_guard<std::mutex> lock(pick_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_workers = std::min(config.jobs, config.repetitions);
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  auto curve = aggregate_curve(trials);
  if (out_trials) *out_trials = std::move(trials);
  return curve;
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<TrialResult>& trials) {
  std::ostringstream out;
  out << "trial,attacker,mechanism,t,reported,empirical_risk_of_query,"
         "empirical_risk_of_current_final\n";
  for (const TrialResult& trial : trials)
    for (const TraceRow& r : trial.rows)
      out << r.trial << ',' << r.attacker << ',' << r.mechanism << ',' << r.t << ','
          << format_double(r.reported) << ',' << format_double(r.query_risk) << ','
          << format_double(r.final_risk) << "\n";
  write_text_file(path, out.str());
}

void write_audit_csv(const std::filesystem::path& path, const std::string& mechanism,
                     const std::vector<TrialResult>& trials) {
  std::ostringstream out;
  out << "trial,mechanism,t,empirical_risk,reported\n";
  for (const TrialResult& trial : trials)
    for (const AuditRow& r : trial.audit)
      out << trial.trial << ',' << mechanism << ',' << r.t << ','
          << format_double(r.empirical_risk) << ',' << format_double(r.reported) << "\n";
  write_text_file(path, out.str());
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "t,mean_risk,stderr,n_trials\n";
  for (const CurvePoint& p : curve)
    out << p.t << ',' << format_double(p.mean_risk) << ',' << format_double(p.stderr_risk)
        << ',' << p.n_trials << "\n";
  write_text_file(path, out.str());
}

std::vector<CurvePoint> read_curve_csv(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || split(line, ',')[0] != "t")
    throw std::runtime_error(path.string() + ": not a curve CSV");
  std::vector<CurvePoint> curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw std::runtime_error(path.string() + ": wrong field count");
    CurvePoint p;
    p.t = static_cast<std::size_t>(parse_int(fields[0]));
    p.mean_risk = parse_double(fields[1]);
    p.stderr_risk = parse_double(fields[2]);
    p.n_trials = static_cast<std::size_t>(parse_int(fields[3]));
    curve.push_back(p);
  }
  return curve;
}

std::string render_curves_svg(const std::vector<NamedCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("plot: no curves given");
  for (const NamedCurve& c : curves)
    if (c.points.empty()) throw std::invalid_argument("plot: empty curve " + c.label);

  constexpr double kWidth = 720, kHeight = 440;
  constexpr double kLeft = 64, kRight = 24, kTop = 28, kBottom = 48;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::size_t t_max = 1;
  double y_min = 0.5, y_max = 0.5;
  for (const NamedCurve& c : curves)
    for (const CurvePoint& p : c.points) {
      t_max = std::max(t_max, p.t);
      y_min = std::min(y_min, p.mean_risk);
      y_max = std::max(y_max, p.mean_risk);
    }
  const double pad = std::max(0.02, (y_max - y_min) * 0.1);
  y_min -= pad;
  y_max += pad;

  auto sx = [&](double t) { return kLeft + (t - 1.0) / std::max(1.0, t_max - 1.0) * plot_w; };
  auto sy = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double frac = i / 4.0;
    const double t = 1.0 + frac * (t_max - 1.0);
    const double y = y_min + frac * (y_max - y_min);
    svg << "<text x=\"" << sx(t) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << static_cast<std::size_t>(t)
        << "</text>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy(y) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(std::round(y * 1000) / 1000)
        << "</text>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << sy(y) << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << sy(y) << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">queries</text>\n";
  svg << "<text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << kTop + plot_h / 2 << ")\">empirical risk</text>\n";

  // chance level
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << sy(0.5) << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << sy(0.5)
      << "\" stroke=\"black\" stroke-dasharray=\"6 4\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w - 4 << "\" y=\"" << sy(0.5) - 5
      << "\" text-anchor=\"end\" font-size=\"10\">chance 0.5</text>\n";

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const char* color = kPalette[ci % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const CurvePoint& p : curves[ci].points)
      svg << sx(static_cast<double>(p.t)) << ',' << sy(p.mean_risk) << ' ';
    svg << "\"/>\n";
    const double ly = kTop + 14 + 16 * static_cast<double>(ci);
    svg << "<line x1=\"" << kLeft + plot_w - 150 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + plot_w - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kLeft + plot_w - 120 << "\" y=\"" << ly + 4
        << "\" font-size=\"11\">" << curves[ci].label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace seqleak
