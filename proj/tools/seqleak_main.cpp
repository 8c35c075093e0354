// seqleak — simulation lab for measuring how much hidden test-set information
// leaks through the generation order of sequential recommender data.
//
// Subcommands: gen, fetch-ml100k, ingest, attack, sweep, plot, verify.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 verification failure.

#include <CLI11.hpp>

#include <iostream>

#include "seqleak/harness.hpp"
#include "seqleak/ingest.hpp"
#include "seqleak/verify.hpp"

namespace {

using namespace seqleak;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerification = 3;

// Experiment flags mirror config-file keys; a flag that was actually passed
// overrides the file's value.
struct ExperimentFlags {
  std::string config_file;
  KeyValueMap overrides;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "flat key=value config file");
    auto kv = [this](const std::string& key) {
      return [this, key](const std::string& value) { overrides[key] = value; };
    };
    cmd.add_option_function<std::string>("--source", kv("source"),
                                         "dataset source: synthetic|ml100k|csv");
    cmd.add_option_function<std::string>("--dataset-csv", kv("dataset_csv"),
                                         "dataset CSV (source=csv)");
    cmd.add_option_function<std::string>("--n-sim", kv("n_sim"), "simulated interactions");
    cmd.add_option_function<std::string>("--n-test", kv("n_test"), "balanced test size");
    cmd.add_option_function<std::string>("--user-dim", kv("user_dim"), "user vector dim");
    cmd.add_option_function<std::string>("--item-dim", kv("item_dim"), "item vector dim");
    cmd.add_option_function<std::string>("--catalog-size", kv("catalog_size"), "catalog size");
    cmd.add_option_function<std::string>("--center-count", kv("center_count"),
                                         "ground-truth centers");
    cmd.add_option_function<std::string>("--k-star", kv("k_star"), "ground-truth k*");
    cmd.add_option_function<std::string>("--k", kv("k"), "logging RS k");
    cmd.add_option_function<std::string>("--exploration", kv("exploration"),
                                         "logging RS exploration");
    cmd.add_option_function<std::string>("--train-fraction", kv("train_fraction"),
                                         "fraction tagged train");
    cmd.add_option_function<std::string>("--ml100k-dir", kv("ml100k_dir"), "ML-100k directory");
    cmd.add_option_function<std::string>("--ml100k-split", kv("ml100k_split"),
                                         "ratings file, e.g. u1.test");
    cmd.add_option_function<std::string>("--ml100k-n-test", kv("ml100k_n_test"),
                                         "balanced ML-100k test size");
    cmd.add_option_function<std::string>("--one-hot-occupation", kv("one_hot_occupation"),
                                         "true|false");
    cmd.add_option_function<std::string>("--mechanism", kv("mechanism"), "kaggle|ladder");
    cmd.add_option_function<std::string>("--eta", kv("eta"), "ladder step");
    cmd.add_option_function<std::string>("--kaggle-precision", kv("kaggle_precision"),
                                         "kaggle rounding precision");
    cmd.add_option_function<std::string>(
        "--attacker", kv("attacker"), "boost|wboost|postboost|postboost-approx");
    cmd.add_option_function<std::string>("--window", kv("window"), "wboost window length");
    cmd.add_option_function<std::string>("--alpha", kv("alpha"), "wboost learning rate");
    cmd.add_option_function<std::string>("--cluster-size", kv("cluster_size"),
                                         "posterior cluster size z");
    cmd.add_option_function<std::string>("--assumed-k", kv("assumed_k"), "attacker's assumed k");
    cmd.add_option_function<std::string>("--assumed-exploration", kv("assumed_exploration"),
                                         "attacker's assumed exploration");
    cmd.add_option_function<std::string>("--exact-marginal-cap", kv("exact_marginal_cap"),
                                         "max outside labels enumerated exactly");
    cmd.add_option_function<std::string>("--mc-marginal-samples", kv("mc_marginal_samples"),
                                         "Monte Carlo samples past the cap");
    cmd.add_option_function<std::string>("--queries", kv("queries"), "submissions per trial");
    cmd.add_option_function<std::string>("--repetitions", kv("repetitions"), "trials");
    cmd.add_option_function<std::string>("--master-seed", kv("master_seed"), "master seed");
    cmd.add_option_function<std::string>("--jobs", kv("jobs"), "parallel trial workers");
    cmd.add_option_function<std::string>("--coin-flip-labels", kv("coin_flip_labels"),
                                         "true|false");
  }

  ExperimentConfig resolve() const { return load_config(config_file, overrides); }
};

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  for (const std::string& item : split(csv, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_gen(const ExperimentFlags& flags, const std::string& out_path) {
  ExperimentConfig config = flags.resolve();
  const SequentialDataset ds = build_trial_dataset(config, 0);
  write_dataset_csv(ds, out_path);
  KeyValueMap sidecar = config_to_kv(config);
  sidecar["generator"] = "gen";
  sidecar["trial"] = "0";
  write_dataset_sidecar(out_path, sidecar);
  std::cout << "wrote " << out_path << " (" << ds.size() << " interactions, "
            << ds.test_size() << " test)\n";
  return kExitOk;
}

int cmd_ingest(const ExperimentFlags& flags, const std::string& out_path) {
  ExperimentFlags with_source = flags;
  with_source.overrides["source"] = "ml100k";
  return cmd_gen(with_source, out_path);
}

int cmd_attack(const ExperimentFlags& flags, const std::string& out_dir) {
  ExperimentConfig config = flags.resolve();
  std::vector<TrialResult> trials;
  const auto curve = run_experiment(config, &trials);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  write_trace_csv(dir / "trace.csv", trials);
  write_audit_csv(dir / "audit.csv", config.mechanism, trials);
  write_curve_csv(dir / "curve.csv", curve);
  write_key_value_file(dir / "config.used", config_to_kv(config));
  std::cout << "wrote " << (dir / "trace.csv").string() << ", audit.csv, curve.csv ("
            << config.repetitions << " trials x " << config.queries << " queries)\n";
  if (!curve.empty())
    std::cout << "final mean risk at t=" << curve.back().t << ": " << curve.back().mean_risk
              << "\n";
  return kExitOk;
}

int cmd_sweep(const ExperimentFlags& flags, const std::string& out_dir,
              const std::string& windows, const std::string& alphas,
              const std::string& cluster_sizes) {
  ExperimentConfig base = flags.resolve();
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  // Cartesian grid over whichever lists were given; empty lists pin the
  // base config's value.
  auto one_or = [](const std::string& csv, const std::string& fallback) {
    auto items = split_list(csv);
    if (items.empty()) items.push_back(fallback);
    return items;
  };
  const auto window_list = one_or(windows, std::to_string(base.attacker.window));
  const auto alpha_list = one_or(alphas, format_double(base.attacker.alpha));
  const auto z_list = one_or(cluster_sizes, std::to_string(base.attacker.cluster_size));

  std::ostringstream summary;
  summary << "attacker,mechanism,window,alpha,cluster_size,final_mean_risk,final_stderr,"
             "n_trials\n";
  for (const std::string& w : window_list) {
    for (const std::string& a : alpha_list) {
      for (const std::string& z : z_list) {
        ExperimentConfig config = base;
        config.attacker.window = static_cast<std::size_t>(parse_int(w));
        config.attacker.alpha = parse_double(a);
        config.attacker.cluster_size = static_cast<std::size_t>(parse_int(z));
        const auto curve = run_experiment(config);
        const std::string stem =
            "curve_w" + w + "_a" + a + "_z" + z;
        write_curve_csv(dir / (stem + ".csv"), curve);
        const CurvePoint& last = curve.back();
        summary << config.attacker.kind << ',' << config.mechanism << ',' << w << ',' << a
                << ',' << z << ',' << format_double(last.mean_risk) << ','
                << format_double(last.stderr_risk) << ',' << last.n_trials << "\n";
        std::cout << stem << ": final mean risk " << last.mean_risk << "\n";
      }
    }
  }
  write_text_file(dir / "summary.csv", summary.str());
  std::cout << "wrote " << (dir / "summary.csv").string() << "\n";
  return kExitOk;
}

int cmd_plot(const std::vector<std::string>& curve_files, const std::string& out_file) {
  std::vector<NamedCurve> curves;
  for (const std::string& file : curve_files) {
    NamedCurve c;
    c.label = std::filesystem::path(file).stem().string();
    c.points = read_curve_csv(file);
    curves.push_back(std::move(c));
  }
  write_text_file(out_file, render_curves_svg(curves));
  std::cout << "wrote " << out_file << "\n";
  return kExitOk;
}

int cmd_fetch(const std::string& dest, const std::string& url) {
  fetch_ml100k(dest, url.empty() ? kMl100kUrl : url);
  std::cout << "fetched ML-100k into " << (std::filesystem::path(dest) / "ml-100k").string()
            << "\n";
  return kExitOk;
}

int cmd_verify(std::uint64_t seed) {
  return verify::run_verification(seed, std::cout) ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqleak: sequential-leakage attacks on holdout evaluation"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset CSV + sidecar");
  ExperimentFlags gen_flags;
  gen_flags.add_to(*gen);
  std::string gen_out = "dataset.csv";
  gen->add_option("--out", gen_out, "output CSV path");

  // fetch-ml100k
  auto* fetch = app.add_subcommand("fetch-ml100k", "download and verify the ML-100k dataset");
  std::string fetch_dir = "data";
  std::string fetch_url;
  fetch->add_option("--dir", fetch_dir, "destination directory");
  fetch->add_option("--url", fetch_url, "override download URL");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse ML-100k into the canonical dataset CSV");
  ExperimentFlags ingest_flags;
  ingest_flags.add_to(*ingest);
  std::string ingest_out = "ml100k.csv";
  ingest->add_option("--out", ingest_out, "output CSV path");

  // attack
  auto* attack = app.add_subcommand("attack", "run one experiment (trials x queries)");
  ExperimentFlags attack_flags;
  attack_flags.add_to(*attack);
  std::string attack_out = "out";
  attack->add_option("--out-dir", attack_out, "output directory for trace/audit/curve CSVs");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "grid over attacker parameters");
  ExperimentFlags sweep_flags;
  sweep_flags.add_to(*sweep);
  std::string sweep_out = "sweep";
  std::string sweep_windows, sweep_alphas, sweep_zs;
  sweep->add_option("--out-dir", sweep_out, "output directory");
  sweep->add_option("--windows", sweep_windows, "comma list of wboost windows");
  sweep->add_option("--alphas", sweep_alphas, "comma list of wboost learning rates");
  sweep->add_option("--cluster-sizes", sweep_zs, "comma list of posterior cluster sizes");

  // plot
  auto* plot = app.add_subcommand("plot", "render curve CSVs as an SVG chart");
  std::vector<std::string> plot_inputs;
  std::string plot_out = "curves.svg";
  plot->add_option("curves", plot_inputs, "curve CSV files")->required()->expected(-1);
  plot->add_option("--out", plot_out, "output SVG path");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the brute-force oracle suites");
  std::uint64_t verify_seed = 20240601;
  verify_cmd->add_option("--seed", verify_seed, "seed for the randomized checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_flags, gen_out);
    if (fetch->parsed()) return cmd_fetch(fetch_dir, fetch_url);
    if (ingest->parsed()) return cmd_ingest(ingest_flags, ingest_out);
    if (attack->parsed()) return cmd_attack(attack_flags, attack_out);
    if (sweep->parsed())
      return cmd_sweep(sweep_flags, sweep_out, sweep_windows, sweep_alphas, sweep_zs);
    if (plot->parsed()) return cmd_plot(plot_inputs, plot_out);
    if (verify_cmd->parsed()) return cmd_verify(verify_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
