#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "seqleak/harness.hpp"
#include "seqleak/ingest.hpp"
#include "seqleak/risk.hpp"
#include "seqleak/verify.hpp"

namespace py = pybind11;
using namespace seqleak;

namespace {

std::vector<int> to_int_labels(const LabelVector& v) {
  return std::vector<int>(v.begin(), v.end());
}

LabelVector to_label_vector(const std::vector<int>& v) {
  LabelVector out;
  out.reserve(v.size());
  for (int b : v) {
    if (b != 0 && b != 1) throw std::invalid_argument("labels must be 0/1");
    out.push_back(static_cast<std::uint8_t>(b));
  }
  return out;
}

ExperimentConfig config_from_dict(const py::dict& d) {
  KeyValueMap kv;
  for (const auto& item : d)
    kv[py::str(item.first).cast<std::string>()] = py::str(item.second).cast<std::string>();
  return config_from_kv(kv);
}

}  // namespace

PYBIND11_MODULE(_seqleak, m) {
  m.doc() = "sequential-leakage attacks on holdout evaluation (C++ core)";

  // --- core -----------------------------------------------------------------
  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream_id") = 0)
      .def("next_u64", &RngStream::next_u64)
      .def("uniform", &RngStream::uniform)
      .def("uniform_index", &RngStream::uniform_index, py::arg("n"))
      .def("bernoulli", &RngStream::bernoulli, py::arg("p"))
      .def("derive", &RngStream::derive, py::arg("tag"));

  m.def("zero_one_loss", [](int predicted, int actual) { return zero_one_loss(predicted, actual); },
        py::arg("predicted"), py::arg("actual"));
  m.def("empirical_risk",
        [](const std::vector<int>& predictions, const std::vector<int>& labels) {
          return empirical_risk(to_label_vector(predictions), to_label_vector(labels));
        },
        py::arg("predictions"), py::arg("labels"));
  m.def("majority", [](const std::vector<int>& bits) { return majority(bits); }, py::arg("bits"));

  py::class_<Interaction>(m, "Interaction")
      .def(py::init([](Vec user, Vec item, std::int64_t time, int label) {
             Interaction it;
             it.user = std::move(user);
             it.item = std::move(item);
             it.time = time;
             it.label = static_cast<std::uint8_t>(label);
             return it;
           }),
           py::arg("user"), py::arg("item"), py::arg("time"), py::arg("label"))
      .def_readwrite("user", &Interaction::user)
      .def_readwrite("item", &Interaction::item)
      .def_readwrite("time", &Interaction::time)
      .def_property("label",
                    [](const Interaction& it) { return static_cast<int>(it.label); },
                    [](Interaction& it, int v) { it.label = static_cast<std::uint8_t>(v); });

  py::class_<SequentialDataset>(m, "SequentialDataset")
      .def(py::init<>())
      .def("__len__", &SequentialDataset::size)
      .def("test_size", &SequentialDataset::test_size)
      .def("test_labels", [](const SequentialDataset& ds) { return to_int_labels(ds.test_labels()); })
      .def("validate", &SequentialDataset::validate)
      .def_readonly("interactions", &SequentialDataset::interactions)
      .def("split_tags",
           [](const SequentialDataset& ds) {
             std::vector<std::string> tags;
             for (Split s : ds.splits) tags.push_back(s == Split::test ? "test" : "train");
             return tags;
           });

  py::class_<TestFeatures>(m, "TestFeatures")
      .def("__len__", &TestFeatures::size)
      .def_readonly("users", &TestFeatures::users)
      .def_readonly("items", &TestFeatures::items)
      .def_readonly("times", &TestFeatures::times);
  m.def("test_features", &test_features, py::arg("dataset"));

  // --- evaluators -------------------------------------------------------------
  m.def("round_to_multiple", &round_to_multiple, py::arg("x"), py::arg("eta"));

  py::class_<AuditRow>(m, "AuditRow")
      .def_readonly("t", &AuditRow::t)
      .def_readonly("empirical_risk", &AuditRow::empirical_risk)
      .def_readonly("reported", &AuditRow::reported);

  py::class_<Evaluator>(m, "Evaluator")
      .def("submit",
           [](Evaluator& ev, const std::vector<int>& query) {
             return ev.submit(to_label_vector(query));
           },
           py::arg("query"))
      .def("query_count", &Evaluator::query_count)
      .def("test_size", &Evaluator::test_size)
      .def("mechanism", &Evaluator::mechanism)
      .def("audit_log", &Evaluator::audit_log);

  py::class_<KaggleEvaluator, Evaluator>(m, "KaggleEvaluator")
      .def(py::init([](const std::vector<int>& hidden, double precision) {
             return KaggleEvaluator(to_label_vector(hidden), precision);
           }),
           py::arg("hidden_labels"), py::arg("precision") = 1e-5);

  py::class_<LadderEvaluator, Evaluator>(m, "LadderEvaluator")
      .def(py::init([](const std::vector<int>& hidden, double eta) {
             return LadderEvaluator(to_label_vector(hidden), eta);
           }),
           py::arg("hidden_labels"), py::arg("eta") = 0.01)
      .def("best", &LadderEvaluator::best);

  // --- recsys -----------------------------------------------------------------
  py::class_<KnnRecommender>(m, "KnnRecommender")
      .def(py::init<int, double, std::vector<Vec>, bool>(), py::arg("k"), py::arg("exploration"),
           py::arg("catalog"), py::arg("no_repeat") = false)
      .def("neighbors", &KnnRecommender::neighbors, py::arg("user"), py::arg("item"),
           py::arg("upto_time"))
      .def("classify",
           [](const KnnRecommender& rec, const Vec& u, const Vec& i, std::int64_t m)
               -> py::object {
             const auto pred = rec.classify(u, i, m);
             if (!pred) return py::none();
             return py::int_(*pred);
           },
           py::arg("user"), py::arg("item"), py::arg("upto_time"))
      .def("recommend", &KnnRecommender::recommend, py::arg("user"), py::arg("time"),
           py::arg("rng"))
      .def("recommend_index", &KnnRecommender::recommend_index, py::arg("user"), py::arg("time"),
           py::arg("rng"))
      .def("recommendation_probabilities", &KnnRecommender::recommendation_probabilities,
           py::arg("user"), py::arg("time"))
      .def("observe", &KnnRecommender::observe, py::arg("interaction"))
      .def_property_readonly("k", &KnnRecommender::k)
      .def_property_readonly("exploration", &KnnRecommender::exploration)
      .def_property_readonly("catalog", &KnnRecommender::catalog);

  // --- synthgen ---------------------------------------------------------------
  py::class_<GroundTruth>(m, "GroundTruth")
      .def(py::init([](std::vector<Vec> cu, std::vector<Vec> ci, const std::vector<int>& labels,
                       int k_star) {
             GroundTruth gt;
             gt.center_users = std::move(cu);
             gt.center_items = std::move(ci);
             gt.center_labels = to_label_vector(labels);
             gt.k_star = k_star;
             return gt;
           }),
           py::arg("center_users"), py::arg("center_items"), py::arg("center_labels"),
           py::arg("k_star") = 1)
      .def("true_feedback", &GroundTruth::true_feedback, py::arg("user"), py::arg("item"))
      .def_readonly("center_labels", &GroundTruth::center_labels)
      .def_readonly("k_star", &GroundTruth::k_star);

  m.def("random_ground_truth", &random_ground_truth, py::arg("n_centers"), py::arg("user_dim"),
        py::arg("item_dim"), py::arg("k_star"), py::arg("rng"));
  m.def("random_catalog", &random_catalog, py::arg("n_items"), py::arg("item_dim"),
        py::arg("rng"));
  m.def("simulate",
        [](const GroundTruth& gt, const KnnRecommender& rs, std::size_t n, RngStream& rng) {
          return simulate(gt, rs, n, uniform_user_sampler(gt.center_users.front().size()), rng);
        },
        py::arg("ground_truth"), py::arg("logging_rs"), py::arg("n"), py::arg("rng"));
  m.def("balance_test_split", &balance_test_split, py::arg("dataset"), py::arg("n_test"),
        py::arg("rng"));
  m.def("write_dataset_csv", &write_dataset_csv, py::arg("dataset"), py::arg("path"));
  m.def("read_dataset_csv", &read_dataset_csv, py::arg("path"));

  // --- attacks ----------------------------------------------------------------
  py::class_<Attacker>(m, "Attacker")
      .def("step", &Attacker::step, py::arg("evaluator"))
      .def("finalize", [](const Attacker& a) { return to_int_labels(a.finalize()); })
      .def("name", &Attacker::name)
      .def("last_query", [](const Attacker& a) { return to_int_labels(a.last_query()); });

  py::class_<BoostAttacker, Attacker>(m, "BoostAttacker")
      .def(py::init<std::size_t, RngStream>(), py::arg("n_test"), py::arg("rng"));

  py::class_<WBoostAttacker, Attacker>(m, "WBoostAttacker")
      .def(py::init<std::size_t, std::size_t, double, RngStream>(), py::arg("n_test"),
           py::arg("window"), py::arg("learning_rate"), py::arg("rng"))
      .def("belief", &WBoostAttacker::belief);

  py::class_<AttackerRsModel>(m, "AttackerRsModel")
      .def(py::init([](int k, double exploration, std::vector<Vec> catalog) {
             AttackerRsModel model;
             model.k = k;
             model.exploration = exploration;
             model.catalog = std::move(catalog);
             return model;
           }),
           py::arg("k"), py::arg("exploration"), py::arg("catalog"))
      .def_readwrite("k", &AttackerRsModel::k)
      .def_readwrite("exploration", &AttackerRsModel::exploration)
      .def_readwrite("catalog", &AttackerRsModel::catalog);

  m.def("catalog_from_test_items", &catalog_from_test_items, py::arg("test_features"));
  m.def("recommendation_likelihood",
        [](const AttackerRsModel& model, const TestFeatures& x, const std::vector<int>& labels,
           std::size_t position) {
          return recommendation_likelihood(model, x, to_label_vector(labels), position);
        },
        py::arg("model"), py::arg("test_features"), py::arg("labels"), py::arg("position"));

  py::class_<PosteriorModel>(m, "PosteriorModel")
      .def("n_test", &PosteriorModel::n_test)
      .def("clusters", &PosteriorModel::clusters)
      .def("tables", &PosteriorModel::tables)
      .def("marginals", &PosteriorModel::marginals)
      .def("sample", [](const PosteriorModel& p, RngStream& rng) {
        return to_int_labels(p.sample(rng));
      }, py::arg("rng"));

  m.def("exact_posterior", &exact_posterior, py::arg("model"), py::arg("test_features"));
  m.def("cluster_test_set", &cluster_test_set, py::arg("model"), py::arg("test_features"),
        py::arg("z"), py::arg("rng"));
  m.def("approximate_posterior",
        [](const AttackerRsModel& model, const TestFeatures& x, std::size_t cluster_size,
           RngStream& rng, std::size_t exact_marginal_cap, std::size_t mc_marginal_samples) {
          ApproxPosteriorOptions opts;
          opts.cluster_size = cluster_size;
          opts.exact_marginal_cap = exact_marginal_cap;
          opts.mc_marginal_samples = mc_marginal_samples;
          return approximate_posterior(model, x, opts, rng);
        },
        py::arg("model"), py::arg("test_features"), py::arg("cluster_size"), py::arg("rng"),
        py::arg("exact_marginal_cap") = 14, py::arg("mc_marginal_samples") = 128);

  py::class_<PostBoostAttacker, Attacker>(m, "PostBoostAttacker")
      .def(py::init<PosteriorModel, RngStream, std::string>(), py::arg("posterior"),
           py::arg("rng"), py::arg("name") = "postboost");

  // --- ingest -----------------------------------------------------------------
  m.def("ml100k_present", &ml100k_present, py::arg("dir"));
  m.def("fetch_ml100k", &fetch_ml100k, py::arg("dest_dir"), py::arg("url") = kMl100kUrl,
        py::arg("expected_md5") = kMl100kZipMd5);
  m.def("load_ml100k_test",
        [](const std::string& dir, const std::string& split, std::size_t n_test,
           std::uint64_t seed, bool one_hot_occupation) {
          const Ml100kData data = parse_ml100k(dir, split);
          RngStream rng(seed, RngStream::hash_tag("ml100k"));
          FeaturizerOptions opts;
          opts.one_hot_occupation = one_hot_occupation;
          return build_test(data, n_test, rng, opts);
        },
        py::arg("dir"), py::arg("split") = "u1.test", py::arg("n_test") = 1000,
        py::arg("seed") = 1, py::arg("one_hot_occupation") = false);

  // --- harness ----------------------------------------------------------------
  py::class_<TraceRow>(m, "TraceRow")
      .def_readonly("trial", &TraceRow::trial)
      .def_readonly("attacker", &TraceRow::attacker)
      .def_readonly("mechanism", &TraceRow::mechanism)
      .def_readonly("t", &TraceRow::t)
      .def_readonly("reported", &TraceRow::reported)
      .def_readonly("query_risk", &TraceRow::query_risk)
      .def_readonly("final_risk", &TraceRow::final_risk);

  py::class_<TrialResult>(m, "TrialResult")
      .def_readonly("trial", &TrialResult::trial)
      .def_readonly("rows", &TrialResult::rows)
      .def_readonly("audit", &TrialResult::audit)
      .def("final_prediction",
           [](const TrialResult& r) { return to_int_labels(r.final_prediction); })
      .def("hidden_labels", [](const TrialResult& r) { return to_int_labels(r.hidden_labels); });

  py::class_<CurvePoint>(m, "CurvePoint")
      .def_readonly("t", &CurvePoint::t)
      .def_readonly("mean_risk", &CurvePoint::mean_risk)
      .def_readonly("stderr_risk", &CurvePoint::stderr_risk)
      .def_readonly("n_trials", &CurvePoint::n_trials);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init(&config_from_dict), py::arg("options"))
      .def("to_dict",
           [](const ExperimentConfig& c) {
             py::dict d;
             for (const auto& [key, value] : config_to_kv(c)) d[py::str(key)] = value;
             return d;
           })
      .def("validate", &ExperimentConfig::validate);

  m.def("run_trial", &run_trial, py::arg("config"), py::arg("trial"));
  m.def("run_experiment",
        [](const ExperimentConfig& config, bool return_trials) {
          std::vector<TrialResult> trials;
          std::vector<CurvePoint> curve;
          {
            py::gil_scoped_release release;
            curve = run_experiment(config, return_trials ? &trials : nullptr);
          }
          return py::make_tuple(curve, trials);
        },
        py::arg("config"), py::arg("return_trials") = false);
  m.def("build_trial_dataset", &build_trial_dataset, py::arg("config"), py::arg("trial"));
  m.def("write_trace_csv", &write_trace_csv, py::arg("path"), py::arg("trials"));
  m.def("write_curve_csv", &write_curve_csv, py::arg("path"), py::arg("curve"));
  m.def("read_curve_csv", &read_curve_csv, py::arg("path"));
  m.def("write_audit_csv", &write_audit_csv, py::arg("path"), py::arg("mechanism"),
        py::arg("trials"));
  m.def("render_curves_svg",
        [](const std::vector<std::pair<std::string, std::vector<CurvePoint>>>& curves) {
          std::vector<NamedCurve> named;
          for (const auto& [label, points] : curves) named.push_back(NamedCurve{label, points});
          return render_curves_svg(named);
        },
        py::arg("curves"));

  m.def("run_verification", [](std::uint64_t seed) {
    std::ostringstream out;
    const bool ok = verify::run_verification(seed, out);
    return py::make_tuple(ok, out.str());
  }, py::arg("seed") = 20240601);
}
