#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "agitrack/experiments.hpp"
#include "agitrack/synthcohort.hpp"

namespace py = pybind11;
using namespace agitrack;

namespace {

SensorStream make_stream(Modality m, double rate_hz,
                         std::vector<std::vector<double>> axes) {
  SensorStream s;
  s.modality = m;
  s.rate_hz = rate_hz;
  s.axes = std::move(axes);
  return s;
}

ShiftRecord make_shift(std::vector<double> acc, std::vector<double> bvp,
                       std::vector<double> eda, std::vector<double> temp, double rate_hz,
                       int label) {
  ShiftRecord shift;
  shift.participant_id = "py";
  shift.common_rate_hz = rate_hz;
  shift.coverage_s = static_cast<double>(acc.size()) / rate_hz;
  shift.label = label;
  shift.samples(Modality::Acc) = std::move(acc);
  shift.samples(Modality::Bvp) = std::move(bvp);
  shift.samples(Modality::Eda) = std::move(eda);
  shift.samples(Modality::Temp) = std::move(temp);
  return shift;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix X(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != X.cols) throw ValidationError("ragged feature rows");
    std::copy(rows[i].begin(), rows[i].end(), X.row(i));
  }
  return X;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "agitrack core: shift-level agitation detection from wearable data";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("feature_names", [] {
    const auto& names = FeatureVector::names();
    return std::vector<std::string>(names.begin(), names.end());
  });

  m.def(
      "basic_stats",
      [](const std::vector<double>& series, double rate_hz) {
        const BasicStats s = basic_stats(series, rate_hz);
        py::dict d;
        d["mean"] = s.mean;
        d["min"] = s.min;
        d["max"] = s.max;
        d["std"] = s.std;
        d["iqr"] = s.iqr;
        d["range"] = s.range;
        d["n_abrupt"] = s.n_abrupt;
        d["max_abrupt"] = s.max_abrupt;
        d["max_gradient"] = s.max_gradient;
        d["cov"] = s.cov_finite ? py::cast(s.cov) : py::none().cast<py::object>();
        return d;
      },
      py::arg("series"), py::arg("rate_hz"));

  m.def(
      "decompose_eda",
      [](const std::vector<double>& series, double rate_hz) {
        EdaDecomposition d = decompose_eda(series, rate_hz);
        return py::make_tuple(std::move(d.tonic), std::move(d.phasic));
      },
      py::arg("series"), py::arg("rate_hz"), "returns (tonic, phasic)");

  m.def(
      "peak_features",
      [](const std::vector<double>& series, double spacing_s) {
        const PeakFeatures p = peak_features(series, spacing_s);
        return py::make_tuple(p.trapz, p.n_peaks, p.peak_max, p.peak_min);
      },
      py::arg("series"), py::arg("spacing_s"));

  m.def(
      "tonic_extras",
      [](const std::vector<double>& series) {
        const TonicExtras t = tonic_extras(series);
        return py::make_tuple(t.max_abs_diff, t.mode);
      },
      py::arg("series"));

  m.def(
      "resample",
      [](const std::vector<double>& samples, double rate_hz, double target_hz) {
        auto out = resample(make_stream(Modality::Eda, rate_hz, {samples}), target_hz);
        return out.axes[0];
      },
      py::arg("samples"), py::arg("rate_hz"), py::arg("target_hz"));

  m.def(
      "acc_magnitude",
      [](const std::vector<double>& x, const std::vector<double>& y,
         const std::vector<double>& z) {
        auto out = acc_magnitude(make_stream(Modality::Acc, 1.0, {x, y, z}));
        return out.axes[0];
      },
      py::arg("x"), py::arg("y"), py::arg("z"));

  m.def("bin_index", &bin_index, py::arg("coverage_s"));

  m.def(
      "shift_features",
      [](std::vector<double> acc, std::vector<double> bvp, std::vector<double> eda,
         std::vector<double> temp, double rate_hz) {
        const FeatureExtraction fx = shift_features(
            make_shift(std::move(acc), std::move(bvp), std::move(eda), std::move(temp),
                       rate_hz, 0));
        return std::vector<double>(fx.features.values.begin(), fx.features.values.end());
      },
      py::arg("acc"), py::arg("bvp"), py::arg("eda"), py::arg("temp"), py::arg("rate_hz"),
      "49 features from aligned per-modality series at a common rate");

  m.def(
      "decimate",
      [](std::vector<double> acc, std::vector<double> bvp, std::vector<double> eda,
         std::vector<double> temp, double rate_hz,
         double interval_s) -> py::object {
        const auto reduced = decimate(
            make_shift(std::move(acc), std::move(bvp), std::move(eda), std::move(temp),
                       rate_hz, 0),
            interval_s);
        if (!reduced) return py::none();
        py::dict d;
        d["acc"] = reduced->samples(Modality::Acc);
        d["bvp"] = reduced->samples(Modality::Bvp);
        d["eda"] = reduced->samples(Modality::Eda);
        d["temp"] = reduced->samples(Modality::Temp);
        d["rate_hz"] = reduced->common_rate_hz;
        return d;
      },
      py::arg("acc"), py::arg("bvp"), py::arg("eda"), py::arg("temp"), py::arg("rate_hz"),
      py::arg("interval_s"), "None when the five-point rule discards the shift");

  m.def(
      "compute_cost_matrix",
      [](const std::vector<int>& labels) {
        const CostMatrix c = compute_cost_matrix(labels);
        return py::make_tuple(c.c_fn, c.c_fp);
      },
      py::arg("labels"), "returns (c_fn, c_fp)");

  m.def("roc_auc", &roc_auc, py::arg("scores"), py::arg("labels"));

  m.def(
      "roc_curve",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        std::vector<std::pair<double, double>> out;
        for (const RocPoint& p : roc_curve(scores, labels)) out.emplace_back(p.fpr, p.tpr);
        return out;
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "stratified_folds",
      [](const std::vector<int>& labels, int k, std::uint64_t seed) {
        return stratified_folds(labels, k, seed).assignment;
      },
      py::arg("labels"), py::arg("k"), py::arg("seed"));

  m.def(
      "nested_cv",
      [](const std::vector<std::vector<double>>& X, const std::vector<int>& y,
         const std::string& learner, bool cost, std::uint64_t seed, int k_outer, int k_inner,
         int workers) {
        const Matrix features = to_matrix(X);
        const LearnerSpec spec =
            LearnerSpec::make(learner_from_name(learner), cost, features.cols);
        const CvResult result = nested_cv(features, y, spec, k_outer, k_inner, seed, workers);
        py::dict d;
        d["auc"] = result.auc;
        d["scores"] = result.concatenated_scores;
        d["fold_assignment"] = result.outer_plan.assignment;
        std::vector<std::string> choices;
        for (const auto& cell : result.fold_choices)
          choices.push_back(grid_cell_to_string(spec.kind, cell));
        d["fold_choices"] = choices;
        return d;
      },
      py::arg("X"), py::arg("y"), py::arg("learner"), py::arg("cost"), py::arg("seed"),
      py::arg("k_outer") = 10, py::arg("k_inner") = 5, py::arg("workers") = 1);

  m.def(
      "generate_cohort",
      [](const std::filesystem::path& out_dir, int n_shifts, double positive_ratio,
         const std::string& effect, std::uint64_t seed, bool full_rate) {
        CohortConfig config;
        config.n_shifts = n_shifts;
        config.positive_ratio = positive_ratio;
        config.effect = effect_size_from_name(effect);
        config.seed = seed;
        if (full_rate) config.set_full_rates();
        const Cohort cohort = generate_cohort(config);
        write_cohort(cohort, out_dir);
        long positives = 0;
        for (const auto& l : cohort.labels) positives += l.agitation;
        py::dict d;
        d["n_shifts"] = cohort.labels.size();
        d["n_positive"] = positives;
        d["n_episodes"] = cohort.episodes.size();
        return d;
      },
      py::arg("out_dir"), py::arg("n_shifts"), py::arg("positive_ratio") = 0.202,
      py::arg("effect") = "large", py::arg("seed") = 0, py::arg("full_rate") = false);

  m.def(
      "load_feature_table",
      [](const std::filesystem::path& data_root, const std::filesystem::path& labels_csv,
         double target_hz) {
        TimebaseConfig cfg;
        cfg.target_hz = target_hz;
        const auto shifts = build_shifts(data_root, labels_csv, cfg);
        const Matrix X = feature_matrix(shifts);
        std::vector<std::vector<double>> rows(X.rows);
        for (std::size_t i = 0; i < X.rows; ++i)
          rows[i].assign(X.row(i), X.row(i) + X.cols);
        return py::make_tuple(rows, shift_labels(shifts));
      },
      py::arg("data_root"), py::arg("labels_csv"), py::arg("target_hz") = 0.0,
      "returns (feature_rows, labels)");

  m.attr("__version__") = "0.1.0";
}
