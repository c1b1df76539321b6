// Command-line front end: synthesize a cohort, extract the per-shift feature
// table, run the experiment sweeps and audit chart scores.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <thread>

#include "agitrack/experiments.hpp"
#include "agitrack/synthcohort.hpp"

namespace fs = std::filesystem;
using namespace agitrack;

namespace {

struct CommonOpts {
  std::string output = "out";
  bool no_timestamp = false;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
};

void print_bin_histogram(const std::vector<ShiftRecord>& shifts) {
  std::array<long, 8> bins{};
  std::array<long, 8> positive{};
  for (const auto& s : shifts) {
    const auto b = static_cast<std::size_t>(bin_index(s.coverage_s) - 1);
    ++bins[b];
    positive[b] += s.label;
  }
  std::cout << "              ";
  for (int b = 1; b <= 8; ++b) std::cout << "Bin" << b << "\t";
  std::cout << "\nall shifts    ";
  for (long c : bins) std::cout << c << "\t";
  std::cout << "\nagitation     ";
  for (long c : positive) std::cout << c << "\t";
  std::cout << "\n";
}

double parse_rate_override(const std::string& spec, CohortConfig& config) {
  // ACC=4,BVP=8,EDA=0.5,TEMP=0.5
  double max_rate = 0.0;
  for (const auto& part : split_csv_line(spec)) {
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      throw ValidationError("rate override must look like ACC=32,BVP=64: " + part);
    const Modality m = modality_from_name(part.substr(0, eq));
    const double rate = parse_double(part.substr(eq + 1));
    switch (m) {
      case Modality::Acc: config.rate_acc = rate; break;
      case Modality::Bvp: config.rate_bvp = rate; break;
      case Modality::Eda: config.rate_eda = rate; break;
      case Modality::Temp: config.rate_temp = rate; break;
    }
    max_rate = std::max(max_rate, rate);
  }
  return max_rate;
}

int cmd_synth(const CommonOpts& common, const CohortConfig& config) {
  const Cohort cohort = generate_cohort(config);
  const fs::path root(common.output);
  write_cohort(cohort, root);
  const CohortReport report = verify_cohort(cohort, config);
  long positives = 0;
  for (const auto& l : cohort.labels) positives += l.agitation;
  std::cout << "cohort: " << cohort.labels.size() << " shifts, " << positives
            << " with agitation (" << format_double(static_cast<double>(positives) /
                                                    static_cast<double>(cohort.labels.size()))
            << "), effect " << effect_size_name(config.effect) << "\n";
  std::cout << "coverage bins:";
  for (long c : report.bin_histogram) std::cout << " " << c;
  std::cout << "\nwrote " << (root / "sessions").string() << ", labels.csv, pas.csv, episodes.csv\n";
  if (!report.violations.empty()) {
    std::cerr << "cohort verification failed:\n";
    for (const auto& v : report.violations) std::cerr << "  " << v << "\n";
    return 1;
  }
  return 0;
}

int cmd_features(const CommonOpts& common, const std::string& data, const std::string& labels,
                 double target_hz, int utc_offset) {
  TimebaseConfig cfg;
  cfg.target_hz = target_hz;
  cfg.utc_offset_s = utc_offset;
  const auto shifts = build_shifts(data, labels, cfg);
  if (shifts.empty()) {
    std::cerr << "no labeled shifts with data found under " << data << "\n";
    return 1;
  }
  fs::create_directories(common.output);
  const fs::path table = fs::path(common.output) / "features.csv";
  write_feature_table(shifts, table, !common.no_timestamp);
  std::cout << shifts.size() << " shifts at " << format_double(shifts[0].common_rate_hz)
            << " Hz common rate -> " << table.string() << "\n";
  print_bin_histogram(shifts);
  return 0;
}

int run_one_experiment(const std::string& name, const std::vector<ShiftRecord>& shifts,
                       const ExperimentConfig& config, const CommonOpts& common) {
  ExperimentResult result;
  if (name == "baseline")
    result = run_baseline(shifts, config);
  else if (name == "lse")
    result = run_lse(shifts, config);
  else if (name == "sse")
    result = run_sse(shifts, config);
  else if (name == "downsample")
    result = run_downsample(shifts, config);
  else
    throw ValidationError("unknown experiment: " + name);

  const fs::path out = fs::path(common.output) / ("results_" + name + ".csv");
  write_experiment_csv(result, out, !common.no_timestamp);
  std::cout << name << ": " << result.rows.size() << " rows -> " << out.string() << "\n";

  // baseline additionally exports the concatenated per-shift scores
  if (!result.cv_details.empty()) {
    std::vector<ShiftKeyRef> keys;
    keys.reserve(shifts.size());
    for (const auto& s : shifts)
      keys.push_back({s.participant_id, s.date.to_string(),
                      std::string(shift_kind_name(s.kind))});
    for (const auto& [spec, cv] : result.cv_details) {
      const std::string file = "cv_scores_" + std::string(learner_name(spec.kind)) +
                               (spec.cost_enabled ? "_cost" : "_nocost") + ".csv";
      write_cv_result(cv, spec, keys, fs::path(common.output) / file, !common.no_timestamp);
    }
  }

  bool failed = false;
  for (const auto& row : result.rows) {
    std::cout << "  " << row.learner << (row.cost ? "+cost" : "") << " param "
              << format_double(row.parameter) << ": ";
    if (row.status == "ok")
      std::cout << "auc " << format_double(row.auc);
    else
      std::cout << row.status;
    std::cout << " (n=" << row.n_shifts << ", pos=" << row.n_positive << ")\n";
    if (row.status.rfind("error", 0) == 0) failed = true;
  }
  return failed ? 1 : 0;
}

int cmd_pas_audit(const CommonOpts& common, const std::string& pas_path,
                  const std::string& labels_path) {
  const PasManifest manifest = load_pas_manifest(pas_path);
  const auto labels = load_label_manifest(labels_path);
  const PasAuditReport report = pas_audit(manifest.entries, labels);
  fs::create_directories(common.output);
  const fs::path out = fs::path(common.output) / "pas_audit.csv";
  write_pas_audit_csv(report, out, !common.no_timestamp);
  std::cout << "joined " << report.joined_entries << " entries, " << report.unjoined_entries
            << " unmatched -> " << out.string() << "\n";
  for (std::size_t g = 0; g < 4; ++g)
    std::cout << "  " << kPasGroups[g]
              << " missing=" << format_double(manifest.missing_fraction[g])
              << " below-3 fraction on agitation shifts="
              << format_double(report.below3_fraction[g]) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agitrack: shift-level agitation detection from wearable multi-modal data"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a key=value file");

  CommonOpts common;

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort with known episodes");
  CohortConfig cohort_config;
  bool full_rate = false;
  std::string rates_spec;
  double episode_min_minutes = 1.0;
  double episode_max_minutes = 180.0;
  std::string effect_name = "large";
  synth->add_option("--output", common.output, "output directory")->required();
  synth->add_option("--seed", cohort_config.seed, "generator seed")->required();
  synth->add_option("--shifts", cohort_config.n_shifts, "number of shifts")
      ->check(CLI::PositiveNumber);
  synth->add_option("--positive-ratio", cohort_config.positive_ratio,
                    "fraction of shifts with agitation");
  synth->add_option("--participants", cohort_config.n_participants, "participant count");
  synth->add_option("--effect", effect_name, "episode effect size: none|small|large");
  synth->add_option("--episode-min-minutes", episode_min_minutes, "shortest episode");
  synth->add_option("--episode-max-minutes", episode_max_minutes, "longest episode");
  synth->add_flag("--full-rate", full_rate, "use the device-native rates (32/64/4/4 Hz)");
  synth->add_option("--rates", rates_spec, "native rate override, e.g. ACC=32,BVP=64");
  synth->add_flag("--no-timestamp", common.no_timestamp, "omit timestamp lines from outputs");

  // features
  auto* features = app.add_subcommand("features", "extract the per-shift feature table");
  std::string data_root;
  std::string labels_path;
  double target_hz = 0.0;
  int utc_offset = 0;
  features->add_option("--data", data_root, "sessions root directory")->required();
  features->add_option("--labels", labels_path, "label manifest csv")->required();
  features->add_option("--output", common.output, "output directory")->required();
  features->add_option("--target-hz", target_hz,
                       "common rate (default: max native rate found)");
  features->add_option("--utc-offset", utc_offset, "local zone offset in seconds");
  features->add_flag("--no-timestamp", common.no_timestamp, "omit timestamp lines");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run an experiment family");
  std::string experiment_name;
  std::string learners_spec = "lr,rf,svm";
  std::string cost_spec = "both";
  std::string pas_path;
  ExperimentConfig exp_config;
  experiment->add_option("name", experiment_name,
                         "baseline|lse|sse|downsample|pas-audit")->required();
  experiment->add_option("--data", data_root, "sessions root directory");
  experiment->add_option("--labels", labels_path, "label manifest csv");
  experiment->add_option("--pas", pas_path, "PAS manifest csv (pas-audit)");
  experiment->add_option("--output", common.output, "output directory")->required();
  experiment->add_option("--seed", exp_config.seed, "cross-validation seed")->required();
  experiment->add_option("--learners", learners_spec, "comma list of lr,rf,svm");
  experiment->add_option("--cost", cost_spec, "cost weighting: on|off|both");
  experiment->add_option("--workers", common.workers, "worker pool size");
  experiment->add_option("--k-outer", exp_config.k_outer, "outer fold count");
  experiment->add_option("--k-inner", exp_config.k_inner, "inner fold count");
  experiment->add_option("--target-hz", target_hz, "common rate");
  experiment->add_option("--utc-offset", utc_offset, "local zone offset in seconds");
  experiment->add_flag("--no-timestamp", common.no_timestamp, "omit timestamp lines");

  // pas-audit (top-level alias of experiment pas-audit)
  auto* pas_audit_cmd = app.add_subcommand("pas-audit", "score-distribution audit of a PAS manifest");
  pas_audit_cmd->add_option("--pas", pas_path, "PAS manifest csv")->required();
  pas_audit_cmd->add_option("--labels", labels_path, "label manifest csv")->required();
  pas_audit_cmd->add_option("--output", common.output, "output directory")->required();
  pas_audit_cmd->add_flag("--no-timestamp", common.no_timestamp, "omit timestamp lines");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      if (full_rate) cohort_config.set_full_rates();
      if (!rates_spec.empty()) parse_rate_override(rates_spec, cohort_config);
      cohort_config.effect = effect_size_from_name(effect_name);
      cohort_config.episode_min_s = episode_min_minutes * 60.0;
      cohort_config.episode_max_s = episode_max_minutes * 60.0;
      return cmd_synth(common, cohort_config);
    }
    if (features->parsed())
      return cmd_features(common, data_root, labels_path, target_hz, utc_offset);
    if (experiment->parsed()) {
      if (experiment_name == "pas-audit") {
        if (pas_path.empty() || labels_path.empty())
          throw ValidationError("pas-audit needs --pas and --labels");
        return cmd_pas_audit(common, pas_path, labels_path);
      }
      if (data_root.empty() || labels_path.empty())
        throw ValidationError("experiment needs --data and --labels");
      exp_config.learners.clear();
      for (const auto& token : split_csv_line(learners_spec))
        exp_config.learners.push_back(learner_from_name(token));
      if (cost_spec == "both") {
        exp_config.with_cost = exp_config.without_cost = true;
      } else if (cost_spec == "on") {
        exp_config.with_cost = true;
        exp_config.without_cost = false;
      } else if (cost_spec == "off") {
        exp_config.with_cost = false;
        exp_config.without_cost = true;
      } else {
        throw ValidationError("--cost must be on, off or both");
      }
      exp_config.workers = std::max(1, common.workers);
      TimebaseConfig cfg;
      cfg.target_hz = target_hz;
      cfg.utc_offset_s = utc_offset;
      const auto shifts = build_shifts(data_root, labels_path, cfg);
      if (shifts.empty()) {
        std::cerr << "no labeled shifts with data found under " << data_root << "\n";
        return 1;
      }
      fs::create_directories(common.output);
      return run_one_experiment(experiment_name, shifts, exp_config, common);
    }
    if (pas_audit_cmd->parsed()) return cmd_pas_audit(common, pas_path, labels_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
