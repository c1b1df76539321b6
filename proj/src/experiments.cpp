#include "agitrack/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace agitrack {

namespace {

struct ComboJob {
  double parameter;
  LearnerKind learner;
  bool cost;
  std::size_t subset;  // index into the per-parameter subsets
};

void stamp(std::ofstream& out, bool with_timestamp) {
  if (!with_timestamp) return;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&now));
  out << "# generated " << buf << "\n";
}

std::string config_echo(const ExperimentConfig& config) {
  std::ostringstream os;
  os << "learners=";
  for (std::size_t i = 0; i < config.learners.size(); ++i)
    os << (i ? "+" : "") << learner_name(config.learners[i]);
  os << " cost=" << (config.with_cost && config.without_cost
                         ? "both"
                         : (config.with_cost ? "on" : "off"))
     << " seed=" << config.seed << " k_outer=" << config.k_outer
     << " k_inner=" << config.k_inner;
  return os.str();
}

std::vector<bool> cost_flags(const ExperimentConfig& config) {
  std::vector<bool> flags;
  if (config.without_cost) flags.push_back(false);
  if (config.with_cost) flags.push_back(true);
  return flags;
}

// Runs every (parameter, learner, cost) combination over precomputed subsets.
// Each job is an independent nested CV with the experiment seed, so the point
// that reproduces the unfiltered dataset matches the baseline bit for bit.
ExperimentResult run_sweep(const std::string& kind, const std::vector<double>& parameters,
                           const std::vector<const std::vector<ShiftRecord>*>& subsets,
                           const ExperimentConfig& config, bool keep_cv_details) {
  if (parameters.size() != subsets.size())
    throw ValidationError("sweep parameter/subset count mismatch");

  struct Prepared {
    Matrix X;
    std::vector<int> y;
    long n_shifts = 0;
    long n_positive = 0;
  };
  std::vector<Prepared> prepared(subsets.size());
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    const auto& shifts = *subsets[s];
    prepared[s].X = feature_matrix(shifts);
    prepared[s].y = shift_labels(shifts);
    prepared[s].n_shifts = static_cast<long>(shifts.size());
    for (int y : prepared[s].y) prepared[s].n_positive += y;
  }

  std::vector<ComboJob> jobs;
  for (std::size_t s = 0; s < parameters.size(); ++s)
    for (LearnerKind learner : config.learners)
      for (bool cost : cost_flags(config)) jobs.push_back({parameters[s], learner, cost, s});

  ExperimentResult result;
  result.kind = kind;
  result.seed = config.seed;
  result.config_echo = config_echo(config);
  result.rows.resize(jobs.size());
  std::vector<std::pair<LearnerSpec, CvResult>> details(jobs.size());

  parallel_for(jobs.size(), config.workers, [&](std::size_t j) {
    const ComboJob& job = jobs[j];
    const Prepared& data = prepared[job.subset];
    ResultRow row;
    row.experiment = kind;
    row.parameter = job.parameter;
    row.learner = std::string(learner_name(job.learner));
    row.cost = job.cost;
    row.n_shifts = data.n_shifts;
    row.n_positive = data.n_positive;
    const long n_negative = data.n_shifts - data.n_positive;
    if (data.n_positive < config.k_outer || n_negative < config.k_outer) {
      row.status = "skipped(class under k_outer)";
      row.auc = std::numeric_limits<double>::quiet_NaN();
    } else {
      try {
        const LearnerSpec spec = LearnerSpec::make(job.learner, job.cost, data.X.cols);
        CvResult cv = nested_cv(data.X, data.y, spec, config.k_outer, config.k_inner,
                                config.seed, 1);
        row.auc = cv.auc;
        if (keep_cv_details) details[j] = {spec, std::move(cv)};
      } catch (const ValidationError& e) {
        row.status = std::string("skipped(") + e.what() + ")";
        row.auc = std::numeric_limits<double>::quiet_NaN();
      } catch (const std::exception& e) {
        row.status = std::string("error(") + e.what() + ")";
        row.auc = std::numeric_limits<double>::quiet_NaN();
      }
    }
    result.rows[j] = std::move(row);
  });

  if (keep_cv_details)
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (result.rows[j].status == "ok") result.cv_details.push_back(std::move(details[j]));
  return result;
}

}  // namespace

ExperimentResult run_baseline(const std::vector<ShiftRecord>& shifts,
                              const ExperimentConfig& config) {
  return run_sweep("baseline", {0.0}, {&shifts}, config, true);
}

ExperimentResult run_lse(const std::vector<ShiftRecord>& shifts, const ExperimentConfig& config) {
  std::vector<double> parameters;
  std::vector<std::vector<ShiftRecord>> retained;
  for (int b = 0; b <= 240; b += 15) {
    parameters.push_back(static_cast<double>(b));
    retained.push_back(filter_by_length(shifts, LengthFilter::AtLeast, b * 60.0));
  }
  std::vector<const std::vector<ShiftRecord>*> subsets;
  for (const auto& r : retained) subsets.push_back(&r);
  return run_sweep("lse", parameters, subsets, config, false);
}

ExperimentResult run_sse(const std::vector<ShiftRecord>& shifts, const ExperimentConfig& config) {
  std::vector<double> parameters;
  std::vector<std::vector<ShiftRecord>> retained;
  for (int b = 480; b >= 240; b -= 15) {
    parameters.push_back(static_cast<double>(b));
    retained.push_back(filter_by_length(shifts, LengthFilter::AtMost, b * 60.0));
  }
  std::vector<const std::vector<ShiftRecord>*> subsets;
  for (const auto& r : retained) subsets.push_back(&r);
  return run_sweep("sse", parameters, subsets, config, false);
}

ExperimentResult run_downsample(const std::vector<ShiftRecord>& shifts,
                                const ExperimentConfig& config) {
  std::vector<double> parameters;
  std::vector<std::vector<ShiftRecord>> retained;
  for (int interval = 60; interval <= 3600; interval += 60) {
    parameters.push_back(static_cast<double>(interval));
    std::vector<ShiftRecord> survivors;
    for (const auto& shift : shifts)
      if (auto reduced = decimate(shift, static_cast<double>(interval)))
        survivors.push_back(std::move(*reduced));
    retained.push_back(std::move(survivors));
  }
  std::vector<const std::vector<ShiftRecord>*> subsets;
  for (const auto& r : retained) subsets.push_back(&r);
  return run_sweep("downsample", parameters, subsets, config, false);
}

PasAuditReport pas_audit(const std::vector<PasEntry>& entries,
                         const std::vector<ShiftLabel>& labels) {
  std::map<std::tuple<std::string, std::int64_t, int>, int> label_by_key;
  for (const auto& l : labels)
    label_by_key[{l.participant_id, l.date.epoch_day(), static_cast<int>(l.kind)}] =
        l.agitation;

  PasAuditReport report;
  std::array<long, 4> below3{};
  std::array<long, 4> present_on_agitation{};
  for (const auto& entry : entries) {
    const auto it = label_by_key.find(
        {entry.participant_id, entry.date.epoch_day(), static_cast<int>(entry.kind)});
    if (it == label_by_key.end()) {
      ++report.unjoined_entries;
      continue;
    }
    ++report.joined_entries;
    const int cls = it->second;
    for (std::size_t g = 0; g < 4; ++g) {
      auto& stats = report.stats[g][static_cast<std::size_t>(cls)];
      if (!entry.scores[g]) {
        ++stats.missing;
        continue;
      }
      const int score = *entry.scores[g];
      ++stats.histogram[static_cast<std::size_t>(score)];
      if (cls == 1) {
        ++present_on_agitation[g];
        if (score < 3) ++below3[g];
      }
    }
  }
  for (std::size_t g = 0; g < 4; ++g)
    report.below3_fraction[g] =
        present_on_agitation[g] > 0
            ? static_cast<double>(below3[g]) / static_cast<double>(present_on_agitation[g])
            : 0.0;
  return report;
}

void write_experiment_csv(const ExperimentResult& result, const std::filesystem::path& path,
                          bool with_timestamp) {
  std::ofstream out(path, std::ios::binary);
  stamp(out, with_timestamp);
  out << "# " << result.kind << " seed=" << result.seed << " " << result.config_echo << "\n";
  out << "experiment,parameter,learner,cost,auc,n_shifts,n_positive,status\n";
  for (const auto& row : result.rows)
    out << row.experiment << "," << format_double(row.parameter) << "," << row.learner << ","
        << (row.cost ? "on" : "off") << ","
        << (std::isfinite(row.auc) ? format_double(row.auc) : "") << "," << row.n_shifts << ","
        << row.n_positive << "," << row.status << "\n";
}

void write_pas_audit_csv(const PasAuditReport& report, const std::filesystem::path& path,
                         bool with_timestamp) {
  std::ofstream out(path, std::ios::binary);
  stamp(out, with_timestamp);
  out << "# joined=" << report.joined_entries << " unjoined=" << report.unjoined_entries << "\n";
  out << "group,label_class,score,count\n";
  for (std::size_t g = 0; g < 4; ++g)
    for (int cls = 0; cls < 2; ++cls) {
      const auto& stats = report.stats[g][static_cast<std::size_t>(cls)];
      for (int score = 0; score < 5; ++score)
        out << kPasGroups[g] << "," << cls << "," << score << ","
            << stats.histogram[static_cast<std::size_t>(score)] << "\n";
      out << kPasGroups[g] << "," << cls << ",missing," << stats.missing << "\n";
    }
  out << "group,below3_fraction_on_agitation\n";
  for (std::size_t g = 0; g < 4; ++g)
    out << kPasGroups[g] << "," << format_double(report.below3_fraction[g]) << "\n";
}

}  // namespace agitrack
