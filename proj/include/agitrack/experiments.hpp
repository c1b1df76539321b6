#pragma once

#include "agitrack/eval.hpp"

namespace agitrack {

struct ExperimentConfig {
  std::vector<LearnerKind> learners = {LearnerKind::LR, LearnerKind::RF, LearnerKind::SVM};
  bool with_cost = true;
  bool without_cost = true;
  std::uint64_t seed = 0;
  int k_outer = 10;
  int k_inner = 5;
  int workers = 1;
};

// One sweep point for one learner/cost combination. `parameter` is the
// threshold in minutes for the length sweeps, the interval in seconds for the
// downsample sweep, and 0 for the baseline. Points whose retained subset
// cannot be cross-validated are recorded as skipped, not fatal.
struct ResultRow {
  std::string experiment;
  double parameter = 0.0;
  std::string learner;
  bool cost = false;
  double auc = 0.0;
  long n_shifts = 0;
  long n_positive = 0;
  std::string status = "ok";  // ok | skipped(...) | error(...)
};

struct ExperimentResult {
  std::string kind;
  std::vector<ResultRow> rows;
  std::uint64_t seed = 0;
  std::string config_echo;
  // baseline runs keep the full CV result per learner/cost for score export
  std::vector<std::pair<LearnerSpec, CvResult>> cv_details;
};

ExperimentResult run_baseline(const std::vector<ShiftRecord>& shifts,
                              const ExperimentConfig& config);

// Larger-sequences sweep: keep shifts with coverage >= b for b = 0..240 min
// in 15-minute steps (17 points).
ExperimentResult run_lse(const std::vector<ShiftRecord>& shifts, const ExperimentConfig& config);

// Smaller-sequences sweep: keep shifts with coverage <= b for b = 480..240
// min in 15-minute steps (17 points).
ExperimentResult run_sse(const std::vector<ShiftRecord>& shifts, const ExperimentConfig& config);

// Decimation sweep over intervals 60..3600 s in 60 s steps (60 points);
// shifts dropped by the five-point rule leave the subset and features are
// re-extracted from the decimated series.
ExperimentResult run_downsample(const std::vector<ShiftRecord>& shifts,
                                const ExperimentConfig& config);

// Per behaviour group and label class: score histogram, missing counts and
// the fraction of present agitation-shift scores below 3.
struct PasAuditReport {
  struct GroupClassStats {
    std::array<long, 5> histogram{};  // scores 0..4
    long missing = 0;
  };
  std::array<std::array<GroupClassStats, 2>, 4> stats;  // [group][label class]
  std::array<double, 4> below3_fraction{};              // agitation shifts, present scores
  long unjoined_entries = 0;
  long joined_entries = 0;
};

PasAuditReport pas_audit(const std::vector<PasEntry>& entries,
                         const std::vector<ShiftLabel>& labels);

void write_experiment_csv(const ExperimentResult& result, const std::filesystem::path& path,
                          bool with_timestamp);
void write_pas_audit_csv(const PasAuditReport& report, const std::filesystem::path& path,
                         bool with_timestamp);

}  // namespace agitrack
