#pragma once

#include "agitrack/timebase.hpp"

namespace agitrack {

enum class EffectSize { None, Small, Large };
std::string_view effect_size_name(EffectSize e);
EffectSize effect_size_from_name(std::string_view name);

struct CohortConfig {
  int n_shifts = 693;
  double positive_ratio = 0.202;
  // coverage-hour bin weights (1..8 h), normalized internally
  std::array<double, 8> bin_weights = {9, 15, 77, 118, 151, 131, 82, 110};
  // desk-scale native rates; full_rates() gives the device's native rates
  double rate_acc = 4.0;
  double rate_bvp = 8.0;
  double rate_eda = 0.5;
  double rate_temp = 0.5;
  EffectSize effect = EffectSize::Large;
  double episode_min_s = 60.0;     // episodes run one minute up to three hours
  double episode_max_s = 10800.0;
  int n_participants = 20;
  std::uint64_t seed = 0;

  void set_full_rates() {
    rate_acc = 32.0;
    rate_bvp = 64.0;
    rate_eda = 4.0;
    rate_temp = 4.0;
  }
  double rate(Modality m) const {
    switch (m) {
      case Modality::Acc: return rate_acc;
      case Modality::Bvp: return rate_bvp;
      case Modality::Eda: return rate_eda;
      case Modality::Temp: return rate_temp;
    }
    return 0.0;
  }
};

// Known injected episode; written to a side file the pipeline never reads.
struct EpisodeRecord {
  std::string participant_id;
  CivilDate date;
  ShiftKind kind = ShiftKind::Morning;
  double start_offset_s = 0.0;  // from the start of recorded data
  double duration_s = 0.0;
};

struct Cohort {
  std::vector<SessionData> sessions;  // one recording segment per shift
  std::vector<ShiftLabel> labels;
  std::vector<EpisodeRecord> episodes;
  std::vector<PasEntry> pas;  // chart-style scores derived from the labels
};

// Deterministic per (config, seed); a shift is labeled 1 iff it received at
// least one episode, and with EffectSize::None no overlay is applied at all.
Cohort generate_cohort(const CohortConfig& config);

// Writes sessions/<participant>/<date>/<session>/, labels.csv, pas.csv and
// episodes.csv under root.
void write_cohort(const Cohort& cohort, const std::filesystem::path& root);

std::vector<EpisodeRecord> load_episode_records(const std::filesystem::path& path);

struct CohortReport {
  std::vector<std::string> violations;
  std::array<long, 8> bin_histogram{};
  double chi_square = 0.0;
  double chi_square_p = 1.0;  // against the configured bin distribution
};

CohortReport verify_cohort(const Cohort& cohort, const CohortConfig& config);

// Upper regularized incomplete gamma Q(a, x); chi-square tail probability is
// Q(dof/2, x/2).
double gamma_q(double a, double x);
double chi_square_tail(double statistic, int dof);

}  // namespace agitrack
