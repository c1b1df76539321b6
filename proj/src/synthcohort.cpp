#include "agitrack/synthcohort.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

namespace agitrack {

std::string_view effect_size_name(EffectSize e) {
  switch (e) {
    case EffectSize::None: return "none";
    case EffectSize::Small: return "small";
    case EffectSize::Large: return "large";
  }
  return "?";
}

EffectSize effect_size_from_name(std::string_view name) {
  if (name == "none") return EffectSize::None;
  if (name == "small") return EffectSize::Small;
  if (name == "large") return EffectSize::Large;
  throw ValidationError("unknown effect size: " + std::string(name));
}

namespace {

constexpr CivilDate kBaseDate{2018, 1, 1};

struct Interval {
  double start = 0.0;
  double end = 0.0;
};

// Walks sorted intervals as t increases monotonically.
class IntervalCursor {
 public:
  explicit IntervalCursor(const std::vector<Interval>& intervals) : intervals_(intervals) {}

  bool contains(double t) {
    while (head_ < intervals_.size() && intervals_[head_].end <= t) ++head_;
    for (std::size_t i = head_; i < intervals_.size() && intervals_[i].start <= t; ++i)
      if (t < intervals_[i].end) return true;
    return false;
  }

 private:
  const std::vector<Interval>& intervals_;
  std::size_t head_ = 0;
};

// even-second uniform draw in [lo, hi]
double even_seconds(Rng& rng, double lo, double hi) {
  const auto lo2 = static_cast<std::int64_t>(std::ceil(lo / 2.0));
  const auto hi2 = static_cast<std::int64_t>(std::floor(hi / 2.0));
  return 2.0 * static_cast<double>(rng.uniform_int(lo2, std::max(lo2, hi2)));
}

struct EpisodeOverlay {
  double acc_sigma = 0.0;       // replaces quiet/bout noise when larger
  double acc_spike_prob = 0.0;  // per-sample impulse probability
  double bvp_delta_hz = 0.0;
  double eda_bumps_per_hour = 0.0;
  int eda_min_bumps = 0;
  double eda_amp_lo = 0.0;
  double eda_amp_hi = 0.0;
};

EpisodeOverlay overlay_for(EffectSize effect) {
  switch (effect) {
    case EffectSize::None: return {};
    case EffectSize::Small: return {0.45, 0.0, 0.35, 20.0, 0, 0.20, 0.45};
    case EffectSize::Large: return {1.10, 0.05, 0.90, 60.0, 2, 0.55, 1.15};
  }
  return {};
}

struct Bump {
  double time = 0.0;
  double amp = 0.0;
};

constexpr double kBumpRise = 2.0;
constexpr double kBumpDecay = 8.0;
constexpr double kBumpSpan = kBumpRise + 10.0 * kBumpDecay;

double bump_value(const Bump& b, double t) {
  const double dt = t - b.time;
  if (dt < 0.0 || dt > kBumpSpan) return 0.0;
  if (dt < kBumpRise) return b.amp * dt / kBumpRise;
  return b.amp * std::exp(-(dt - kBumpRise) / kBumpDecay);
}

class BumpCursor {
 public:
  explicit BumpCursor(const std::vector<Bump>& bumps) : bumps_(bumps) {}

  double sum(double t) {
    while (head_ < bumps_.size() && bumps_[head_].time + kBumpSpan < t) ++head_;
    double v = 0.0;
    for (std::size_t i = head_; i < bumps_.size() && bumps_[i].time <= t; ++i)
      v += bump_value(bumps_[i], t);
    return v;
  }

 private:
  const std::vector<Bump>& bumps_;
  std::size_t head_ = 0;
};

}  // namespace

Cohort generate_cohort(const CohortConfig& config) {
  if (config.n_shifts < 1) throw ValidationError("cohort needs at least one shift");
  if (!(config.positive_ratio > 0.0) || !(config.positive_ratio < 1.0))
    throw ValidationError("positive ratio must be in (0,1)");
  double weight_sum = 0.0;
  for (double w : config.bin_weights) {
    if (w < 0.0) throw ValidationError("bin weights must be non-negative");
    weight_sum += w;
  }
  if (weight_sum <= 0.0) throw ValidationError("bin weights must sum to a positive value");
  if (!(config.episode_min_s > 0.0) || config.episode_min_s > config.episode_max_s ||
      config.episode_max_s > kShiftSeconds)
    throw ValidationError("episode duration range must satisfy 0 < min <= max <= 28800 s");
  for (Modality m : kAllModalities)
    if (!(config.rate(m) > 0.0)) throw ValidationError("native rates must be positive");
  if (config.n_participants < 1) throw ValidationError("cohort needs at least one participant");

  const auto n = static_cast<std::size_t>(config.n_shifts);
  const auto n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(config.n_shifts) * config.positive_ratio));

  // which shifts carry episodes
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng label_rng(child_seed(config.seed, {0x1abe1ULL}));
  label_rng.shuffle(order);
  std::vector<int> labels(n, 0);
  for (std::size_t i = 0; i < n_pos && i < n; ++i) labels[order[i]] = 1;

  const std::vector<double> bin_weights(config.bin_weights.begin(), config.bin_weights.end());
  const EpisodeOverlay overlay = overlay_for(config.effect);

  Cohort cohort;
  cohort.sessions.resize(n);
  cohort.labels.resize(n);
  std::vector<std::vector<EpisodeRecord>> episodes(n);
  std::vector<PasEntry> pas(n);

  parallel_for(n, 4, [&](std::size_t i) {
    Rng rng(child_seed(config.seed, {0x5e55103ULL, i}));

    const auto participant = static_cast<int>(i % static_cast<std::size_t>(config.n_participants));
    const auto slot = i / static_cast<std::size_t>(config.n_participants);
    const ShiftKind kind = slot % 2 == 0 ? ShiftKind::Morning : ShiftKind::Evening;
    const CivilDate date =
        CivilDate::from_epoch_day(kBaseDate.epoch_day() + static_cast<std::int64_t>(slot / 2));
    char pid[8];
    std::snprintf(pid, sizeof(pid), "P%03d", participant + 1);

    ShiftLabel label;
    label.participant_id = pid;
    label.date = date;
    label.kind = kind;
    label.agitation = labels[i];
    cohort.labels[i] = label;

    // coverage and placement inside the staffed window
    const ShiftWindow window = shift_window(kind);
    const double window_len =
        kind == ShiftKind::Morning ? kShiftSeconds : static_cast<double>(window.end_s - window.start_s);
    const std::size_t bin = rng.categorical(bin_weights);
    const double bin_lo = std::max(600.0, static_cast<double>(bin) * 3600.0 + 2.0);
    const double bin_hi = std::min(static_cast<double>(bin + 1) * 3600.0, window_len);
    const double coverage = even_seconds(rng, bin_lo, bin_hi);
    const double offset = even_seconds(rng, 0.0, window_len - coverage);
    const auto start_time = static_cast<std::int64_t>(date.epoch_s()) + window.start_s +
                            static_cast<std::int64_t>(offset);

    // episodes, fully inside the recorded span
    std::vector<Interval> episode_intervals;
    if (labels[i] == 1) {
      if (config.episode_min_s > coverage)
        throw ValidationError("infeasible config: minimum episode (" +
                              format_double(config.episode_min_s) +
                              " s) exceeds a shift coverage of " + format_double(coverage) +
                              " s");
      int max_eps = 1;
      if (coverage > 7200.0)
        max_eps = 3;
      else if (coverage > 3600.0)
        max_eps = 2;
      max_eps = std::min(max_eps,
                         static_cast<int>(coverage / std::max(config.episode_min_s, 1.0)));
      const auto n_eps = static_cast<int>(rng.uniform_int(1, std::max(1, max_eps)));
      const double slot_len = coverage / n_eps;
      for (int e = 0; e < n_eps; ++e) {
        const double dur_hi = std::min(config.episode_max_s, slot_len);
        const double duration = even_seconds(rng, std::min(config.episode_min_s, dur_hi), dur_hi);
        const double start_in_slot = even_seconds(rng, 0.0, slot_len - duration);
        const double start = e * slot_len + start_in_slot;
        episode_intervals.push_back({start, start + duration});
        EpisodeRecord record;
        record.participant_id = pid;
        record.date = date;
        record.kind = kind;
        record.start_offset_s = start;
        record.duration_s = duration;
        episodes[i].push_back(record);
      }
    }
    const bool has_overlay = config.effect != EffectSize::None && !episode_intervals.empty();

    SessionData session;
    session.participant_id = pid;
    session.session_date = date;

    // ACC: gravity plus noise, sparse motion bouts, raised variance and
    // occasional spikes during overlaid episodes
    {
      Rng mod_rng(child_seed(config.seed, {0x5e55103ULL, i, 0}));
      const double rate = config.rate_acc;
      const auto n_samples = static_cast<std::size_t>(std::llround(coverage * rate));
      std::vector<Interval> bouts;
      const int n_bouts = mod_rng.poisson(coverage / 3600.0 * 6.0);
      for (int b = 0; b < n_bouts; ++b) {
        const double dur = mod_rng.uniform(10.0, 40.0);
        const double start = mod_rng.uniform(0.0, std::max(0.0, coverage - dur));
        bouts.push_back({start, start + dur});
      }
      std::sort(bouts.begin(), bouts.end(),
                [](const Interval& a, const Interval& b) { return a.start < b.start; });
      IntervalCursor bout_cursor(bouts);
      IntervalCursor episode_cursor(episode_intervals);

      SensorStream stream;
      stream.modality = Modality::Acc;
      stream.start_time = start_time;
      stream.rate_hz = rate;
      stream.axes.assign(3, std::vector<double>(n_samples));
      for (std::size_t s = 0; s < n_samples; ++s) {
        const double t = static_cast<double>(s) / rate;
        double sigma = bout_cursor.contains(t) ? 0.25 : 0.02;
        bool spiking = false;
        if (has_overlay && episode_cursor.contains(t)) {
          sigma = std::max(sigma, overlay.acc_sigma);
          spiking = overlay.acc_spike_prob > 0.0 && mod_rng.uniform() < overlay.acc_spike_prob;
        }
        stream.axes[0][s] = sigma * mod_rng.normal();
        stream.axes[1][s] = sigma * mod_rng.normal();
        stream.axes[2][s] = 1.0 + sigma * mod_rng.normal() +
                            (spiking ? 2.0 + 1.5 * mod_rng.uniform() : 0.0);
      }
      session.streams.push_back(std::move(stream));
    }

    // BVP: phase-continuous oscillation whose frequency rises in episodes
    {
      Rng mod_rng(child_seed(config.seed, {0x5e55103ULL, i, 1}));
      const double rate = config.rate_bvp;
      const auto n_samples = static_cast<std::size_t>(std::llround(coverage * rate));
      const double amp = 40.0 + 10.0 * mod_rng.uniform();
      const double f0 = 1.0 + 0.5 * mod_rng.uniform();
      IntervalCursor episode_cursor(episode_intervals);

      SensorStream stream;
      stream.modality = Modality::Bvp;
      stream.start_time = start_time;
      stream.rate_hz = rate;
      stream.axes.assign(1, std::vector<double>(n_samples));
      double phase = mod_rng.uniform();
      for (std::size_t s = 0; s < n_samples; ++s) {
        const double t = static_cast<double>(s) / rate;
        const double f =
            f0 + ((has_overlay && episode_cursor.contains(t)) ? overlay.bvp_delta_hz : 0.0);
        phase += f / rate;
        stream.axes[0][s] =
            amp * std::sin(2.0 * 3.14159265358979323846 * phase) + 3.0 * mod_rng.normal();
      }
      session.streams.push_back(std::move(stream));
    }

    // EDA: slow positive drift with sparse phasic bumps; episodes add more
    // and larger bumps
    {
      Rng mod_rng(child_seed(config.seed, {0x5e55103ULL, i, 2}));
      const double rate = config.rate_eda;
      const auto n_samples = static_cast<std::size_t>(std::llround(coverage * rate));
      const double base = 0.3 + 0.2 * mod_rng.uniform();
      const double drift = 0.2 + 0.2 * mod_rng.uniform();
      const double wobble_phase = mod_rng.uniform(0.0, 6.28318);

      std::vector<Bump> bumps;
      const int n_base_bumps = mod_rng.poisson(coverage / 3600.0 * 2.0);
      for (int b = 0; b < n_base_bumps; ++b)
        bumps.push_back({mod_rng.uniform(0.0, coverage), 0.05 + 0.15 * mod_rng.uniform()});
      if (has_overlay) {
        for (const Interval& ep : episode_intervals) {
          const double dur_h = (ep.end - ep.start) / 3600.0;
          int n_ep_bumps = mod_rng.poisson(dur_h * overlay.eda_bumps_per_hour);
          n_ep_bumps = std::max(n_ep_bumps, overlay.eda_min_bumps);
          for (int b = 0; b < n_ep_bumps; ++b)
            bumps.push_back({mod_rng.uniform(ep.start, ep.end),
                             mod_rng.uniform(overlay.eda_amp_lo, overlay.eda_amp_hi)});
        }
      }
      std::sort(bumps.begin(), bumps.end(),
                [](const Bump& a, const Bump& b) { return a.time < b.time; });
      BumpCursor bump_cursor(bumps);

      SensorStream stream;
      stream.modality = Modality::Eda;
      stream.start_time = start_time;
      stream.rate_hz = rate;
      stream.axes.assign(1, std::vector<double>(n_samples));
      for (std::size_t s = 0; s < n_samples; ++s) {
        const double t = static_cast<double>(s) / rate;
        const double tonic = base + drift * (t / coverage) +
                             0.01 * std::sin(2.0 * 3.14159265358979323846 * t / 1800.0 +
                                             wobble_phase);
        stream.axes[0][s] = tonic + bump_cursor.sum(t) + 0.004 * mod_rng.normal();
      }
      session.streams.push_back(std::move(stream));
    }

    // TEMP: slow wander around 33 degrees; episodes leave it untouched
    {
      Rng mod_rng(child_seed(config.seed, {0x5e55103ULL, i, 3}));
      const double rate = config.rate_temp;
      const auto n_samples = static_cast<std::size_t>(std::llround(coverage * rate));
      const double base = 32.5 + 1.0 * mod_rng.uniform();
      const double p1 = mod_rng.uniform(0.0, 6.28318);
      const double p2 = mod_rng.uniform(0.0, 6.28318);

      SensorStream stream;
      stream.modality = Modality::Temp;
      stream.start_time = start_time;
      stream.rate_hz = rate;
      stream.axes.assign(1, std::vector<double>(n_samples));
      for (std::size_t s = 0; s < n_samples; ++s) {
        const double t = static_cast<double>(s) / rate;
        stream.axes[0][s] = base + 0.4 * std::sin(2.0 * 3.14159265358979323846 * t / 7200.0 + p1) +
                            0.2 * std::sin(2.0 * 3.14159265358979323846 * t / 2400.0 + p2) +
                            0.01 * mod_rng.normal();
      }
      session.streams.push_back(std::move(stream));
    }

    cohort.sessions[i] = std::move(session);

    // chart-style PAS entry: agitated motor-agitation scores skew low on
    // purpose, mirroring under-reporting
    {
      Rng pas_rng(child_seed(config.seed, {0x9a5ULL, i}));
      PasEntry entry;
      entry.participant_id = pid;
      entry.date = date;
      entry.kind = kind;
      static const std::array<double, 4> kMissing = {0.1472, 0.1558, 0.1472, 0.1558};
      static const std::vector<double> kCalm = {0.55, 0.25, 0.12, 0.06, 0.02};
      static const std::vector<double> kAgitatedMa = {0.18, 0.18, 0.20, 0.28, 0.16};
      static const std::vector<double> kAgitatedOther = {0.40, 0.22, 0.14, 0.14, 0.10};
      for (std::size_t g = 0; g < 4; ++g) {
        if (pas_rng.uniform() < kMissing[g]) continue;
        const auto& dist =
            labels[i] == 0 ? kCalm : (g == 1 ? kAgitatedMa : kAgitatedOther);
        entry.scores[g] = static_cast<int>(pas_rng.categorical(dist));
      }
      pas[i] = std::move(entry);
    }
  });

  for (auto& shift_episodes : episodes)
    for (auto& e : shift_episodes) cohort.episodes.push_back(std::move(e));
  cohort.pas = std::move(pas);
  return cohort;
}

void write_cohort(const Cohort& cohort, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  std::map<std::pair<std::string, std::string>, int> session_counter;
  for (const auto& session : cohort.sessions) {
    auto& counter = session_counter[{session.participant_id, session.session_date.to_string()}];
    char name[16];
    std::snprintf(name, sizeof(name), "session-%03d", counter++);
    write_session(session, root / "sessions" / session.participant_id /
                               session.session_date.to_string() / name);
  }
  write_label_manifest(cohort.labels, root / "labels.csv");
  write_pas_manifest(cohort.pas, root / "pas.csv");

  std::ofstream out(root / "episodes.csv", std::ios::binary);
  out << "participant_id,date,shift_kind,start_offset_s,duration_s\n";
  for (const auto& e : cohort.episodes)
    out << e.participant_id << "," << e.date.to_string() << "," << shift_kind_name(e.kind)
        << "," << format_double(e.start_offset_s) << "," << format_double(e.duration_s) << "\n";
}

std::vector<EpisodeRecord> load_episode_records(const std::filesystem::path& path) {
  const auto lines = read_lines(path.string());
  std::vector<EpisodeRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 5)
      throw ParseError(path.string(), i + 1, "expected 5 columns");
    EpisodeRecord e;
    e.participant_id = fields[0];
    e.date = CivilDate::from_string(fields[1]);
    e.kind = shift_kind_from_name(fields[2]);
    e.start_offset_s = parse_double(fields[3]);
    e.duration_s = parse_double(fields[4]);
    out.push_back(std::move(e));
  }
  return out;
}

CohortReport verify_cohort(const Cohort& cohort, const CohortConfig& config) {
  CohortReport report;
  auto note = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

  std::map<std::tuple<std::string, std::int64_t, int>, int> episode_counts;
  for (const auto& e : cohort.episodes)
    ++episode_counts[{e.participant_id, e.date.epoch_day(), static_cast<int>(e.kind)}];

  std::map<std::tuple<std::string, std::int64_t, int>, const SessionData*> session_by_shift;
  for (const auto& session : cohort.sessions) {
    if (session.streams.empty()) {
      note(session.participant_id + "/" + session.session_date.to_string() + ": empty session");
      continue;
    }
    const std::int64_t tod = session.streams[0].start_time - session.session_date.epoch_s();
    const int kind = tod >= shift_window(ShiftKind::Evening).start_s ? 1 : 0;
    session_by_shift[{session.participant_id, session.session_date.epoch_day(), kind}] = &session;
  }

  for (const auto& label : cohort.labels) {
    const auto key = std::make_tuple(label.participant_id, label.date.epoch_day(),
                                     static_cast<int>(label.kind));
    const auto shift_name = label.participant_id + "/" + label.date.to_string() + "/" +
                            std::string(shift_kind_name(label.kind));
    const int n_episodes = episode_counts.count(key) ? episode_counts.at(key) : 0;
    if (label.agitation == 1 && n_episodes == 0)
      note(shift_name + ": labeled 1 but no episode recorded");
    if (label.agitation == 0 && n_episodes > 0)
      note(shift_name + ": labeled 0 but has " + std::to_string(n_episodes) + " episodes");

    const auto it = session_by_shift.find(key);
    if (it == session_by_shift.end()) {
      note(shift_name + ": no session data");
      continue;
    }
    const SessionData& session = *it->second;
    double coverage = kShiftSeconds;
    for (const auto& stream : session.streams) {
      coverage = std::min(coverage, stream.duration_s());
      const double want = config.rate(stream.modality);
      if (stream.rate_hz != want)
        note(shift_name + ": " + std::string(modality_name(stream.modality)) + " rate " +
             format_double(stream.rate_hz) + " != configured " + format_double(want));
    }
    ++report.bin_histogram[static_cast<std::size_t>(bin_index(coverage) - 1)];
  }

  // multinomial fit of the coverage bins against the configured weights
  double weight_sum = 0.0;
  for (double w : config.bin_weights) weight_sum += w;
  long total = 0;
  for (long c : report.bin_histogram) total += c;
  double chi2 = 0.0;
  int dof = 0;
  for (std::size_t b = 0; b < 8; ++b) {
    const double expected =
        static_cast<double>(total) * config.bin_weights[b] / weight_sum;
    if (expected <= 0.0) {
      if (report.bin_histogram[b] > 0)
        note("bin " + std::to_string(b + 1) + " populated despite zero weight");
      continue;
    }
    const double d = static_cast<double>(report.bin_histogram[b]) - expected;
    chi2 += d * d / expected;
    ++dof;
  }
  report.chi_square = chi2;
  report.chi_square_p = dof > 1 ? chi_square_tail(chi2, dof - 1) : 1.0;
  return report;
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ValidationError("gamma_q needs x >= 0, a > 0");
  if (x == 0.0) return 1.0;
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    // series for P(a,x)
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-14) break;
    }
    return 1.0 - sum * std::exp(log_prefactor);
  }
  // continued fraction for Q(a,x), modified Lentz
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-14) break;
  }
  return std::exp(log_prefactor) * h;
}

double chi_square_tail(double statistic, int dof) {
  if (dof < 1) throw ValidationError("chi-square needs dof >= 1");
  return gamma_q(static_cast<double>(dof) / 2.0, statistic / 2.0);
}

}  // namespace agitrack
