#include "agitrack/timebase.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>

namespace agitrack {

ShiftWindow shift_window(ShiftKind kind) {
  if (kind == ShiftKind::Morning) return {kind, 7 * 3600, 15 * 3600 + 60};
  return {kind, 15 * 3600 + 60, 23 * 3600};
}

SensorStream resample(const SensorStream& stream, double target_hz) {
  stream.validate();
  if (!(target_hz > 0.0)) throw ValidationError("target rate must be positive");
  if (target_hz < stream.rate_hz)
    throw ValidationError("resample only upsamples (" + format_double(stream.rate_hz) +
                          " Hz -> " + format_double(target_hz) + " Hz); use decimate");
  if (target_hz == stream.rate_hz) return stream;

  const std::size_t n_in = stream.n_samples();
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_in) * target_hz / stream.rate_hz));
  SensorStream out;
  out.modality = stream.modality;
  out.start_time = stream.start_time;
  out.rate_hz = target_hz;
  out.axes.reserve(stream.axes.size());
  const double step = stream.rate_hz / target_hz;  // native index units per output sample
  for (const auto& axis : stream.axes) {
    std::vector<double> samples(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
      const double pos = static_cast<double>(j) * step;
      const auto i0 = static_cast<std::size_t>(pos);
      if (i0 + 1 >= n_in) {
        samples[j] = axis[n_in - 1];  // hold the endpoint
      } else {
        const double frac = pos - static_cast<double>(i0);
        samples[j] = axis[i0] + frac * (axis[i0 + 1] - axis[i0]);
      }
    }
    out.axes.push_back(std::move(samples));
  }
  return out;
}

SensorStream acc_magnitude(const SensorStream& acc) {
  if (acc.axes.size() != 3) throw ValidationError("ACC magnitude needs 3 axis sequences");
  for (const auto& a : acc.axes)
    if (a.size() != acc.axes[0].size()) throw ValidationError("ACC axis length mismatch");
  SensorStream out;
  out.modality = acc.modality;
  out.start_time = acc.start_time;
  out.rate_hz = acc.rate_hz;
  const std::size_t n = acc.axes[0].size();
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i)
    mag[i] = std::sqrt(acc.axes[0][i] * acc.axes[0][i] + acc.axes[1][i] * acc.axes[1][i] +
                       acc.axes[2][i] * acc.axes[2][i]);
  out.axes.push_back(std::move(mag));
  return out;
}

SessionData prepare_session(const SessionData& session, const TimebaseConfig& cfg) {
  double target = cfg.target_hz;
  if (target <= 0.0)
    for (const auto& s : session.streams) target = std::max(target, s.rate_hz);
  SessionData out;
  out.participant_id = session.participant_id;
  out.session_date = session.session_date;
  for (const auto& s : session.streams) {
    SensorStream prepared = s.modality == Modality::Acc ? acc_magnitude(s) : s;
    out.streams.push_back(resample(prepared, target));
  }
  return out;
}

namespace {

// Samples of `stream` falling in [win_start, win_end), appended to `out`.
void append_window_samples(const SensorStream& stream, std::int64_t win_start,
                           std::int64_t win_end, std::vector<double>& out) {
  const double rate = stream.rate_hz;
  const auto n = static_cast<std::int64_t>(stream.n_samples());
  const double rel_start = static_cast<double>(win_start - stream.start_time);
  const double rel_end = static_cast<double>(win_end - stream.start_time);
  const auto lo = std::max<std::int64_t>(
      0, static_cast<std::int64_t>(std::ceil(rel_start * rate - 1e-9)));
  const auto hi =
      std::min(n, static_cast<std::int64_t>(std::ceil(rel_end * rate - 1e-9)));
  if (lo >= hi) return;
  const auto& samples = stream.axes[0];
  out.insert(out.end(), samples.begin() + lo, samples.begin() + hi);
}

}  // namespace

std::vector<ShiftRecord> segment_shifts(const std::vector<SessionData>& sessions,
                                        const std::vector<ShiftLabel>& labels,
                                        const TimebaseConfig& cfg) {
  // group session segments by (participant, date), ordered by start time
  std::map<std::pair<std::string, std::int64_t>, std::vector<const SessionData*>> by_day;
  double rate = cfg.target_hz;
  for (const auto& s : sessions) {
    by_day[{s.participant_id, s.session_date.epoch_day()}].push_back(&s);
    for (const auto& stream : s.streams) {
      if (stream.axes.size() != 1)
        throw ValidationError("segment_shifts needs ACC reduced to magnitude");
      if (rate <= 0.0) rate = stream.rate_hz;
      if (stream.rate_hz != rate)
        throw ValidationError("segment_shifts needs all streams at the common rate");
    }
  }
  for (auto& [key, group] : by_day) {
    std::sort(group.begin(), group.end(), [](const SessionData* a, const SessionData* b) {
      std::int64_t ta = a->streams.empty() ? 0 : a->streams[0].start_time;
      std::int64_t tb = b->streams.empty() ? 0 : b->streams[0].start_time;
      return ta < tb;
    });
    // overlapping segments for the same modality are invalid
    for (Modality m : kAllModalities) {
      std::int64_t prev_end = std::numeric_limits<std::int64_t>::min();
      for (const SessionData* s : group) {
        const SensorStream* stream = s->find(m);
        if (!stream) continue;
        if (stream->start_time < prev_end)
          throw ValidationError(key.first + "/" +
                                CivilDate::from_epoch_day(key.second).to_string() +
                                ": overlapping " + std::string(modality_name(m)) +
                                " segments");
        prev_end = stream->end_time_ceil();
      }
    }
  }

  std::vector<ShiftRecord> shifts;
  for (const auto& label : labels) {
    auto it = by_day.find({label.participant_id, label.date.epoch_day()});
    if (it == by_day.end()) continue;
    const ShiftWindow window = shift_window(label.kind);
    const std::int64_t day_start = label.date.epoch_s() - cfg.utc_offset_s;
    const std::int64_t win_start = day_start + window.start_s;
    const std::int64_t win_end = day_start + window.end_s;

    ShiftRecord record;
    record.participant_id = label.participant_id;
    record.date = label.date;
    record.kind = label.kind;
    record.label = label.agitation;
    record.common_rate_hz = rate;

    std::size_t min_len = std::numeric_limits<std::size_t>::max();
    bool complete = true;
    for (Modality m : kAllModalities) {
      auto& series = record.samples(m);
      for (const SessionData* session : it->second) {
        const SensorStream* stream = session->find(m);
        if (stream) append_window_samples(*stream, win_start, win_end, series);
      }
      if (series.empty()) {
        complete = false;
        break;
      }
      min_len = std::min(min_len, series.size());
    }
    if (!complete) continue;  // omitted, not an error

    // align modalities and cap coverage at the 8-hour shift
    const auto cap = static_cast<std::size_t>(std::llround(kShiftSeconds * rate));
    min_len = std::min(min_len, cap);
    for (Modality m : kAllModalities) record.samples(m).resize(min_len);
    record.coverage_s = static_cast<double>(min_len) / rate;
    shifts.push_back(std::move(record));
  }
  return shifts;
}

std::vector<ShiftRecord> segment_shifts(const SessionData& session,
                                        const std::vector<ShiftLabel>& labels,
                                        const TimebaseConfig& cfg) {
  return segment_shifts(std::vector<SessionData>{session}, labels, cfg);
}

std::vector<ShiftRecord> build_shifts(const std::filesystem::path& data_root,
                                      const std::filesystem::path& labels_path,
                                      const TimebaseConfig& cfg) {
  const auto sessions = load_sessions(data_root);
  const auto labels = load_label_manifest(labels_path);
  double target = cfg.target_hz;
  if (target <= 0.0)
    for (const auto& s : sessions)
      for (const auto& stream : s.streams) target = std::max(target, stream.rate_hz);
  TimebaseConfig prepared_cfg = cfg;
  prepared_cfg.target_hz = target;
  std::vector<SessionData> prepared(sessions.size());
  parallel_for(sessions.size(), 4,
               [&](std::size_t i) { prepared[i] = prepare_session(sessions[i], prepared_cfg); });
  return segment_shifts(prepared, labels, prepared_cfg);
}

int bin_index(double coverage_s) {
  if (!(coverage_s > 0.0) || coverage_s > kShiftSeconds)
    throw ValidationError("coverage out of (0, 28800]: " + format_double(coverage_s));
  return static_cast<int>(std::ceil(coverage_s / 3600.0));
}

std::vector<ShiftRecord> filter_by_length(std::vector<ShiftRecord> shifts, LengthFilter mode,
                                          double threshold_s) {
  if (threshold_s < 0.0) throw ValidationError("threshold must be non-negative");
  std::erase_if(shifts, [&](const ShiftRecord& s) {
    return mode == LengthFilter::AtLeast ? s.coverage_s < threshold_s
                                         : s.coverage_s > threshold_s;
  });
  return shifts;
}

std::optional<ShiftRecord> decimate(const ShiftRecord& shift, double interval_s) {
  if (interval_s < 60.0 || interval_s > 3600.0)
    throw ValidationError("decimation interval outside [60, 3600] s: " +
                          format_double(interval_s));
  const auto n = static_cast<std::int64_t>(shift.samples(Modality::Acc).size());
  std::vector<std::size_t> picks;
  for (std::int64_t k = 0;; ++k) {
    const auto idx = std::llround(static_cast<double>(k) * interval_s * shift.common_rate_hz);
    if (idx >= n) break;
    picks.push_back(static_cast<std::size_t>(idx));
  }
  if (picks.size() < kMinPointsPerModality) return std::nullopt;

  ShiftRecord out = shift;
  out.common_rate_hz = 1.0 / interval_s;
  for (Modality m : kAllModalities) {
    const auto& src = shift.samples(m);
    auto& dst = out.samples(m);
    dst.clear();
    dst.reserve(picks.size());
    for (std::size_t idx : picks) dst.push_back(src[idx]);
  }
  return out;
}

void write_shift_dump(const ShiftRecord& shift, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << "participant_id," << shift.participant_id << "\n";
  out << "date," << shift.date.to_string() << "\n";
  out << "shift_kind," << shift_kind_name(shift.kind) << "\n";
  out << "label," << shift.label << "\n";
  out << "rate_hz," << format_double(shift.common_rate_hz) << "\n";
  out << "coverage_s," << format_double(shift.coverage_s) << "\n";
  out << "ACC,BVP,EDA,TEMP\n";
  const std::size_t n = shift.samples(Modality::Acc).size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < 4; ++m) out << (m ? "," : "") << format_double(shift.series[m][i]);
    out << "\n";
  }
}

}  // namespace agitrack
