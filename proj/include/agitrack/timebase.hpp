#pragma once

#include <optional>

#include "agitrack/ingest.hpp"

namespace agitrack {

// Aligned multi-modal data for one labeled nursing shift, all modalities at
// the common rate with equal lengths, ACC reduced to magnitude.
struct ShiftRecord {
  std::string participant_id;
  CivilDate date;
  ShiftKind kind = ShiftKind::Morning;
  int label = 0;
  double common_rate_hz = 0.0;
  double coverage_s = 0.0;                    // seconds of sampled data in the window
  std::array<std::vector<double>, 4> series;  // indexed by Modality

  const std::vector<double>& samples(Modality m) const {
    return series[static_cast<std::size_t>(m)];
  }
  std::vector<double>& samples(Modality m) { return series[static_cast<std::size_t>(m)]; }
};

// Clock windows for the two staffed shifts. The one unstaffed minute before
// the evening shift counts toward the morning window, with morning coverage
// capped at 8 hours.
struct ShiftWindow {
  ShiftKind kind;
  int start_s;  // seconds after local midnight
  int end_s;
};
ShiftWindow shift_window(ShiftKind kind);

inline constexpr double kShiftSeconds = 8.0 * 3600.0;

struct TimebaseConfig {
  double target_hz = 0.0;  // 0 = use the maximum native rate among streams
  int utc_offset_s = 0;
};

// Upsamples to target_hz by linear interpolation over the same time interval,
// holding the last sample beyond the final knot. Downsampling is rejected;
// that is decimate's job.
SensorStream resample(const SensorStream& stream, double target_hz);

// Reduces a 3-axis ACC stream to per-sample Euclidean magnitude.
SensorStream acc_magnitude(const SensorStream& acc);

// Resamples every stream to the target rate (max native rate when
// cfg.target_hz == 0) and reduces ACC to magnitude.
SessionData prepare_session(const SessionData& session, const TimebaseConfig& cfg);

// Cuts prepared sessions into labeled shift windows. Recording gaps inside a
// window are closed by concatenation; coverage counts sampled time only.
// Shifts with no in-window data or a missing modality are omitted.
// Overlapping segments for the same modality are a validation error.
std::vector<ShiftRecord> segment_shifts(const std::vector<SessionData>& sessions,
                                        const std::vector<ShiftLabel>& labels,
                                        const TimebaseConfig& cfg);
std::vector<ShiftRecord> segment_shifts(const SessionData& session,
                                        const std::vector<ShiftLabel>& labels,
                                        const TimebaseConfig& cfg);

// Full ingest-to-shift pipeline for a data root and label manifest.
std::vector<ShiftRecord> build_shifts(const std::filesystem::path& data_root,
                                      const std::filesystem::path& labels_path,
                                      const TimebaseConfig& cfg);

// Duration bin: k iff coverage in ((k-1)*3600, k*3600], k = 1..8.
int bin_index(double coverage_s);

enum class LengthFilter { AtLeast, AtMost };

std::vector<ShiftRecord> filter_by_length(std::vector<ShiftRecord> shifts, LengthFilter mode,
                                          double threshold_s);

// One sample per interval start. Shifts left with fewer than five points per
// modality are discarded (nullopt). Coverage is unchanged.
std::optional<ShiftRecord> decimate(const ShiftRecord& shift, double interval_s);

inline constexpr std::size_t kMinPointsPerModality = 5;

// Debug dump: one comma-separated file per shift record.
void write_shift_dump(const ShiftRecord& shift, const std::filesystem::path& path);

}  // namespace agitrack
