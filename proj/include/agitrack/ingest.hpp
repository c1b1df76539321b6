#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "agitrack/common.hpp"

namespace agitrack {

// One modality's recording segment. ACC keeps three parallel axis sequences
// until reduced to magnitude; the other modalities carry a single sequence.
struct SensorStream {
  Modality modality = Modality::Acc;
  std::int64_t start_time = 0;  // epoch seconds in the configured local zone
  double rate_hz = 0.0;
  std::vector<std::vector<double>> axes;

  std::size_t n_samples() const { return axes.empty() ? 0 : axes[0].size(); }
  double duration_s() const { return static_cast<double>(n_samples()) / rate_hz; }
  std::int64_t end_time_ceil() const {
    return start_time + static_cast<std::int64_t>(std::ceil(duration_s()));
  }
  void validate() const;
};

// One recording segment for one participant-day. A day with interrupted
// recording yields several SessionData records; the shift segmenter joins
// the in-window pieces.
struct SessionData {
  std::string participant_id;
  CivilDate session_date;
  std::vector<SensorStream> streams;  // at most one per modality

  const SensorStream* find(Modality m) const {
    for (const auto& s : streams)
      if (s.modality == m) return &s;
    return nullptr;
  }
};

struct ShiftLabel {
  std::string participant_id;
  CivilDate date;
  ShiftKind kind = ShiftKind::Morning;
  int agitation = 0;
};

// Pittsburgh Agitation Scale entry; group order AV, MA, AG, RC.
inline constexpr std::array<const char*, 4> kPasGroups = {"AV", "MA", "AG", "RC"};

struct PasEntry {
  std::string participant_id;
  CivilDate date;
  ShiftKind kind = ShiftKind::Morning;
  std::array<std::optional<int>, 4> scores;
};

struct PasManifest {
  std::vector<PasEntry> entries;
  std::array<double, 4> missing_fraction{};  // per group, over all entries
};

// Parses one session directory (files ACC.csv/BVP.csv/EDA.csv/TEMP.csv, each
// with a start-time row and a rate row followed by sample rows; ACC rows have
// three columns). Participant id and date come from the two parent path
// components: <root>/<participant>/<yyyy-mm-dd>/<session>/.
SessionData parse_session(const std::filesystem::path& directory);

// Writes a session back using the same convention; values round-trip exactly.
void write_session(const SessionData& session, const std::filesystem::path& directory);

// Walks <root>/<participant>/<date>/<session>/ and parses every session,
// ordered by path for reproducibility.
std::vector<SessionData> load_sessions(const std::filesystem::path& root);

std::vector<ShiftLabel> load_label_manifest(const std::filesystem::path& path);
void write_label_manifest(const std::vector<ShiftLabel>& labels,
                          const std::filesystem::path& path);

PasManifest load_pas_manifest(const std::filesystem::path& path);
void write_pas_manifest(const std::vector<PasEntry>& entries,
                        const std::filesystem::path& path);

}  // namespace agitrack
