#include "agitrack/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace fs = std::filesystem;

namespace agitrack {

void SensorStream::validate() const {
  if (!(rate_hz > 0.0))
    throw ValidationError(std::string(modality_name(modality)) + ": rate must be positive");
  const std::size_t want_axes = modality == Modality::Acc ? 3 : 1;
  if (axes.size() != want_axes)
    throw ValidationError(std::string(modality_name(modality)) + ": expected " +
                          std::to_string(want_axes) + " axis sequences");
  for (const auto& a : axes)
    if (a.size() != axes[0].size())
      throw ValidationError(std::string(modality_name(modality)) + ": axis length mismatch");
  if (n_samples() == 0)
    throw ValidationError(std::string(modality_name(modality)) + ": no samples");
}

namespace {

// Header rows repeat the value once per column; all fields must agree.
double parse_header_value(const std::string& file, std::size_t line_no,
                          const std::string& line, std::size_t n_cols) {
  const auto fields = split_csv_line(line);
  if (fields.size() != n_cols)
    throw ParseError(file, line_no,
                     "expected " + std::to_string(n_cols) + " columns, got " +
                         std::to_string(fields.size()));
  double value = 0.0;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    double v;
    try {
      v = parse_double(fields[i]);
    } catch (const std::invalid_argument&) {
      throw ParseError(file, line_no, "non-numeric header field '" + fields[i] + "'");
    }
    if (i == 0)
      value = v;
    else if (v != value)
      throw ParseError(file, line_no, "inconsistent header fields");
  }
  return value;
}

SensorStream parse_stream_file(const fs::path& path, Modality m) {
  const std::string name = path.string();
  const auto lines = read_lines(name);
  const std::size_t n_cols = m == Modality::Acc ? 3 : 1;
  if (lines.size() < 3) throw ParseError(name, lines.size(), "missing header or samples");

  SensorStream stream;
  stream.modality = m;
  const double start = parse_header_value(name, 1, lines[0], n_cols);
  if (start != std::floor(start))
    throw ParseError(name, 1, "start time must be integer seconds");
  stream.start_time = static_cast<std::int64_t>(start);
  stream.rate_hz = parse_header_value(name, 2, lines[1], n_cols);
  if (!(stream.rate_hz > 0.0))
    throw ValidationError(name + ":2: rate must be positive, got " +
                          format_double(stream.rate_hz));

  stream.axes.assign(n_cols, {});
  for (auto& a : stream.axes) a.reserve(lines.size() - 2);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;  // trailing blank line
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != n_cols)
      throw ParseError(name, i + 1,
                       "expected " + std::to_string(n_cols) + " columns, got " +
                           std::to_string(fields.size()));
    for (std::size_t j = 0; j < n_cols; ++j) {
      try {
        stream.axes[j].push_back(parse_double(fields[j]));
      } catch (const std::invalid_argument&) {
        throw ParseError(name, i + 1, "non-numeric sample '" + fields[j] + "'");
      }
    }
  }
  stream.validate();
  return stream;
}

}  // namespace

SessionData parse_session(const fs::path& directory) {
  if (!fs::is_directory(directory))
    throw ValidationError("not a directory: " + directory.string());
  SessionData session;
  const fs::path date_dir = directory.parent_path();
  const fs::path participant_dir = date_dir.parent_path();
  if (date_dir.filename().empty() || participant_dir.filename().empty())
    throw ValidationError("session path must be <root>/<participant>/<date>/<session>: " +
                          directory.string());
  session.session_date = CivilDate::from_string(date_dir.filename().string());
  session.participant_id = participant_dir.filename().string();

  for (Modality m : kAllModalities) {
    fs::path file = directory / (std::string(modality_name(m)) + ".csv");
    if (!fs::exists(file)) {
      file = directory / std::string(modality_name(m));
      if (!fs::exists(file)) continue;  // absent modality, not an error
    }
    session.streams.push_back(parse_stream_file(file, m));
  }

  const std::int64_t day = session.session_date.epoch_day();
  for (const auto& s : session.streams)
    if (s.start_time / 86400 != day)
      throw ValidationError(directory.string() + ": " + std::string(modality_name(s.modality)) +
                            " starts outside session date " + session.session_date.to_string());
  return session;
}

void write_session(const SessionData& session, const fs::path& directory) {
  fs::create_directories(directory);
  for (const auto& s : session.streams) {
    s.validate();
    std::ofstream out(directory / (std::string(modality_name(s.modality)) + ".csv"),
                      std::ios::binary);
    const std::size_t n_cols = s.axes.size();
    auto write_row = [&](const std::string& v) {
      for (std::size_t j = 0; j < n_cols; ++j) out << (j ? "," : "") << v;
      out << "\n";
    };
    write_row(std::to_string(s.start_time));
    write_row(format_double(s.rate_hz));
    for (std::size_t i = 0; i < s.n_samples(); ++i) {
      for (std::size_t j = 0; j < n_cols; ++j)
        out << (j ? "," : "") << format_double(s.axes[j][i]);
      out << "\n";
    }
  }
}

std::vector<SessionData> load_sessions(const fs::path& root) {
  if (!fs::is_directory(root)) throw ValidationError("not a directory: " + root.string());
  std::vector<fs::path> session_dirs;
  for (const auto& participant : fs::directory_iterator(root)) {
    if (!participant.is_directory()) continue;
    for (const auto& date : fs::directory_iterator(participant)) {
      if (!date.is_directory()) continue;
      for (const auto& session : fs::directory_iterator(date))
        if (session.is_directory()) session_dirs.push_back(session.path());
    }
  }
  std::sort(session_dirs.begin(), session_dirs.end());
  std::vector<SessionData> sessions;
  sessions.reserve(session_dirs.size());
  for (const auto& dir : session_dirs) sessions.push_back(parse_session(dir));
  return sessions;
}

namespace {

void check_columns(const std::string& path, std::size_t line_no,
                   const std::vector<std::string>& fields, std::size_t want) {
  if (fields.size() != want)
    throw ParseError(path, line_no,
                     "expected " + std::to_string(want) + " columns, got " +
                         std::to_string(fields.size()));
}

}  // namespace

std::vector<ShiftLabel> load_label_manifest(const fs::path& path) {
  const std::string name = path.string();
  const auto lines = read_lines(name);
  if (lines.empty()) throw ParseError(name, 1, "missing header row");
  std::vector<ShiftLabel> labels;
  std::set<std::tuple<std::string, std::int64_t, int>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_csv_line(lines[i]);
    check_columns(name, i + 1, fields, 4);
    ShiftLabel label;
    label.participant_id = fields[0];
    label.date = CivilDate::from_string(fields[1]);
    label.kind = shift_kind_from_name(fields[2]);
    std::int64_t agitation;
    try {
      agitation = parse_int(fields[3]);
    } catch (const std::invalid_argument&) {
      throw ParseError(name, i + 1, "non-numeric agitation value '" + fields[3] + "'");
    }
    if (agitation != 0 && agitation != 1)
      throw ParseError(name, i + 1, "agitation must be 0 or 1, got " + fields[3]);
    label.agitation = static_cast<int>(agitation);
    if (!seen.insert({label.participant_id, label.date.epoch_day(),
                      static_cast<int>(label.kind)})
             .second)
      throw ParseError(name, i + 1,
                       "duplicate shift key " + label.participant_id + "," +
                           label.date.to_string() + "," +
                           std::string(shift_kind_name(label.kind)));
    labels.push_back(std::move(label));
  }
  return labels;
}

void write_label_manifest(const std::vector<ShiftLabel>& labels, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << "participant_id,date,shift_kind,agitation\n";
  for (const auto& l : labels)
    out << l.participant_id << "," << l.date.to_string() << "," << shift_kind_name(l.kind)
        << "," << l.agitation << "\n";
}

PasManifest load_pas_manifest(const fs::path& path) {
  const std::string name = path.string();
  const auto lines = read_lines(name);
  if (lines.empty()) throw ParseError(name, 1, "missing header row");
  PasManifest manifest;
  std::array<std::size_t, 4> missing{};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_csv_line(lines[i]);
    check_columns(name, i + 1, fields, 7);
    PasEntry entry;
    entry.participant_id = fields[0];
    entry.date = CivilDate::from_string(fields[1]);
    entry.kind = shift_kind_from_name(fields[2]);
    for (std::size_t g = 0; g < 4; ++g) {
      const std::string& cell = fields[3 + g];
      if (cell.empty()) {
        ++missing[g];
        continue;
      }
      std::int64_t score;
      try {
        score = parse_int(cell);
      } catch (const std::invalid_argument&) {
        throw ParseError(name, i + 1, "non-numeric PAS score '" + cell + "'");
      }
      if (score < 0 || score > 4)
        throw ParseError(name, i + 1,
                         std::string(kPasGroups[g]) + " score out of range [0,4]: " + cell);
      entry.scores[g] = static_cast<int>(score);
    }
    manifest.entries.push_back(std::move(entry));
  }
  const double n = static_cast<double>(manifest.entries.size());
  for (std::size_t g = 0; g < 4; ++g)
    manifest.missing_fraction[g] = n > 0 ? static_cast<double>(missing[g]) / n : 0.0;
  return manifest;
}

void write_pas_manifest(const std::vector<PasEntry>& entries, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << "participant_id,date,shift_kind,av,ma,ag,rc\n";
  for (const auto& e : entries) {
    out << e.participant_id << "," << e.date.to_string() << "," << shift_kind_name(e.kind);
    for (const auto& s : e.scores) {
      out << ",";
      if (s) out << *s;
    }
    out << "\n";
  }
}

}  // namespace agitrack
