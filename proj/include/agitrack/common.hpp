#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agitrack {

// ---------------------------------------------------------------------------
// Errors

// Input file could not be understood; carries file and 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Well-formed input that violates a domain constraint.
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative solver failed to reach its tolerance; carries diagnostics.
class ConvergenceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Domain enums

enum class Modality { Acc = 0, Bvp = 1, Eda = 2, Temp = 3 };
inline constexpr std::array<Modality, 4> kAllModalities = {
    Modality::Acc, Modality::Bvp, Modality::Eda, Modality::Temp};

std::string_view modality_name(Modality m);
Modality modality_from_name(std::string_view name);

enum class ShiftKind { Morning = 0, Evening = 1 };
std::string_view shift_kind_name(ShiftKind k);
ShiftKind shift_kind_from_name(std::string_view name);

// ---------------------------------------------------------------------------
// Calendar date (single configured local zone, arithmetic on epoch days)

struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;

  // days since 1970-01-01
  std::int64_t epoch_day() const;
  std::int64_t epoch_s() const { return epoch_day() * 86400; }
  std::string to_string() const;  // ISO-8601 yyyy-mm-dd
  static CivilDate from_string(std::string_view iso);
  static CivilDate from_epoch_day(std::int64_t days);

  friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

// ---------------------------------------------------------------------------
// Dense row-major matrix (rows = samples, cols = features)

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  Matrix take_rows(const std::vector<std::size_t>& idx) const {
    Matrix out(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i)
      std::copy(row(idx[i]), row(idx[i]) + cols, out.row(i));
    return out;
  }
};

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64 engine; identical streams on every platform)

std::uint64_t splitmix64(std::uint64_t& state);

// Derives an independent child seed from a seed and a tag path.
std::uint64_t child_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi] inclusive
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // standard normal, Box-Muller with cached spare
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  int poisson(double lambda);

  // index draw from unnormalized non-negative weights
  std::size_t categorical(const std::vector<double>& weights);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Bounded worker pool: runs fn(0..n-1); results must be written by index.

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Locale-independent number <-> text

// Shortest text that round-trips the double exactly.
std::string format_double(double v);

// Strict full-string parses; throw std::invalid_argument on failure.
double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);

// ---------------------------------------------------------------------------
// CSV helpers (plain comma-separated text, no quoting in any of our formats)

std::vector<std::string> split_csv_line(std::string_view line);

// Reads all lines, tolerant of CR/LF endings and a trailing newline.
std::vector<std::string> read_lines(const std::string& path);

}  // namespace agitrack
