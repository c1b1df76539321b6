#pragma once

#include <span>

#include "agitrack/timebase.hpp"

namespace agitrack {

// The ten per-modality statistics. Abrupt changes are sample-to-sample
// differences whose magnitude exceeds mean(|d|) + 3*std(|d|); the gradient is
// in units per second. cov follows the mean/std convention and is flagged
// non-finite when std is zero so the caller can apply its replacement policy.
struct BasicStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;
  double iqr = 0.0;
  double range = 0.0;
  int n_abrupt = 0;
  double max_abrupt = 0.0;
  double max_gradient = 0.0;
  double cov = 0.0;
  bool cov_finite = true;
};

BasicStats basic_stats(std::span<const double> series, double rate_hz);

// Tonic level by centered moving mean (window ~8 s, odd, edges shrunk
// symmetrically); phasic is the residual, so tonic + phasic == input exactly.
struct EdaDecomposition {
  std::vector<double> tonic;
  std::vector<double> phasic;
};

EdaDecomposition decompose_eda(std::span<const double> series, double rate_hz);

// Trapezoidal integral plus strict-local-maximum peak census; peak_max and
// peak_min are 0.0 when the series has no peaks.
struct PeakFeatures {
  double trapz = 0.0;
  int n_peaks = 0;
  double peak_max = 0.0;
  double peak_min = 0.0;
};

PeakFeatures peak_features(std::span<const double> series, double spacing_s);

// max |successive difference| and the most frequent value after rounding to
// 0.01 units (ties to the smallest value).
struct TonicExtras {
  double max_abs_diff = 0.0;
  double mode = 0.0;
};

TonicExtras tonic_extras(std::span<const double> series);

// The full per-shift vector: 10 statistics per modality except TEMP cov
// (structurally absent), then 4 phasic + 6 tonic electrodermal features.
struct FeatureVector {
  static constexpr std::size_t kCount = 49;
  std::array<double, kCount> values{};

  static const std::array<std::string, kCount>& names();
  double operator[](std::size_t i) const { return values[i]; }
};

struct FeatureExtraction {
  FeatureVector features;
  int nonfinite_replaced = 0;  // data-quality tally
};

FeatureExtraction shift_features(const ShiftRecord& shift);

// Feature rows for a set of shifts, order preserved.
Matrix feature_matrix(const std::vector<ShiftRecord>& shifts, long* nonfinite_tally = nullptr);

std::vector<int> shift_labels(const std::vector<ShiftRecord>& shifts);

// Feature table export: keys, coverage, label and the 49 named columns.
void write_feature_table(const std::vector<ShiftRecord>& shifts,
                         const std::filesystem::path& path, bool with_timestamp);

}  // namespace agitrack
