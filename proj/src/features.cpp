#include "agitrack/features.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <limits>
#include <unordered_map>

namespace agitrack {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  const double h = static_cast<double>(n - 1) * p;
  const auto i = static_cast<std::size_t>(h);
  if (i + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace

BasicStats basic_stats(std::span<const double> series, double rate_hz) {
  const std::size_t n = series.size();
  if (n < kMinPointsPerModality)
    throw ValidationError("basic_stats needs at least 5 samples, got " + std::to_string(n));

  BasicStats s;
  double sum = 0.0;
  s.min = series[0];
  s.max = series[0];
  for (double v : series) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(n);
  s.range = s.max - s.min;

  double ss = 0.0;
  for (double v : series) {
    const double d = v - s.mean;
    ss += d * d;
  }
  s.std = std::sqrt(ss / static_cast<double>(n - 1));

  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  s.iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

  // successive differences; threshold adapts to the series' own scale
  const std::size_t nd = n - 1;
  double ad_sum = 0.0;
  double ad_max = 0.0;
  for (std::size_t i = 0; i < nd; ++i) {
    const double ad = std::abs(series[i + 1] - series[i]);
    ad_sum += ad;
    ad_max = std::max(ad_max, ad);
  }
  const double ad_mean = ad_sum / static_cast<double>(nd);
  double ad_ss = 0.0;
  for (std::size_t i = 0; i < nd; ++i) {
    const double d = std::abs(series[i + 1] - series[i]) - ad_mean;
    ad_ss += d * d;
  }
  const double ad_std = std::sqrt(ad_ss / static_cast<double>(nd - 1));
  const double threshold = ad_mean + 3.0 * ad_std;
  int count = 0;
  for (std::size_t i = 0; i < nd; ++i)
    if (std::abs(series[i + 1] - series[i]) > threshold) ++count;
  s.n_abrupt = count;
  s.max_abrupt = ad_max;
  s.max_gradient = ad_max * rate_hz;

  if (s.std > 0.0) {
    s.cov = s.mean / s.std;
    s.cov_finite = std::isfinite(s.cov);
  } else {
    s.cov = std::numeric_limits<double>::quiet_NaN();
    s.cov_finite = false;
  }
  return s;
}

EdaDecomposition decompose_eda(std::span<const double> series, double rate_hz) {
  const std::size_t n = series.size();
  if (n < kMinPointsPerModality)
    throw ValidationError("decompose_eda needs at least 5 samples, got " + std::to_string(n));
  std::int64_t w = std::max<std::int64_t>(3, std::llround(8.0 * rate_hz));
  if (w % 2 == 0) ++w;
  const auto half = static_cast<std::size_t>(w / 2);

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i];

  EdaDecomposition out;
  out.tonic.resize(n);
  out.phasic.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = std::min({half, i, n - 1 - i});
    out.tonic[i] = (prefix[i + r + 1] - prefix[i - r]) / static_cast<double>(2 * r + 1);
    out.phasic[i] = series[i] - out.tonic[i];
  }
  return out;
}

PeakFeatures peak_features(std::span<const double> series, double spacing_s) {
  const std::size_t n = series.size();
  if (n < 2) throw ValidationError("peak_features needs at least 2 samples");
  PeakFeatures out;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) sum += 0.5 * (series[i] + series[i + 1]);
  out.trapz = sum * spacing_s;

  bool any = false;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (series[i - 1] < series[i] && series[i] > series[i + 1]) {
      ++out.n_peaks;
      if (!any) {
        out.peak_max = out.peak_min = series[i];
        any = true;
      } else {
        out.peak_max = std::max(out.peak_max, series[i]);
        out.peak_min = std::min(out.peak_min, series[i]);
      }
    }
  }
  return out;
}

TonicExtras tonic_extras(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw ValidationError("tonic_extras needs at least 2 samples");
  TonicExtras out;
  for (std::size_t i = 0; i + 1 < n; ++i)
    out.max_abs_diff = std::max(out.max_abs_diff, std::abs(series[i + 1] - series[i]));

  std::unordered_map<std::int64_t, std::size_t> counts;
  counts.reserve(1024);
  for (double v : series) ++counts[std::llround(v * 100.0)];
  std::int64_t best_key = 0;
  std::size_t best_count = 0;
  bool first = true;
  for (const auto& [key, count] : counts) {
    if (first || count > best_count || (count == best_count && key < best_key)) {
      best_key = key;
      best_count = count;
      first = false;
    }
  }
  out.mode = static_cast<double>(best_key) / 100.0;
  return out;
}

const std::array<std::string, FeatureVector::kCount>& FeatureVector::names() {
  static const std::array<std::string, kCount> kNames = [] {
    std::array<std::string, kCount> names;
    static constexpr std::array<const char*, 10> kStats = {
        "mean",     "min",        "max",          "std", "iqr",
        "range",    "n_abrupt",   "max_abrupt",   "max_gradient", "cov"};
    std::size_t i = 0;
    for (Modality m : kAllModalities) {
      std::string prefix(modality_name(m));
      std::transform(prefix.begin(), prefix.end(), prefix.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      for (const char* stat : kStats) {
        if (m == Modality::Temp && std::string_view(stat) == "cov") continue;
        names[i++] = prefix + "_" + stat;
      }
    }
    for (const char* f : {"trapz", "n_peaks", "peak_max", "peak_min"})
      names[i++] = std::string("eda_phasic_") + f;
    for (const char* f : {"trapz", "n_peaks", "peak_max", "peak_min", "max_abs_diff", "mode"})
      names[i++] = std::string("eda_tonic_") + f;
    return names;
  }();
  return kNames;
}

FeatureExtraction shift_features(const ShiftRecord& shift) {
  for (Modality m : kAllModalities)
    if (shift.samples(m).size() < kMinPointsPerModality)
      throw ValidationError(std::string(modality_name(m)) + " series under " +
                            std::to_string(kMinPointsPerModality) + " points");

  FeatureExtraction out;
  std::size_t i = 0;
  auto push = [&](double v) {
    if (!std::isfinite(v)) {
      v = 0.0;
      ++out.nonfinite_replaced;
    }
    out.features.values[i++] = v;
  };

  for (Modality m : kAllModalities) {
    const BasicStats s = basic_stats(shift.samples(m), shift.common_rate_hz);
    push(s.mean);
    push(s.min);
    push(s.max);
    push(s.std);
    push(s.iqr);
    push(s.range);
    push(static_cast<double>(s.n_abrupt));
    push(s.max_abrupt);
    push(s.max_gradient);
    if (m != Modality::Temp) push(s.cov_finite ? s.cov : std::numeric_limits<double>::quiet_NaN());
  }

  const auto& eda = shift.samples(Modality::Eda);
  const double spacing = 1.0 / shift.common_rate_hz;
  const EdaDecomposition decomp = decompose_eda(eda, shift.common_rate_hz);
  for (const auto* part : {&decomp.phasic, &decomp.tonic}) {
    const PeakFeatures p = peak_features(*part, spacing);
    push(p.trapz);
    push(static_cast<double>(p.n_peaks));
    push(p.peak_max);
    push(p.peak_min);
  }
  const TonicExtras extras = tonic_extras(decomp.tonic);
  push(extras.max_abs_diff);
  push(extras.mode);
  return out;
}

Matrix feature_matrix(const std::vector<ShiftRecord>& shifts, long* nonfinite_tally) {
  Matrix X(shifts.size(), FeatureVector::kCount);
  std::vector<int> tallies(shifts.size(), 0);
  parallel_for(shifts.size(), 4, [&](std::size_t i) {
    const FeatureExtraction fx = shift_features(shifts[i]);
    std::copy(fx.features.values.begin(), fx.features.values.end(), X.row(i));
    tallies[i] = fx.nonfinite_replaced;
  });
  if (nonfinite_tally) {
    long total = 0;
    for (int t : tallies) total += t;
    *nonfinite_tally = total;
  }
  return X;
}

std::vector<int> shift_labels(const std::vector<ShiftRecord>& shifts) {
  std::vector<int> y(shifts.size());
  for (std::size_t i = 0; i < shifts.size(); ++i) y[i] = shifts[i].label;
  return y;
}

void write_feature_table(const std::vector<ShiftRecord>& shifts,
                         const std::filesystem::path& path, bool with_timestamp) {
  std::ofstream out(path, std::ios::binary);
  if (with_timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&now));
    out << "# generated " << buf << "\n";
  }
  out << "participant_id,date,shift_kind,coverage_s,label";
  for (const auto& name : FeatureVector::names()) out << "," << name;
  out << "\n";
  const Matrix X = feature_matrix(shifts);
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    const auto& s = shifts[i];
    out << s.participant_id << "," << s.date.to_string() << "," << shift_kind_name(s.kind)
        << "," << format_double(s.coverage_s) << "," << s.label;
    for (std::size_t j = 0; j < FeatureVector::kCount; ++j)
      out << "," << format_double(X.at(i, j));
    out << "\n";
  }
}

}  // namespace agitrack
