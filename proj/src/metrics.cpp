#include "noseheat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include <fftw3.h>

#include "io_util.hpp"
#include "noseheat/error.hpp"

namespace noseheat {

namespace {

void require_length(const ThermalSignal& sig, std::size_t min_n, const char* what) {
  if (sig.size() < min_n)
    fail(ErrorCode::TooShort, std::string(what) + " needs at least " + std::to_string(min_n) +
                                  " samples, got " + std::to_string(sig.size()));
}

// Sample SD (divisor m - 1). Values are taken relative to the first element,
// which keeps the result exactly zero for constant input.
double sample_sd(std::span<const double> v) {
  const std::size_t m = v.size();
  const double ref = v.front();
  double mean = 0.0;
  for (double x : v) mean += x - ref;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double x : v) {
    const double d = (x - ref) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(m - 1));
}

}  // namespace

double td(const ThermalSignal& sig) {
  require_length(sig, 2, "TD");
  return sig.samples.back() - sig.samples.front();
}

LinearFit stv(const ThermalSignal& sig) {
  require_length(sig, 2, "STV");
  const std::size_t n = sig.size();
  const double ref = sig.samples.front();
  double t_mean = 0.0;
  double d_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    t_mean += sig.time_at(k);
    d_mean += sig.samples[k] - ref;
  }
  t_mean /= static_cast<double>(n);
  d_mean /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dt = sig.time_at(k) - t_mean;
    sxx += dt * dt;
    sxy += dt * ((sig.samples[k] - ref) - d_mean);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ref + d_mean - fit.slope * t_mean;
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = (sig.samples[k] - ref) - d_mean - fit.slope * (sig.time_at(k) - t_mean);
    ssr += r * r;
  }
  fit.residual_rms = std::sqrt(ssr / static_cast<double>(n));
  return fit;
}

double sdstv(const ThermalSignal& sig) {
  require_length(sig, 3, "SDSTV");
  std::vector<double> diffs(sig.size() - 1);
  for (std::size_t k = 0; k + 1 < sig.size(); ++k) diffs[k] = sig.samples[k + 1] - sig.samples[k];
  return sample_sd(diffs);
}

double sdtv(const ThermalSignal& sig) {
  require_length(sig, 2, "SDTV");
  return sample_sd(sig.samples);
}

PersonContext person_context(std::span<const ThermalSignal> signals, double cutoff_hz) {
  if (signals.empty()) fail(ErrorCode::TooShort, "person context needs at least one signal");
  std::vector<ThermalSignal> filtered;
  filtered.reserve(signals.size());
  for (const auto& s : signals) filtered.push_back(lowpass(s, cutoff_hz));
  return {sample_range(signals), sample_range(filtered)};
}

MetricSet metric_set(const ThermalSignal& nonfiltered, const PersonContext& person,
                     double cutoff_hz) {
  if (nonfiltered.provenance.filtered || nonfiltered.provenance.normalized)
    fail(ErrorCode::InvalidArgument, "metric_set expects an unfiltered, unnormalized signal");
  require_length(nonfiltered, 3, "metric set");

  const ThermalSignal low = lowpass(nonfiltered, cutoff_hz);
  const ThermalSignal norm = apply_normalization(nonfiltered, person.original);
  const ThermalSignal low_norm = apply_normalization(low, person.lowpassed);

  MetricSet out;
  const ThermalSignal* sources[4] = {&nonfiltered, &norm, &low, &low_norm};
  for (std::size_t s = 0; s < 4; ++s) {
    out.values[4 * s + 0] = td(*sources[s]);
    out.values[4 * s + 1] = stv(*sources[s]).slope;
    out.values[4 * s + 2] = sdstv(*sources[s]);
    out.values[4 * s + 3] = sdtv(*sources[s]);
  }
  return out;
}

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

PowerSpectrum psd(const ThermalSignal& sig) {
  validate(sig);
  require_length(sig, 16, "PSD");
  const std::size_t n = sig.size();
  const std::size_t bins = n / 2 + 1;

  double mean = 0.0;
  for (double v : sig.samples) mean += v;
  mean /= static_cast<double>(n);

  double* in = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(bins);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, spec, FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n - 1)));
    in[k] = w * (sig.samples[k] - mean);
  }
  fftw_execute(plan);

  PowerSpectrum out;
  out.bin_width = sig.sample_rate / static_cast<double>(n);
  out.frequencies.resize(bins);
  out.power.resize(bins);
  const double scale = 1.0 / (sig.sample_rate * static_cast<double>(n));
  for (std::size_t j = 0; j < bins; ++j) {
    const double mag2 = spec[j][0] * spec[j][0] + spec[j][1] * spec[j][1];
    const bool unpaired = j == 0 || (n % 2 == 0 && j == n / 2);
    out.frequencies[j] = static_cast<double>(j) * out.bin_width;
    out.power[j] = (unpaired ? 1.0 : 2.0) * mag2 * scale;
  }

  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(spec);
  fftw_free(in);
  return out;
}

double psqi(const ThermalSignal& sig, SqiBand band) {
  const double nyquist = sig.sample_rate / 2.0;
  if (!(band.f_min > 0.0 && band.f_min < band.f_max))
    fail(ErrorCode::InvalidArgument, "SQI band must satisfy 0 < f_min < f_max");
  if (band.f_max > nyquist)
    fail(ErrorCode::RateTooLow, "Nyquist " + detail::format_number(nyquist) +
                                    " Hz is below the band's upper edge");
  const PowerSpectrum spec = psd(sig);
  // Trapezoidal integration over consecutive non-DC bins; a segment counts
  // as in-band when both of its end bins lie inside the band.
  const double tol = 1e-6 * spec.bin_width;  // bins that land on a band edge count as inside
  double in_band = 0.0;
  double total = 0.0;
  for (std::size_t j = 2; j < spec.power.size(); ++j) {
    const double area = 0.5 * (spec.power[j - 1] + spec.power[j]) * spec.bin_width;
    total += area;
    const double lo = spec.frequencies[j - 1];
    const double hi = spec.frequencies[j];
    if (lo >= band.f_min - tol && hi <= band.f_max + tol) in_band += area;
  }
  if (!(total > 0.0)) fail(ErrorCode::ConstantSignal, "signal has no non-DC power");
  return std::clamp(in_band / total, 0.0, 1.0);
}

}  // namespace noseheat
