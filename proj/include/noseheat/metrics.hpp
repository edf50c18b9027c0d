#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "noseheat/signal_pipeline.hpp"

namespace noseheat {

// Least-squares line against time in seconds: x(t) = intercept + slope * t.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

double td(const ThermalSignal& sig);
LinearFit stv(const ThermalSignal& sig);
double sdstv(const ThermalSignal& sig);
double sdtv(const ThermalSignal& sig);

// Suffix n: normalized source; L: low-pass source; Ln: low-pass then normalized.
enum class Metric : std::size_t {
  TD, STV, SDSTV, SDTV,
  TD_n, STV_n, SDSTV_n, SDTV_n,
  TD_L, STV_L, SDSTV_L, SDTV_L,
  TD_Ln, STV_Ln, SDSTV_Ln, SDTV_Ln,
};

inline constexpr std::size_t kMetricCount = 16;

inline constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "TD",    "STV",    "SDSTV",    "SDTV",    "TD_n",  "STV_n",  "SDSTV_n",  "SDTV_n",
    "TD_L",  "STV_L",  "SDSTV_L",  "SDTV_L",  "TD_Ln", "STV_Ln", "SDSTV_Ln", "SDTV_Ln",
};

struct MetricSet {
  std::array<double, kMetricCount> values{};

  double& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
  double operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }
};

// Min-max ranges shared by one person's sessions: one for the raw signals and
// one for their low-passed versions.
struct PersonContext {
  NormRange original;
  NormRange lowpassed;
};

// signals are the person's outlier-rejected, unfiltered recordings.
PersonContext person_context(std::span<const ThermalSignal> signals,
                             double cutoff_hz = kDefaultCutoffHz);

// All 16 cells. The low-pass source is filtered before it is normalized.
MetricSet metric_set(const ThermalSignal& nonfiltered, const PersonContext& person,
                     double cutoff_hz = kDefaultCutoffHz);

struct PowerSpectrum {
  std::vector<double> frequencies;
  std::vector<double> power;
  double bin_width = 0.0;
};

// One-sided periodogram of the mean-removed, Hann-windowed signal, scaled so
// that sum(power) * bin_width equals the mean square of the windowed signal.
PowerSpectrum psd(const ThermalSignal& sig);

struct SqiBand {
  double f_min = 0.1;
  double f_max = 0.85;
};

// In-band over total spectral power by trapezoidal integration, both
// integrals excluding the DC bin.
double psqi(const ThermalSignal& sig, SqiBand band = {});

}  // namespace noseheat
