#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "noseheat/frame_io.hpp"
#include "noseheat/roi_tracker.hpp"

namespace noseheat {

struct Provenance {
  bool filtered = false;
  bool normalized = false;

  bool operator==(const Provenance&) const = default;
};

// Uniformly sampled series x(k); sample k sits at k / sample_rate seconds.
// suspect is either empty or holds one flag per sample (1 = the tracker was
// not confident on that frame).
struct ThermalSignal {
  std::vector<double> samples;
  double sample_rate = 1.0;
  Provenance provenance;
  std::vector<std::uint8_t> suspect;

  std::size_t size() const { return samples.size(); }
  double time_at(std::size_t k) const { return static_cast<double>(k) / sample_rate; }
  // Time span covered by the samples, n / sample_rate.
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// Throws InvalidArgument on a non-positive rate, non-finite samples, a
// normalized signal leaving [0, 1], or a suspect mask of the wrong length.
void validate(const ThermalSignal& sig);

double spatial_average(const ThermalFrame& frame, const Roi& roi);

ThermalSignal extract_signal(const FrameSequence& seq, const RoiTrajectory& traj);

struct OutlierConfig {
  double g = 1.5;
  double window_fraction = 1.0 / 3.0;
  double min_window_seconds = 30.0;
};

// Samples in the centered sliding window:
// max(window_fraction * n, min_window_seconds * rate), capped at n.
std::size_t outlier_window_length(std::size_t n, double sample_rate, const OutlierConfig& cfg);

struct OutlierReport {
  ThermalSignal signal;
  std::vector<std::size_t> removed;  // ascending indices that fell outside the fences
  std::size_t window_length = 0;
};

// Tukey fences [Q1 - g IQR, Q3 + g IQR] per sample over its window, with
// type-7 quartiles. Suspect samples are tested but do not contribute to the
// quartiles (unless every sample in a window is suspect). Rejected samples
// are replaced by linear interpolation between surviving neighbours, or by
// the nearest survivor at the edges.
OutlierReport reject_outliers_report(const ThermalSignal& sig, const OutlierConfig& cfg = {});
ThermalSignal reject_outliers(const ThermalSignal& sig, const OutlierConfig& cfg = {});

inline constexpr double kDefaultCutoffHz = 0.08;

// Zero-phase low-pass: 2nd-order Butterworth biquad run forward and backward,
// with odd-reflection padding of one settling length at each end.
ThermalSignal lowpass(const ThermalSignal& sig, double cutoff_hz = kDefaultCutoffHz);

struct NormRange {
  double min = 0.0;
  double max = 0.0;
};

// Min and max over the concatenation of sigs. Throws TooShort when fewer
// than 2 samples in total, ConstantSignal when max == min.
NormRange sample_range(std::span<const ThermalSignal> sigs);

ThermalSignal apply_normalization(const ThermalSignal& sig, NormRange range);

// Min-max scaling with one range shared across all of a person's signals.
std::vector<ThermalSignal> normalize(std::span<const ThermalSignal> sigs);

// Linear interpolation onto target_n points spanning the first to the last
// sample time; the rate becomes the inverse of the new spacing.
ThermalSignal resample(const ThermalSignal& sig, std::size_t target_n);

// CSV with columns k,t_seconds,value plus a JSON sidecar (same stem, .json
// extension) holding {filtered, normalized, sample_rate} and optional
// suspect indices.
void write_signal_csv(const ThermalSignal& sig, const std::filesystem::path& csv_path);
ThermalSignal read_signal_csv(const std::filesystem::path& csv_path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace noseheat
