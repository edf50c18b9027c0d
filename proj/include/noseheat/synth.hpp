#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "noseheat/frame_io.hpp"
#include "noseheat/roi_tracker.hpp"
#include "noseheat/signal_pipeline.hpp"

namespace noseheat {

// x(t) = baseline + drift_slope t + breathing_amp sin(2 pi breathing_freq t)
//        + N(0, noise_sd) + spike_amp at round(spike_fraction n) random indices
struct SignalSpec {
  double duration = 300.0;
  double rate = 8.0;
  double baseline = 34.0;
  double drift_slope = 0.0;
  double breathing_amp = 0.0;
  double breathing_freq = 0.25;
  double noise_sd = 0.0;
  double spike_fraction = 0.0;
  double spike_amp = 5.0;
  std::uint64_t seed = 0;
};

void validate(const SignalSpec& spec);

struct SyntheticSignal {
  ThermalSignal signal;
  SignalSpec truth;
  std::vector<double> clean;               // the series without spikes
  std::vector<std::size_t> spike_indices;  // ascending
};

SyntheticSignal gen_signal(const SignalSpec& spec);

enum class SessionPreset { Rest, MathEasy, MathHard };

const char* to_string(SessionPreset preset);

// Direction-of-effect presets: nasal temperature falls and variability rises
// with load.
SignalSpec session_preset(SessionPreset preset, std::uint64_t seed);

// Drift plus a strong breathing component whose respiratory-band power
// fraction sits near 0.68 for a 100 s, 8.7 Hz recording.
SignalSpec breathing_dominant_preset(std::uint64_t seed);

struct Blob {
  double peak = 34.0;        // degrees C at the center, at t = 0
  double sigma = 5.0;        // pixels
  double peak_slope = 0.0;   // degrees C per second
  double breathing_amp = 0.0;
  double breathing_freq = 0.25;

  double peak_at(double t) const;
};

// center(t) = start + velocity t + wobble_amp sin(2 pi wobble_freq t)
struct BlobPath {
  Point start{80.0, 60.0};
  Point velocity{0.0, 0.0};  // pixels per second
  Point wobble_amp{0.0, 0.0};
  double wobble_freq = 0.0;

  Point at(double t) const;
};

struct SceneSpec {
  std::size_t width = 160;
  std::size_t height = 120;
  double duration = 10.0;
  double rate = 8.7;
  double background = 28.0;
  Blob blob;
  BlobPath path;
  double pixel_noise_sd = 0.0;
  std::uint64_t seed = 0;

  std::size_t frame_count() const;
  double frame_time(std::size_t k) const { return static_cast<double>(k) / rate; }
};

void validate(const SceneSpec& spec);

struct SceneTruth {
  std::vector<Point> centers;
  std::vector<double> peak_temps;
};

struct SyntheticScene {
  FrameSequence sequence;
  SceneTruth truth;
};

SyntheticScene gen_sequence(const SceneSpec& spec);

// Noise-free temperature of the generating field at pixel (x, y), frame k.
double scene_temperature(const SceneSpec& spec, std::size_t k, double x, double y);

// Mean of the noise-free field over the pixels an ROI covers in frame k.
double truth_roi_mean(const SceneSpec& spec, std::size_t k, const Roi& roi);

// A group of participants each recorded under Rest, MathEasy and MathHard.
// Participants differ in overall noise level (shared across their sessions);
// each session also draws its own drift and noise jitter.
struct CohortSpec {
  std::size_t participants = 12;
  double duration = 300.0;
  double rate = 8.0;
  double baseline_sd = 0.8;         // degrees C, between participants
  double noise_scale_sd = 0.2;      // log-normal sd of a participant's noise multiplier
  double session_drift_sd = 0.003;  // degrees C / s, per session
  double session_noise_sd = 0.1;    // log-normal sd of a per-session noise multiplier
  std::uint64_t seed = 0;
};

struct CohortSession {
  std::string participant;
  SessionPreset session;
  SyntheticSignal data;
};

// Participant-major: P01 Rest, P01 MathEasy, P01 MathHard, P02 Rest, ...
std::vector<CohortSession> gen_cohort(const CohortSpec& spec);

}  // namespace noseheat
