#include "noseheat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "noseheat/error.hpp"

namespace noseheat {

namespace {

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

std::size_t sample_count(double duration, double rate) {
  return static_cast<std::size_t>(std::llround(duration * rate));
}

}  // namespace

void validate(const SignalSpec& s) {
  if (!positive(s.duration) || !positive(s.rate))
    fail(ErrorCode::InvalidSpec, "signal duration and rate must be positive");
  if (!(s.breathing_freq >= 0.0 && s.breathing_freq < s.rate / 2.0))
    fail(ErrorCode::InvalidSpec, "breathing frequency must lie below Nyquist");
  if (!(s.spike_fraction >= 0.0 && s.spike_fraction <= 0.2))
    fail(ErrorCode::InvalidSpec, "spike fraction must lie in [0, 0.2]");
  if (!(s.noise_sd >= 0.0) || !std::isfinite(s.noise_sd))
    fail(ErrorCode::InvalidSpec, "noise sd must be non-negative");
  for (double v : {s.baseline, s.drift_slope, s.breathing_amp, s.spike_amp})
    if (!std::isfinite(v)) fail(ErrorCode::InvalidSpec, "signal spec holds a non-finite value");
  if (sample_count(s.duration, s.rate) < 2)
    fail(ErrorCode::InvalidSpec, "spec yields fewer than 2 samples");
}

SyntheticSignal gen_signal(const SignalSpec& spec) {
  validate(spec);
  const std::size_t n = sample_count(spec.duration, spec.rate);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  SyntheticSignal out;
  out.truth = spec;
  out.clean.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / spec.rate;
    double v = spec.baseline + spec.drift_slope * t +
               spec.breathing_amp * std::sin(2.0 * M_PI * spec.breathing_freq * t);
    if (spec.noise_sd > 0.0) v += spec.noise_sd * noise(rng);
    out.clean[k] = v;
  }

  const auto spikes = static_cast<std::size_t>(std::llround(spec.spike_fraction * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  for (std::size_t k = 0; k < n; ++k) idx[k] = k;
  for (std::size_t i = 0; i < spikes; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  out.spike_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(spikes));
  std::sort(out.spike_indices.begin(), out.spike_indices.end());

  out.signal.sample_rate = spec.rate;
  out.signal.samples = out.clean;
  for (auto k : out.spike_indices) out.signal.samples[k] += spec.spike_amp;
  return out;
}

const char* to_string(SessionPreset preset) {
  switch (preset) {
    case SessionPreset::Rest: return "Rest";
    case SessionPreset::MathEasy: return "MathEasy";
    case SessionPreset::MathHard: return "MathHard";
  }
  return "?";
}

SignalSpec session_preset(SessionPreset preset, std::uint64_t seed) {
  SignalSpec s;
  s.seed = seed;
  switch (preset) {
    case SessionPreset::Rest:
      s.drift_slope = 0.001;
      s.breathing_amp = 0.10;
      s.breathing_freq = 0.25;
      s.noise_sd = 0.02;
      break;
    case SessionPreset::MathEasy:
      s.drift_slope = -0.002;
      s.breathing_amp = 0.12;
      s.breathing_freq = 0.27;
      s.noise_sd = 0.03;
      break;
    case SessionPreset::MathHard:
      s.drift_slope = -0.003;
      s.breathing_amp = 0.15;
      s.breathing_freq = 0.30;
      s.noise_sd = 0.05;
      break;
  }
  return s;
}

SignalSpec breathing_dominant_preset(std::uint64_t seed) {
  SignalSpec s;
  s.duration = 100.0;
  s.rate = 8.7;
  s.baseline = 34.0;
  s.drift_slope = 0.05;
  s.breathing_amp = 1.06;
  s.breathing_freq = 0.25;
  s.noise_sd = 0.05;
  s.seed = seed;
  return s;
}

double Blob::peak_at(double t) const {
  return peak + peak_slope * t + breathing_amp * std::sin(2.0 * M_PI * breathing_freq * t);
}

Point BlobPath::at(double t) const {
  const double w = std::sin(2.0 * M_PI * wobble_freq * t);
  return {start.x + velocity.x * t + wobble_amp.x * w, start.y + velocity.y * t + wobble_amp.y * w};
}

std::size_t SceneSpec::frame_count() const { return sample_count(duration, rate); }

void validate(const SceneSpec& s) {
  if (s.width < 3 || s.height < 3 || s.width > 65535 || s.height > 65535)
    fail(ErrorCode::InvalidSpec, "frame size must lie in [3, 65535]");
  if (!positive(s.duration) || !positive(s.rate) || !positive(s.blob.sigma))
    fail(ErrorCode::InvalidSpec, "duration, rate and blob sigma must be positive");
  if (!(s.pixel_noise_sd >= 0.0)) fail(ErrorCode::InvalidSpec, "pixel noise must be non-negative");
  if (s.frame_count() < 1) fail(ErrorCode::InvalidSpec, "scene yields no frames");
  const double margin = 2.0 * s.blob.sigma;
  for (std::size_t k = 0; k < s.frame_count(); ++k) {
    const double t = s.frame_time(k);
    const Point c = s.path.at(t);
    if (!(c.x - margin >= 0.0 && c.x + margin <= static_cast<double>(s.width - 1) &&
          c.y - margin >= 0.0 && c.y + margin <= static_cast<double>(s.height - 1)))
      fail(ErrorCode::InvalidSpec, "blob comes within 2 sigma of the frame edge at frame " +
                                       std::to_string(k));
    const double peak = s.blob.peak_at(t);
    for (double v : {peak, s.background})
      if (!(v >= kMinPlausibleTemp + 1.0 && v <= kMaxPlausibleTemp - 1.0))
        fail(ErrorCode::InvalidSpec, "scene temperature leaves the plausible range");
  }
}

double scene_temperature(const SceneSpec& spec, std::size_t k, double x, double y) {
  const double t = spec.frame_time(k);
  const Point c = spec.path.at(t);
  const double r2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
  const double s2 = spec.blob.sigma * spec.blob.sigma;
  return spec.background + (spec.blob.peak_at(t) - spec.background) * std::exp(-r2 / (2.0 * s2));
}

double truth_roi_mean(const SceneSpec& spec, std::size_t k, const Roi& roi) {
  double sum = 0.0;
  std::size_t count = 0;
  for (long y = roi.first_row(); y < roi.first_row() + roi.height; ++y) {
    for (long x = roi.first_col(); x < roi.first_col() + roi.width; ++x) {
      sum += static_cast<double>(
          static_cast<float>(scene_temperature(spec, k, static_cast<double>(x), static_cast<double>(y))));
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

SyntheticScene gen_sequence(const SceneSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  SyntheticScene out;
  out.sequence.nominal_rate = static_cast<float>(spec.rate);
  const std::size_t frames = spec.frame_count();
  out.sequence.frames.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    ThermalFrame f;
    f.width = spec.width;
    f.height = spec.height;
    f.timestamp = spec.frame_time(k);
    f.temps.resize(spec.width * spec.height);
    for (std::size_t y = 0; y < spec.height; ++y) {
      for (std::size_t x = 0; x < spec.width; ++x) {
        double v = scene_temperature(spec, k, static_cast<double>(x), static_cast<double>(y));
        if (spec.pixel_noise_sd > 0.0) v += spec.pixel_noise_sd * noise(rng);
        f.temps[y * spec.width + x] = static_cast<float>(
            std::clamp(v, static_cast<double>(kMinPlausibleTemp), static_cast<double>(kMaxPlausibleTemp)));
      }
    }
    out.sequence.frames.push_back(std::move(f));
    out.truth.centers.push_back(spec.path.at(spec.frame_time(k)));
    out.truth.peak_temps.push_back(spec.blob.peak_at(spec.frame_time(k)));
  }
  return out;
}

std::vector<CohortSession> gen_cohort(const CohortSpec& spec) {
  if (spec.participants < 1) fail(ErrorCode::InvalidSpec, "cohort needs at least one participant");
  if (!(spec.baseline_sd >= 0.0) || !(spec.noise_scale_sd >= 0.0) ||
      !(spec.session_drift_sd >= 0.0) || !(spec.session_noise_sd >= 0.0))
    fail(ErrorCode::InvalidSpec, "cohort spreads must be non-negative");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  constexpr SessionPreset kSessions[] = {SessionPreset::Rest, SessionPreset::MathEasy,
                                         SessionPreset::MathHard};
  std::vector<CohortSession> out;
  out.reserve(spec.participants * 3);
  for (std::size_t p = 0; p < spec.participants; ++p) {
    char name[16];
    std::snprintf(name, sizeof(name), "P%02zu", p + 1);
    const double baseline = 34.0 + spec.baseline_sd * unit(rng);
    const double noise_mult = std::exp(spec.noise_scale_sd * unit(rng));
    for (auto session : kSessions) {
      SignalSpec s = session_preset(session, 0);
      s.duration = spec.duration;
      s.rate = spec.rate;
      s.baseline = baseline;
      s.drift_slope += spec.session_drift_sd * unit(rng);
      s.noise_sd *= noise_mult * std::exp(spec.session_noise_sd * unit(rng));
      s.seed = rng();
      out.push_back({name, session, gen_signal(s)});
    }
  }
  return out;
}

}  // namespace noseheat
