#include "noseheat/noseheat.h"

#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "noseheat/error.hpp"
#include "noseheat/frame_io.hpp"
#include "noseheat/metrics.hpp"
#include "noseheat/roi_tracker.hpp"
#include "noseheat/signal_pipeline.hpp"
#include "noseheat/stats.hpp"
#include "noseheat/synth.hpp"

namespace nh = noseheat;

struct nh_sequence {
  nh::FrameSequence value;
};
struct nh_trajectory {
  nh::RoiTrajectory value;
};
struct nh_signal {
  nh::ThermalSignal value;
};
struct nh_compare {
  std::vector<nh::SessionRecord> records;
  std::vector<std::string> order;
};
struct nh_report {
  nh::CompareReport value;
};
struct nh_cohort {
  std::vector<nh::CohortSession> entries;
  std::vector<nh_signal> signals;
};

namespace {

thread_local std::string g_last_error;

nh_status to_status(nh::ErrorCode code) {
  using C = nh::ErrorCode;
  switch (code) {
    case C::InvalidArgument: return NH_ERR_INVALID_ARGUMENT;
    case C::IoFailure: return NH_ERR_IO;
    case C::BadMagic: return NH_ERR_BAD_MAGIC;
    case C::DimensionMismatch: return NH_ERR_DIMENSION_MISMATCH;
    case C::NonMonotonicTime: return NH_ERR_NON_MONOTONIC_TIME;
    case C::OutOfRangeTemp: return NH_ERR_OUT_OF_RANGE_TEMP;
    case C::InvalidSequence: return NH_ERR_INVALID_SEQUENCE;
    case C::SeedOutOfBounds: return NH_ERR_SEED_OUT_OF_BOUNDS;
    case C::EmptyRoi: return NH_ERR_EMPTY_ROI;
    case C::EmptySequence: return NH_ERR_EMPTY_SEQUENCE;
    case C::LengthMismatch: return NH_ERR_LENGTH_MISMATCH;
    case C::TooShort: return NH_ERR_TOO_SHORT;
    case C::AllOutliers: return NH_ERR_ALL_OUTLIERS;
    case C::RateTooLow: return NH_ERR_RATE_TOO_LOW;
    case C::ConstantSignal: return NH_ERR_CONSTANT_SIGNAL;
    case C::ConstantSeries: return NH_ERR_CONSTANT_SERIES;
    case C::ZeroVariance: return NH_ERR_ZERO_VARIANCE;
    case C::IncompleteTable: return NH_ERR_INCOMPLETE_TABLE;
    case C::DegenerateVariance: return NH_ERR_DEGENERATE_VARIANCE;
    case C::InvalidSpec: return NH_ERR_INVALID_SPEC;
  }
  return NH_ERR_INTERNAL;
}

template <typename F>
nh_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return NH_OK;
  } catch (const nh::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return NH_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NH_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) nh::fail(nh::ErrorCode::InvalidArgument, what);
}

// Writes *slot only after the whole computation succeeded.
template <typename Handle, typename Value>
void publish(Handle** slot, Value&& v) {
  *slot = new Handle{std::forward<Value>(v)};
}

nh::Roi from_c(const nh_roi& r) { return {r.center_x, r.center_y, r.width, r.height}; }
nh_roi to_c(const nh::Roi& r) { return {r.center_x, r.center_y, r.width, r.height}; }

nh::TrackerConfig from_c(const nh_tracker_config& c) {
  nh::TrackerConfig out;
  out.max_step = c.max_step;
  out.min_confidence = c.min_confidence;
  out.update = c.update == NH_TEMPLATE_BLEND ? nh::TemplateUpdate::Blend : nh::TemplateUpdate::Anchor;
  out.blend_alpha = c.blend_alpha;
  return out;
}

nh::SignalSpec from_c(const nh_signal_spec& s) {
  return {s.duration, s.rate, s.baseline, s.drift_slope, s.breathing_amp,
          s.breathing_freq, s.noise_sd, s.spike_fraction, s.spike_amp, s.seed};
}

nh_signal_spec to_c(const nh::SignalSpec& s) {
  return {s.duration, s.rate, s.baseline, s.drift_slope, s.breathing_amp,
          s.breathing_freq, s.noise_sd, s.spike_fraction, s.spike_amp, s.seed};
}

nh::SceneSpec from_c(const nh_scene_spec& c) {
  nh::SceneSpec s;
  s.width = c.width;
  s.height = c.height;
  s.duration = c.duration;
  s.rate = c.rate;
  s.background = c.background;
  s.blob = {c.blob_peak, c.blob_sigma, c.blob_peak_slope, c.blob_breathing_amp, c.blob_breathing_freq};
  s.path.start = {c.start_x, c.start_y};
  s.path.velocity = {c.velocity_x, c.velocity_y};
  s.path.wobble_amp = {c.wobble_x, c.wobble_y};
  s.path.wobble_freq = c.wobble_freq;
  s.pixel_noise_sd = c.pixel_noise_sd;
  s.seed = c.seed;
  return s;
}

nh_anova_result to_c(const nh::AnovaResult& a) {
  return {a.F, a.df_effect, a.df_error, a.p, a.partial_eta_sq};
}

nh_t_result to_c(const nh::TTestResult& t) { return {t.t, t.df, t.p}; }

std::vector<nh::ThermalSignal> gather(const nh_signal* const* sigs, size_t count) {
  require(sigs != nullptr || count == 0, "signal array is null");
  std::vector<nh::ThermalSignal> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    require(sigs[i] != nullptr, "signal handle is null");
    out.push_back(sigs[i]->value);
  }
  return out;
}

}  // namespace

extern "C" {

const char* nh_version(void) { return NOSEHEAT_VERSION_STRING; }

const char* nh_status_name(nh_status status) {
  switch (status) {
    case NH_OK: return "Ok";
    case NH_ERR_INTERNAL: return "Internal";
    default: break;
  }
  for (int c = 0; c <= static_cast<int>(nh::ErrorCode::InvalidSpec); ++c) {
    const auto code = static_cast<nh::ErrorCode>(c);
    if (to_status(code) == status) return nh::to_string(code);
  }
  return "Unknown";
}

const char* nh_last_error(void) { return g_last_error.c_str(); }

int nh_exit_code(nh_status status) {
  switch (status) {
    case NH_OK: return 0;
    case NH_ERR_IO:
    case NH_ERR_BAD_MAGIC:
    case NH_ERR_DIMENSION_MISMATCH:
    case NH_ERR_NON_MONOTONIC_TIME:
    case NH_ERR_OUT_OF_RANGE_TEMP:
    case NH_ERR_INVALID_SEQUENCE: return 2;
    case NH_ERR_SEED_OUT_OF_BOUNDS:
    case NH_ERR_EMPTY_ROI:
    case NH_ERR_EMPTY_SEQUENCE:
    case NH_ERR_LENGTH_MISMATCH: return 3;
    case NH_ERR_TOO_SHORT:
    case NH_ERR_ALL_OUTLIERS:
    case NH_ERR_RATE_TOO_LOW:
    case NH_ERR_CONSTANT_SIGNAL:
    case NH_ERR_CONSTANT_SERIES:
    case NH_ERR_ZERO_VARIANCE: return 4;
    case NH_ERR_INCOMPLETE_TABLE:
    case NH_ERR_DEGENERATE_VARIANCE: return 5;
    default: return 1;
  }
}

/* frames */

nh_status nh_sequence_read(const char* path, nh_sequence** out) {
  return guarded([&] {
    require(path && out, "null argument");
    publish(out, nh::read_sequence(path));
  });
}

nh_status nh_sequence_write(const nh_sequence* seq, const char* path) {
  return guarded([&] {
    require(seq && path, "null argument");
    nh::write_sequence(seq->value, path);
  });
}

nh_status nh_sequence_write_csv(const nh_sequence* seq, const char* dir) {
  return guarded([&] {
    require(seq && dir, "null argument");
    nh::write_csv_bundle(seq->value, dir);
  });
}

void nh_sequence_free(nh_sequence* seq) { delete seq; }
size_t nh_sequence_frame_count(const nh_sequence* seq) { return seq ? seq->value.size() : 0; }
size_t nh_sequence_width(const nh_sequence* seq) { return seq ? seq->value.width() : 0; }
size_t nh_sequence_height(const nh_sequence* seq) { return seq ? seq->value.height() : 0; }
float nh_sequence_rate(const nh_sequence* seq) { return seq ? seq->value.nominal_rate : 0.0f; }

double nh_sequence_timestamp(const nh_sequence* seq, size_t frame) {
  return seq && frame < seq->value.size() ? seq->value.frames[frame].timestamp : 0.0;
}

const float* nh_sequence_frame_data(const nh_sequence* seq, size_t frame) {
  return seq && frame < seq->value.size() ? seq->value.frames[frame].temps.data() : nullptr;
}

/* tracking */

nh_tracker_config nh_tracker_config_default(void) {
  const nh::TrackerConfig d;
  return {d.max_step, d.min_confidence, NH_TEMPLATE_ANCHOR, d.blend_alpha};
}

nh_status nh_select_large_roi(const nh_sequence* seq, double seed_x, double seed_y, double scale_w,
                              double scale_h, nh_roi* out) {
  return guarded([&] {
    require(seq && out, "null argument");
    if (seq->value.frames.empty()) nh::fail(nh::ErrorCode::EmptySequence, "sequence has no frames");
    *out = to_c(nh::select_large_roi(seq->value.frames.front(), {seed_x, seed_y}, {scale_w, scale_h}));
  });
}

nh_status nh_track(const nh_sequence* seq, const nh_roi* initial, const nh_tracker_config* cfg,
                   nh_trajectory** out) {
  return guarded([&] {
    require(seq && initial && out, "null argument");
    const nh::TrackerConfig c = cfg ? from_c(*cfg) : nh::TrackerConfig{};
    publish(out, nh::track(seq->value, from_c(*initial), c));
  });
}

void nh_trajectory_free(nh_trajectory* traj) { delete traj; }
size_t nh_trajectory_length(const nh_trajectory* traj) { return traj ? traj->value.size() : 0; }

nh_status nh_trajectory_at(const nh_trajectory* traj, size_t frame, nh_roi* roi, double* confidence,
                           int* low_confidence) {
  return guarded([&] {
    require(traj != nullptr, "null trajectory");
    if (frame >= traj->value.size()) nh::fail(nh::ErrorCode::InvalidArgument, "frame index out of range");
    if (roi) *roi = to_c(traj->value.rois[frame]);
    if (confidence) *confidence = traj->value.confidence[frame];
    if (low_confidence) *low_confidence = traj->value.low_confidence[frame] ? 1 : 0;
  });
}

nh_status nh_trajectory_write_csv(const nh_trajectory* traj, const nh_sequence* seq, const char* path) {
  return guarded([&] {
    require(traj && seq && path, "null argument");
    nh::write_trajectory_csv(seq->value, traj->value, path);
  });
}

/* signals */

nh_outlier_config nh_outlier_config_default(void) {
  const nh::OutlierConfig d;
  return {d.g, d.window_fraction, d.min_window_seconds};
}

nh_status nh_signal_create(const double* samples, size_t n, double sample_rate, nh_signal** out) {
  return guarded([&] {
    require(out && (samples || n == 0), "null argument");
    nh::ThermalSignal s;
    s.samples.assign(samples, samples + n);
    s.sample_rate = sample_rate;
    nh::validate(s);
    publish(out, std::move(s));
  });
}

nh_status nh_signal_extract(const nh_sequence* seq, const nh_trajectory* traj, nh_signal** out) {
  return guarded([&] {
    require(seq && traj && out, "null argument");
    publish(out, nh::extract_signal(seq->value, traj->value));
  });
}

nh_status nh_signal_read_csv(const char* path, nh_signal** out) {
  return guarded([&] {
    require(path && out, "null argument");
    publish(out, nh::read_signal_csv(path));
  });
}

nh_status nh_signal_write_csv(const nh_signal* sig, const char* path) {
  return guarded([&] {
    require(sig && path, "null argument");
    nh::write_signal_csv(sig->value, path);
  });
}

nh_status nh_signal_clone(const nh_signal* sig, nh_signal** out) {
  return guarded([&] {
    require(sig && out, "null argument");
    publish(out, sig->value);
  });
}

void nh_signal_free(nh_signal* sig) { delete sig; }
size_t nh_signal_length(const nh_signal* sig) { return sig ? sig->value.size() : 0; }
const double* nh_signal_samples(const nh_signal* sig) { return sig ? sig->value.samples.data() : nullptr; }
double nh_signal_rate(const nh_signal* sig) { return sig ? sig->value.sample_rate : 0.0; }
int nh_signal_is_filtered(const nh_signal* sig) { return sig && sig->value.provenance.filtered; }
int nh_signal_is_normalized(const nh_signal* sig) { return sig && sig->value.provenance.normalized; }

nh_status nh_reject_outliers(const nh_signal* sig, const nh_outlier_config* cfg, nh_signal** out,
                             size_t* removed_count, size_t* window_length) {
  return guarded([&] {
    require(sig && out, "null argument");
    nh::OutlierConfig c;
    if (cfg) c = {cfg->g, cfg->window_fraction, cfg->min_window_seconds};
    auto report = nh::reject_outliers_report(sig->value, c);
    if (removed_count) *removed_count = report.removed.size();
    if (window_length) *window_length = report.window_length;
    publish(out, std::move(report.signal));
  });
}

nh_status nh_lowpass(const nh_signal* sig, double cutoff_hz, nh_signal** out) {
  return guarded([&] {
    require(sig && out, "null argument");
    publish(out, nh::lowpass(sig->value, cutoff_hz));
  });
}

nh_status nh_resample(const nh_signal* sig, size_t target_n, nh_signal** out) {
  return guarded([&] {
    require(sig && out, "null argument");
    publish(out, nh::resample(sig->value, target_n));
  });
}

nh_status nh_sample_range(const nh_signal* const* sigs, size_t count, nh_norm_range* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const auto r = nh::sample_range(gather(sigs, count));
    *out = {r.min, r.max};
  });
}

nh_status nh_normalize(const nh_signal* sig, nh_norm_range range, nh_signal** out) {
  return guarded([&] {
    require(sig && out, "null argument");
    publish(out, nh::apply_normalization(sig->value, {range.min, range.max}));
  });
}

/* metrics */

const char* nh_metric_name(size_t index) {
  return index < nh::kMetricCount ? nh::kMetricNames[index].data() : nullptr;
}

nh_status nh_td(const nh_signal* sig, double* out) {
  return guarded([&] {
    require(sig && out, "null argument");
    *out = nh::td(sig->value);
  });
}

nh_status nh_stv(const nh_signal* sig, double* slope, double* intercept, double* residual_rms) {
  return guarded([&] {
    require(sig != nullptr, "null signal");
    const auto fit = nh::stv(sig->value);
    if (slope) *slope = fit.slope;
    if (intercept) *intercept = fit.intercept;
    if (residual_rms) *residual_rms = fit.residual_rms;
  });
}

nh_status nh_sdstv(const nh_signal* sig, double* out) {
  return guarded([&] {
    require(sig && out, "null argument");
    *out = nh::sdstv(sig->value);
  });
}

nh_status nh_sdtv(const nh_signal* sig, double* out) {
  return guarded([&] {
    require(sig && out, "null argument");
    *out = nh::sdtv(sig->value);
  });
}

nh_status nh_person_context_compute(const nh_signal* const* sigs, size_t count, double cutoff_hz,
                                    nh_person_context* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const auto ctx = nh::person_context(gather(sigs, count), cutoff_hz);
    *out = {{ctx.original.min, ctx.original.max}, {ctx.lowpassed.min, ctx.lowpassed.max}};
  });
}

nh_status nh_metric_set_compute(const nh_signal* nonfiltered, const nh_person_context* person,
                                double cutoff_hz, nh_metric_set* out) {
  return guarded([&] {
    require(nonfiltered && person && out, "null argument");
    const nh::PersonContext ctx{{person->original.min, person->original.max},
                                {person->lowpassed.min, person->lowpassed.max}};
    const auto ms = nh::metric_set(nonfiltered->value, ctx, cutoff_hz);
    for (size_t i = 0; i < nh::kMetricCount; ++i) out->values[i] = ms.values[i];
  });
}

nh_status nh_psqi(const nh_signal* sig, double f_min, double f_max, double* out) {
  return guarded([&] {
    require(sig && out, "null argument");
    *out = nh::psqi(sig->value, {f_min, f_max});
  });
}

/* statistics */

nh_status nh_pearson(const double* x, const double* y, size_t n, double* r) {
  return guarded([&] {
    require(x && y && r, "null argument");
    *r = nh::pearson({x, n}, {y, n});
  });
}

nh_status nh_rm_anova(const double* table, size_t participants, size_t conditions,
                      nh_anova_result* out) {
  return guarded([&] {
    require(table && out, "null argument");
    std::vector<std::vector<double>> t(participants, std::vector<double>(conditions));
    for (size_t i = 0; i < participants; ++i)
      for (size_t j = 0; j < conditions; ++j) t[i][j] = table[i * conditions + j];
    *out = to_c(nh::rm_anova(t));
  });
}

nh_status nh_paired_t(const double* x, const double* y, size_t n, nh_t_result* out) {
  return guarded([&] {
    require(x && y && out, "null argument");
    *out = to_c(nh::paired_t({x, n}, {y, n}));
  });
}

nh_status nh_bonferroni(const double* p_values, size_t count, size_t m, double* out) {
  return guarded([&] {
    require((p_values && out) || count == 0, "null argument");
    const auto adj = nh::bonferroni({p_values, count}, m);
    for (size_t i = 0; i < count; ++i) out[i] = adj[i];
  });
}

nh_status nh_compare_create(nh_compare** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new nh_compare{};
  });
}

void nh_compare_free(nh_compare* cmp) { delete cmp; }

nh_status nh_compare_add(nh_compare* cmp, const char* participant, const char* session,
                         const nh_metric_set* metrics, const double* self_report) {
  return guarded([&] {
    require(cmp && participant && session && metrics, "null argument");
    nh::SessionRecord r;
    r.participant_id = participant;
    r.session_label = session;
    for (size_t i = 0; i < nh::kMetricCount; ++i) r.metrics.values[i] = metrics->values[i];
    if (self_report) r.self_report = *self_report;
    cmp->records.push_back(std::move(r));
  });
}

nh_status nh_compare_set_session_order(nh_compare* cmp, const char* const* sessions, size_t count) {
  return guarded([&] {
    require(cmp && (sessions || count == 0), "null argument");
    cmp->order.assign(sessions, sessions + count);
  });
}

nh_status nh_compare_run(const nh_compare* cmp, nh_report** out) {
  return guarded([&] {
    require(cmp && out, "null argument");
    publish(out, nh::compare_sessions(cmp->records, cmp->order));
  });
}

void nh_report_free(nh_report* report) { delete report; }
size_t nh_report_row_count(const nh_report* report) { return report ? report->value.rows.size() : 0; }

nh_status nh_report_row_at(const nh_report* report, size_t row, nh_report_row* out) {
  return guarded([&] {
    require(report && out, "null argument");
    if (row >= report->value.rows.size()) nh::fail(nh::ErrorCode::InvalidArgument, "row out of range");
    const auto& r = report->value.rows[row];
    out->metric = r.metric.c_str();
    out->has_anova = r.anova.has_value();
    out->anova = r.anova ? to_c(*r.anova) : nh_anova_result{0.0, 0, 0, 1.0, 0.0};
    out->stars = r.stars.c_str();
    out->posthoc_count = r.posthoc.size();
  });
}

nh_status nh_report_posthoc_at(const nh_report* report, size_t row, size_t index, nh_posthoc* out) {
  return guarded([&] {
    require(report && out, "null argument");
    if (row >= report->value.rows.size() || index >= report->value.rows[row].posthoc.size())
      nh::fail(nh::ErrorCode::InvalidArgument, "post-hoc index out of range");
    const auto& ph = report->value.rows[row].posthoc[index];
    out->session_a = ph.session_a.c_str();
    out->session_b = ph.session_b.c_str();
    out->has_test = ph.test.has_value();
    out->test = ph.test ? to_c(*ph.test) : nh_t_result{0.0, 0, 1.0};
    out->p_adjusted = ph.p_adjusted;
  });
}

/* synthetic data */

nh_signal_spec nh_signal_spec_default(void) { return to_c(nh::SignalSpec{}); }

nh_status nh_signal_spec_preset(nh_preset preset, uint64_t seed, nh_signal_spec* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    switch (preset) {
      case NH_PRESET_REST: *out = to_c(nh::session_preset(nh::SessionPreset::Rest, seed)); break;
      case NH_PRESET_MATH_EASY: *out = to_c(nh::session_preset(nh::SessionPreset::MathEasy, seed)); break;
      case NH_PRESET_MATH_HARD: *out = to_c(nh::session_preset(nh::SessionPreset::MathHard, seed)); break;
      case NH_PRESET_BREATHING_DOMINANT: *out = to_c(nh::breathing_dominant_preset(seed)); break;
      default: nh::fail(nh::ErrorCode::InvalidArgument, "unknown preset");
    }
  });
}

nh_status nh_synth_signal(const nh_signal_spec* spec, nh_signal** out) {
  return guarded([&] {
    require(spec && out, "null argument");
    publish(out, nh::gen_signal(from_c(*spec)).signal);
  });
}

nh_scene_spec nh_scene_spec_default(void) {
  const nh::SceneSpec d;
  return {d.width, d.height, d.duration, d.rate, d.background,
          d.blob.peak, d.blob.sigma, d.blob.peak_slope, d.blob.breathing_amp, d.blob.breathing_freq,
          d.path.start.x, d.path.start.y, d.path.velocity.x, d.path.velocity.y,
          d.path.wobble_amp.x, d.path.wobble_amp.y, d.path.wobble_freq, d.pixel_noise_sd, d.seed};
}

nh_status nh_synth_scene(const nh_scene_spec* spec, nh_sequence** out) {
  return guarded([&] {
    require(spec && out, "null argument");
    publish(out, nh::gen_sequence(from_c(*spec)).sequence);
  });
}

nh_status nh_scene_truth(const nh_scene_spec* spec, size_t frame, double* center_x, double* center_y,
                         double* peak_temp) {
  return guarded([&] {
    require(spec != nullptr, "null argument");
    const auto s = from_c(*spec);
    nh::validate(s);
    if (frame >= s.frame_count()) nh::fail(nh::ErrorCode::InvalidArgument, "frame index out of range");
    const double t = s.frame_time(frame);
    const auto c = s.path.at(t);
    if (center_x) *center_x = c.x;
    if (center_y) *center_y = c.y;
    if (peak_temp) *peak_temp = s.blob.peak_at(t);
  });
}

nh_cohort_spec nh_cohort_spec_default(void) {
  const nh::CohortSpec d;
  return {d.participants, d.duration, d.rate, d.baseline_sd, d.noise_scale_sd,
          d.session_drift_sd, d.session_noise_sd, d.seed};
}

nh_status nh_synth_cohort(const nh_cohort_spec* spec, nh_cohort** out) {
  return guarded([&] {
    require(spec && out, "null argument");
    nh::CohortSpec s;
    s.participants = spec->participants;
    s.duration = spec->duration;
    s.rate = spec->rate;
    s.baseline_sd = spec->baseline_sd;
    s.noise_scale_sd = spec->noise_scale_sd;
    s.session_drift_sd = spec->session_drift_sd;
    s.session_noise_sd = spec->session_noise_sd;
    s.seed = spec->seed;
    auto c = std::make_unique<nh_cohort>(nh_cohort{nh::gen_cohort(s), {}});
    c->signals.reserve(c->entries.size());
    for (const auto& e : c->entries) c->signals.push_back({e.data.signal});
    *out = c.release();
  });
}

void nh_cohort_free(nh_cohort* cohort) { delete cohort; }
size_t nh_cohort_size(const nh_cohort* cohort) { return cohort ? cohort->entries.size() : 0; }

nh_status nh_cohort_entry(const nh_cohort* cohort, size_t index, const char** participant,
                          const char** session, const nh_signal** signal) {
  return guarded([&] {
    require(cohort != nullptr, "null cohort");
    if (index >= cohort->entries.size()) nh::fail(nh::ErrorCode::InvalidArgument, "index out of range");
    const auto& e = cohort->entries[index];
    if (participant) *participant = e.participant.c_str();
    if (session) *session = nh::to_string(e.session);
    if (signal) *signal = &cohort->signals[index];
  });
}

}  // extern "C"
