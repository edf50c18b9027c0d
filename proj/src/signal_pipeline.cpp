#include "noseheat/signal_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <json.hpp>

#include "io_util.hpp"
#include "noseheat/error.hpp"

namespace noseheat {

namespace fs = std::filesystem;

void validate(const ThermalSignal& sig) {
  if (!std::isfinite(sig.sample_rate) || !(sig.sample_rate > 0.0))
    fail(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (!sig.suspect.empty() && sig.suspect.size() != sig.samples.size())
    fail(ErrorCode::InvalidArgument, "suspect mask length differs from sample count");
  for (std::size_t k = 0; k < sig.samples.size(); ++k) {
    const double v = sig.samples[k];
    if (!std::isfinite(v))
      fail(ErrorCode::InvalidArgument, "sample " + std::to_string(k) + " is not finite");
    if (sig.provenance.normalized && (v < 0.0 || v > 1.0))
      fail(ErrorCode::InvalidArgument, "normalized sample " + std::to_string(k) + " outside [0, 1]");
  }
}

double spatial_average(const ThermalFrame& frame, const Roi& roi) {
  if (roi.width < 1 || roi.height < 1) fail(ErrorCode::EmptyRoi, "ROI has no area");
  const long fw = static_cast<long>(frame.width);
  const long fh = static_cast<long>(frame.height);
  const long x0 = std::max(roi.first_col(), 0L);
  const long y0 = std::max(roi.first_row(), 0L);
  const long x1 = std::min(roi.first_col() + roi.width, fw);
  const long y1 = std::min(roi.first_row() + roi.height, fh);
  if (x1 <= x0 || y1 <= y0) fail(ErrorCode::EmptyRoi, "ROI does not overlap the frame");
  double sum = 0.0;
  for (long y = y0; y < y1; ++y)
    for (long x = x0; x < x1; ++x)
      sum += frame.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
  return sum / static_cast<double>((x1 - x0) * (y1 - y0));
}

ThermalSignal extract_signal(const FrameSequence& seq, const RoiTrajectory& traj) {
  if (traj.size() != seq.size() || traj.low_confidence.size() != seq.size())
    fail(ErrorCode::LengthMismatch, "trajectory has " + std::to_string(traj.size()) +
                                        " entries for " + std::to_string(seq.size()) + " frames");
  ThermalSignal sig;
  sig.sample_rate = seq.nominal_rate;
  sig.samples.reserve(seq.size());
  bool any_suspect = false;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    sig.samples.push_back(spatial_average(seq.frames[k], traj.rois[k]));
    any_suspect = any_suspect || traj.low_confidence[k];
  }
  if (any_suspect) {
    sig.suspect.resize(seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k) sig.suspect[k] = traj.low_confidence[k] ? 1 : 0;
  }
  return sig;
}

std::size_t outlier_window_length(std::size_t n, double sample_rate, const OutlierConfig& cfg) {
  const auto by_fraction = std::llround(cfg.window_fraction * static_cast<double>(n));
  const auto by_seconds = std::llround(cfg.min_window_seconds * sample_rate);
  const auto len = std::max<long long>({by_fraction, by_seconds, 1});
  return std::min(static_cast<std::size_t>(len), n);
}

namespace {

// Counts over rank positions; supports k-th smallest lookup.
class RankCounter {
 public:
  explicit RankCounter(std::size_t n) : tree_(n + 1, 0), size_(n) {
    top_ = 1;
    while (top_ * 2 <= n) top_ *= 2;
  }

  void add(std::size_t pos, int delta) {
    count_ += delta;
    for (std::size_t i = pos + 1; i <= size_; i += i & (~i + 1)) tree_[i] += delta;
  }

  int count() const { return count_; }

  // Rank position holding the k-th (0-based) active element.
  std::size_t kth(int k) const {
    std::size_t pos = 0;
    int remaining = k + 1;
    for (std::size_t step = top_; step > 0; step /= 2) {
      const std::size_t next = pos + step;
      if (next <= size_ && tree_[next] < remaining) {
        pos = next;
        remaining -= tree_[next];
      }
    }
    return pos;
  }

 private:
  std::vector<int> tree_;
  std::size_t size_;
  std::size_t top_ = 1;
  int count_ = 0;
};

struct Fences {
  double lower;
  double upper;
};

Fences tukey_fences(const RankCounter& counter, const std::vector<double>& sorted, double g) {
  const int m = counter.count();
  auto quantile = [&](double p) {
    const double h = (m - 1) * p;
    const int lo = static_cast<int>(std::floor(h));
    const double vlo = sorted[counter.kth(lo)];
    if (lo + 1 >= m) return vlo;
    const double vhi = sorted[counter.kth(lo + 1)];
    return vlo + (h - lo) * (vhi - vlo);
  };
  const double q1 = quantile(0.25);
  const double q3 = quantile(0.75);
  const double iqr = q3 - q1;
  return {q1 - g * iqr, q3 + g * iqr};
}

}  // namespace

OutlierReport reject_outliers_report(const ThermalSignal& sig, const OutlierConfig& cfg) {
  validate(sig);
  if (!(cfg.g > 0.0) || !(cfg.window_fraction > 0.0 && cfg.window_fraction <= 1.0) ||
      !(cfg.min_window_seconds > 0.0))
    fail(ErrorCode::InvalidArgument, "outlier config outside its valid range");
  const std::size_t n = sig.size();
  if (n < 4) fail(ErrorCode::TooShort, "outlier rejection needs at least 4 samples");

  const std::size_t len = outlier_window_length(n, sig.sample_rate, cfg);
  const auto& x = sig.samples;
  auto is_suspect = [&](std::size_t k) { return !sig.suspect.empty() && sig.suspect[k] != 0; };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<std::size_t> rank(n);
  std::vector<double> sorted(n);
  for (std::size_t r = 0; r < n; ++r) {
    rank[order[r]] = r;
    sorted[r] = x[order[r]];
  }

  RankCounter trusted(n);
  RankCounter everyone(n);
  auto insert = [&](std::size_t k, int delta) {
    everyone.add(rank[k], delta);
    if (!is_suspect(k)) trusted.add(rank[k], delta);
  };

  std::vector<std::uint8_t> rejected(n, 0);
  std::size_t win_start = 0;
  for (std::size_t k = 0; k < len; ++k) insert(k, +1);

  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t half = len / 2;
    const std::size_t want = std::min(k > half ? k - half : 0, n - len);
    while (win_start < want) {
      insert(win_start, -1);
      insert(win_start + len, +1);
      ++win_start;
    }
    const RankCounter& basis = trusted.count() > 0 ? trusted : everyone;
    const Fences f = tukey_fences(basis, sorted, cfg.g);
    if (x[k] < f.lower || x[k] > f.upper) rejected[k] = 1;
  }

  OutlierReport report;
  report.window_length = len;
  for (std::size_t k = 0; k < n; ++k)
    if (rejected[k]) report.removed.push_back(k);
  if (report.removed.size() == n) fail(ErrorCode::AllOutliers, "every sample was rejected");

  report.signal = sig;
  report.signal.suspect.clear();
  auto& y = report.signal.samples;
  std::size_t prev_good = n;  // n = none yet
  for (std::size_t k = 0; k < n; ++k) {
    if (rejected[k]) continue;
    if (prev_good == n) {
      for (std::size_t j = 0; j < k; ++j) y[j] = x[k];
    } else if (k > prev_good + 1) {
      const double a = x[prev_good];
      const double b = x[k];
      const double gap = static_cast<double>(k - prev_good);
      for (std::size_t j = prev_good + 1; j < k; ++j)
        y[j] = a + (b - a) * static_cast<double>(j - prev_good) / gap;
    }
    prev_good = k;
  }
  for (std::size_t j = prev_good + 1; j < n; ++j) y[j] = x[prev_good];
  return report;
}

ThermalSignal reject_outliers(const ThermalSignal& sig, const OutlierConfig& cfg) {
  return reject_outliers_report(sig, cfg).signal;
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;
};

Biquad butterworth_lowpass(double cutoff_hz, double rate) {
  const double k = std::tan(M_PI * cutoff_hz / rate);
  const double k2 = k * k;
  const double norm = 1.0 / (1.0 + M_SQRT2 * k + k2);
  Biquad q;
  q.b0 = k2 * norm;
  q.b1 = 2.0 * q.b0;
  q.b2 = q.b0;
  q.a1 = 2.0 * (k2 - 1.0) * norm;
  q.a2 = (1.0 - M_SQRT2 * k + k2) * norm;
  return q;
}

// Transposed direct form II, state primed to the steady state of x[0].
void run_biquad(const Biquad& q, std::vector<double>& x) {
  const double x0 = x.front();
  double z2 = (q.b2 - q.a2) * x0;
  double z1 = (q.b1 - q.a1) * x0 + z2;
  for (double& v : x) {
    const double in = v;
    const double out = q.b0 * in + z1;
    z1 = q.b1 * in - q.a1 * out + z2;
    z2 = q.b2 * in - q.a2 * out;
    v = out;
  }
}

}  // namespace

ThermalSignal lowpass(const ThermalSignal& sig, double cutoff_hz) {
  validate(sig);
  if (!(cutoff_hz > 0.0)) fail(ErrorCode::InvalidArgument, "cutoff must be positive");
  if (!(sig.sample_rate > 2.0 * cutoff_hz))
    fail(ErrorCode::RateTooLow, "sample rate " + detail::format_number(sig.sample_rate) +
                                    " Hz is not above twice the cutoff");
  const std::size_t n = sig.size();
  if (n < 2) fail(ErrorCode::TooShort, "low-pass needs at least 2 samples");

  const Biquad q = butterworth_lowpass(cutoff_hz, sig.sample_rate);
  // Pole radius is sqrt(a2); settle to 1e-4 of the initial transient.
  const double radius = std::sqrt(std::max(q.a2, 1e-300));
  const double settle = radius < 1.0 ? std::ceil(std::log(1e-4) / std::log(radius)) : 1.0;
  const std::size_t pad = std::min(static_cast<std::size_t>(std::max(settle, 1.0)), n - 1);

  const auto& x = sig.samples;
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

  run_biquad(q, ext);
  std::reverse(ext.begin(), ext.end());
  run_biquad(q, ext);
  std::reverse(ext.begin(), ext.end());

  ThermalSignal out = sig;
  out.samples.assign(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                     ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
  out.provenance.filtered = true;
  return out;
}

NormRange sample_range(std::span<const ThermalSignal> sigs) {
  std::size_t total = 0;
  NormRange r{INFINITY, -INFINITY};
  for (const auto& s : sigs) {
    validate(s);
    total += s.size();
    for (double v : s.samples) {
      r.min = std::min(r.min, v);
      r.max = std::max(r.max, v);
    }
  }
  if (total < 2) fail(ErrorCode::TooShort, "normalization needs at least 2 samples");
  if (!(r.max > r.min)) fail(ErrorCode::ConstantSignal, "signal is constant; cannot min-max scale");
  return r;
}

ThermalSignal apply_normalization(const ThermalSignal& sig, NormRange range) {
  if (!(range.max > range.min)) fail(ErrorCode::ConstantSignal, "empty normalization range");
  ThermalSignal out = sig;
  const double width = range.max - range.min;
  for (double& v : out.samples) {
    if (v < range.min || v > range.max)
      fail(ErrorCode::InvalidArgument, "sample outside the normalization range");
    v = (v - range.min) / width;
  }
  out.provenance.normalized = true;
  return out;
}

std::vector<ThermalSignal> normalize(std::span<const ThermalSignal> sigs) {
  if (sigs.empty()) fail(ErrorCode::TooShort, "normalize needs at least one signal");
  const NormRange range = sample_range(sigs);
  std::vector<ThermalSignal> out;
  out.reserve(sigs.size());
  for (const auto& s : sigs) out.push_back(apply_normalization(s, range));
  return out;
}

ThermalSignal resample(const ThermalSignal& sig, std::size_t target_n) {
  validate(sig);
  const std::size_t n = sig.size();
  if (n < 2 || target_n < 2) fail(ErrorCode::TooShort, "resample needs n >= 2 and target_n >= 2");
  ThermalSignal out;
  out.provenance = sig.provenance;
  out.sample_rate = sig.sample_rate * static_cast<double>(target_n - 1) / static_cast<double>(n - 1);
  out.samples.resize(target_n);
  const double last = static_cast<double>(n - 1);
  for (std::size_t j = 0; j < target_n; ++j) {
    const double u = static_cast<double>(j) * last / static_cast<double>(target_n - 1);
    const auto i = std::min(static_cast<std::size_t>(u), n - 2);
    const double frac = u - static_cast<double>(i);
    out.samples[j] = frac == 0.0 ? sig.samples[i]
                                 : sig.samples[i] + frac * (sig.samples[i + 1] - sig.samples[i]);
  }
  return out;
}

fs::path sidecar_path(const fs::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_signal_csv(const ThermalSignal& sig, const fs::path& csv_path) {
  validate(sig);
  std::string out = "k,t_seconds,value\n";
  for (std::size_t k = 0; k < sig.size(); ++k)
    out += std::to_string(k) + ',' + detail::format_number(sig.time_at(k)) + ',' +
           detail::format_number(sig.samples[k]) + '\n';
  nlohmann::ordered_json meta;
  meta["filtered"] = sig.provenance.filtered;
  meta["normalized"] = sig.provenance.normalized;
  meta["sample_rate"] = sig.sample_rate;
  if (!sig.suspect.empty()) {
    auto idx = nlohmann::json::array();
    for (std::size_t k = 0; k < sig.suspect.size(); ++k)
      if (sig.suspect[k]) idx.push_back(k);
    meta["suspect"] = idx;
  }
  detail::write_atomic(csv_path, out);
  detail::write_atomic(sidecar_path(csv_path), meta.dump(2) + "\n");
}

ThermalSignal read_signal_csv(const fs::path& csv_path) {
  std::error_code ec;
  if (!fs::exists(csv_path, ec)) fail(ErrorCode::IoFailure, "no such file: " + csv_path.string());
  const std::string text = detail::read_text(csv_path);
  ThermalSignal sig;
  std::vector<double> times;
  bool header = true;
  for (auto line : detail::split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line.substr(0, 1) != "k")
        fail(ErrorCode::IoFailure, csv_path.string() + ": expected header k,t_seconds,value");
      header = false;
      continue;
    }
    auto cols = detail::split(line, ',');
    if (cols.size() != 3) fail(ErrorCode::IoFailure, csv_path.string() + ": expected 3 columns");
    times.push_back(detail::parse_double(cols[1], csv_path.string()));
    sig.samples.push_back(detail::parse_double(cols[2], csv_path.string()));
  }

  const auto meta_path = sidecar_path(csv_path);
  if (fs::exists(meta_path, ec)) {
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(detail::read_text(meta_path));
      sig.provenance.filtered = meta.value("filtered", false);
      sig.provenance.normalized = meta.value("normalized", false);
      sig.sample_rate = meta.at("sample_rate").get<double>();
      if (meta.contains("suspect")) {
        sig.suspect.assign(sig.size(), 0);
        for (auto k : meta["suspect"]) {
          const auto idx = k.get<std::size_t>();
          if (idx >= sig.size()) fail(ErrorCode::IoFailure, meta_path.string() + ": bad index");
          sig.suspect[idx] = 1;
        }
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::IoFailure, meta_path.string() + ": " + e.what());
    }
  } else if (times.size() >= 2 && times.back() > times.front()) {
    sig.sample_rate = static_cast<double>(times.size() - 1) / (times.back() - times.front());
  } else {
    fail(ErrorCode::IoFailure, csv_path.string() + ": no sidecar and no usable time column");
  }
  validate(sig);
  return sig;
}

}  // namespace noseheat
