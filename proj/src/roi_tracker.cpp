#include "noseheat/roi_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "io_util.hpp"
#include "noseheat/error.hpp"

namespace noseheat {

bool Roi::fits(std::size_t frame_width, std::size_t frame_height) const {
  if (width < kMinRoiSide || height < kMinRoiSide) return false;
  const long x0 = first_col();
  const long y0 = first_row();
  return x0 >= 0 && y0 >= 0 && x0 + width <= static_cast<long>(frame_width) &&
         y0 + height <= static_cast<long>(frame_height);
}

GradientMap gradient_map(const ThermalFrame& frame) {
  const std::size_t w = frame.width;
  const std::size_t h = frame.height;
  GradientMap g{w, h, std::vector<double>(w * h, 0.0)};
  auto px = [&](long x, long y) -> double {
    x = std::clamp<long>(x, 0, static_cast<long>(w) - 1);
    y = std::clamp<long>(y, 0, static_cast<long>(h) - 1);
    return frame.temps[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
  };
  for (long y = 0; y < static_cast<long>(h); ++y) {
    for (long x = 0; x < static_cast<long>(w); ++x) {
      const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
      g.magnitudes[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] =
          std::hypot(gx, gy) / 8.0;
    }
  }
  return g;
}

namespace {

int nearest_odd(double v) {
  const int n = 2 * static_cast<int>(std::lround((v - 1.0) / 2.0)) + 1;
  return std::max(n, kMinRoiSide);
}

// Largest valid center range for an ROI side inside a frame extent.
double clamp_center(double c, int side, std::size_t extent) {
  const double lo = side / 2.0 - 0.5;
  const double hi = static_cast<double>(extent) - 0.5 - side / 2.0;
  return std::clamp(c, lo, hi);
}

struct Patch {
  std::vector<double> values;  // mean-removed
  double norm = 0.0;           // sqrt(sum of squares)
};

Patch make_patch(const std::vector<double>& raw) {
  Patch p{raw, 0.0};
  double mean = 0.0;
  for (double v : raw) mean += v;
  mean /= static_cast<double>(raw.size());
  double ss = 0.0;
  for (double& v : p.values) {
    v -= mean;
    ss += v * v;
  }
  p.norm = std::sqrt(ss);
  return p;
}

std::vector<double> cut(const GradientMap& g, long x0, long y0, int w, int h) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (long y = y0; y < y0 + h; ++y)
    for (long x = x0; x < x0 + w; ++x)
      out.push_back(g.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)));
  return out;
}

// Zero when either side has no variance.
double ncc(const Patch& tmpl, const GradientMap& g, long x0, long y0, int w, int h) {
  const std::size_t n = tmpl.values.size();
  double mean = 0.0;
  for (long y = y0; y < y0 + h; ++y)
    for (long x = x0; x < x0 + w; ++x)
      mean += g.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
  mean /= static_cast<double>(n);
  double cross = 0.0;
  double ss = 0.0;
  std::size_t i = 0;
  for (long y = y0; y < y0 + h; ++y) {
    for (long x = x0; x < x0 + w; ++x, ++i) {
      const double d = g.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) - mean;
      cross += tmpl.values[i] * d;
      ss += d * d;
    }
  }
  const double denom = tmpl.norm * std::sqrt(ss);
  if (!(denom > 1e-12)) return 0.0;
  return std::clamp(cross / denom, -1.0, 1.0);
}

// Vertex offset of the parabola through (-1, l), (0, c), (1, r).
double parabolic_offset(double l, double c, double r) {
  const double curv = l - 2.0 * c + r;
  if (!(curv < 0.0)) return 0.0;
  return std::clamp(0.5 * (l - r) / curv, -0.5, 0.5);
}

}  // namespace

Roi select_large_roi(const ThermalFrame& frame, Point seed, RoiScale scale) {
  const double fw = static_cast<double>(frame.width);
  const double fh = static_cast<double>(frame.height);
  if (!(seed.x >= -0.5 && seed.x <= fw - 0.5 && seed.y >= -0.5 && seed.y <= fh - 0.5))
    fail(ErrorCode::SeedOutOfBounds, "seed (" + detail::format_number(seed.x) + "," +
                                         detail::format_number(seed.y) + ") outside " +
                                         std::to_string(frame.width) + "x" +
                                         std::to_string(frame.height) + " frame");
  if (!(scale.width > 0.0) || !(scale.height > 0.0))
    fail(ErrorCode::InvalidArgument, "ROI scale factors must be positive");

  Roi roi;
  roi.width = std::min(nearest_odd(kSmallRoiSide * scale.width), static_cast<int>(frame.width));
  roi.height = std::min(nearest_odd(kSmallRoiSide * scale.height), static_cast<int>(frame.height));
  if (roi.width < kMinRoiSide || roi.height < kMinRoiSide)
    fail(ErrorCode::EmptyRoi, "frame too small for a 3x3 ROI");
  roi.center_x = clamp_center(seed.x, roi.width, frame.width);
  roi.center_y = clamp_center(seed.y, roi.height, frame.height);
  return roi;
}

RoiTrajectory track(const FrameSequence& seq, const Roi& initial, const TrackerConfig& cfg) {
  if (seq.frames.empty()) fail(ErrorCode::EmptySequence, "cannot track an empty sequence");
  if (cfg.max_step < 1) fail(ErrorCode::InvalidArgument, "max_step must be at least 1 pixel");
  if (!(cfg.blend_alpha >= 0.0 && cfg.blend_alpha <= 1.0))
    fail(ErrorCode::InvalidArgument, "blend_alpha must lie in [0, 1]");
  const std::size_t fw = seq.width();
  const std::size_t fh = seq.height();
  if (!initial.fits(fw, fh))
    fail(ErrorCode::SeedOutOfBounds, "initial ROI does not fit inside frame 0");

  const int w = initial.width;
  const int h = initial.height;
  const int step = cfg.max_step;
  const int span = 2 * step + 1;

  // Center position relative to the integer box origin; constant for the run.
  const double off_x = initial.center_x - static_cast<double>(initial.first_col());
  const double off_y = initial.center_y - static_cast<double>(initial.first_row());

  GradientMap grad = gradient_map(seq.frames.front());
  std::vector<double> tmpl_raw = cut(grad, initial.first_col(), initial.first_row(), w, h);
  Patch tmpl = make_patch(tmpl_raw);

  RoiTrajectory traj;
  traj.rois.reserve(seq.size());
  const double conf0 = ncc(tmpl, grad, initial.first_col(), initial.first_row(), w, h);
  traj.rois.push_back(initial);
  traj.confidence.push_back(conf0);
  traj.low_confidence.push_back(conf0 < cfg.min_confidence);

  constexpr double kInvalid = -std::numeric_limits<double>::infinity();
  std::vector<double> scores(static_cast<std::size_t>(span * span));

  for (std::size_t t = 1; t < seq.size(); ++t) {
    grad = gradient_map(seq.frames[t]);
    const Roi& prev = traj.rois.back();
    const long bx = prev.first_col();
    const long by = prev.first_row();

    auto score_at = [&](int dx, int dy) -> double& {
      return scores[static_cast<std::size_t>((dy + step) * span + (dx + step))];
    };
    int best_dx = 0;
    int best_dy = 0;
    for (int dy = -step; dy <= step; ++dy) {
      for (int dx = -step; dx <= step; ++dx) {
        const long qx = bx + dx;
        const long qy = by + dy;
        double& s = score_at(dx, dy);
        if (qx < 0 || qy < 0 || qx + w > static_cast<long>(fw) || qy + h > static_cast<long>(fh)) {
          s = kInvalid;
          continue;
        }
        s = ncc(tmpl, grad, qx, qy, w, h);
      }
    }
    // Prefer the smallest displacement among equal scores.
    double best = score_at(0, 0);
    for (int dy = -step; dy <= step; ++dy) {
      for (int dx = -step; dx <= step; ++dx) {
        const double s = score_at(dx, dy);
        const bool closer = std::abs(dx) + std::abs(dy) < std::abs(best_dx) + std::abs(best_dy);
        if (s > best || (s == best && closer)) {
          best = s;
          best_dx = dx;
          best_dy = dy;
        }
      }
    }

    traj.confidence.push_back(best);
    if (best < cfg.min_confidence) {
      traj.rois.push_back(prev);
      traj.low_confidence.push_back(true);
      continue;
    }

    auto refine = [&](int d, bool along_x) {
      if (d <= -step || d >= step) return 0.0;
      const double l = along_x ? score_at(best_dx - 1, best_dy) : score_at(best_dx, best_dy - 1);
      const double r = along_x ? score_at(best_dx + 1, best_dy) : score_at(best_dx, best_dy + 1);
      if (l == kInvalid || r == kInvalid) return 0.0;
      return parabolic_offset(l, best, r);
    };
    const double sub_x = refine(best_dx, true);
    const double sub_y = refine(best_dy, false);

    Roi next = prev;
    const long qx = bx + best_dx;
    const long qy = by + best_dy;
    next.center_x = static_cast<double>(qx) + sub_x + off_x;
    next.center_y = static_cast<double>(qy) + sub_y + off_y;
    next.center_x = std::clamp(next.center_x, prev.center_x - step, prev.center_x + step);
    next.center_y = std::clamp(next.center_y, prev.center_y - step, prev.center_y + step);
    next.center_x = clamp_center(next.center_x, w, fw);
    next.center_y = clamp_center(next.center_y, h, fh);
    traj.rois.push_back(next);
    traj.low_confidence.push_back(false);

    if (cfg.update == TemplateUpdate::Blend) {
      const auto patch = cut(grad, qx, qy, w, h);
      for (std::size_t i = 0; i < tmpl_raw.size(); ++i)
        tmpl_raw[i] = (1.0 - cfg.blend_alpha) * tmpl_raw[i] + cfg.blend_alpha * patch[i];
      tmpl = make_patch(tmpl_raw);
    }
  }
  return traj;
}

void write_trajectory_csv(const FrameSequence& seq, const RoiTrajectory& traj,
                          const std::filesystem::path& path) {
  if (traj.size() != seq.size())
    fail(ErrorCode::LengthMismatch, "trajectory length differs from frame count");
  std::string out = "frame,timestamp,cx,cy,w,h,confidence,low_conf_flag\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& r = traj.rois[i];
    out += std::to_string(i) + ',' + detail::format_number(seq.frames[i].timestamp) + ',' +
           detail::format_number(r.center_x) + ',' + detail::format_number(r.center_y) + ',' +
           std::to_string(r.width) + ',' + std::to_string(r.height) + ',' +
           detail::format_number(traj.confidence[i]) + ',' +
           (traj.low_confidence[i] ? "1" : "0") + '\n';
  }
  detail::write_atomic(path, out);
}

}  // namespace noseheat
