#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "noseheat/frame_io.hpp"

namespace noseheat {

// Pixel (i, j) has its center at coordinate (i, j).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Axis-aligned rectangle. A pixel belongs to the ROI when its center lies in
// [center - size/2, center + size/2), so an ROI always covers width x height
// pixels.
struct Roi {
  double center_x = 0.0;
  double center_y = 0.0;
  int width = 0;
  int height = 0;

  double left() const { return center_x - width / 2.0; }
  double top() const { return center_y - height / 2.0; }

  // Index of the first covered column / row.
  long first_col() const { return static_cast<long>(std::ceil(left() - 1e-9)); }
  long first_row() const { return static_cast<long>(std::ceil(top() - 1e-9)); }

  bool fits(std::size_t frame_width, std::size_t frame_height) const;
};

inline constexpr int kMinRoiSide = 3;
inline constexpr int kSmallRoiSide = 9;

// Large-to-small ROI ratios taken from the mean ROI sizes of the nose-tip
// study (23.7 x 16.2 px large vs 8.5 x 8.6 px small).
struct RoiScale {
  double width = 2.75;
  double height = 1.9;
};

struct GradientMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> magnitudes;

  double at(std::size_t x, std::size_t y) const { return magnitudes[y * width + x]; }
};

// Sobel magnitude with edge replication. Kernels are divided by 8 so the
// result is in degrees C per pixel.
GradientMap gradient_map(const ThermalFrame& frame);

// Centered on seed (clamped inside the frame); side lengths are
// kSmallRoiSide * scale rounded to the nearest odd integer.
Roi select_large_roi(const ThermalFrame& frame, Point seed, RoiScale scale = {});

enum class TemplateUpdate {
  Anchor,  // template fixed from frame 0
  Blend,   // template <- (1 - alpha) template + alpha * matched patch
};

struct TrackerConfig {
  int max_step = 5;
  double min_confidence = 0.4;
  TemplateUpdate update = TemplateUpdate::Anchor;
  double blend_alpha = 0.05;
};

struct RoiTrajectory {
  std::vector<Roi> rois;
  std::vector<double> confidence;
  std::vector<bool> low_confidence;

  std::size_t size() const { return rois.size(); }
};

// NCC template matching on gradient maps with a +/- max_step search window
// and per-axis parabolic subpixel refinement. Per-axis center displacement
// between consecutive frames never exceeds max_step.
RoiTrajectory track(const FrameSequence& seq, const Roi& initial, const TrackerConfig& cfg = {});

// Columns: frame,timestamp,cx,cy,w,h,confidence,low_conf_flag
void write_trajectory_csv(const FrameSequence& seq, const RoiTrajectory& traj,
                          const std::filesystem::path& path);

}  // namespace noseheat
