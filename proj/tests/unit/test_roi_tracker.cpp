#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "noseheat/error.hpp"
#include "noseheat/roi_tracker.hpp"
#include "noseheat/synth.hpp"
#include "oracles.hpp"

using namespace noseheat;

namespace {

ThermalFrame flat_frame(std::size_t w, std::size_t h, float v) {
  return {w, h, 0.0, std::vector<float>(w * h, v)};
}

double mean_center_error(const RoiTrajectory& traj, const SceneTruth& truth) {
  double err = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k)
    err += std::hypot(traj.rois[k].center_x - truth.centers[k].x, traj.rois[k].center_y - truth.centers[k].y);
  return err / static_cast<double>(traj.size());
}

SceneSpec moving_scene(double px_per_frame, double noise, std::uint64_t seed) {
  SceneSpec s;
  s.duration = 50.0 / s.rate;
  s.path.start = {30.0, 60.0};
  s.path.velocity = {px_per_frame * s.rate, 0.0};
  s.pixel_noise_sd = noise;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(GradientMap, ConstantFrameIsZero) {
  const auto g = gradient_map(flat_frame(7, 5, 31.0f));
  for (double v : g.magnitudes) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(g.width, 7u);
  EXPECT_EQ(g.height, 5u);
}

TEST(GradientMap, VerticalStepMatchesHandSobel) {
  auto f = flat_frame(8, 6, 30.0f);
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 4; x < 8; ++x) f.temps[y * 8 + x] = 31.0f;
  const auto g = gradient_map(f);
  for (long y = 0; y < 6; ++y) {
    for (long x = 0; x < 8; ++x) {
      const double expect = oracle::sobel_at(f.temps, 8, 6, x, y);
      EXPECT_NEAR(g.at(x, y), expect, 1e-12);
      if (x == 3 || x == 4) EXPECT_NEAR(g.at(x, y), 0.5, 1e-12);
      else EXPECT_EQ(g.at(x, y), 0.0);
    }
  }
}

TEST(GradientMap, MatchesHandSobelOnRandomField) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(25.0f, 37.0f);
  ThermalFrame f = flat_frame(9, 7, 0.0f);
  for (auto& v : f.temps) v = u(rng);
  const auto g = gradient_map(f);
  for (long y = 0; y < 7; ++y)
    for (long x = 0; x < 9; ++x) EXPECT_NEAR(g.at(x, y), oracle::sobel_at(f.temps, 9, 7, x, y), 1e-10);
}

TEST(GradientMap, GaussianBlobRing) {
  SceneSpec s;
  s.duration = 1.0 / s.rate;
  s.blob.sigma = 6.0;
  const auto frame = gen_sequence(s).sequence.frames[0];
  const auto g = gradient_map(frame);
  const double amp = s.blob.peak - s.background;
  EXPECT_NEAR(g.at(80, 60), 0.0, 1e-6);

  double best = 0.0;
  double best_r = 0.0;
  for (std::size_t y = 30; y < 90; ++y) {
    for (std::size_t x = 50; x < 110; ++x) {
      const double r = std::hypot(x - 80.0, y - 60.0);
      const double analytic = amp * r / (s.blob.sigma * s.blob.sigma) *
                              std::exp(-r * r / (2.0 * s.blob.sigma * s.blob.sigma));
      if (analytic > 0.2 * amp / s.blob.sigma) EXPECT_NEAR(g.at(x, y), analytic, 0.1 * analytic) << x << "," << y;
      if (g.at(x, y) > best) {
        best = g.at(x, y);
        best_r = r;
      }
    }
  }
  EXPECT_NEAR(best_r, s.blob.sigma, 1.0);
}

TEST(SelectLargeRoi, DefaultsGive25x17AtCenter) {
  const auto f = flat_frame(160, 120, 30.0f);
  const Roi r = select_large_roi(f, {80.0, 60.0});
  EXPECT_EQ(r.width, 25);
  EXPECT_EQ(r.height, 17);
  EXPECT_DOUBLE_EQ(r.center_x, 80.0);
  EXPECT_DOUBLE_EQ(r.center_y, 60.0);
  EXPECT_EQ(r.first_col(), 68);
  EXPECT_EQ(r.first_row(), 52);
}

TEST(SelectLargeRoi, ClampsNearBorder) {
  const auto f = flat_frame(160, 120, 30.0f);
  const Roi r = select_large_roi(f, {1.0, 118.0});
  EXPECT_TRUE(r.fits(160, 120));
  EXPECT_EQ(r.first_col(), 0);
  EXPECT_EQ(r.first_row() + r.height, 120);
  EXPECT_DOUBLE_EQ(r.center_x, 12.0);
  EXPECT_DOUBLE_EQ(r.center_y, 111.0);
}

TEST(SelectLargeRoi, UnitScaleIsSmallRoi) {
  const auto f = flat_frame(160, 120, 30.0f);
  const Roi r = select_large_roi(f, {40.0, 40.0}, {1.0, 1.0});
  EXPECT_EQ(r.width, 9);
  EXPECT_EQ(r.height, 9);
}

TEST(SelectLargeRoi, SeedOutsideFrame) {
  const auto f = flat_frame(160, 120, 30.0f);
  EXPECT_THROW(select_large_roi(f, {200.0, 60.0}), Error);
  try {
    select_large_roi(f, {80.0, -3.0});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SeedOutOfBounds);
  }
}

TEST(Track, StaticBlob) {
  SceneSpec s;
  s.duration = 20.0 / s.rate;
  const auto scene = gen_sequence(s);
  const Roi init = select_large_roi(scene.sequence.frames[0], {80.0, 60.0});
  const auto traj = track(scene.sequence, init);
  ASSERT_EQ(traj.size(), scene.sequence.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_NEAR(traj.rois[k].center_x, 80.0, 0.1);
    EXPECT_NEAR(traj.rois[k].center_y, 60.0, 0.1);
    EXPECT_GT(traj.confidence[k], 0.99);
    EXPECT_FALSE(traj.low_confidence[k]);
  }
}

TEST(Track, OnePixelPerFrame) {
  const auto spec = moving_scene(1.0, 0.0, 0);
  const auto scene = gen_sequence(spec);
  ASSERT_EQ(scene.sequence.size(), 50u);
  const Roi init = select_large_roi(scene.sequence.frames[0], scene.truth.centers[0]);
  const auto traj = track(scene.sequence, init);
  EXPECT_LE(mean_center_error(traj, scene.truth), 1.0);
}

TEST(Track, TwoPixelsPerFrameWithNoise) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto scene = gen_sequence(moving_scene(2.0, 0.1, seed));
    const Roi init = select_large_roi(scene.sequence.frames[0], scene.truth.centers[0]);
    const auto traj = track(scene.sequence, init);
    EXPECT_LE(mean_center_error(traj, scene.truth), 1.5) << "seed " << seed;
  }
}

TEST(Track, InvariantsHold) {
  SceneSpec s = moving_scene(2.0, 0.2, 9);
  s.path.wobble_amp = {0.0, 4.0};
  s.path.wobble_freq = 0.3;
  const auto scene = gen_sequence(s);
  TrackerConfig cfg;
  cfg.max_step = 2;
  const Roi init = select_large_roi(scene.sequence.frames[0], scene.truth.centers[0]);
  for (auto update : {TemplateUpdate::Anchor, TemplateUpdate::Blend}) {
    cfg.update = update;
    const auto traj = track(scene.sequence, init, cfg);
    ASSERT_EQ(traj.size(), scene.sequence.size());
    ASSERT_EQ(traj.confidence.size(), traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
      EXPECT_TRUE(traj.rois[k].fits(160, 120));
      EXPECT_GE(traj.confidence[k], -1.0);
      EXPECT_LE(traj.confidence[k], 1.0 + 1e-12);
      EXPECT_EQ(traj.rois[k].width, init.width);
      if (k > 0) {
        EXPECT_LE(std::abs(traj.rois[k].center_x - traj.rois[k - 1].center_x), cfg.max_step + 1e-9);
        EXPECT_LE(std::abs(traj.rois[k].center_y - traj.rois[k - 1].center_y), cfg.max_step + 1e-9);
      }
    }
  }
}

TEST(Track, TranslationEquivariance) {
  SceneSpec s = moving_scene(1.5, 0.1, 4);
  s.path.wobble_amp = {0.0, 3.0};
  s.path.wobble_freq = 0.2;
  const auto scene = gen_sequence(s);
  const long dx = 7, dy = -4;
  FrameSequence shifted = scene.sequence;
  for (auto& f : shifted.frames) {
    const auto src = f.temps;
    for (long y = 0; y < 120; ++y)
      for (long x = 0; x < 160; ++x) {
        const long sx = std::clamp(x - dx, 0L, 159L), sy = std::clamp(y - dy, 0L, 119L);
        f.temps[y * 160 + x] = src[sy * 160 + sx];
      }
  }
  const Roi a = select_large_roi(scene.sequence.frames[0], scene.truth.centers[0]);
  Roi b = a;
  b.center_x += dx;
  b.center_y += dy;
  const auto ta = track(scene.sequence, a);
  const auto tb = track(shifted, b);
  for (std::size_t k = 0; k < ta.size(); ++k) {
    EXPECT_NEAR(tb.rois[k].center_x - ta.rois[k].center_x, dx, 0.25);
    EXPECT_NEAR(tb.rois[k].center_y - ta.rois[k].center_y, dy, 0.25);
  }
}

TEST(Track, ConstantSequenceFreezesAndFlags) {
  FrameSequence seq;
  seq.nominal_rate = 8.7f;
  for (int k = 0; k < 6; ++k) {
    auto f = flat_frame(40, 30, 30.0f);
    f.timestamp = k / 8.7;
    seq.frames.push_back(f);
  }
  const Roi init = select_large_roi(seq.frames[0], {20.0, 15.0});
  const auto traj = track(seq, init);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_TRUE(traj.low_confidence[k]);
    EXPECT_EQ(traj.rois[k].center_x, init.center_x);
    EXPECT_EQ(traj.rois[k].center_y, init.center_y);
  }
}

TEST(Track, Errors) {
  FrameSequence empty;
  try {
    track(empty, Roi{5, 5, 3, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySequence);
  }
  FrameSequence one;
  one.frames.push_back(flat_frame(10, 10, 30.0f));
  EXPECT_THROW(track(one, Roi{5, 5, 3, 3}, TrackerConfig{0}), Error);
  EXPECT_THROW(track(one, Roi{9.5, 5, 3, 3}), Error);
}
