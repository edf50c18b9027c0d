#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace noseheat {

inline constexpr float kMinPlausibleTemp = -40.0f;
inline constexpr float kMaxPlausibleTemp = 150.0f;

// One radiometric image. temps is row-major, top-left origin, in degrees C.
struct ThermalFrame {
  std::size_t width = 0;
  std::size_t height = 0;
  double timestamp = 0.0;
  std::vector<float> temps;

  float at(std::size_t x, std::size_t y) const { return temps[y * width + x]; }

  bool operator==(const ThermalFrame&) const = default;
};

struct FrameSequence {
  std::vector<ThermalFrame> frames;
  float nominal_rate = 0.0f;

  std::size_t size() const { return frames.size(); }
  std::size_t width() const { return frames.empty() ? 0 : frames.front().width; }
  std::size_t height() const { return frames.empty() ? 0 : frames.front().height; }

  bool operator==(const FrameSequence&) const = default;
};

// Throws OutOfRangeTemp / DimensionMismatch.
void validate(const ThermalFrame& frame);

// Throws InvalidSequence, DimensionMismatch, NonMonotonicTime, OutOfRangeTemp.
void validate(const FrameSequence& seq);

// NHTF v1 codec. Layout (little-endian):
//   "NHTF" | u16 version | u16 width | u16 height | u32 frame_count | f32 rate
//   then frame_count x [ f64 timestamp | width*height x f32 ]
inline constexpr std::uint16_t kNhtfVersion = 1;
inline constexpr std::size_t kNhtfHeaderBytes = 18;

std::vector<std::byte> encode_nhtf(const FrameSequence& seq);
FrameSequence decode_nhtf(std::span<const std::byte> bytes);

// A path naming a directory, or an index.csv file, is read as a CSV bundle;
// anything else must be an NHTF file.
FrameSequence read_sequence(const std::filesystem::path& path);
void write_sequence(const FrameSequence& seq, const std::filesystem::path& path);

// CSV bundle: index.csv (frame,timestamp) plus frame_%06d.csv per frame.
FrameSequence read_csv_bundle(const std::filesystem::path& dir);
void write_csv_bundle(const FrameSequence& seq, const std::filesystem::path& dir);

}  // namespace noseheat
