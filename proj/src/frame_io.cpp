#include "noseheat/frame_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "io_util.hpp"
#include "noseheat/error.hpp"

namespace noseheat {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'N', 'H', 'T', 'F'};

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::byte>& out) : out_(out) {}

  template <typename U>
  void put_uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i)
      out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
  void put_f32(float v) { put_uint(std::bit_cast<std::uint32_t>(v)); }
  void put_f64(double v) { put_uint(std::bit_cast<std::uint64_t>(v)); }

 private:
  std::vector<std::byte>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> in) : in_(in) {}

  template <typename U>
  U get_uint() {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(std::to_integer<std::uint8_t>(in_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  float get_f32() { return std::bit_cast<float>(get_uint<std::uint32_t>()); }
  double get_f64() { return std::bit_cast<double>(get_uint<std::uint64_t>()); }

 private:
  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

void check_temps(std::span<const float> temps, std::size_t frame_index) {
  for (std::size_t i = 0; i < temps.size(); ++i) {
    float t = temps[i];
    if (!std::isfinite(t) || t < kMinPlausibleTemp || t > kMaxPlausibleTemp)
      fail(ErrorCode::OutOfRangeTemp, "frame " + std::to_string(frame_index) + " pixel " +
                                          std::to_string(i) + ": temperature " +
                                          detail::format_number(t) + " outside plausible range");
  }
}

void check_time(double prev, double now, std::size_t frame_index) {
  if (!std::isfinite(now) || (frame_index > 0 && !(now > prev)))
    fail(ErrorCode::NonMonotonicTime,
         "frame " + std::to_string(frame_index) + ": timestamp not strictly increasing");
}

}  // namespace

void validate(const ThermalFrame& frame) {
  if (frame.width == 0 || frame.height == 0 || frame.temps.size() != frame.width * frame.height)
    fail(ErrorCode::DimensionMismatch, "frame payload does not match its dimensions");
  check_temps(frame.temps, 0);
}

void validate(const FrameSequence& seq) {
  if (seq.frames.empty()) fail(ErrorCode::InvalidSequence, "sequence has no frames");
  if (!std::isfinite(seq.nominal_rate) || !(seq.nominal_rate > 0.0f))
    fail(ErrorCode::InvalidSequence, "nominal rate must be positive");
  const std::size_t w = seq.frames.front().width;
  const std::size_t h = seq.frames.front().height;
  double prev = 0.0;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& f = seq.frames[i];
    if (f.width != w || f.height != h || w == 0 || h == 0 || f.temps.size() != w * h)
      fail(ErrorCode::DimensionMismatch, "frame " + std::to_string(i) + " dimensions differ");
    check_time(prev, f.timestamp, i);
    check_temps(f.temps, i);
    prev = f.timestamp;
  }
}

std::vector<std::byte> encode_nhtf(const FrameSequence& seq) {
  validate(seq);
  const std::size_t w = seq.width();
  const std::size_t h = seq.height();
  if (w > std::numeric_limits<std::uint16_t>::max() || h > std::numeric_limits<std::uint16_t>::max())
    fail(ErrorCode::InvalidSequence, "frame dimensions exceed 65535");
  if (seq.size() > std::numeric_limits<std::uint32_t>::max())
    fail(ErrorCode::InvalidSequence, "too many frames");

  std::vector<std::byte> out;
  out.reserve(kNhtfHeaderBytes + seq.size() * (8 + 4 * w * h));
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  ByteWriter wr(out);
  wr.put_uint<std::uint16_t>(kNhtfVersion);
  wr.put_uint<std::uint16_t>(static_cast<std::uint16_t>(w));
  wr.put_uint<std::uint16_t>(static_cast<std::uint16_t>(h));
  wr.put_uint<std::uint32_t>(static_cast<std::uint32_t>(seq.size()));
  wr.put_f32(seq.nominal_rate);
  for (const auto& f : seq.frames) {
    wr.put_f64(f.timestamp);
    for (float t : f.temps) wr.put_f32(t);
  }
  return out;
}

FrameSequence decode_nhtf(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(ErrorCode::BadMagic, "missing NHTF magic");
  if (bytes.size() < kNhtfHeaderBytes) fail(ErrorCode::DimensionMismatch, "truncated NHTF header");

  ByteReader rd(bytes.subspan(4));
  const auto version = rd.get_uint<std::uint16_t>();
  if (version != kNhtfVersion)
    fail(ErrorCode::BadMagic, "unsupported NHTF version " + std::to_string(version));
  const std::size_t w = rd.get_uint<std::uint16_t>();
  const std::size_t h = rd.get_uint<std::uint16_t>();
  const std::uint64_t count = rd.get_uint<std::uint32_t>();
  FrameSequence seq;
  seq.nominal_rate = rd.get_f32();

  if (w == 0 || h == 0) fail(ErrorCode::DimensionMismatch, "zero frame dimension");
  if (count == 0) fail(ErrorCode::InvalidSequence, "NHTF file declares zero frames");
  if (!std::isfinite(seq.nominal_rate) || !(seq.nominal_rate > 0.0f))
    fail(ErrorCode::InvalidSequence, "nominal rate must be positive");

  const std::uint64_t record = 8 + 4 * static_cast<std::uint64_t>(w) * h;
  const std::uint64_t payload = bytes.size() - kNhtfHeaderBytes;
  if (payload != record * count)
    fail(ErrorCode::DimensionMismatch, "header promises " + std::to_string(count) +
                                           " frames, payload holds " +
                                           std::to_string(payload / record) + " (" +
                                           std::to_string(payload % record) + " stray bytes)");

  ByteReader body(bytes.subspan(kNhtfHeaderBytes));
  seq.frames.resize(count);
  double prev = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    auto& f = seq.frames[i];
    f.width = w;
    f.height = h;
    f.timestamp = body.get_f64();
    check_time(prev, f.timestamp, i);
    prev = f.timestamp;
    f.temps.resize(w * h);
    for (auto& t : f.temps) t = body.get_f32();
    check_temps(f.temps, i);
  }
  return seq;
}

FrameSequence read_sequence(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) fail(ErrorCode::IoFailure, "no such file: " + path.string());
  if (fs::is_directory(path, ec)) return read_csv_bundle(path);
  if (path.filename() == "index.csv") return read_csv_bundle(path.parent_path());

  const std::string raw = detail::read_text(path);
  return decode_nhtf(std::as_bytes(std::span(raw.data(), raw.size())));
}

void write_sequence(const FrameSequence& seq, const fs::path& path) {
  const auto bytes = encode_nhtf(seq);
  detail::write_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

namespace {

std::string frame_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.csv", index);
  return buf;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : detail::split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

FrameSequence read_csv_bundle(const fs::path& dir) {
  const auto index_path = dir / "index.csv";
  const std::string index_text = detail::read_text(index_path);
  const auto index_lines = lines_of(index_text);
  if (index_lines.empty() || index_lines.front().substr(0, 5) != "frame")
    fail(ErrorCode::BadMagic, index_path.string() + ": missing 'frame,timestamp' header");

  FrameSequence seq;
  double prev = 0.0;
  for (std::size_t row = 1; row < index_lines.size(); ++row) {
    auto cols = detail::split(index_lines[row], ',');
    if (cols.size() != 2) fail(ErrorCode::DimensionMismatch, index_path.string() + ": bad row");
    const auto idx = static_cast<std::size_t>(detail::parse_double(cols[0], index_path.string()));
    ThermalFrame f;
    f.timestamp = detail::parse_double(cols[1], index_path.string());
    check_time(prev, f.timestamp, seq.frames.size());
    prev = f.timestamp;

    const auto frame_path = dir / frame_file_name(idx);
    const std::string text = detail::read_text(frame_path);
    for (auto line : lines_of(text)) {
      auto cells = detail::split(line, ',');
      if (f.width == 0) f.width = cells.size();
      if (cells.size() != f.width)
        fail(ErrorCode::DimensionMismatch, frame_path.string() + ": ragged rows");
      for (auto c : cells)
        f.temps.push_back(static_cast<float>(detail::parse_double(c, frame_path.string())));
      ++f.height;
    }
    if (!seq.frames.empty() &&
        (f.width != seq.frames.front().width || f.height != seq.frames.front().height))
      fail(ErrorCode::DimensionMismatch, frame_path.string() + ": dimensions differ from frame 0");
    check_temps(f.temps, seq.frames.size());
    seq.frames.push_back(std::move(f));
  }
  if (seq.frames.empty()) fail(ErrorCode::InvalidSequence, index_path.string() + ": no frames");

  // The bundle has no rate field; derive it from the mean frame interval.
  const double span = seq.frames.back().timestamp - seq.frames.front().timestamp;
  seq.nominal_rate =
      seq.frames.size() > 1 ? static_cast<float>((seq.frames.size() - 1) / span) : 1.0f;
  validate(seq);
  return seq;
}

void write_csv_bundle(const FrameSequence& seq, const fs::path& dir) {
  validate(seq);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + dir.string());

  std::string index = "frame,timestamp\n";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& f = seq.frames[i];
    index += std::to_string(i) + "," + detail::format_number(f.timestamp) + "\n";
    std::string body;
    for (std::size_t y = 0; y < f.height; ++y) {
      for (std::size_t x = 0; x < f.width; ++x) {
        if (x) body += ',';
        body += detail::format_number(f.at(x, y));
      }
      body += '\n';
    }
    detail::write_atomic(dir / frame_file_name(i), body);
  }
  detail::write_atomic(dir / "index.csv", index);
}

}  // namespace noseheat
