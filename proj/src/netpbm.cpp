#include "rashdrive/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rashdrive/error.hpp"

namespace rashdrive {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::string token() {
    skip_whitespace_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      out.push_back(bytes_[pos_++]);
    }
    if (out.empty()) fail(ErrorCode::Parse, "truncated Netpbm header");
    return out;
  }

  int integer() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      fail(ErrorCode::Parse, "malformed Netpbm header field '" + t + "'");
    }
    return std::stoi(t);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      fail(ErrorCode::Parse, "missing whitespace before Netpbm raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageF32 decode_pnm(const std::string& bytes) {
  HeaderReader header(bytes);
  const std::string magic = header.token();
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    fail(ErrorCode::Parse, "unsupported Netpbm magic '" + magic + "'");
  }
  const int width = header.integer();
  const int height = header.integer();
  const int maxval = header.integer();
  if (width < 1 || height < 1) fail(ErrorCode::Parse, "Netpbm image has zero size");
  if (maxval != 255) fail(ErrorCode::Parse, "only maxval 255 is supported");
  const std::size_t offset = header.raster_offset();
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() < offset + count) fail(ErrorCode::Parse, "truncated Netpbm raster");

  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = static_cast<unsigned char>(bytes[offset + i]) / 255.0f;
  }
  return ImageF32(width, height, channels, std::move(data));
}

std::string encode_pnm(const ImageF32& img) {
  std::ostringstream out;
  out << (img.channels() == 1 ? "P5" : "P6") << '\n'
      << img.width() << ' ' << img.height() << '\n'
      << 255 << '\n';
  std::string bytes = out.str();
  const auto data = img.data();
  bytes.reserve(bytes.size() + data.size());
  for (float v : data) {
    const float q = std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f);
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(q)));
  }
  return bytes;
}

ImageF32 read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open image '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return decode_pnm(buffer.str());
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

void write_pnm(const std::filesystem::path& path, const ImageF32& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write image '" + path.string() + "'");
  const std::string bytes = encode_pnm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "failed writing image '" + path.string() + "'");
}

}  // namespace rashdrive
