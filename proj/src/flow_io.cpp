#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rashdrive/error.hpp"
#include "rashdrive/flow.hpp"

namespace rashdrive {

namespace {

void put_le(std::string& out, std::uint32_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xffu));
}

std::uint32_t get_le(const std::string& in, std::size_t offset, int bytes) {
  std::uint32_t value = 0;
  for (int i = 0; i < bytes; ++i) {
    value |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return value;
}

constexpr std::size_t kHeaderSize = 12;

}  // namespace

std::string encode_flow(const FlowField& flow) {
  require(flow.width >= 1 && flow.width <= 0xffff && flow.height >= 1 && flow.height <= 0xffff,
          "flow dimensions do not fit the RFLO header");
  std::string out = "RFLO";
  put_le(out, static_cast<std::uint32_t>(flow.width), 2);
  put_le(out, static_cast<std::uint32_t>(flow.height), 2);
  put_le(out, 0u, 4);
  out.reserve(kHeaderSize + 8 * flow.u.size());
  for (const auto* plane : {&flow.u, &flow.v}) {
    for (float value : *plane) put_le(out, std::bit_cast<std::uint32_t>(value), 4);
  }
  return out;
}

FlowField decode_flow(const std::string& bytes) {
  if (bytes.size() < kHeaderSize || bytes.compare(0, 4, "RFLO") != 0) {
    fail(ErrorCode::Parse, "not an RFLO flow file");
  }
  const int width = static_cast<int>(get_le(bytes, 4, 2));
  const int height = static_cast<int>(get_le(bytes, 6, 2));
  if (width < 1 || height < 1) fail(ErrorCode::Parse, "RFLO flow has zero size");
  FlowField flow(width, height);
  const std::size_t n = flow.u.size();
  if (bytes.size() != kHeaderSize + 8 * n) fail(ErrorCode::Parse, "RFLO payload size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    flow.u[i] = std::bit_cast<float>(get_le(bytes, kHeaderSize + 4 * i, 4));
    flow.v[i] = std::bit_cast<float>(get_le(bytes, kHeaderSize + 4 * (n + i), 4));
  }
  return flow;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write flow '" + path.string() + "'");
  const std::string bytes = encode_flow(flow);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FlowField read_flow(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open flow '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return decode_flow(buffer.str());
}

}  // namespace rashdrive
