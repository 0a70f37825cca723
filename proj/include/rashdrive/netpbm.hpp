#pragma once

#include <filesystem>
#include <string>

#include "rashdrive/image.hpp"

namespace rashdrive {

// Binary Netpbm, 8-bit only: P5 (gray) and P6 (RGB), maxval 255.
ImageF32 decode_pnm(const std::string& bytes);
std::string encode_pnm(const ImageF32& img);

ImageF32 read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const ImageF32& img);

}  // namespace rashdrive
