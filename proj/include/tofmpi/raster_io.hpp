#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tofmpi/raster.hpp"
#include "tofmpi/tofsim.hpp"

namespace tofmpi {

// "TFIM" multi-channel float image:
//   "TFIM" | u32 version (=1) | u32 width | u32 height | u32 channels |
//   width*height*channels binary32, row-major, channel-interleaved.
// All integers and floats little-endian.
inline constexpr std::uint32_t kTfimVersion = 1;

struct TfimImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  float& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  Raster Channel(int c) const;
};

// Interleaves same-shaped rasters into one image (values rounded to float).
TfimImage Interleave(std::span<const Raster* const> channels);

std::vector<std::uint8_t> EncodeTfim(const TfimImage& image);
TfimImage DecodeTfim(std::span<const std::uint8_t> bytes);

// "TFMK" validity mask: "TFMK" | u32 width | u32 height | ceil(w*h/8) bytes.
// Pixel i (row-major) is bit (i % 8), least significant first, of byte i / 8.
std::vector<std::uint8_t> EncodeMask(const Mask& mask);
Mask DecodeMask(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

void WriteTfim(const std::filesystem::path& path, const TfimImage& image);
TfimImage ReadTfim(const std::filesystem::path& path);
void WriteRaster(const std::filesystem::path& path, const Raster& raster);
Raster ReadRaster(const std::filesystem::path& path);

// A FrameSet is stored as <stem>.tfim (depth, amplitude, intensity,
// ground_truth) next to the <stem>.tfmk validity mask.
void WriteFrameSet(const std::filesystem::path& tfim_path, const FrameSet& frames);
FrameSet ReadFrameSet(const std::filesystem::path& tfim_path);

}  // namespace tofmpi
