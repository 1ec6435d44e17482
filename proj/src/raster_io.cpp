#include "tofmpi/raster_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tofmpi/error.hpp"

namespace tofmpi {

namespace {

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void ExpectMagic(const char (&magic)[5]) {
    Need(4);
    if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
      throw Error(ErrorCode::kBadMagic, std::string("expected ") + magic);
    }
    pos_ += 4;
  }

  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::kTruncatedFile, "unexpected end of data");
  }

  std::span<const std::uint8_t> Take(std::size_t n) {
    Need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::filesystem::path MaskPath(const std::filesystem::path& tfim_path) {
  auto p = tfim_path;
  p.replace_extension(".tfmk");
  return p;
}

}  // namespace

Raster TfimImage::Channel(int c) const {
  if (c < 0 || c >= channels) throw Error(ErrorCode::kDimensionMismatch, "channel out of range");
  Raster r(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) r(x, y) = at(x, y, c);
  return r;
}

TfimImage Interleave(std::span<const Raster* const> channels) {
  if (channels.empty()) throw Error(ErrorCode::kEmptyInput, "no channels to interleave");
  TfimImage img;
  img.width = channels[0]->width();
  img.height = channels[0]->height();
  img.channels = static_cast<int>(channels.size());
  img.data.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
  for (int c = 0; c < img.channels; ++c) {
    if (!channels[c]->SameShape(*channels[0])) {
      throw Error(ErrorCode::kDimensionMismatch, "channels differ in shape");
    }
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) img.at(x, y, c) = static_cast<float>((*channels[c])(x, y));
  }
  return img;
}

std::vector<std::uint8_t> EncodeTfim(const TfimImage& image) {
  std::vector<std::uint8_t> out;
  out.reserve(20 + image.data.size() * 4);
  out.insert(out.end(), {'T', 'F', 'I', 'M'});
  PutU32(out, kTfimVersion);
  PutU32(out, static_cast<std::uint32_t>(image.width));
  PutU32(out, static_cast<std::uint32_t>(image.height));
  PutU32(out, static_cast<std::uint32_t>(image.channels));
  for (float v : image.data) PutU32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

TfimImage DecodeTfim(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.ExpectMagic("TFIM");
  const std::uint32_t version = in.U32();
  if (version != kTfimVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported TFIM version " + std::to_string(version));
  }
  TfimImage img;
  img.width = static_cast<int>(in.U32());
  img.height = static_cast<int>(in.U32());
  img.channels = static_cast<int>(in.U32());
  const std::size_t count = static_cast<std::size_t>(img.width) * img.height * img.channels;
  auto payload = in.Take(count * 4);
  img.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(payload[4 * i + b]) << (8 * b);
    img.data[i] = std::bit_cast<float>(bits);
  }
  return img;
}

std::vector<std::uint8_t> EncodeMask(const Mask& mask) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'T', 'F', 'M', 'K'});
  PutU32(out, static_cast<std::uint32_t>(mask.width()));
  PutU32(out, static_cast<std::uint32_t>(mask.height()));
  const auto values = mask.data();
  std::vector<std::uint8_t> packed((values.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

Mask DecodeMask(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.ExpectMagic("TFMK");
  const int width = static_cast<int>(in.U32());
  const int height = static_cast<int>(in.U32());
  Mask mask(width, height);
  auto values = mask.data();
  auto packed = in.Take((values.size() + 7) / 8);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return mask;
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

void WriteTfim(const std::filesystem::path& path, const TfimImage& image) {
  WriteFileBytes(path, EncodeTfim(image));
}

TfimImage ReadTfim(const std::filesystem::path& path) { return DecodeTfim(ReadFileBytes(path)); }

void WriteRaster(const std::filesystem::path& path, const Raster& raster) {
  const Raster* channels[] = {&raster};
  WriteTfim(path, Interleave(channels));
}

Raster ReadRaster(const std::filesystem::path& path) {
  const TfimImage img = ReadTfim(path);
  if (img.channels != 1) {
    throw Error(ErrorCode::kDimensionMismatch, path.string() + " is not single-channel");
  }
  return img.Channel(0);
}

void WriteFrameSet(const std::filesystem::path& tfim_path, const FrameSet& frames) {
  frames.CheckShapes();
  const Raster* channels[] = {&frames.depth, &frames.amplitude, &frames.intensity,
                              &frames.ground_truth};
  WriteTfim(tfim_path, Interleave(channels));
  WriteFileBytes(MaskPath(tfim_path), EncodeMask(frames.valid));
}

FrameSet ReadFrameSet(const std::filesystem::path& tfim_path) {
  const TfimImage img = ReadTfim(tfim_path);
  if (img.channels != 4) {
    throw Error(ErrorCode::kDimensionMismatch, tfim_path.string() + " is not a 4-channel frame set");
  }
  FrameSet frames{img.Channel(0), img.Channel(1), img.Channel(2), img.Channel(3),
                  DecodeMask(ReadFileBytes(MaskPath(tfim_path)))};
  frames.CheckShapes();
  return frames;
}

}  // namespace tofmpi
