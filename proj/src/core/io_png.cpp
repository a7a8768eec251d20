#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include <png.h>

#include "rtdense/core/io.hpp"

namespace rtdense {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

// Decodes to 8-bit RGB (bit_depth records whether the source was 16-bit gray).
struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint8_t> bytes;  // row-major, interleaved
};

DecodedPng decode_png(const std::filesystem::path& path, bool keep_16bit_gray) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw std::runtime_error("cannot open PNG file: " + path.string());

  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (r.png) r.info = png_create_info_struct(r.png);
  if (!r.png || !r.info) throw std::runtime_error("libpng init failed");
  if (setjmp(png_jmpbuf(r.png)))
    throw std::runtime_error("failed to decode PNG file: " + path.string());

  png_init_io(r.png, file.get());
  png_read_info(r.png, r.info);

  const int bit_depth = png_get_bit_depth(r.png, r.info);
  const int color_type = png_get_color_type(r.png, r.info);

  DecodedPng out;
  out.width = static_cast<int>(png_get_image_width(r.png, r.info));
  out.height = static_cast<int>(png_get_image_height(r.png, r.info));

  const bool gray16 = keep_16bit_gray && bit_depth == 16 &&
                      (color_type == PNG_COLOR_TYPE_GRAY);
  if (gray16) {
    png_set_swap(r.png);  // PNG stores 16-bit big-endian
    out.bit_depth = 16;
    out.channels = 1;
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
      png_set_expand_gray_1_2_4_to_8(r.png);
    if (bit_depth == 16) png_set_strip_16(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    png_set_strip_alpha(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(r.png);
    out.bit_depth = 8;
    out.channels = 3;
  }
  png_read_update_info(r.png, r.info);

  const std::size_t row_bytes = png_get_rowbytes(r.png, r.info);
  out.bytes.resize(row_bytes * out.height);
  std::vector<png_bytep> rows(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + row_bytes * y;
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return out;
}

void encode_png(const std::filesystem::path& path, int width, int height,
                int color_type, int bit_depth, const std::uint8_t* bytes,
                std::size_t row_bytes) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot write PNG file: " + path.string());

  PngWriter w;
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (w.png) w.info = png_create_info_struct(w.png);
  if (!w.png || !w.info) throw std::runtime_error("libpng init failed");
  if (setjmp(png_jmpbuf(w.png)))
    throw std::runtime_error("failed to encode PNG file: " + path.string());

  png_init_io(w.png, file.get());
  png_set_IHDR(w.png, w.info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  if (bit_depth == 16) png_set_swap(w.png);

  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(bytes + row_bytes * y);
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

}  // namespace

GrayImage read_png_gray(const std::filesystem::path& path) {
  const DecodedPng png = decode_png(path, false);
  GrayImage img(png.width, png.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const std::uint8_t* px = &png.bytes[i * 3];
    // Integer BT.601 luma; exact for the gray PNGs the pipeline writes.
    img.data[i] = static_cast<std::uint8_t>((299 * px[0] + 587 * px[1] + 114 * px[2] + 500) / 1000);
  }
  return img;
}

ColorImage read_png_color(const std::filesystem::path& path) {
  const DecodedPng png = decode_png(path, false);
  ColorImage img(png.width, png.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const std::uint8_t* px = &png.bytes[i * 3];
    img.data[i] = {px[0], px[1], px[2]};
  }
  return img;
}

void write_png(const GrayImage& img, const std::filesystem::path& path) {
  encode_png(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, 8, img.data.data(),
             static_cast<std::size_t>(img.width));
}

void write_png(const ColorImage& img, const std::filesystem::path& path) {
  encode_png(path, img.width, img.height, PNG_COLOR_TYPE_RGB, 8,
             reinterpret_cast<const std::uint8_t*>(img.data.data()),
             static_cast<std::size_t>(img.width) * 3);
}

void write_depth_png16(const DepthMap& depth, const std::filesystem::path& path) {
  Image2D<std::uint16_t> mm(depth.width, depth.height, 0);
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    const float z = depth.data[i];
    if (!DepthMap::is_valid(z)) continue;
    const double v = std::round(static_cast<double>(z) * 1000.0);
    mm.data[i] = static_cast<std::uint16_t>(std::clamp(v, 0.0, 65535.0));
  }
  encode_png(path, mm.width, mm.height, PNG_COLOR_TYPE_GRAY, 16,
             reinterpret_cast<const std::uint8_t*>(mm.data.data()),
             static_cast<std::size_t>(mm.width) * 2);
}

Image2D<std::uint16_t> read_png16(const std::filesystem::path& path) {
  const DecodedPng png = decode_png(path, true);
  if (png.bit_depth != 16)
    throw std::runtime_error(path.string() + ": expected a 16-bit grayscale PNG");
  Image2D<std::uint16_t> img(png.width, png.height);
  std::memcpy(img.data.data(), png.bytes.data(), png.bytes.size());
  return img;
}

}  // namespace rtdense
