#include <bit>
#include <cstring>
#include <fstream>

#include "rtdense/core/io.hpp"

namespace rtdense {
namespace {

static_assert(std::endian::native == std::endian::little,
              "PFM/PLY/rectify-map I/O assumes a little-endian host");

// Reads one whitespace-delimited token, treating '#' comments like netpbm.
std::string next_token(std::istream& in) {
  std::string tok;
  in >> tok;
  while (!tok.empty() && tok[0] == '#') {
    std::string rest;
    std::getline(in, rest);
    in >> tok;
  }
  return tok;
}

}  // namespace

void write_pfm(const Image2D<float>& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PFM file: " + path.string());
  out << "Pf\n" << map.width << " " << map.height << "\n-1.0\n";
  // Bottom-to-top row order per the PFM convention.
  for (int y = map.height - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(map.row(y)),
              static_cast<std::streamsize>(map.width) * sizeof(float));
  }
  if (!out) throw std::runtime_error("short write on PFM file: " + path.string());
}

Image2D<float> read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PFM file: " + path.string());

  const std::string magic = next_token(in);
  if (magic != "Pf") {
    throw std::runtime_error(path.string() +
                             ": unsupported PFM type '" + magic +
                             "' (only grayscale 'Pf' is supported)");
  }
  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    scale = std::stod(next_token(in));
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ": malformed PFM header");
  }
  if (width <= 0 || height <= 0 || scale == 0.0)
    throw std::runtime_error(path.string() + ": malformed PFM header");
  if (scale > 0.0)
    throw std::runtime_error(path.string() + ": big-endian PFM is not supported");
  in.ignore(1);  // single whitespace after the scale line

  Image2D<float> map(width, height);
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(map.row(y)),
            static_cast<std::streamsize>(width) * sizeof(float));
    if (!in) throw std::runtime_error(path.string() + ": truncated PFM payload");
  }
  return map;
}

void write_rectify_map(const RectifyMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write rectify map: " + path.string());
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(map.width),
                                   static_cast<std::uint32_t>(map.height)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(map.coords.data()),
            static_cast<std::streamsize>(map.coords.size() * sizeof(Eigen::Vector2f)));
  if (!out) throw std::runtime_error("short write on rectify map: " + path.string());
}

RectifyMap read_rectify_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open rectify map: " + path.string());
  std::uint32_t header[2] = {0, 0};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || header[0] == 0 || header[1] == 0)
    throw std::runtime_error(path.string() + ": malformed rectify map header");

  RectifyMap map(static_cast<int>(header[0]), static_cast<int>(header[1]),
                 static_cast<int>(header[0]), static_cast<int>(header[1]));
  in.read(reinterpret_cast<char*>(map.coords.data()),
          static_cast<std::streamsize>(map.coords.size() * sizeof(Eigen::Vector2f)));
  if (!in) throw std::runtime_error(path.string() + ": truncated rectify map payload");
  return map;
}

}  // namespace rtdense
