#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trimdie {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

inline bool operator==(Rgb a, Rgb b) { return a.r == b.r && a.g == b.g && a.b == b.b; }
inline bool operator!=(Rgb a, Rgb b) { return !(a == b); }

// Rendering palette. Flat colors only; the rasterizer never blends.
struct Palette {
  Rgb background{255, 255, 255};
  Rgb line{0, 0, 0};
  Rgb fill{128, 128, 128};
  Rgb shortcut{255, 0, 0};

  void validate() const;
};

// Row-major 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  static RgbImage filled(int w, int h, Rgb color);

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  Rgb at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }
  void validate() const;
};

inline bool operator==(const RgbImage& a, const RgbImage& b) {
  return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
}

// Binary PPM (P6, maxval 255). Lossless round trip.
std::vector<std::uint8_t> encode_ppm(const RgbImage& img);
RgbImage decode_ppm(const std::vector<std::uint8_t>& bytes);

void write_ppm(const RgbImage& img, const std::string& path);
RgbImage read_ppm(const std::string& path);

}  // namespace trimdie
