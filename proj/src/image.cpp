#include "trimdie/image.hpp"

#include <cctype>
#include <cstring>
#include <fstream>

#include "trimdie/error.hpp"

namespace trimdie {

void Palette::validate() const {
  const Rgb c[4] = {background, line, fill, shortcut};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (c[i] == c[j]) throw ParameterError("Palette: colors must be pairwise distinct");
}

RgbImage RgbImage::filled(int w, int h, Rgb color) {
  if (w < 1 || h < 1) throw ParameterError("RgbImage: dimensions must be >= 1");
  RgbImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = color.r;
    img.pixels[i + 1] = color.g;
    img.pixels[i + 2] = color.b;
  }
  return img;
}

void RgbImage::validate() const {
  if (width < 1 || height < 1) throw ParameterError("RgbImage: dimensions must be >= 1");
  if (pixels.size() != static_cast<std::size_t>(width) * height * 3)
    throw ParameterError("RgbImage: pixel buffer size mismatch");
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  img.validate();
  std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                       "\n255\n";
  std::vector<std::uint8_t> out;
  out.reserve(header.size() + img.pixels.size());
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

namespace {

// Reads one whitespace-delimited unsigned integer from a P6 header.
void parse_uint(const std::vector<std::uint8_t>& b, std::size_t& pos, long& value) {
  while (pos < b.size() && std::isspace(b[pos])) ++pos;
  if (pos >= b.size() || !std::isdigit(b[pos])) throw DecodeError("ppm: malformed header");
  value = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    value = value * 10 + (b[pos] - '0');
    if (value > 1'000'000'000L) throw DecodeError("ppm: header value out of range");
    ++pos;
  }
}

}  // namespace

RgbImage decode_ppm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw DecodeError("ppm: missing P6 magic");
  std::size_t pos = 2;
  long w = 0, h = 0, maxval = 0;
  parse_uint(bytes, pos, w);
  parse_uint(bytes, pos, h);
  parse_uint(bytes, pos, maxval);
  if (w < 1 || h < 1) throw DecodeError("ppm: invalid dimensions");
  if (maxval != 255) throw DecodeError("ppm: only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw DecodeError("ppm: missing header terminator");
  ++pos;  // single whitespace between header and payload

  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() - pos < need) throw DecodeError("ppm: truncated payload");

  RgbImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels.assign(bytes.begin() + pos, bytes.begin() + pos + need);
  return img;
}

void write_ppm(const RgbImage& img, const std::string& path) {
  auto bytes = encode_ppm(img);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("ppm: cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("ppm: write failed: " + path);
}

RgbImage read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("ppm: cannot open for reading: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

}  // namespace trimdie
