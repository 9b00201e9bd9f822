#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "htmsp/errors.hpp"

namespace htmsp {

// Row-major grayscale raster with pixel values in [0, 1].
struct GrayImage {
  int rows = 0;
  int cols = 0;
  std::vector<double> pixels;

  double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * cols + c]; }
  double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * cols + c]; }

  bool operator==(const GrayImage&) const = default;
};

// Interleaved multi-channel raster, values in [0, 1].
struct MultiChannelImage {
  int rows = 0;
  int cols = 0;
  int channels = 0;
  std::vector<double> pixels;
};

// BT.601 luma for 3-channel inputs; single-channel inputs pass through
// unchanged.
inline GrayImage to_grayscale(const MultiChannelImage& image) {
  GrayImage out{image.rows, image.cols, {}};
  out.pixels.resize(static_cast<std::size_t>(image.rows) * image.cols);
  if (image.channels == 1) {
    out.pixels = image.pixels;
    return out;
  }
  if (image.channels != 3)
    throw std::invalid_argument("to_grayscale: unsupported channel count " +
                                std::to_string(image.channels));
  for (std::size_t p = 0; p < out.pixels.size(); ++p) {
    const double* rgb = &image.pixels[p * 3];
    out.pixels[p] = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
  }
  return out;
}

namespace detail {

inline int next_pgm_int(std::istream& in, const std::string& path) {
  // Skips whitespace and '#' comments between header tokens.
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  if (ch == EOF || !std::isdigit(ch)) throw IoError("malformed PGM header: " + path);
  int value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    ch = in.get();
  }
  return value;
}

}  // namespace detail

// 8-bit binary PGM (P5).
inline GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5')
    throw IoError("not a binary PGM (P5) file: " + path.string());
  const int cols = detail::next_pgm_int(in, path.string());
  const int rows = detail::next_pgm_int(in, path.string());
  const int maxval = detail::next_pgm_int(in, path.string());
  if (rows < 1 || cols < 1) throw IoError("bad PGM dimensions: " + path.string());
  if (maxval < 1 || maxval > 255)
    throw IoError("unsupported PGM maxval " + std::to_string(maxval) + ": " + path.string());
  // next_pgm_int consumed the single whitespace after maxval
  std::vector<unsigned char> raw(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw IoError("truncated PGM pixel data: " + path.string());
  GrayImage out{rows, cols, {}};
  out.pixels.resize(raw.size());
  for (std::size_t p = 0; p < raw.size(); ++p)
    out.pixels[p] = static_cast<double>(raw[p]) / maxval;
  return out;
}

inline void save_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + path.string());
  out << "P5\n" << image.cols << " " << image.rows << "\n255\n";
  for (double v : image.pixels) {
    const auto byte =
        static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    out.put(static_cast<char>(byte));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// 8-bit PNG via libpng's simplified API. Color files are decoded as RGB,
// grayscale files as a single channel so they pass through luma unchanged.
inline MultiChannelImage load_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    throw IoError("cannot read PNG: " + path.string() + " (" + png.message + ")");
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<unsigned char> raw(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raw.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw IoError("cannot decode PNG: " + path.string() + " (" + message + ")");
  }
  MultiChannelImage out{static_cast<int>(png.height), static_cast<int>(png.width), channels, {}};
  out.pixels.resize(raw.size());
  for (std::size_t p = 0; p < raw.size(); ++p) out.pixels[p] = static_cast<double>(raw[p]) / 255.0;
  return out;
}

// Reads a PGM or PNG image by content sniffing and returns grayscale.
inline GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open image: " + path.string());
  unsigned char head[2] = {};
  probe.read(reinterpret_cast<char*>(head), 2);
  probe.close();
  if (head[0] == 'P' && head[1] == '5') return load_pgm(path);
  if (head[0] == 0x89 && head[1] == 'P') return to_grayscale(load_png(path));
  throw IoError("unsupported image format (expected PGM P5 or PNG): " + path.string());
}

inline GrayImage resize_nearest(const GrayImage& image, int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("resize_nearest: target dims must be positive");
  if (rows == image.rows && cols == image.cols) return image;
  GrayImage out{rows, cols, {}};
  out.pixels.resize(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const int src_r = std::min(image.rows - 1, r * image.rows / rows);
    for (int c = 0; c < cols; ++c) {
      const int src_c = std::min(image.cols - 1, c * image.cols / cols);
      out.at(r, c) = image.at(src_r, src_c);
    }
  }
  return out;
}

}  // namespace htmsp
