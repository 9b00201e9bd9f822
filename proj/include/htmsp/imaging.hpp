#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "htmsp/config.hpp"
#include "htmsp/errors.hpp"
#include "htmsp/image.hpp"
#include "htmsp/rng.hpp"

// System-level encoding pipeline: grayscale image -> per-block binary weight
// mask -> weighted blocks -> per-block scalar -> region-level inhibition ->
// sparse binary image. Each image block plays the role of one receptor
// column; an inhibition region is a group of blocks competing under one
// threshold.
namespace htmsp {

struct TilingSpec {
  int block_h = 8;       // block size in pixels
  int block_w = 8;
  int region_h = 4;      // inhibition region size in blocks
  int region_w = 4;
  int neighborhood = 3;  // per-pixel window side for the rule-based mask; odd

  void validate() const {
    if (block_h < 1 || block_w < 1)
      throw ConfigError("block_h/block_w must be >= 1, got " + std::to_string(block_h) + "x" +
                        std::to_string(block_w));
    if (region_h < 1 || region_w < 1)
      throw ConfigError("region_h/region_w must be >= 1, got " + std::to_string(region_h) + "x" +
                        std::to_string(region_w));
    if (neighborhood < 1 || neighborhood % 2 == 0)
      throw ConfigError("neighborhood must be a positive odd integer, got " +
                        std::to_string(neighborhood));
  }

  bool operator==(const TilingSpec&) const = default;
};

// Binary encoding of one image: the surviving weight bits, plus the per-block
// activation bits the region inhibition produced.
struct EncodedImage {
  int rows = 0;  // padded pixel dims
  int cols = 0;
  std::vector<std::uint8_t> bits;  // row-major {0,1}
  int block_rows = 0;
  int block_cols = 0;
  std::vector<std::uint8_t> block_active;  // row-major over the block grid
  TilingSpec tiling;

  std::size_t count_active() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  }

  GrayImage to_gray() const {
    GrayImage out{rows, cols, {}};
    out.pixels.resize(bits.size());
    for (std::size_t p = 0; p < bits.size(); ++p) out.pixels[p] = bits[p] ? 1.0 : 0.0;
    return out;
  }

  bool operator==(const EncodedImage&) const = default;
};

// Edge-replication padding up to a multiple of block * region size in each
// dimension, so the block grid tiles exactly into regions.
inline GrayImage pad_to_tiling(const GrayImage& image, const TilingSpec& spec) {
  if (image.rows < 1 || image.cols < 1)
    throw std::invalid_argument("pad_to_tiling: empty image");
  const int tile_h = spec.block_h * spec.region_h;
  const int tile_w = spec.block_w * spec.region_w;
  const int rows = (image.rows + tile_h - 1) / tile_h * tile_h;
  const int cols = (image.cols + tile_w - 1) / tile_w * tile_w;
  if (rows == image.rows && cols == image.cols) return image;
  GrayImage out{rows, cols, {}};
  out.pixels.resize(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const int src_r = std::min(r, image.rows - 1);
    for (int c = 0; c < cols; ++c) {
      out.at(r, c) = image.at(src_r, std::min(c, image.cols - 1));
    }
  }
  return out;
}

// W(i) = 1 iff the pixel value is >= the mean of its neighborhood window
// (inclusive); windows are clipped at the block borders.
inline std::vector<std::uint8_t> block_weights(const GrayImage& block, int neighborhood) {
  if (neighborhood < 1 || neighborhood % 2 == 0)
    throw std::invalid_argument("block_weights: neighborhood must be a positive odd integer");
  const int half = neighborhood / 2;
  std::vector<std::uint8_t> weights(block.pixels.size(), 0);
  for (int r = 0; r < block.rows; ++r) {
    const int r_lo = std::max(0, r - half);
    const int r_hi = std::min(block.rows - 1, r + half);
    for (int c = 0; c < block.cols; ++c) {
      const int c_lo = std::max(0, c - half);
      const int c_hi = std::min(block.cols - 1, c + half);
      double sum = 0.0;
      for (int wr = r_lo; wr <= r_hi; ++wr) {
        for (int wc = c_lo; wc <= c_hi; ++wc) sum += block.at(wr, wc);
      }
      const double mean = sum / ((r_hi - r_lo + 1) * (c_hi - c_lo + 1));
      weights[static_cast<std::size_t>(r) * block.cols + c] = block.at(r, c) >= mean ? 1 : 0;
    }
  }
  return weights;
}

// Elementwise product of a block with its weight mask; the block-level form
// of the overlap product with unit boost.
inline GrayImage apply_weights(const GrayImage& block, const std::vector<std::uint8_t>& weights) {
  if (weights.size() != block.pixels.size())
    throw std::invalid_argument("apply_weights: mask size does not match block");
  GrayImage out = block;
  for (std::size_t p = 0; p < out.pixels.size(); ++p) {
    if (!weights[p]) out.pixels[p] = 0.0;
  }
  return out;
}

// Scalar overlap of one block: the mean of its weighted pixels.
inline double block_scalar(const GrayImage& weighted) {
  if (weighted.pixels.empty()) throw std::invalid_argument("block_scalar: empty block");
  double sum = 0.0;
  for (double v : weighted.pixels) sum += v;
  return sum / static_cast<double>(weighted.pixels.size());
}

// Region-level inhibition: a block activates iff its scalar strictly exceeds
// the mean of all block scalars in the region.
inline std::vector<std::uint8_t> inhibit_region(const std::vector<double>& scalars) {
  if (scalars.empty()) throw std::invalid_argument("inhibit_region: empty region");
  double sum = 0.0;
  for (double v : scalars) sum += v;
  const double threshold = sum / static_cast<double>(scalars.size());
  std::vector<std::uint8_t> active(scalars.size(), 0);
  for (std::size_t b = 0; b < scalars.size(); ++b) active[b] = scalars[b] > threshold ? 1 : 0;
  return active;
}

// Percentile variant of the region stage: a block activates iff its scalar
// reaches the (1-s) percentile of the other blocks' scalars and theta_s.
inline std::vector<std::uint8_t> inhibit_region_percentile(const std::vector<double>& scalars,
                                                           double s, double theta_s) {
  if (scalars.empty()) throw std::invalid_argument("inhibit_region_percentile: empty region");
  std::vector<std::uint8_t> active(scalars.size(), 0);
  std::vector<double> others;
  for (std::size_t b = 0; b < scalars.size(); ++b) {
    others.clear();
    for (std::size_t j = 0; j < scalars.size(); ++j) {
      if (j != b) others.push_back(scalars[j]);
    }
    bool pct_ok = true;
    if (!others.empty()) {
      auto rank = static_cast<std::size_t>(
          std::ceil((1.0 - s) * static_cast<double>(others.size())));
      rank = std::clamp<std::size_t>(rank, 1, others.size());
      auto nth = others.begin() + static_cast<std::ptrdiff_t>(rank - 1);
      std::nth_element(others.begin(), nth, others.end());
      pct_ok = scalars[b] >= *nth;
    }
    active[b] = (pct_ok && scalars[b] >= theta_s) ? 1 : 0;
  }
  return active;
}

// Every stage of one encode, exportable for visual inspection: the padded
// grayscale input, the weight mask, the weighted (overlap-stage) image, and
// the final inhibition-stage encoding.
struct EncodeTrace {
  GrayImage padded;
  std::vector<std::uint8_t> weight_bits;
  GrayImage weighted;
  EncodedImage encoded;

  GrayImage weights_gray() const {
    GrayImage out{padded.rows, padded.cols, {}};
    out.pixels.resize(weight_bits.size());
    for (std::size_t p = 0; p < weight_bits.size(); ++p)
      out.pixels[p] = weight_bits[p] ? 1.0 : 0.0;
    return out;
  }
};

// Composes the full pipeline for one configuration. Rule-based weight masks
// are recomputed from each image and consume no randomness; random-weight
// masks depend only on (seed, block, pixel) and are therefore identical for
// every image of the same padded size, exactly like a once-initialized SP.
class ImageEncoder {
 public:
  ImageEncoder(TilingSpec tiling, SpConfig sp) : tiling_(tiling), sp_(sp) {
    tiling_.validate();
    sp_.validate();
  }

  const TilingSpec& tiling() const { return tiling_; }
  const SpConfig& sp() const { return sp_; }

  EncodeTrace encode_trace(const GrayImage& image) const {
    EncodeTrace trace;
    trace.padded = pad_to_tiling(image, tiling_);
    const GrayImage& padded = trace.padded;
    const int block_rows = padded.rows / tiling_.block_h;
    const int block_cols = padded.cols / tiling_.block_w;

    trace.weight_bits.assign(padded.pixels.size(), 0);
    trace.weighted = GrayImage{padded.rows, padded.cols,
                               std::vector<double>(padded.pixels.size(), 0.0)};
    std::vector<double> scalars(static_cast<std::size_t>(block_rows) * block_cols, 0.0);

    GrayImage block{tiling_.block_h, tiling_.block_w,
                    std::vector<double>(static_cast<std::size_t>(tiling_.block_h) *
                                        tiling_.block_w)};
    for (int br = 0; br < block_rows; ++br) {
      for (int bc = 0; bc < block_cols; ++bc) {
        const int b = br * block_cols + bc;
        for (int r = 0; r < tiling_.block_h; ++r) {
          for (int c = 0; c < tiling_.block_w; ++c) {
            block.at(r, c) = padded.at(br * tiling_.block_h + r, bc * tiling_.block_w + c);
          }
        }
        const std::vector<std::uint8_t> weights =
            sp_.init_mode == InitMode::kRuleBased
                ? block_weights(block, tiling_.neighborhood)
                : random_block_weights(b, br, bc, padded.cols);
        const GrayImage weighted_block = apply_weights(block, weights);
        scalars[static_cast<std::size_t>(b)] = block_scalar(weighted_block);
        for (int r = 0; r < tiling_.block_h; ++r) {
          for (int c = 0; c < tiling_.block_w; ++c) {
            const std::size_t p =
                static_cast<std::size_t>(br * tiling_.block_h + r) * padded.cols +
                bc * tiling_.block_w + c;
            trace.weight_bits[p] = weights[static_cast<std::size_t>(r) * tiling_.block_w + c];
            trace.weighted.pixels[p] = weighted_block.at(r, c);
          }
        }
      }
    }

    EncodedImage& out = trace.encoded;
    out.rows = padded.rows;
    out.cols = padded.cols;
    out.block_rows = block_rows;
    out.block_cols = block_cols;
    out.tiling = tiling_;
    out.block_active.assign(scalars.size(), 0);

    const int region_rows = block_rows / tiling_.region_h;
    const int region_cols = block_cols / tiling_.region_w;
    std::vector<double> region_scalars;
    for (int rr = 0; rr < region_rows; ++rr) {
      for (int rc = 0; rc < region_cols; ++rc) {
        region_scalars.clear();
        for (int br = 0; br < tiling_.region_h; ++br) {
          for (int bc = 0; bc < tiling_.region_w; ++bc) {
            const int b = (rr * tiling_.region_h + br) * block_cols + rc * tiling_.region_w + bc;
            region_scalars.push_back(scalars[static_cast<std::size_t>(b)]);
          }
        }
        const std::vector<std::uint8_t> active =
            sp_.inhibit_mode == InhibitMode::kMean
                ? inhibit_region(region_scalars)
                : inhibit_region_percentile(region_scalars, sp_.s, sp_.theta_s);
        std::size_t k = 0;
        for (int br = 0; br < tiling_.region_h; ++br) {
          for (int bc = 0; bc < tiling_.region_w; ++bc) {
            const int b = (rr * tiling_.region_h + br) * block_cols + rc * tiling_.region_w + bc;
            out.block_active[static_cast<std::size_t>(b)] = active[k++];
          }
        }
      }
    }

    // Active regions keep their blocks' weight bits, inhibited blocks go dark.
    out.bits.assign(padded.pixels.size(), 0);
    for (int br = 0; br < block_rows; ++br) {
      for (int bc = 0; bc < block_cols; ++bc) {
        if (!out.block_active[static_cast<std::size_t>(br) * block_cols + bc]) continue;
        for (int r = 0; r < tiling_.block_h; ++r) {
          for (int c = 0; c < tiling_.block_w; ++c) {
            const std::size_t p =
                static_cast<std::size_t>(br * tiling_.block_h + r) * padded.cols +
                bc * tiling_.block_w + c;
            out.bits[p] = trace.weight_bits[p];
          }
        }
      }
    }
    return trace;
  }

  EncodedImage encode(const GrayImage& image) const { return encode_trace(image).encoded; }

 private:
  std::vector<std::uint8_t> random_block_weights(int block_index, int block_row, int block_col,
                                                 int padded_cols) const {
    std::vector<std::uint8_t> weights(
        static_cast<std::size_t>(tiling_.block_h) * tiling_.block_w, 0);
    for (int r = 0; r < tiling_.block_h; ++r) {
      for (int c = 0; c < tiling_.block_w; ++c) {
        const auto pixel = static_cast<std::uint64_t>(
            (block_row * tiling_.block_h + r) * padded_cols + block_col * tiling_.block_w + c);
        if (rng::uniform(sp_.seed, rng::Stream::kPotentialPool,
                         static_cast<std::uint64_t>(block_index), pixel) >= sp_.rho) {
          continue;  // outside the potential pool
        }
        const double perm = rng::uniform(sp_.seed, rng::Stream::kPermanence,
                                         static_cast<std::uint64_t>(block_index), pixel);
        weights[static_cast<std::size_t>(r) * tiling_.block_w + c] =
            perm >= sp_.theta_c ? 1 : 0;
      }
    }
    return weights;
  }

  TilingSpec tiling_;
  SpConfig sp_;
};

// The plain Algorithm-2 path: rule-based weights with mean region inhibition.
inline EncodedImage encode_image(const GrayImage& image, const TilingSpec& spec) {
  SpConfig sp;
  sp.init_mode = InitMode::kRuleBased;
  sp.inhibit_mode = InhibitMode::kMean;
  return ImageEncoder(spec, sp).encode(image);
}

}  // namespace htmsp
