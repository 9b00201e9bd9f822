#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "htmsp/config.hpp"
#include "htmsp/errors.hpp"
#include "htmsp/imaging.hpp"
#include "htmsp/sp_core.hpp"

// Flat binary layout shared by permanence matrices, connection matrices and
// encoded-image templates. All integers little-endian.
//
//   bytes 0..7    magic "HTMSPFB1"
//   u32           kind: 0 permanence (f64 values), 1 connections (u8),
//                       2 encoded image (u8)
//   u32           rows (matrices: columns; images: pixel rows)
//   u32           cols (matrices: inputs;  images: pixel cols)
//   u32           mode: 0 random_weight, 1 rule_based
//   u64           seed
//   5 x u32       block_h, block_w, region_h, region_w, neighborhood
//                 (zero for matrices)
//   u64 count, then count entries (u32 i, u32 j, value) sorted by (i, j)
//   images only:  u64 count, then count active-block entries (u32 bi, u32 bj, u8 1)
namespace htmsp {

namespace detail {

constexpr char kMagic[8] = {'H', 'T', 'M', 'S', 'P', 'F', 'B', '1'};

enum class BlobKind : std::uint32_t { kPermanence = 0, kConnections = 1, kEncodedImage = 2 };

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

class BlobReader {
 public:
  BlobReader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path_);
    data_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + b])) << (8 * b);
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }

  void check_magic() {
    need(8);
    for (int b = 0; b < 8; ++b) {
      if (data_[pos_ + b] != kMagic[b]) throw IoError("bad magic, not a template file: " + path_);
    }
    pos_ += 8;
  }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size()) throw IoError("truncated file: " + path_);
  }

  std::string path_;
  std::string data_;
  std::size_t pos_ = 0;
};

inline void write_blob(const std::string& buf, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string header(BlobKind kind, std::uint32_t rows, std::uint32_t cols, InitMode mode,
                          std::uint64_t seed, const TilingSpec* tiling) {
  std::string buf(kMagic, sizeof kMagic);
  put_u32(buf, static_cast<std::uint32_t>(kind));
  put_u32(buf, rows);
  put_u32(buf, cols);
  put_u32(buf, mode == InitMode::kRandomWeight ? 0u : 1u);
  put_u64(buf, seed);
  put_u32(buf, tiling ? static_cast<std::uint32_t>(tiling->block_h) : 0u);
  put_u32(buf, tiling ? static_cast<std::uint32_t>(tiling->block_w) : 0u);
  put_u32(buf, tiling ? static_cast<std::uint32_t>(tiling->region_h) : 0u);
  put_u32(buf, tiling ? static_cast<std::uint32_t>(tiling->region_w) : 0u);
  put_u32(buf, tiling ? static_cast<std::uint32_t>(tiling->neighborhood) : 0u);
  return buf;
}

struct BlobHeader {
  BlobKind kind;
  std::uint32_t rows, cols;
  InitMode mode;
  std::uint64_t seed;
  TilingSpec tiling;
};

inline BlobHeader read_header(BlobReader& reader, const std::string& path) {
  reader.check_magic();
  BlobHeader h;
  const auto kind = reader.u32();
  if (kind > 2) throw IoError("unknown blob kind " + std::to_string(kind) + ": " + path);
  h.kind = static_cast<BlobKind>(kind);
  h.rows = reader.u32();
  h.cols = reader.u32();
  const auto mode = reader.u32();
  if (mode > 1) throw IoError("unknown init mode " + std::to_string(mode) + ": " + path);
  h.mode = mode == 0 ? InitMode::kRandomWeight : InitMode::kRuleBased;
  h.seed = reader.u64();
  h.tiling.block_h = static_cast<int>(reader.u32());
  h.tiling.block_w = static_cast<int>(reader.u32());
  h.tiling.region_h = static_cast<int>(reader.u32());
  h.tiling.region_w = static_cast<int>(reader.u32());
  h.tiling.neighborhood = static_cast<int>(reader.u32());
  return h;
}

}  // namespace detail

inline void save_permanence(const PermanenceMatrix& perm, InitMode mode, std::uint64_t seed,
                            const std::filesystem::path& path) {
  auto buf = detail::header(detail::BlobKind::kPermanence,
                            static_cast<std::uint32_t>(perm.num_columns),
                            static_cast<std::uint32_t>(perm.num_inputs), mode, seed, nullptr);
  std::uint64_t count = 0;
  for (const auto& row : perm.rows) count += row.size();
  detail::put_u64(buf, count);
  for (std::size_t i = 0; i < perm.rows.size(); ++i) {
    for (const auto& [j, value] : perm.rows[i]) {  // rows ascending, entries sorted by j
      detail::put_u32(buf, static_cast<std::uint32_t>(i));
      detail::put_u32(buf, j);
      detail::put_f64(buf, value);
    }
  }
  detail::write_blob(buf, path);
}

struct PermanenceBlob {
  PermanenceMatrix matrix;
  InitMode mode;
  std::uint64_t seed;
};

inline PermanenceBlob load_permanence(const std::filesystem::path& path) {
  detail::BlobReader reader(path);
  const auto h = detail::read_header(reader, path.string());
  if (h.kind != detail::BlobKind::kPermanence)
    throw IoError("not a permanence blob: " + path.string());
  PermanenceBlob blob{{static_cast<int>(h.rows), static_cast<int>(h.cols), {}}, h.mode, h.seed};
  blob.matrix.rows.resize(h.rows);
  const std::uint64_t count = reader.u64();
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto i = reader.u32();
    const auto j = reader.u32();
    const double value = reader.f64();
    if (i >= h.rows || j >= h.cols) throw IoError("entry out of bounds: " + path.string());
    blob.matrix.rows[i].emplace_back(j, value);
  }
  return blob;
}

inline void save_connections(const ConnectionMatrix& conn, InitMode mode, std::uint64_t seed,
                             const std::filesystem::path& path) {
  auto buf = detail::header(detail::BlobKind::kConnections,
                            static_cast<std::uint32_t>(conn.num_columns),
                            static_cast<std::uint32_t>(conn.num_inputs), mode, seed, nullptr);
  std::uint64_t count = 0;
  for (const auto& row : conn.rows) count += row.size();
  detail::put_u64(buf, count);
  for (std::size_t i = 0; i < conn.rows.size(); ++i) {
    for (std::uint32_t j : conn.rows[i]) {
      detail::put_u32(buf, static_cast<std::uint32_t>(i));
      detail::put_u32(buf, j);
      buf.push_back(1);
    }
  }
  detail::write_blob(buf, path);
}

struct ConnectionBlob {
  ConnectionMatrix matrix;
  InitMode mode;
  std::uint64_t seed;
};

inline ConnectionBlob load_connections(const std::filesystem::path& path) {
  detail::BlobReader reader(path);
  const auto h = detail::read_header(reader, path.string());
  if (h.kind != detail::BlobKind::kConnections)
    throw IoError("not a connection blob: " + path.string());
  ConnectionBlob blob{{static_cast<int>(h.rows), static_cast<int>(h.cols), {}}, h.mode, h.seed};
  blob.matrix.rows.resize(h.rows);
  const std::uint64_t count = reader.u64();
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto i = reader.u32();
    const auto j = reader.u32();
    const auto value = reader.u8();
    if (i >= h.rows || j >= h.cols || value != 1)
      throw IoError("entry out of bounds: " + path.string());
    blob.matrix.rows[i].push_back(j);
  }
  return blob;
}

inline void save_encoded(const EncodedImage& image, InitMode mode, std::uint64_t seed,
                         const std::filesystem::path& path) {
  auto buf = detail::header(detail::BlobKind::kEncodedImage,
                            static_cast<std::uint32_t>(image.rows),
                            static_cast<std::uint32_t>(image.cols), mode, seed, &image.tiling);
  detail::put_u64(buf, static_cast<std::uint64_t>(image.count_active()));
  for (int r = 0; r < image.rows; ++r) {
    for (int c = 0; c < image.cols; ++c) {
      if (!image.bits[static_cast<std::size_t>(r) * image.cols + c]) continue;
      detail::put_u32(buf, static_cast<std::uint32_t>(r));
      detail::put_u32(buf, static_cast<std::uint32_t>(c));
      buf.push_back(1);
    }
  }
  std::uint64_t active_blocks = 0;
  for (auto b : image.block_active) active_blocks += b;
  detail::put_u64(buf, active_blocks);
  for (int r = 0; r < image.block_rows; ++r) {
    for (int c = 0; c < image.block_cols; ++c) {
      if (!image.block_active[static_cast<std::size_t>(r) * image.block_cols + c]) continue;
      detail::put_u32(buf, static_cast<std::uint32_t>(r));
      detail::put_u32(buf, static_cast<std::uint32_t>(c));
      buf.push_back(1);
    }
  }
  detail::write_blob(buf, path);
}

struct EncodedBlob {
  EncodedImage image;
  InitMode mode;
  std::uint64_t seed;
};

inline EncodedBlob load_encoded(const std::filesystem::path& path) {
  detail::BlobReader reader(path);
  const auto h = detail::read_header(reader, path.string());
  if (h.kind != detail::BlobKind::kEncodedImage)
    throw IoError("not an encoded-image blob: " + path.string());
  h.tiling.validate();
  if (h.rows == 0 || h.cols == 0 || h.rows % h.tiling.block_h != 0 ||
      h.cols % h.tiling.block_w != 0)
    throw IoError("image dims do not tile: " + path.string());

  EncodedBlob blob;
  blob.mode = h.mode;
  blob.seed = h.seed;
  EncodedImage& img = blob.image;
  img.rows = static_cast<int>(h.rows);
  img.cols = static_cast<int>(h.cols);
  img.tiling = h.tiling;
  img.block_rows = img.rows / h.tiling.block_h;
  img.block_cols = img.cols / h.tiling.block_w;
  img.bits.assign(static_cast<std::size_t>(img.rows) * img.cols, 0);
  img.block_active.assign(static_cast<std::size_t>(img.block_rows) * img.block_cols, 0);

  const std::uint64_t pixel_count = reader.u64();
  for (std::uint64_t e = 0; e < pixel_count; ++e) {
    const auto r = reader.u32();
    const auto c = reader.u32();
    const auto value = reader.u8();
    if (r >= h.rows || c >= h.cols || value != 1)
      throw IoError("pixel entry out of bounds: " + path.string());
    img.bits[static_cast<std::size_t>(r) * img.cols + c] = 1;
  }
  const std::uint64_t block_count = reader.u64();
  for (std::uint64_t e = 0; e < block_count; ++e) {
    const auto r = reader.u32();
    const auto c = reader.u32();
    const auto value = reader.u8();
    if (r >= static_cast<std::uint32_t>(img.block_rows) ||
        c >= static_cast<std::uint32_t>(img.block_cols) || value != 1)
      throw IoError("block entry out of bounds: " + path.string());
    img.block_active[static_cast<std::size_t>(r) * img.block_cols + c] = 1;
  }
  return blob;
}

}  // namespace htmsp
