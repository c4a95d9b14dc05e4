#include "pisa/io/images.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include <zlib.h>

#include "pisa/error.hpp"
#include "pisa/io/weight_file.hpp"

namespace pisa {

std::vector<std::uint8_t> maybe_gunzip(std::vector<std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 0x1F || bytes[1] != 0x8B) return bytes;
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) raise(ErrorKind::IoError, "zlib init failed");
  std::vector<std::uint8_t> out;
  std::uint8_t chunk[1 << 16];
  zs.next_in = bytes.data();
  zs.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk;
    zs.avail_out = sizeof chunk;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      const std::size_t at = zs.total_in;
      inflateEnd(&zs);
      throw FormatError(at, "corrupt gzip stream");
    }
    out.insert(out.end(), chunk, chunk + (sizeof chunk - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      const std::size_t at = zs.total_in;
      inflateEnd(&zs);
      throw FormatError(at, "truncated gzip stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

namespace {

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
  if (b.size() < at + 4) throw FormatError(b.size(), "truncated IDX header");
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) | b[at + 3];
}

}  // namespace

ImageSet parse_idx_images(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = be32(bytes, 0);
  if ((magic >> 8) != 0x08) throw FormatError(0, "IDX images must hold unsigned bytes");
  if ((magic & 0xFFU) != 3) throw FormatError(3, "IDX images need 3 dimensions, file has " + std::to_string(magic & 0xFFU));
  const std::uint64_t n = be32(bytes, 4);
  const std::uint64_t rows = be32(bytes, 8);
  const std::uint64_t cols = be32(bytes, 12);
  if (rows == 0 || cols == 0) throw FormatError(8, "IDX image dimensions must be positive");
  const std::uint64_t need = 16 + n * rows * cols;
  if (bytes.size() < need) throw FormatError(bytes.size(), "truncated IDX image data");
  if (bytes.size() > need) throw FormatError(need, "trailing bytes after IDX image data");

  ImageSet set;
  set.rows = rows;
  set.cols = cols;
  set.frames.reserve(n);
  const std::uint8_t* p = bytes.data() + 16;
  for (std::uint64_t i = 0; i < n; ++i) {
    Frame f(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t r = 0; r < rows; ++r) {
      for (std::uint64_t c = 0; c < cols; ++c) f(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *p++ / 255.0;
    }
    set.frames.push_back(std::move(f));
  }
  return set;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = be32(bytes, 0);
  if ((magic >> 8) != 0x08) throw FormatError(0, "IDX labels must hold unsigned bytes");
  if ((magic & 0xFFU) != 1) throw FormatError(3, "IDX labels need 1 dimension, file has " + std::to_string(magic & 0xFFU));
  const std::uint64_t n = be32(bytes, 4);
  if (bytes.size() < 8 + n) throw FormatError(bytes.size(), "truncated IDX label data");
  if (bytes.size() > 8 + n) throw FormatError(8 + n, "trailing bytes after IDX label data");
  return {bytes.begin() + 8, bytes.end()};
}

ImageSet parse_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError(0, "PGM must start with P5");
  pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos]) != 0) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::uint64_t {
    skip_space();
    const std::size_t start = pos;
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) != 0 && pos - start < 9) v = v * 10 + (bytes[pos++] - '0');
    if (pos == start) throw FormatError(pos, "expected a PGM header number");
    return v;
  };
  const std::uint64_t w = number();
  const std::uint64_t h = number();
  const std::uint64_t maxval = number();
  if (w == 0 || h == 0) throw FormatError(pos, "PGM dimensions must be positive");
  if (maxval == 0 || maxval > 255) throw FormatError(pos, "PGM maxval must be in [1, 255]");
  if (pos >= bytes.size() || std::isspace(bytes[pos]) == 0) throw FormatError(pos, "PGM header must end in whitespace");
  ++pos;
  if (bytes.size() - pos < w * h) throw FormatError(bytes.size(), "truncated PGM raster");

  ImageSet set;
  set.rows = h;
  set.cols = w;
  Frame f(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(w));
  for (std::uint64_t r = 0; r < h; ++r) {
    for (std::uint64_t c = 0; c < w; ++c) {
      f(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          std::min<double>(bytes[pos++], static_cast<double>(maxval)) / static_cast<double>(maxval);
    }
  }
  set.frames.push_back(std::move(f));
  return set;
}

ImageSet load_images(const std::filesystem::path& path, ImageFormat format) {
  const std::vector<std::uint8_t> bytes = maybe_gunzip(read_binary_file(path));
  if (format == ImageFormat::Auto) {
    format = bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5' ? ImageFormat::PGM : ImageFormat::IDX;
  }
  return format == ImageFormat::PGM ? parse_pgm(bytes) : parse_idx_images(bytes);
}

std::vector<std::uint8_t> load_labels(const std::filesystem::path& path) {
  return parse_idx_labels(maybe_gunzip(read_binary_file(path)));
}

std::vector<std::uint8_t> encode_pgm(const Frame& frame) {
  const std::string header = "P5\n" + std::to_string(frame.cols()) + " " + std::to_string(frame.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (Eigen::Index r = 0; r < frame.rows(); ++r) {
    for (Eigen::Index c = 0; c < frame.cols(); ++c) {
      out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(frame(r, c), 0.0, 1.0) * 255.0)));
    }
  }
  return out;
}

}  // namespace pisa
