#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pisa/sensor/cfp_array.hpp"

namespace pisa {

enum class ImageFormat { Auto, IDX, PGM };

/// Grayscale frames with intensities in [0, 1].
struct ImageSet {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Frame> frames;
};

/// Inflates gzip input; other bytes pass through unchanged.
std::vector<std::uint8_t> maybe_gunzip(std::vector<std::uint8_t> bytes);

/// IDX ubyte images (magic 0x00000803): byte / 255.
ImageSet parse_idx_images(std::span<const std::uint8_t> bytes);
/// IDX ubyte labels (magic 0x00000801).
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);
/// Binary PGM (P5) with maxval <= 255: byte / maxval.
ImageSet parse_pgm(std::span<const std::uint8_t> bytes);

/// Auto picks PGM for a "P5" prefix and IDX otherwise; .gz is accepted.
ImageSet load_images(const std::filesystem::path& path, ImageFormat format = ImageFormat::Auto);
std::vector<std::uint8_t> load_labels(const std::filesystem::path& path);

/// PGM P5 encoding of a frame, intensities rounded to bytes.
std::vector<std::uint8_t> encode_pgm(const Frame& frame);

}  // namespace pisa
