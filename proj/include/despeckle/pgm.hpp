#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "despeckle/image.hpp"

namespace despeckle {

class PgmParseError : public std::runtime_error {
 public:
  enum class Kind { kUnsupportedMagic, kMalformedHeader, kTruncatedRaster, kBadSample };

  PgmParseError(Kind kind, std::size_t offset, const std::string& what);

  Kind kind() const noexcept { return kind_; }
  /// Byte offset into the file where parsing failed.
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Parses a binary (P5) or ASCII (P2) graymap held in memory.
GrayImage decode_pgm(std::span<const unsigned char> bytes);

/// Encodes as binary P5 after quantize(img, maxval). maxval must be 255 or
/// 65535; 16-bit samples are big-endian.
std::string encode_pgm(const GrayImage& img, int maxval = 255);

/// Reads a P5/P2 file. Throws IoError if the file cannot be read, and
/// PgmParseError on malformed contents.
GrayImage load_pgm(const std::string& path);

void save_pgm(const GrayImage& img, const std::string& path, int maxval = 255);

}  // namespace despeckle
