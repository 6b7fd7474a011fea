#include "despeckle/pgm.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <vector>

namespace despeckle {

PgmParseError::PgmParseError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error("PGM parse error at byte " + std::to_string(offset) + ": " + what),
      kind_(kind),
      offset_(offset) {}

namespace {

using Kind = PgmParseError::Kind;

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }
  unsigned char peek() const { return bytes_[pos_]; }
  unsigned char get() { return bytes_[pos_++]; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void skip_space_and_comments() {
    while (!at_end()) {
      const unsigned char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n' && peek() != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  /// Reads an unsigned decimal token; `kind` is reported on failure.
  std::uint64_t read_uint(Kind kind, const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    if (at_end() || !std::isdigit(peek()))
      throw PgmParseError(kind, start, std::string("expected ") + what);
    std::uint64_t v = 0;
    while (!at_end() && std::isdigit(peek())) {
      v = v * 10 + static_cast<std::uint64_t>(get() - '0');
      if (v > std::numeric_limits<std::uint32_t>::max())
        throw PgmParseError(kind, start, std::string(what) + " out of range");
    }
    return v;
  }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pgm(std::span<const unsigned char> bytes) {
  Reader in(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P')
    throw PgmParseError(Kind::kUnsupportedMagic, 0, "missing 'P' magic");
  const unsigned char variant = bytes[1];
  if (variant != '5' && variant != '2')
    throw PgmParseError(Kind::kUnsupportedMagic, 0,
                        std::string("unsupported magic P") + static_cast<char>(variant));
  in.get();
  in.get();

  const auto width = in.read_uint(Kind::kMalformedHeader, "width");
  const auto height = in.read_uint(Kind::kMalformedHeader, "height");
  const std::size_t maxval_pos = in.pos();
  const auto maxval = in.read_uint(Kind::kMalformedHeader, "maxval");
  if (width == 0 || height == 0)
    throw PgmParseError(Kind::kMalformedHeader, maxval_pos, "zero image dimension");
  if (maxval == 0 || maxval > 65535)
    throw PgmParseError(Kind::kMalformedHeader, maxval_pos, "maxval must be in [1, 65535]");

  GrayImage img(static_cast<Index>(height), static_cast<Index>(width));
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  double* out = img.data();

  if (variant == '5') {
    // Exactly one whitespace byte separates the header from the raster.
    if (in.at_end() || !std::isspace(in.peek()))
      throw PgmParseError(Kind::kMalformedHeader, in.pos(), "expected whitespace after maxval");
    in.get();
    const std::size_t bytes_per_sample = maxval < 256 ? 1 : 2;
    if (in.remaining() < count * bytes_per_sample)
      throw PgmParseError(Kind::kTruncatedRaster, bytes.size(),
                          "raster needs " + std::to_string(count * bytes_per_sample) +
                              " bytes, found " + std::to_string(in.remaining()));
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t at = in.pos();
      unsigned v = in.get();
      if (bytes_per_sample == 2) v = (v << 8) | in.get();
      if (v > maxval)
        throw PgmParseError(Kind::kBadSample, at, "sample exceeds maxval");
      out[k] = static_cast<double>(v);
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      in.skip_space_and_comments();
      const std::size_t at = in.pos();
      if (in.at_end())
        throw PgmParseError(Kind::kTruncatedRaster, at,
                            "raster ended after " + std::to_string(k) + " samples");
      const auto v = in.read_uint(Kind::kBadSample, "sample");
      if (v > maxval)
        throw PgmParseError(Kind::kBadSample, at, "sample exceeds maxval");
      out[k] = static_cast<double>(v);
    }
  }
  return img;
}

std::string encode_pgm(const GrayImage& img, int maxval) {
  if (maxval != 255 && maxval != 65535)
    throw ParameterError("save_pgm: maxval must be 255 or 65535");
  require_nonempty(img.rows(), img.cols(), "save_pgm");
  const GrayImage q = quantize(img, maxval);
  std::string out = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) +
                    "\n" + std::to_string(maxval) + "\n";
  const std::size_t count = static_cast<std::size_t>(q.size());
  out.reserve(out.size() + count * (maxval == 255 ? 1 : 2));
  for (std::size_t k = 0; k < count; ++k) {
    const auto v = static_cast<unsigned>(q.data()[k]);
    if (maxval == 65535) out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>(v & 0xFF));
  }
  return out;
}

GrayImage load_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(path, "cannot open for reading");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                         std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError(path, "read failed");
  return decode_pgm(bytes);
}

void save_pgm(const GrayImage& img, const std::string& path, int maxval) {
  const std::string data = encode_pgm(img, maxval);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(path, "cannot open for writing");
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError(path, "write failed");
}

}  // namespace despeckle
