#pragma once

#include <cstdint>
#include <string>

#include "ritzcg/image.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

/// Integer gray image as stored in a PGM file.
struct PgmImage {
  Index rows = 0;
  Index cols = 0;
  int maxval = 255;
  std::vector<std::uint16_t> pixels;  // row-major

  Image to_real() const;
  static PgmImage from_real(const Image& img, int maxval);
};

/// Binary PGM (P5) reader: 8-bit or 16-bit big-endian, maxval <= 65535.
/// Malformed input raises an error naming the byte offset; ASCII P2 files are
/// rejected with a clear message.
PgmImage read_pgm(const std::string& path);

void write_pgm(const std::string& path, const PgmImage& img);

/// Maps a real field to 8 bits over mean +/- 3 standard deviations and writes it.
void write_field_pgm(const std::string& path, const Image& field);

}  // namespace ritzcg
