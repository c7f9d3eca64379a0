#include "ritzcg/pgm.hpp"

#include <cmath>
#include <fstream>
#include <vector>

namespace ritzcg {

namespace {

[[noreturn]] void malformed(const std::string& path, std::streampos offset,
                            const std::string& what) {
  throw Error("read_pgm: " + path + ": " + what + " at byte offset " +
              std::to_string(static_cast<long long>(offset)));
}

// Reads the next header token, skipping whitespace and # comments.
std::string next_token(std::istream& in, const std::string& path) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  if (token.empty()) malformed(path, in.tellg(), "unexpected end of header");
  return token;
}

long parse_count(const std::string& token, std::istream& in, const std::string& path,
                 const std::string& what) {
  try {
    size_t used = 0;
    long value = std::stol(token, &used);
    if (used != token.size() || value <= 0) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    malformed(path, in.tellg(), "invalid " + what + " '" + token + "'");
  }
}

}  // namespace

Image PgmImage::to_real() const {
  Image img(rows, cols);
  for (Index y = 0; y < rows; ++y)
    for (Index x = 0; x < cols; ++x) img(y, x) = pixels[y * cols + x];
  return img;
}

PgmImage PgmImage::from_real(const Image& img, int maxval) {
  require(maxval >= 1 && maxval <= 65535, "PgmImage: maxval out of range");
  PgmImage out;
  out.rows = img.rows();
  out.cols = img.cols();
  out.maxval = maxval;
  out.pixels.resize(static_cast<size_t>(img.size()));
  for (Index y = 0; y < img.rows(); ++y)
    for (Index x = 0; x < img.cols(); ++x) {
      double v = std::round(std::clamp(img(y, x), 0.0, double(maxval)));
      out.pixels[y * img.cols() + x] = static_cast<std::uint16_t>(v);
    }
  return out;
}

PgmImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "read_pgm: cannot open " + path);

  std::string magic = next_token(in, path);
  if (magic == "P2")
    throw Error("read_pgm: " + path + ": ASCII (P2) images are not supported, "
                "convert to binary P5");
  if (magic != "P5") malformed(in.tellg() >= 0 ? path : path, 0, "not a P5 file");

  PgmImage img;
  img.cols = parse_count(next_token(in, path), in, path, "width");
  img.rows = parse_count(next_token(in, path), in, path, "height");
  long maxval = parse_count(next_token(in, path), in, path, "maxval");
  if (maxval > 65535) malformed(path, in.tellg(), "maxval above 65535");
  img.maxval = static_cast<int>(maxval);

  const size_t count = static_cast<size_t>(img.rows) * img.cols;
  img.pixels.resize(count);
  const bool wide = maxval > 255;
  std::vector<unsigned char> raw(count * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (static_cast<size_t>(in.gcount()) != raw.size())
    malformed(path, in.tellg(), "truncated pixel data");

  for (size_t i = 0; i < count; ++i) {
    img.pixels[i] = wide ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1])
                         : raw[i];
  }
  return img;
}

void write_pgm(const std::string& path, const PgmImage& img) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_pgm: cannot open " + path);
  out << "P5\n" << img.cols << ' ' << img.rows << '\n' << img.maxval << '\n';
  const bool wide = img.maxval > 255;
  std::vector<unsigned char> raw;
  raw.reserve(img.pixels.size() * (wide ? 2 : 1));
  for (std::uint16_t p : img.pixels) {
    if (wide) {
      raw.push_back(static_cast<unsigned char>(p >> 8));  // big-endian
      raw.push_back(static_cast<unsigned char>(p & 0xff));
    } else {
      raw.push_back(static_cast<unsigned char>(p));
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), raw.size());
  require(out.good(), "write_pgm: write failed for " + path);
}

void write_field_pgm(const std::string& path, const Image& field) {
  double mean = field.mean();
  double variance = (field.array() - mean).square().mean();
  double dev = std::sqrt(std::max(variance, 0.0));
  double lo = mean - 3.0 * dev;
  double span = dev > 0.0 ? 6.0 * dev : 1.0;
  Image scaled = ((field.array() - lo) / span * 255.0).matrix();
  write_pgm(path, PgmImage::from_real(scaled, 255));
}

}  // namespace ritzcg
