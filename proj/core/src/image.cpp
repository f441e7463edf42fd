#include "hda/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "hda/error.hpp"

namespace hda {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::OffImage: return "OffImage";
    case ErrorCode::TooFewMatches: return "TooFewMatches";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::AllPointsDegenerate: return "AllPointsDegenerate";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

Image crop(const Image& image, const Rect& rect) {
  if (!image.bounds().contains(rect)) {
    throw Error(ErrorCode::OutOfBounds, "crop rectangle outside image");
  }
  Image out(rect.width, rect.height);
  for (int y = 0; y < rect.height; ++y) {
    const auto* src = image.row(rect.y0 + y) + rect.x0;
    std::copy(src, src + rect.width, out.row(y));
  }
  return out;
}

Rect centered_pow2_square(int width, int height) {
  const int limit = std::min(width, height);
  if (limit < 1) return {};
  int side = 1;
  while (side * 2 <= limit) side *= 2;
  return {(width - side) / 2, (height - side) / 2, side, side};
}

ImageF to_float(const Image& image) {
  ImageF out(image.width(), image.height());
  std::transform(image.data().begin(), image.data().end(), out.data().begin(),
                 [](std::uint8_t v) { return static_cast<float>(v); });
  return out;
}

float sample_bilinear(const ImageF& image, double u, double v) {
  const double x = u - 0.5;
  const double y = v - 0.5;
  const int w = image.width();
  const int h = image.height();
  int ix = static_cast<int>(std::floor(x));
  int iy = static_cast<int>(std::floor(y));
  const double fx = x - ix;
  const double fy = y - iy;
  auto at = [&](int px, int py) {
    px = std::clamp(px, 0, w - 1);
    py = std::clamp(py, 0, h - 1);
    return static_cast<double>(image(px, py));
  };
  const double top = at(ix, iy) * (1.0 - fx) + at(ix + 1, iy) * fx;
  const double bottom = at(ix, iy + 1) * (1.0 - fx) + at(ix + 1, iy + 1) * fx;
  return static_cast<float>(top * (1.0 - fy) + bottom * fy);
}

namespace {

std::string next_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!token.empty()) return token;
    } else {
      token.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return token;
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());

  if (next_token(in) != "P5") throw Error(ErrorCode::Parse, path.string() + ": not a binary PGM (P5)");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, path.string() + ": malformed PGM header");
  }
  if (width <= 0 || height <= 0 || maxval != 255) {
    throw Error(ErrorCode::Parse, path.string() + ": unsupported PGM geometry or maxval");
  }

  Image image(width, height);
  in.read(reinterpret_cast<char*>(image.data().data()), static_cast<std::streamsize>(image.data().size()));
  if (in.gcount() != static_cast<std::streamsize>(image.data().size())) {
    throw Error(ErrorCode::Parse, path.string() + ": truncated pixel data");
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data().data()),
            static_cast<std::streamsize>(image.data().size()));
}

}  // namespace hda
