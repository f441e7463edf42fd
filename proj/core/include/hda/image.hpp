#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace hda {

// Integer pixel rectangle. Pixel (x, y) covers the continuous image area
// [x, x+1) x [y, y+1); a Rect therefore spans [x0, x0+width) x [y0, y0+height).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  int x1() const { return x0 + width; }
  int y1() const { return y0 + height; }
  long long area() const { return static_cast<long long>(width) * height; }
  bool empty() const { return width <= 0 || height <= 0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1() && y >= y0 && y < y1(); }
  bool contains(const Rect& r) const {
    return r.x0 >= x0 && r.y0 >= y0 && r.x1() <= x1() && r.y1() <= y1();
  }

  Rect intersect(const Rect& r) const {
    const int ax = std::max(x0, r.x0);
    const int ay = std::max(y0, r.y0);
    const int bx = std::min(x1(), r.x1());
    const int by = std::min(y1(), r.y1());
    if (bx <= ax || by <= ay) return {ax, ay, 0, 0};
    return {ax, ay, bx - ax, by - ay};
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  Rect bounds() const { return {0, 0, width_, height_}; }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }
  const T* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Image = Raster<std::uint8_t>;
using ImageF = Raster<float>;

Image crop(const Image& image, const Rect& rect);

// Largest centered square whose side is a power of two and fits the image
// (2560x2160 -> 2048, 2592x1944 -> 1024).
Rect centered_pow2_square(int width, int height);

ImageF to_float(const Image& image);

// Bilinear sample with edge clamping; pixel centers sit at +0.5.
float sample_bilinear(const ImageF& image, double u, double v);

// Binary PGM (P5, maxval 255).
Image read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image& image);

}  // namespace hda
