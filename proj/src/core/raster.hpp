#ifndef HEMTFIT_RASTER_HPP
#define HEMTFIT_RASTER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"

namespace hemtfit {

struct Rgb {
    std::uint8_t r = 255, g = 255, b = 255;
    bool operator==(const Rgb&) const = default;
};

/// 8-bit RGB raster, row-major, origin at the top-left corner.
class Image {
  public:
    Image() = default;
    Image(int width, int height, Rgb fill = Rgb{});

    int width() const { return width_; }
    int height() const { return height_; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

    Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    /// Integer luma in [0, 255].
    int luma(int x, int y) const {
        const Rgb& p = at(x, y);
        return (299 * p.r + 587 * p.g + 114 * p.b) / 1000;
    }

  private:
    int width_ = 0, height_ = 0;
    std::vector<Rgb> pixels_;
};

/// Reads any 8/16-bit PNG, converting to 8-bit RGB. Throws Error on
/// missing or malformed files.
Image read_png(const std::string& path);
void write_png(const Image& img, const std::string& path);

} // namespace hemtfit

#endif
