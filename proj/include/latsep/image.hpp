#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace latsep {

/// Row-major grayscale raster. Pixel (x, y) is column x, row y and sits at the
/// complex coordinate x + iy. Intensities live in [0, 1].
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(int x, int y) { return data_[index(x, y)]; }
    double at(int x, int y) const { return data_[index(x, y)]; }
    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    std::span<double> pixels() noexcept { return data_; }
    std::span<const double> pixels() const noexcept { return data_; }

    double mean() const;
    double max() const;

    bool operator==(const GrayImage&) const = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height) : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    Rgb& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    const Rgb& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const Rgb> pixels() const noexcept { return data_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> data_;
};

// Pointwise helpers used by the separation loop.
GrayImage subtract_clamped(const GrayImage& a, const GrayImage& b);
GrayImage pointwise_min(const GrayImage& a, const GrayImage& b);
GrayImage pointwise_product(const GrayImage& a, const GrayImage& b);
double l2_norm(const GrayImage& img);

}  // namespace latsep
