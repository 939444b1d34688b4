#include "latsep/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "latsep/error.hpp"

namespace latsep {

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw BadDimensions("image dimensions must be at least 1x1");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

double GrayImage::mean() const {
    if (data_.empty()) return 0.0;
    return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

double GrayImage::max() const {
    if (data_.empty()) return 0.0;
    return *std::max_element(data_.begin(), data_.end());
}

namespace {

template <typename Op>
GrayImage combine(const GrayImage& a, const GrayImage& b, Op op) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw BadDimensions("image sizes differ");
    }
    GrayImage out(a.width(), a.height());
    auto pa = a.pixels();
    auto pb = b.pixels();
    auto po = out.pixels();
    for (std::size_t i = 0; i < po.size(); ++i) po[i] = op(pa[i], pb[i]);
    return out;
}

}  // namespace

GrayImage subtract_clamped(const GrayImage& a, const GrayImage& b) {
    return combine(a, b, [](double x, double y) { return std::max(0.0, x - y); });
}

GrayImage pointwise_min(const GrayImage& a, const GrayImage& b) {
    return combine(a, b, [](double x, double y) { return std::min(x, y); });
}

GrayImage pointwise_product(const GrayImage& a, const GrayImage& b) {
    return combine(a, b, [](double x, double y) { return x * y; });
}

double l2_norm(const GrayImage& img) {
    double s = 0.0;
    for (double v : img.pixels()) s += v * v;
    return std::sqrt(s);
}

}  // namespace latsep
