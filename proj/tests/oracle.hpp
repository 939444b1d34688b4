#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. Kept independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct IntBasis {
    std::int64_t ax, ay, bx, by;
    std::int64_t det() const { return ax * by - ay * bx; }
};

// Integer point (x, y) belongs to the lattice spanned by an integer basis iff
// Cramer's rule yields integral coefficients.
inline bool contains(const IntBasis& b, std::int64_t x, std::int64_t y) {
    const std::int64_t d = b.det();
    if (d == 0) return false;
    const std::int64_t n1 = x * b.by - y * b.bx;
    const std::int64_t n2 = b.ax * y - b.ay * x;
    return n1 % d == 0 && n2 % d == 0;
}

// All lattice points of an integer basis in [lo, hi]^2.
inline std::set<std::pair<std::int64_t, std::int64_t>> window_points(const IntBasis& b, int lo, int hi) {
    std::set<std::pair<std::int64_t, std::int64_t>> out;
    for (int y = lo; y <= hi; ++y)
        for (int x = lo; x <= hi; ++x)
            if (contains(b, x, y)) out.emplace(x, y);
    return out;
}

// Points k1 b1 + k2 b2 + mu in [x0, x1] x [y0, y1] by exhaustive search over a
// fixed coefficient box.
inline std::vector<std::complex<double>> enumerate(std::complex<double> b1, std::complex<double> b2,
                                                   std::complex<double> mu, double x0, double y0,
                                                   double x1, double y1, int kmax) {
    std::vector<std::complex<double>> out;
    for (int k1 = -kmax; k1 <= kmax; ++k1)
        for (int k2 = -kmax; k2 <= kmax; ++k2) {
            const auto p = mu + double(k1) * b1 + double(k2) * b2;
            if (p.real() >= x0 && p.real() <= x1 && p.imag() >= y0 && p.imag() <= y1) out.push_back(p);
        }
    return out;
}

// Every point of `small` lies within tol of some point of `big`.
inline bool subset(const std::vector<std::complex<double>>& small, const std::vector<std::complex<double>>& big,
                   double tol) {
    for (auto p : small) {
        bool hit = false;
        for (auto q : big)
            if (std::abs(p - q) <= tol) {
                hit = true;
                break;
            }
        if (!hit) return false;
    }
    return true;
}

// Strict 8-neighborhood local maxima at or above a threshold, counted with a
// plain scan. Plateaus count once via the first pixel in raster order.
template <typename Img>
int count_maxima(const Img& img, double thresh) {
    int count = 0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const double v = img.at(x, y);
            if (v < thresh) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= img.width() || ny >= img.height()) continue;
                    const double n = img.at(nx, ny);
                    const bool earlier = dy < 0 || (dy == 0 && dx < 0);
                    if (n > v || (n == v && earlier)) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) ++count;
        }
    return count;
}

}  // namespace oracle
