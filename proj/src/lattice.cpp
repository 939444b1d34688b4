#include "latsep/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "latsep/error.hpp"

namespace latsep {

namespace {

constexpr int kMaxReductionSteps = 10000;
// Relative slack so that ties lost to rounding keep the input order.
constexpr double kTieSlack = 1e-12;

double round_half_away(double v) { return v < 0.0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5); }

// Representative of beta modulo sign with Arg in (-pi/2, pi/2].
Complex fix_sign(Complex beta) {
    if (beta.real() < 0.0 || (beta.real() == 0.0 && beta.imag() < 0.0)) return -beta;
    return beta;
}

bool near(Complex a, Complex b, double tol) {
    return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

bool is_finite(Complex z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void validate_basis(const LatticeBasis& basis) {
    if (!is_finite(basis.b1) || !is_finite(basis.b2)) {
        throw DegenerateBasis("basis has non-finite components");
    }
    if (basis.b1 == Complex{}) throw DegenerateBasis("b1 is zero");
    const double cross = (std::conj(basis.b1) * basis.b2).imag();
    if (cross == 0.0) throw DegenerateBasis("b1 and b2 are collinear");
}

bool is_positive(const LatticeBasis& basis) {
    validate_basis(basis);
    return std::abs(basis.b1) * (1.0 - kTieSlack) <= std::abs(basis.b2) && (basis.b2 * std::conj(basis.b1)).imag() > 0.0;
}

bool is_minimal(const LatticeBasis& basis) {
    validate_basis(basis);
    const double longest = std::max(std::abs(basis.b1), std::abs(basis.b2)) * (1.0 - kTieSlack);
    return longest <= std::abs(basis.b1 + basis.b2) && longest <= std::abs(basis.b1 - basis.b2);
}

LatticeBasis gauss_reduce(const LatticeBasis& basis) {
    validate_basis(basis);
    Complex b1 = basis.b1;
    Complex b2 = basis.b2;
    auto shorter = [](Complex x, Complex y) { return std::norm(x) < std::norm(y) * (1.0 - kTieSlack); };
    if (shorter(b2, b1)) std::swap(b1, b2);
    for (int step = 0; step < kMaxReductionSteps; ++step) {
        const double m = (b2 * std::conj(b1)).real() / std::norm(b1);
        if (std::abs(m) > 0.5 + kTieSlack) b2 -= round_half_away(m) * b1;
        if (shorter(b2, b1)) {
            std::swap(b1, b2);
            continue;
        }
        break;
    }
    if ((b2 * std::conj(b1)).imag() < 0.0) b2 = -b2;
    return {b1, b2};
}

LatticeDescriptors LatticeDescriptors::canonical(Complex beta, Complex rho) {
    if (!is_finite(beta) || !is_finite(rho)) throw DegenerateBasis("non-finite descriptors");
    if (beta == Complex{}) throw DegenerateBasis("scale descriptor is zero");
    if (rho.imag() == 0.0) throw DegenerateBasis("shape descriptor is real");
    return to_descriptors({beta, beta * rho});
}

LatticeDescriptors to_descriptors(const LatticeBasis& basis) {
    const LatticeBasis r = gauss_reduce(basis);
    LatticeDescriptors d;
    d.beta = fix_sign(r.b1);
    d.rho = r.b2 / r.b1;
    return d;
}

bool in_region_p(Complex rho, double tol) {
    return rho.imag() > 0.0 && std::abs(rho) >= 1.0 - tol && std::abs(rho.real()) <= 0.5 + tol;
}

std::vector<ShapeAction> equivalent_shape_actions(Complex rho, double tol) {
    if (!is_finite(rho) || !in_region_p(rho, tol)) {
        throw OutOfRegion("shape descriptor outside the fundamental region");
    }
    using namespace actions;
    const bool left = std::abs(rho.real() + 0.5) <= tol;
    const bool right = std::abs(rho.real() - 0.5) <= tol;
    const bool arc = std::abs(std::abs(rho) - 1.0) <= tol;

    std::vector<std::pair<std::string_view, IntegerAction>> row{{"I", I}};
    if (left && arc) {
        row.insert(row.end(), {{"S", S}, {"T", T}, {"T^-1 S", TinvS}, {"S T", ST}, {"T S T", TST}});
    } else if (right && arc) {
        row.insert(row.end(), {{"S", S}, {"T^-1", Tinv}, {"T S", TS}, {"S T^-1", STinv}, {"S T S", STS}});
    } else if (left) {
        row.emplace_back("T", T);
    } else if (right) {
        row.emplace_back("T^-1", Tinv);
    } else if (arc) {
        row.emplace_back("S", S);
    }

    std::vector<ShapeAction> out;
    out.reserve(row.size());
    for (const auto& [name, action] : row) out.push_back({name, action, action.apply(rho)});
    return out;
}

bool are_equivalent(const LatticeDescriptors& a, const LatticeDescriptors& b, double tol) {
    for (const ShapeAction& s : equivalent_shape_actions(a.rho, tol)) {
        if (!near(s.rho, b.rho, tol)) continue;
        const Complex beta = a.beta * (double(s.action.k1) + double(s.action.k2) * a.rho);
        if (near(beta, b.beta, tol) || near(-beta, b.beta, tol)) return true;
    }
    return false;
}

std::vector<Complex> generate_points(const TranslatedLattice& lattice, const Window& window) {
    std::vector<Complex> points;
    if (window.empty()) return points;
    const LatticeBasis basis = gauss_reduce(lattice.descriptors.basis());
    const Complex b1 = basis.b1;
    const Complex b2 = basis.b2;
    const double det = b1.real() * b2.imag() - b1.imag() * b2.real();

    double lo1 = INFINITY, hi1 = -INFINITY, lo2 = INFINITY, hi2 = -INFINITY;
    const Complex corners[] = {{window.x0, window.y0}, {window.x1, window.y0},
                               {window.x0, window.y1}, {window.x1, window.y1}};
    for (Complex c : corners) {
        const Complex p = c - lattice.mu;
        const double c1 = (p.real() * b2.imag() - p.imag() * b2.real()) / det;
        const double c2 = (b1.real() * p.imag() - b1.imag() * p.real()) / det;
        lo1 = std::min(lo1, c1);
        hi1 = std::max(hi1, c1);
        lo2 = std::min(lo2, c2);
        hi2 = std::max(hi2, c2);
    }
    const long k1_lo = static_cast<long>(std::floor(lo1)) - 1;
    const long k1_hi = static_cast<long>(std::ceil(hi1)) + 1;
    const long k2_lo = static_cast<long>(std::floor(lo2)) - 1;
    const long k2_hi = static_cast<long>(std::ceil(hi2)) + 1;
    for (long k2 = k2_lo; k2 <= k2_hi; ++k2) {
        for (long k1 = k1_lo; k1 <= k1_hi; ++k1) {
            const Complex p = lattice.mu + double(k1) * b1 + double(k2) * b2;
            if (window.contains(p)) points.push_back(p);
        }
    }
    return points;
}

GrayImage stamp_points(std::span<const Complex> points, double sigma, int width, int height) {
    if (width < 1 || height < 1) throw BadDimensions("image dimensions must be at least 1x1");
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    GrayImage img(width, height);
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (Complex p : points) {
        const int cx = static_cast<int>(std::lround(p.real()));
        const int cy = static_cast<int>(std::lround(p.imag()));
        const int x0 = std::max(0, cx - radius), x1 = std::min(width - 1, cx + radius);
        const int y0 = std::max(0, cy - radius), y1 = std::min(height - 1, cy + radius);
        for (int y = y0; y <= y1; ++y) {
            const double dy = y - p.imag();
            for (int x = x0; x <= x1; ++x) {
                const double dx = x - p.real();
                const double v = std::exp(-(dx * dx + dy * dy) * inv2s2);
                double& px = img.at(x, y);
                if (v > px) px = v;
            }
        }
    }
    return img;
}

GrayImage rasterize(std::span<const TranslatedLattice> lattices, double sigma, int width, int height) {
    if (width < 1 || height < 1) throw BadDimensions("image dimensions must be at least 1x1");
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    const Window window = Window::of_image(width, height).grown(std::ceil(4.0 * sigma) + 1.0);
    std::vector<Complex> points;
    for (const TranslatedLattice& lat : lattices) {
        const auto layer = generate_points(lat, window);
        points.insert(points.end(), layer.begin(), layer.end());
    }
    return stamp_points(points, sigma, width, height);
}

LatticeDescriptors reciprocal(const LatticeDescriptors& d) {
    return LatticeDescriptors::canonical(d.beta * Complex{0.0, -1.0} / d.det(), d.rho);
}

std::string_view to_string(WallpaperClass c) {
    switch (c) {
        case WallpaperClass::Hexagonal: return "hexagonal";
        case WallpaperClass::Square: return "square";
        case WallpaperClass::Rectangular: return "rectangular";
        case WallpaperClass::Rhombic: return "rhombic";
        case WallpaperClass::Parallelogrammic: return "parallelogrammic";
    }
    return "parallelogrammic";
}

WallpaperClass classify_wallpaper(Complex rho, double tol) {
    if (!is_finite(rho) || !in_region_p(rho, tol)) {
        throw OutOfRegion("shape descriptor outside the fundamental region");
    }
    const double h = std::numbers::sqrt3 / 2.0;
    if (std::abs(rho - Complex{0.5, h}) <= tol || std::abs(rho - Complex{-0.5, h}) <= tol) {
        return WallpaperClass::Hexagonal;
    }
    if (std::abs(rho - Complex{0.0, 1.0}) <= tol) return WallpaperClass::Square;
    if (std::abs(rho.real()) <= tol) return WallpaperClass::Rectangular;
    if (std::abs(std::abs(rho.real()) - 0.5) <= tol || std::abs(std::abs(rho) - 1.0) <= tol) {
        return WallpaperClass::Rhombic;
    }
    return WallpaperClass::Parallelogrammic;
}

LatticeDescriptors sublattice(const LatticeDescriptors& d, const IntegerAction& a) {
    if (a.det() <= 0) throw BadAction("action determinant must be positive");
    const Complex b1 = d.beta * (double(a.k1) + double(a.k2) * d.rho);
    const Complex b2 = d.beta * (double(a.k3) + double(a.k4) * d.rho);
    return to_descriptors({b1, b2});
}

LatticeDescriptors parentlattice(const LatticeDescriptors& d, const IntegerAction& a) {
    if (a.det() <= 0) throw BadAction("action determinant must be positive");
    const double v = 1.0 / double(a.det());
    const Complex b1 = v * d.beta * (double(a.k1) + double(a.k2) * d.rho);
    const Complex b2 = v * d.beta * (double(a.k3) + double(a.k4) * d.rho);
    return to_descriptors({b1, b2});
}

std::vector<LatticeDescriptors> easy_sublattice_families(const LatticeDescriptors& d, int n) {
    if (n < 1) throw InvalidArgument("family order must be at least 1");
    std::vector<LatticeDescriptors> out;
    auto push = [&](const LatticeDescriptors& c) {
        for (const auto& e : out) {
            if (are_equivalent(e, c)) return;
        }
        out.push_back(c);
    };
    for (int m = 1; m <= n; ++m) {
        if (std::abs(d.rho) >= n) push(LatticeDescriptors::canonical(double(m) * d.beta, d.rho / double(m)));
        if (std::abs(d.rho.real()) <= 1.0 / (2.0 * n)) push(LatticeDescriptors::canonical(d.beta, double(m) * d.rho));
    }
    return out;
}

}  // namespace latsep
