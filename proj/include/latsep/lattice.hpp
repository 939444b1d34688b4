#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "latsep/image.hpp"

namespace latsep {

using Complex = std::complex<double>;

/// Relative tolerance for boundary membership on exact synthetic inputs.
inline constexpr double kTauEq = 1e-9;
/// Looser tolerance for descriptors recovered from spectral estimates.
inline constexpr double kTauEst = 1e-3;

bool is_finite(Complex z) noexcept;

/// Ordered basis (b1, b2) of the lattice {k1 b1 + k2 b2 : k1, k2 integers}.
struct LatticeBasis {
    Complex b1;
    Complex b2;
};

/// Throws DegenerateBasis unless b1 != 0 and Im(b2 / b1) != 0.
void validate_basis(const LatticeBasis& basis);

/// |b1| <= |b2| and Im(b2 / b1) > 0.
bool is_positive(const LatticeBasis& basis);

/// max(|b1|, |b2|) <= |b1 +- b2|.
bool is_minimal(const LatticeBasis& basis);

/// Lagrange-Gauss reduction followed by an orientation fix. The result is
/// positive, minimal and spans the same point set as the input.
LatticeBasis gauss_reduce(const LatticeBasis& basis);

/// Integer action (k1, k2, k3, k4) sending a shape descriptor rho to
/// (k3 + k4 rho) / (k1 + k2 rho) and a basis (b1, b2) to
/// (k1 b1 + k2 b2, k3 b1 + k4 b2).
struct IntegerAction {
    long k1 = 1, k2 = 0, k3 = 0, k4 = 1;

    long det() const noexcept { return k1 * k4 - k2 * k3; }
    Complex apply(Complex rho) const { return (double(k3) + double(k4) * rho) / (double(k1) + double(k2) * rho); }
    /// Adjugate; composing an action with its adjugate multiplies by det.
    IntegerAction adjugate() const noexcept { return {k4, -k2, -k3, k1}; }

    bool operator==(const IntegerAction&) const = default;
};

namespace actions {
// Named modular-group elements, T: z -> z + 1 and S: z -> -1/z.
inline constexpr IntegerAction I{1, 0, 0, 1};
inline constexpr IntegerAction T{1, 0, 1, 1};
inline constexpr IntegerAction Tinv{1, 0, -1, 1};
inline constexpr IntegerAction S{0, 1, -1, 0};
inline constexpr IntegerAction TinvS{0, 1, -1, -1};
inline constexpr IntegerAction TS{0, 1, -1, 1};
inline constexpr IntegerAction TST{1, 1, 0, 1};
inline constexpr IntegerAction ST{1, 1, -1, 0};
inline constexpr IntegerAction STinv{-1, 1, -1, 0};
inline constexpr IntegerAction STS{-1, 1, 0, -1};
}  // namespace actions

/// Scale descriptor beta = b1 and shape descriptor rho = b2 / b1 of a minimal
/// positive basis. rho lies in P = {|z| >= 1, |Re z| <= 1/2, Im z > 0}.
struct LatticeDescriptors {
    Complex beta{1.0, 0.0};
    Complex rho{0.0, 1.0};

    /// Canonicalizes an arbitrary (beta, rho) with beta != 0 and Im rho != 0
    /// by reducing the basis (beta, beta * rho).
    static LatticeDescriptors canonical(Complex beta, Complex rho);

    LatticeBasis basis() const { return {beta, beta * rho}; }
    /// Fundamental cell area, |beta|^2 Im(rho).
    double det() const { return std::norm(beta) * rho.imag(); }
};

LatticeDescriptors to_descriptors(const LatticeBasis& basis);

/// True when rho is in P up to the relative tolerance.
bool in_region_p(Complex rho, double tol = kTauEq);

struct ShapeAction {
    std::string_view name;
    IntegerAction action;
    Complex rho;  // image of the input rho under the action
};

/// All actions relating rho to equivalent shape descriptors in P, by the
/// location of rho (interior, vertical edge, unit arc, or one of the two
/// corners). Identity always comes first. Coinciding images are not merged.
std::vector<ShapeAction> equivalent_shape_actions(Complex rho, double tol = kTauEq);

/// Same lattice up to translation.
bool are_equivalent(const LatticeDescriptors& a, const LatticeDescriptors& b, double tol = kTauEq);

struct TranslatedLattice {
    LatticeDescriptors descriptors;
    Complex mu{0.0, 0.0};
};

/// Closed axis-aligned rectangle [x0, x1] x [y0, y1] in pixel coordinates.
struct Window {
    double x0 = 0.0, y0 = 0.0, x1 = -1.0, y1 = -1.0;

    bool empty() const noexcept { return x1 < x0 || y1 < y0; }
    bool contains(Complex p, double slack = 0.0) const noexcept {
        return p.real() >= x0 - slack && p.real() <= x1 + slack && p.imag() >= y0 - slack &&
               p.imag() <= y1 + slack;
    }
    Window grown(double margin) const noexcept { return {x0 - margin, y0 - margin, x1 + margin, y1 + margin}; }
    static Window of_image(int width, int height) { return {0.0, 0.0, width - 1.0, height - 1.0}; }
};

/// Lattice points mu + k1 beta + k2 beta rho inside the window, in order of
/// increasing (k2, k1) of the reduced basis.
std::vector<Complex> generate_points(const TranslatedLattice& lattice, const Window& window);

/// Stamps a unit-height Gaussian of standard deviation sigma at every point and
/// composites by pointwise maximum.
GrayImage stamp_points(std::span<const Complex> points, double sigma, int width, int height);

/// Image model: per-layer Gaussian stamps composited by pointwise maximum.
GrayImage rasterize(std::span<const TranslatedLattice> lattices, double sigma, int width, int height);

/// Reciprocal lattice [beta e^{-i pi/2} / det, rho], canonicalized.
LatticeDescriptors reciprocal(const LatticeDescriptors& d);

enum class WallpaperClass { Hexagonal, Square, Rectangular, Rhombic, Parallelogrammic };

std::string_view to_string(WallpaperClass c);

WallpaperClass classify_wallpaper(Complex rho, double tol = kTauEq);

/// Sub-lattice induced by an action with positive determinant.
LatticeDescriptors sublattice(const LatticeDescriptors& d, const IntegerAction& a);

/// Parent-lattice induced by an action with positive determinant; the
/// sub-lattice for the same action scaled by 1 / det.
LatticeDescriptors parentlattice(const LatticeDescriptors& d, const IntegerAction& a);

/// The (n, 0, 0, 1) and (1, 0, 0, n) families: [m beta, rho / m] when
/// |rho| >= n and [beta, m rho] when |Re rho| <= 1 / (2n), for m = 1..n.
std::vector<LatticeDescriptors> easy_sublattice_families(const LatticeDescriptors& d, int n);

}  // namespace latsep
