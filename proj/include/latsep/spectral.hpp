#pragma once

#include <span>
#include <utility>
#include <vector>

#include "latsep/image.hpp"
#include "latsep/lattice.hpp"

namespace latsep {

/// Line integrals of an image, one row per projection angle.
struct Sinogram {
    std::vector<double> angles;   // radians in [0, pi), increasing
    std::vector<double> offsets;  // signed distance from the image center, pixels
    std::vector<double> values;   // row-major, angles x offsets

    std::size_t n_angles() const noexcept { return angles.size(); }
    std::size_t n_offsets() const noexcept { return offsets.size(); }
    std::span<const double> row(std::size_t a) const { return {values.data() + a * offsets.size(), offsets.size()}; }
};

/// Fourier magnitudes on a polar grid of the frequency plane.
struct PolarSpectrum {
    std::vector<double> angles;      // radians in [0, pi)
    std::vector<double> radii;       // cycles per pixel, bin r at r / nfft
    std::vector<double> magnitudes;  // row-major, angles x radii
    int nfft = 0;

    std::size_t n_angles() const noexcept { return angles.size(); }
    std::size_t n_radii() const noexcept { return radii.size(); }
    double at(std::size_t a, std::size_t r) const { return magnitudes[a * radii.size() + r]; }
    std::span<const double> row(std::size_t a) const { return {magnitudes.data() + a * radii.size(), radii.size()}; }
};

struct SpectralPeak {
    double radius = 0.0;     // cycles per pixel
    double angle = 0.0;      // radians in [0, pi)
    double magnitude = 0.0;

    /// Frequency vector radius * e^{i angle} in image coordinates.
    Complex frequency() const { return std::polar(radius, angle); }
};

struct PeakOptions {
    int dc_exclusion_bins = 2;  // radial bins around the origin ignored
    double sigma_f = 1.0;       // impulse width for radial refinement, bins
    bool refine_angle = true;   // parabolic interpolation across angle rows
};

/// Pixel-driven projection with a windowed-sinc kernel and per-pixel weight
/// normalization, so each projection holds exactly the image mass.
/// With subtract_mean the image mean is removed first.
Sinogram radon(const GrayImage& img, int n_angles, bool subtract_mean = false);

/// Per-angle FFT magnitudes of the zero-padded projections.
PolarSpectrum polar_spectrum(const GrayImage& img, int n_angles = 360, bool subtract_mean = false);

/// One peak per connected component of the super-threshold region, for the
/// highest threshold at which J components are present.
std::vector<SpectralPeak> find_peaks(const PolarSpectrum& spec, int J, const PeakOptions& opts = {});

/// Period in bins within gamma0 +- 0.5 whose zero-mean Gaussian impulse train
/// best correlates with the signal, on a 0.01-bin grid. Ties go to gamma0.
double radial_refine(std::span<const double> signal, double gamma0, double sigma_f = 1.0);

/// Three-point log-Gaussian peak interpolation around a discrete maximum.
/// Throws FlatNeighborhood when a neighbor is not positive or a denominator
/// vanishes.
Complex subpixel_refine(const GrayImage& img, int x, int y);

/// Like subpixel_refine, but falls back to the integer location per axis.
Complex subpixel_refine_or_center(const GrayImage& img, int x, int y);

/// Pixels at or above thresh with no larger 8-neighbor; plateaus are reported
/// once, at their first pixel in raster order.
std::vector<std::pair<int, int>> local_maxima(const GrayImage& img, double thresh);

/// Number of local maxima at or above thresh.
int count_particles(const GrayImage& img, double thresh);

}  // namespace latsep
