#pragma once

#include <optional>
#include <string_view>

#include "latsep/lattice.hpp"

namespace latsep {

struct MetricConfig {
    double w = 0.05;      // weight of the length term against the angle term
    int N = 60;           // grid intervals over [pi/3, 2pi/3]
    bool refine = true;   // golden-section polish around the grid optimum
};

enum class PathKind { Direct, D1, D2, D3, D4, D5, D6, D7, D8 };

std::string_view to_string(PathKind kind);

struct MetricResult {
    double value = 0.0;
    PathKind path = PathKind::Direct;
    std::optional<double> phi;        // angle of the waypoint on the first lattice's side
    std::optional<double> phi_prime;  // angle of the waypoint on the second lattice's side
};

/// Quotient scale distance min over the sign of beta.
double dist_scale(Complex beta, Complex beta2, double w = 0.05);

/// Quotient Poincare distance min over rho and rho +- 1.
double dist_shape(Complex rho, Complex rho2);

/// Product of the two quotient distances on canonicalized descriptors.
double dist_product(const LatticeDescriptors& a, const LatticeDescriptors& b, const MetricConfig& cfg = {});

/// Lattice distance: minimum of the direct product distance and the eight
/// path families through the unit arc of shape space. Symmetric in a and b.
MetricResult dist_lattice(const LatticeDescriptors& a, const LatticeDescriptors& b, const MetricConfig& cfg = {});

struct FourTuple {
    double len1 = 0.0;   // |b1|
    double len2 = 0.0;   // |b2|
    double theta = 0.0;  // Arg b1 in (-pi/2, pi/2]
    double psi = 0.0;    // angle from b1 to b2 in (0, pi]
};

/// Conventional (|b1|, |b2|, theta, psi) description of the reduced basis.
FourTuple fourtuple(const LatticeBasis& basis);

/// Componentwise |b - a| / |a|.
FourTuple relative_difference(const FourTuple& a, const FourTuple& b);

}  // namespace latsep
