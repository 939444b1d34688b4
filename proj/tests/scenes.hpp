#pragma once

// Synthetic scenes built from reference lattice parameters, 119x119 at
// sigma = 1.35 unless noted.

#include <algorithm>
#include <limits>
#include <numbers>
#include <vector>

#include "latsep/io.hpp"
#include "latsep/lisa.hpp"
#include "latsep/metric.hpp"

namespace scenes {

using latsep::Complex;
using latsep::SceneLayer;
using latsep::SceneSpec;
using std::numbers::pi;

inline Complex unit(double angle) { return std::polar(1.0, angle); }

inline SceneLayer layer(Complex mu, Complex beta, Complex rho) {
    return {{latsep::LatticeDescriptors::canonical(beta, rho), mu}, std::nullopt};
}

inline SceneSpec make(std::vector<SceneLayer> layers) {
    SceneSpec s;
    s.layers = std::move(layers);
    return s;
}

// Three lattices of mixed shape.
inline SceneSpec three_lattice() {
    return make({layer({2, -4}, {-9.9927, 0.0315}, 1.0014 * unit(17 * pi / 36)),
                 layer({-7, -4}, {-4.4820, 12.1815}, {0, 1}),
                 layer({1, -5}, {-4.9898, -8.5389}, 1.0298 * unit(7 * pi / 12))});
}

// Five lattices; the 12 and 10 degree squares are the near-identical pair.
inline SceneSpec five_lattice() {
    return make({layer({2, -5}, 11, unit(7 * pi / 18)), layer({3, 4}, {11.7378, 2.4949}, {0, 1}),
                 layer({0, 0}, {3.7082, 11.4127}, unit(4 * pi / 9)), layer({1, -2}, {14.0954, 5.1303}, {0, 1}),
                 layer({0, 0}, {11.8177, 2.0838}, {0, 1})});
}

// Two copies of one square lattice whose offsets cancel reciprocal peaks.
inline SceneSpec phase_cancel() { return make({layer({4, -3}, 12, {0, 1}), layer({-4, 3}, 12, {0, 1})}); }

// Four layers, two translated pairs.
inline SceneSpec four_translated() {
    return make({layer({0, 0}, 12, {0, 1}), layer({2, -3}, 12, {0, 1}), layer({1, 1}, {11.8177, 2.0838}, {0, 1}),
                 layer({2, -5}, {11.8177, 2.0838}, {0, 1})});
}

// Three close translates of one lattice.
inline SceneSpec three_translated() {
    const Complex beta{14.7721, 2.6047};
    return make({layer({4, -2}, beta, {0, 1}), layer({1, -2}, beta, {0, 1}), layer({2, -5}, beta, {0, 1})});
}

// Square lattice rotated by 10 degrees.
inline SceneSpec rotated_square(double s = 0.0, std::uint64_t seed = 0) {
    SceneSpec spec = make({layer(0, 12.0 * unit(pi / 18), {0, 1})});
    spec.perturb_s = s;
    spec.seed = seed;
    return spec;
}

// Two lattices, the second missing its lower-triangular half.
inline SceneSpec incomplete() {
    SceneSpec s = make({layer(0, {11.6924, 2.6994}, unit(4 * pi / 9)), layer({2, -3}, {11.8177, 2.0838}, {0, 1})});
    s.layers[1].mask = latsep::MissingMask{latsep::MaskKind::LowerTriangular, 0.5};
    return s;
}

// Two nearly aligned lattices whose moire invites a dense wrong lattice.
inline SceneSpec moire() {
    return make({layer({2, -10}, 10, unit(17 * pi / 36)), layer({-3, 5}, {9.9756, 0.6976}, unit(17 * pi / 36))});
}

inline std::vector<latsep::LatticeDescriptors> truth(const SceneSpec& s) {
    std::vector<latsep::LatticeDescriptors> out;
    for (const auto& l : s.layers) out.push_back(l.lattice.descriptors);
    return out;
}

// Greedy one-to-one assignment by smallest distance; returns the distance of
// each truth layer to its assigned recovered layer (infinity if none left).
inline std::vector<double> matched_distances(const std::vector<latsep::LatticeDescriptors>& truth,
                                             const std::vector<latsep::LatticeDescriptors>& found) {
    std::vector<double> out(truth.size(), std::numeric_limits<double>::infinity());
    std::vector<bool> used_t(truth.size()), used_f(found.size());
    std::vector<std::vector<double>> d(truth.size(), std::vector<double>(found.size()));
    for (std::size_t i = 0; i < truth.size(); ++i)
        for (std::size_t j = 0; j < found.size(); ++j) d[i][j] = latsep::dist_lattice(truth[i], found[j]).value;
    for (std::size_t n = 0; n < std::min(truth.size(), found.size()); ++n) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < truth.size(); ++i)
            for (std::size_t j = 0; j < found.size(); ++j)
                if (!used_t[i] && !used_f[j] && d[i][j] < best) {
                    best = d[i][j];
                    bi = i;
                    bj = j;
                }
        used_t[bi] = used_f[bj] = true;
        out[bi] = best;
    }
    return out;
}

inline std::vector<latsep::LatticeDescriptors> descriptors(const latsep::SeparationResult& r) {
    std::vector<latsep::LatticeDescriptors> out;
    for (const auto& l : r.layers) out.push_back(l.descriptors);
    return out;
}

}  // namespace scenes
