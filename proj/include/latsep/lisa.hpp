#pragma once

#include <cstdint>
#include <vector>

#include "latsep/image.hpp"
#include "latsep/lattice.hpp"
#include "latsep/spectral.hpp"

namespace latsep {

struct LisaConfig {
    int J = 6;                     // spectral components considered per step
    int K = 10;                    // correction iterations; 1 disables correction
    double gamma = 10.0;           // over-fit penalty
    double epsilon = 1e-8;         // division guard in the over-fit ratio
    double sigma = 1.35;           // particle standard deviation, pixels
    double stop_mean = 0.01;       // residual mean that ends the extraction
    double particle_thresh = 0.5;  // local-maximum height counted as a particle
    bool use_otsu = false;         // zero pixels below the Otsu level before detection
    int n_angles = 360;            // projection angles over [0, pi)
    int max_layers = 12;           // hard cap on extracted layers
    bool fit_lattice = true;       // least-squares polish against detected particles
};

/// Throws InvalidArgument unless every field is in range and J >= 2.
void validate(const LisaConfig& cfg);

struct CandidateScore {
    double underfit = 0.0;
    double overfit = 0.0;
    double total = 0.0;
};

struct Candidate {
    LatticeDescriptors descriptors;
    Complex mu{0.0, 0.0};
    CandidateScore score;

    TranslatedLattice lattice() const { return {descriptors, mu}; }
};

struct SeparationResult {
    std::vector<Candidate> layers;  // extraction order
    double residual_mean = 0.0;
    int iterations = 0;             // identification rounds run, corrections included
    bool no_valid_candidate = false;
};

/// Re-stamps every local maximum at or above thresh with a unit Gaussian of
/// standard deviation sigma, composited by maximum.
GrayImage preprocess(const GrayImage& img, double sigma, double thresh = 0.5, bool use_otsu = false);

/// Sub-pixel particle centers: local maxima at or above thresh, refined.
std::vector<Complex> detect_particles(const GrayImage& img, double thresh);

/// Maximal between-class variance threshold on a 256-bin histogram of [0, 1].
/// Throws ConstantImage for images with a single intensity.
double otsu_threshold(const GrayImage& img);

/// Spatial lattice dual to the frequency pair, canonicalized.
LatticeDescriptors candidate_from_peaks(const SpectralPeak& p1, const SpectralPeak& p2);

/// Translation maximizing the correlation of the stamped lattice with img,
/// reduced to the representative of smallest modulus.
Complex find_translation(const LatticeDescriptors& d, const GrayImage& img, double sigma);

/// Representative of mu modulo the lattice with the smallest modulus.
Complex reduce_translation(const LatticeDescriptors& d, Complex mu);

/// Under-fit, over-fit and total energy of the candidate on image U.
CandidateScore score_candidate(const LatticeDescriptors& d, Complex mu, const GrayImage& U, const LisaConfig& cfg);

/// Least-squares update of basis and translation from particles near the
/// candidate's points. Returns the input when too few particles match.
TranslatedLattice fit_to_particles(const TranslatedLattice& lat, std::span<const Complex> particles, double radius,
                                   int width, int height);

/// Best candidate over all unordered non-collinear peak pairs of F(U).
/// Throws NoValidCandidate when no pair qualifies.
Candidate identify_best(const GrayImage& U, const LisaConfig& cfg);

/// Resampling correction: alternately removes the current candidate and
/// re-identifies on the remainder; returns the lowest-energy candidate seen.
Candidate correct_candidate(const GrayImage& U, const Candidate& first, const LisaConfig& cfg, int* rounds = nullptr);

/// Greedy layer extraction until the residual mean drops below stop_mean.
SeparationResult lisa_run(const GrayImage& img, const LisaConfig& cfg = {});

/// Adds independent N(0, s^2) offsets to each coordinate.
std::vector<Complex> perturb_lattice(std::span<const Complex> points, double s, std::uint64_t seed);

}  // namespace latsep
