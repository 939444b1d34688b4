#include "latsep/lisa.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include "latsep/error.hpp"
#include "latsep/parallel.hpp"

namespace latsep {
namespace {

constexpr double kCollinearTol = 1e-3;  // radians
constexpr double kFilledRadius = 1.5;   // in units of sigma
constexpr double kFitRadius = 1.5;      // in units of sigma
constexpr int kFitRounds = 3;
constexpr std::size_t kMinFitPairs = 6;
constexpr std::size_t kMinSplitPairs = 12;
constexpr double kSplitF = 25.0;
constexpr double kNoiseFloor = 0.01;  // pixels
constexpr int kMaxSplitDepth = 2;
constexpr double kTrimScale = 4.0;   // times the median match distance
constexpr double kMinTrim = 0.25;    // pixels

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    const int w = img.width(), h = img.height();
    const int r = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += kernel[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& k : kernel) k /= sum;
    GrayImage tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = std::max(-r, -x); i <= std::min(r, w - 1 - x); ++i) acc += kernel[i + r] * img.at(x + i, y);
            tmp.at(x, y) = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = std::max(-r, -y); i <= std::min(r, h - 1 - y); ++i) acc += kernel[i + r] * tmp.at(x, y + i);
            out.at(x, y) = acc;
        }
    }
    return out;
}

double sample_bilinear(const GrayImage& img, Complex p) {
    const double fx = std::floor(p.real()), fy = std::floor(p.imag());
    const int x = static_cast<int>(fx), y = static_cast<int>(fy);
    const double tx = p.real() - fx, ty = p.imag() - fy;
    auto px = [&](int xx, int yy) { return img.contains(xx, yy) ? img.at(xx, yy) : 0.0; };
    return (1 - ty) * ((1 - tx) * px(x, y) + tx * px(x + 1, y)) + ty * ((1 - tx) * px(x, y + 1) + tx * px(x + 1, y + 1));
}

// Coordinates of p in the basis (b1, b2).
std::pair<double, double> coordinates(const LatticeBasis& b, Complex p) {
    const double det = b.b1.real() * b.b2.imag() - b.b1.imag() * b.b2.real();
    const double s = (p.real() * b.b2.imag() - p.imag() * b.b2.real()) / det;
    const double t = (b.b1.real() * p.imag() - b.b1.imag() * p.real()) / det;
    return {s, t};
}

// Nearest lattice vector k1 b1 + k2 b2 to p, for a reduced basis.
std::pair<long, long> nearest_coefficients(const LatticeBasis& b, Complex p) {
    const auto [s, t] = coordinates(b, p);
    const long s0 = std::lround(s), t0 = std::lround(t);
    std::pair<long, long> best{s0, t0};
    double best_d = std::numeric_limits<double>::infinity();
    for (long ds = -1; ds <= 1; ++ds) {
        for (long dt = -1; dt <= 1; ++dt) {
            const Complex q = double(s0 + ds) * b.b1 + double(t0 + dt) * b.b2;
            const double d = std::abs(p - q);
            if (d < best_d - 1e-12) {
                best_d = d;
                best = {s0 + ds, t0 + dt};
            }
        }
    }
    return best;
}

double correlation(const GrayImage& smooth, std::span<const Complex> points, Complex tau) {
    double acc = 0.0;
    for (const Complex& p : points) acc += sample_bilinear(smooth, p + tau);
    return acc;
}

double log_parabola_offset(double cm, double c0, double cp) {
    if (cm <= 0.0 || c0 <= 0.0 || cp <= 0.0) return 0.0;
    const double lm = std::log(cm), l0 = std::log(c0), lp = std::log(cp);
    const double den = lm - 2.0 * l0 + lp;
    if (!(den < 0.0)) return 0.0;
    return std::clamp(0.5 * (lm - lp) / den, -0.5, 0.5);
}

Complex translation_on(const LatticeDescriptors& d, const GrayImage& smooth) {
    const LatticeBasis b = d.basis();
    const int w = smooth.width(), h = smooth.height();
    const std::array<Complex, 4> corners{Complex{}, b.b1, b.b2, b.b1 + b.b2};
    double cx0 = 0, cx1 = 0, cy0 = 0, cy1 = 0;
    for (const Complex& c : corners) {
        cx0 = std::min(cx0, c.real());
        cx1 = std::max(cx1, c.real());
        cy0 = std::min(cy0, c.imag());
        cy1 = std::max(cy1, c.imag());
    }
    const double margin = std::max(cx1 - cx0, cy1 - cy0) + 2.0;
    const std::vector<Complex> points =
        generate_points({d, Complex{}}, Window::of_image(w, h).grown(margin));
    const int tx0 = static_cast<int>(std::floor(cx0)), tx1 = static_cast<int>(std::ceil(cx1));
    const int ty0 = static_cast<int>(std::floor(cy0)), ty1 = static_cast<int>(std::ceil(cy1));
    double best = -1.0;
    Complex best_tau{};
    double best_norm = 0.0;
    for (int ty = ty0; ty <= ty1; ++ty) {
        for (int tx = tx0; tx <= tx1; ++tx) {
            const Complex tau(tx, ty);
            const double c = correlation(smooth, points, tau);
            const double tol = 1e-12 * std::max(1.0, std::abs(best));
            if (c > best + tol) {
                best = c;
                best_tau = tau;
                best_norm = std::abs(reduce_translation(d, tau));
            } else if (c >= best - tol) {
                const double n = std::abs(reduce_translation(d, tau));
                if (n < best_norm - 1e-12) {
                    best_tau = tau;
                    best_norm = n;
                }
            }
        }
    }
    const double ox = log_parabola_offset(correlation(smooth, points, best_tau - 1.0), best,
                                          correlation(smooth, points, best_tau + 1.0));
    const double oy = log_parabola_offset(correlation(smooth, points, best_tau - Complex(0, 1)), best,
                                          correlation(smooth, points, best_tau + Complex(0, 1)));
    return reduce_translation(d, best_tau + Complex(ox, oy));
}

int filled_slots(std::span<const Complex> points, const GrayImage& overlap, double thresh, double radius) {
    const auto maxima = local_maxima(overlap, thresh);
    int filled = 0;
    for (const Complex& p : points) {
        for (const auto& [x, y] : maxima) {
            if (std::abs(Complex(x, y) - p) <= radius) {
                ++filled;
                break;
            }
        }
    }
    return filled;
}

CandidateScore score_with(const LatticeDescriptors& d, Complex mu, const GrayImage& U, const GrayImage& FU,
                          const LisaConfig& cfg) {
    const int w = U.width(), h = U.height();
    const TranslatedLattice lat{d, mu};
    const GrayImage T = rasterize(std::span(&lat, 1), cfg.sigma, w, h);
    GrayImage remainder = subtract_clamped(U, T);
    if (const double peak = remainder.max(); peak > 0.0)
        for (double& v : remainder.pixels()) v /= peak;
    const GrayImage R = preprocess(remainder, cfg.sigma, cfg.particle_thresh);
    CandidateScore s;
    s.underfit = l2_norm(pointwise_product(R, FU));
    const std::vector<Complex> points = generate_points(lat, Window::of_image(w, h));
    const int filled = filled_slots(points, pointwise_min(T, FU), cfg.particle_thresh, kFilledRadius * cfg.sigma);
    s.overfit = std::abs(double(points.size()) / (double(filled) + cfg.epsilon) - 1.0);
    s.total = s.underfit + cfg.gamma * s.overfit;
    return s;
}

bool better(const Candidate& a, const Candidate& b) {
    const double ta = a.score.total, tb = b.score.total;
    if (std::abs(ta - tb) > 1e-12 * std::max(1.0, std::max(std::abs(ta), std::abs(tb)))) return ta < tb;
    const double ma = std::abs(a.descriptors.beta), mb = std::abs(b.descriptors.beta);
    if (std::abs(ma - mb) > 1e-12 * std::max(ma, mb)) return ma < mb;
    return std::arg(a.descriptors.beta) < std::arg(b.descriptors.beta);
}

using Matrix3 = std::array<std::array<double, 3>, 3>;

double det3(const Matrix3& x) {
    return x[0][0] * (x[1][1] * x[2][2] - x[1][2] * x[2][1]) - x[0][1] * (x[1][0] * x[2][2] - x[1][2] * x[2][0]) +
           x[0][2] * (x[1][0] * x[2][1] - x[1][1] * x[2][0]);
}

struct Match {
    long k1, k2;
    Complex p;
};

// Particles within cutoff of their nearest point of mu + k1 b1 + k2 b2, with
// that point's coefficients.
std::vector<Match> match_particles(Complex mu, const LatticeBasis& b, std::span<const Complex> particles,
                                   const Window& window, double cutoff) {
    std::vector<Match> out;
    for (const Complex& p : particles) {
        if (!window.contains(p)) continue;
        const auto [k1, k2] = nearest_coefficients(b, p - mu);
        const Complex q = mu + double(k1) * b.b1 + double(k2) * b.b2;
        if (std::abs(p - q) <= cutoff) out.push_back({k1, k2, p});
    }
    return out;
}

struct AffineFit {
    Complex mu, b1, b2;
    double rss = 0.0;  // summed squared distance, both coordinates

    Complex at(const Match& m) const { return mu + double(m.k1) * b1 + double(m.k2) * b2; }
};

// Least squares for p = mu + k1 b1 + k2 b2; the normal equations are shared by
// both coordinates, so the complex right-hand side solves them at once.
std::optional<AffineFit> solve_affine(std::span<const Match> matches) {
    if (matches.size() < kMinFitPairs) return std::nullopt;
    Matrix3 a{};
    std::array<Complex, 3> rhs{};
    for (const Match& m : matches) {
        const std::array<double, 3> row{1.0, double(m.k1), double(m.k2)};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) a[i][j] += row[i] * row[j];
            rhs[i] += row[i] * m.p;
        }
    }
    const double det = det3(a);
    if (!(std::abs(det) > 1e-9 * std::pow(double(matches.size()), 3))) return std::nullopt;
    std::array<Complex, 3> sol{};
    for (int c = 0; c < 3; ++c) {
        Complex acc{};
        for (int i = 0; i < 3; ++i) {
            Matrix3 e = a;
            for (int r = 0; r < 3; ++r) e[r][c] = r == i ? 1.0 : 0.0;
            acc += rhs[i] * det3(e);
        }
        sol[c] = acc / det;
    }
    AffineFit fit{sol[0], sol[1], sol[2], 0.0};
    for (const Match& m : matches) fit.rss += std::norm(m.p - fit.at(m));
    return fit;
}

// Matches within radius, fitted, then re-matched against the fit within a
// band scaled to the median match distance: wide for jittered particles,
// tight for clean ones so particles of other layers drop out.
std::vector<Match> robust_matches(const TranslatedLattice& lat, std::span<const Complex> particles,
                                  const Window& window, double radius) {
    const LatticeBasis b = lat.descriptors.basis();
    std::vector<Match> first = match_particles(lat.mu, b, particles, window, radius);
    const std::optional<AffineFit> fit = solve_affine(first);
    if (!fit) return first;
    std::vector<double> err;
    err.reserve(first.size());
    for (const Match& m : first) err.push_back(std::abs(m.p - fit->at(m)));
    std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
    const double widest = 0.5 * std::min(std::abs(b.b1), std::abs(b.b2));
    const double cutoff = std::clamp(kTrimScale * err[err.size() / 2], kMinTrim, std::max(kMinTrim, widest));
    const LatticeBasis fitted{fit->b1, fit->b2};
    try {
        validate_basis(fitted);
    } catch (const Error&) {
        return first;
    }
    return match_particles(fit->mu, fitted, particles, window, cutoff);
}

bool has_particles(const GrayImage& img, double thresh) { return !local_maxima(img, thresh).empty(); }

}  // namespace

void validate(const LisaConfig& cfg) {
    if (cfg.J < 2) throw InvalidArgument("J must be at least 2");
    if (cfg.K < 1) throw InvalidArgument("K must be at least 1");
    if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) throw InvalidArgument("gamma must be non-negative");
    if (!(cfg.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) throw InvalidArgument("sigma must be positive");
    if (!(cfg.stop_mean >= 0.0)) throw InvalidArgument("stop_mean must be non-negative");
    if (!(cfg.particle_thresh > 0.0 && cfg.particle_thresh <= 1.0))
        throw InvalidArgument("particle_thresh must be in (0, 1]");
    if (cfg.n_angles < 4) throw InvalidArgument("n_angles must be at least 4");
    if (cfg.max_layers < 1) throw InvalidArgument("max_layers must be at least 1");
}

std::vector<Complex> detect_particles(const GrayImage& img, double thresh) {
    std::vector<Complex> out;
    for (const auto& [x, y] : local_maxima(img, thresh)) out.push_back(subpixel_refine_or_center(img, x, y));
    return out;
}

GrayImage preprocess(const GrayImage& img, double sigma, double thresh, bool use_otsu) {
    if (!use_otsu) return stamp_points(detect_particles(img, thresh), sigma, img.width(), img.height());
    GrayImage denoised = img;
    double level = 0.0;
    try {
        level = otsu_threshold(img);
    } catch (const ConstantImage&) {
        level = 0.0;
    }
    for (double& v : denoised.pixels())
        if (v < level) v = 0.0;
    return stamp_points(detect_particles(denoised, thresh), sigma, img.width(), img.height());
}

double otsu_threshold(const GrayImage& img) {
    if (img.empty()) throw ConstantImage("empty image");
    std::array<double, 256> hist{};
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : img.pixels()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        const int bin = std::clamp(static_cast<int>(std::clamp(v, 0.0, 1.0) * 256.0), 0, 255);
        hist[bin] += 1.0;
    }
    if (hi == lo) throw ConstantImage("image has a single intensity");
    const double total = double(img.size());
    double sum_all = 0.0;
    for (int i = 0; i < 256; ++i) sum_all += i * hist[i];
    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    int best_k = 0;
    for (int k = 0; k < 255; ++k) {
        w0 += hist[k];
        sum0 += k * hist[k];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            best_k = k;
        }
    }
    return (best_k + 1) / 256.0;
}

LatticeDescriptors candidate_from_peaks(const SpectralPeak& p1, const SpectralPeak& p2) {
    double diff = std::fmod(std::abs(p1.angle - p2.angle), std::numbers::pi);
    diff = std::min(diff, std::numbers::pi - diff);
    if (diff <= kCollinearTol || p1.radius <= 0.0 || p2.radius <= 0.0)
        throw CollinearPeaks("frequency pair does not span the plane");
    const Complex w1 = p1.frequency(), w2 = p2.frequency();
    const double det = w1.real() * w2.imag() - w1.imag() * w2.real();
    const Complex b1 = Complex(w2.imag(), -w2.real()) / det;
    const Complex b2 = Complex(-w1.imag(), w1.real()) / det;
    return to_descriptors({b1, b2});
}

Complex reduce_translation(const LatticeDescriptors& d, Complex mu) {
    const LatticeBasis b = d.basis();
    const auto [k1, k2] = nearest_coefficients(b, mu);
    return mu - (double(k1) * b.b1 + double(k2) * b.b2);
}

Complex find_translation(const LatticeDescriptors& d, const GrayImage& img, double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    return translation_on(d, gaussian_blur(img, sigma));
}

CandidateScore score_candidate(const LatticeDescriptors& d, Complex mu, const GrayImage& U, const LisaConfig& cfg) {
    return score_with(d, mu, U, preprocess(U, cfg.sigma, cfg.particle_thresh, cfg.use_otsu), cfg);
}

TranslatedLattice fit_to_particles(const TranslatedLattice& lat, std::span<const Complex> particles, double radius,
                                   int width, int height) {
    TranslatedLattice cur = lat;
    const Window window = Window::of_image(width, height).grown(radius);
    for (int round = 0; round < kFitRounds; ++round) {
        const LatticeBasis b = cur.descriptors.basis();
        const std::vector<Match> matches = robust_matches(cur, particles, window, radius);
        const std::optional<AffineFit> fit = solve_affine(matches);
        if (!fit) return cur;
        const LatticeBasis fitted{fit->b1, fit->b2};
        try {
            validate_basis(fitted);
        } catch (const Error&) {
            return cur;
        }
        const double change =
            std::max(std::abs(fitted.b1 - b.b1) / std::abs(b.b1), std::abs(fitted.b2 - b.b2) / std::abs(b.b2));
        if (change > 0.1) return cur;
        cur.descriptors = to_descriptors(fitted);
        cur.mu = reduce_translation(cur.descriptors, fit->mu);
    }
    return cur;
}

namespace {

// Coset sub-lattice of index 2: basis and the shift of coset 1, per parity mode
// on k1, on k2, or on k1 + k2.
std::pair<LatticeBasis, Complex> coset_lattice(int mode, Complex b1, Complex b2) {
    switch (mode) {
        case 0: return {{2.0 * b1, b2}, b1};
        case 1: return {{b1, 2.0 * b2}, b2};
        default: return {{b1 + b2, 2.0 * b2}, b1};
    }
}

long parity(int mode, const Match& m) {
    const long v = mode == 0 ? m.k1 : mode == 1 ? m.k2 : m.k1 + m.k2;
    return ((v % 2) + 2) % 2;
}

// Two translated copies of a sparser lattice can coincide with a denser
// lattice up to a fraction of a pixel. Fitting each index-2 coset on its own
// exposes them: a split is accepted when the F statistic of separate against
// pooled fits exceeds kSplitF.
std::optional<Candidate> split_cosets(const Candidate& c, std::span<const Complex> particles, const GrayImage& U,
                                      const GrayImage& FU, const LisaConfig& cfg) {
    const double radius = kFitRadius * cfg.sigma;
    const Window window = Window::of_image(U.width(), U.height()).grown(radius);
    const std::vector<Match> matches = robust_matches(c.lattice(), particles, window, radius);
    const std::optional<AffineFit> pooled = solve_affine(matches);
    if (!pooled || matches.size() < 2 * kMinSplitPairs) return std::nullopt;
    const double dof = 2.0 * double(matches.size()) - 12.0;
    double best_f = kSplitF;
    int best_mode = -1;
    std::array<AffineFit, 2> best_fits{};
    for (int mode = 0; mode < 3; ++mode) {
        std::array<std::vector<Match>, 2> groups;
        for (const Match& m : matches) groups[parity(mode, m)].push_back(m);
        if (groups[0].size() < kMinSplitPairs || groups[1].size() < kMinSplitPairs) continue;
        const auto f0 = solve_affine(groups[0]);
        const auto f1 = solve_affine(groups[1]);
        if (!f0 || !f1) continue;
        const double separate = f0->rss + f1->rss;
        const double noise = std::max(separate / dof, kNoiseFloor * kNoiseFloor);
        const double f = (pooled->rss - separate) / 6.0 / noise;
        if (f > best_f) {
            best_f = f;
            best_mode = mode;
            best_fits = {*f0, *f1};
        }
    }
    if (best_mode < 0) return std::nullopt;
    std::optional<Candidate> best;
    for (int r = 0; r < 2; ++r) {
        const AffineFit& fit = best_fits[r];
        const auto [basis, shift] = coset_lattice(best_mode, fit.b1, fit.b2);
        Candidate part;
        try {
            part.descriptors = to_descriptors(basis);
        } catch (const DegenerateBasis&) {
            continue;
        }
        part.mu = reduce_translation(part.descriptors, fit.mu + double(r) * shift);
        const TranslatedLattice refined = fit_to_particles(part.lattice(), particles, radius, U.width(), U.height());
        part.descriptors = refined.descriptors;
        part.mu = refined.mu;
        part.score = score_with(part.descriptors, part.mu, U, FU, cfg);
        if (!best || better(part, *best)) best = part;
    }
    return best;
}

}  // namespace

Candidate identify_best(const GrayImage& U, const LisaConfig& cfg) {
    const GrayImage FU = preprocess(U, cfg.sigma, cfg.particle_thresh, cfg.use_otsu);
    if (!has_particles(FU, cfg.particle_thresh)) throw NoValidCandidate("no particles detected");
    const PolarSpectrum spec = polar_spectrum(FU, cfg.n_angles, true);
    std::vector<SpectralPeak> peaks;
    try {
        peaks = find_peaks(spec, cfg.J);
    } catch (const EmptySpectrum&) {
        throw NoValidCandidate("spectrum has no peaks");
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < peaks.size(); ++i)
        for (std::size_t j = i + 1; j < peaks.size(); ++j) pairs.emplace_back(i, j);

    const GrayImage smooth = gaussian_blur(FU, cfg.sigma);
    const std::vector<Complex> particles = cfg.fit_lattice ? detect_particles(FU, cfg.particle_thresh) : std::vector<Complex>{};
    std::vector<std::optional<Candidate>> scored(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t n) {
        LatticeDescriptors d;
        try {
            d = candidate_from_peaks(peaks[pairs[n].first], peaks[pairs[n].second]);
        } catch (const CollinearPeaks&) {
            return;
        } catch (const DegenerateBasis&) {
            return;
        }
        // A cell longer than the image shows at most one row of particles.
        if (std::abs(d.beta * d.rho) > std::max(U.width(), U.height())) return;
        Candidate c;
        c.descriptors = d;
        c.mu = translation_on(d, smooth);
        if (cfg.fit_lattice) {
            const TranslatedLattice fitted =
                fit_to_particles(c.lattice(), particles, kFitRadius * cfg.sigma, U.width(), U.height());
            c.descriptors = fitted.descriptors;
            c.mu = fitted.mu;
        }
        c.score = score_with(c.descriptors, c.mu, U, FU, cfg);
        scored[n] = c;
    });
    std::optional<Candidate> best;
    for (const auto& c : scored)
        if (c && (!best || better(*c, *best))) best = c;
    if (!best) throw NoValidCandidate("every peak pair is collinear");
    if (cfg.fit_lattice) {
        for (int depth = 0; depth < kMaxSplitDepth; ++depth) {
            const std::optional<Candidate> part = split_cosets(*best, particles, U, FU, cfg);
            if (!part) break;
            best = part;
        }
    }
    return *best;
}

Candidate correct_candidate(const GrayImage& U, const Candidate& first, const LisaConfig& cfg, int* rounds) {
    const GrayImage FU = preprocess(U, cfg.sigma, cfg.particle_thresh, cfg.use_otsu);
    Candidate best = first;
    Candidate cur = first;
    int n = 0;
    for (int t = 1; t < cfg.K; ++t) {
        const TranslatedLattice lat = cur.lattice();
        const GrayImage T = rasterize(std::span(&lat, 1), cfg.sigma, U.width(), U.height());
        const GrayImage rem = preprocess(subtract_clamped(U, T), cfg.sigma, cfg.particle_thresh);
        if (!has_particles(rem, cfg.particle_thresh)) break;
        Candidate next;
        try {
            next = identify_best(rem, cfg);
        } catch (const NoValidCandidate&) {
            break;
        }
        ++n;
        next.score = score_with(next.descriptors, next.mu, U, FU, cfg);
        if (better(next, best)) best = next;
        cur = next;
    }
    if (rounds) *rounds = n;
    return best;
}

SeparationResult lisa_run(const GrayImage& img, const LisaConfig& cfg) {
    validate(cfg);
    if (img.empty()) throw BadDimensions("image is empty");
    SeparationResult result;
    GrayImage U = preprocess(img, cfg.sigma, cfg.particle_thresh, cfg.use_otsu);
    result.residual_mean = U.mean();
    while (static_cast<int>(result.layers.size()) < cfg.max_layers) {
        if (!has_particles(U, cfg.particle_thresh)) break;
        Candidate first;
        try {
            first = identify_best(U, cfg);
        } catch (const NoValidCandidate&) {
            result.no_valid_candidate = true;
            break;
        }
        int rounds = 0;
        const Candidate best = correct_candidate(U, first, cfg, &rounds);
        result.iterations += 1 + rounds;
        const TranslatedLattice lat = best.lattice();
        const GrayImage residual =
            subtract_clamped(U, rasterize(std::span(&lat, 1), cfg.sigma, U.width(), U.height()));
        const double mean = residual.mean();
        if (!(mean < result.residual_mean)) break;
        result.layers.push_back(best);
        result.residual_mean = mean;
        if (mean < cfg.stop_mean) break;
        U = preprocess(residual, cfg.sigma, cfg.particle_thresh);
    }
    return result;
}

std::vector<Complex> perturb_lattice(std::span<const Complex> points, double s, std::uint64_t seed) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("perturbation scale must be non-negative");
    std::vector<Complex> out(points.begin(), points.end());
    if (s == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, s);
    for (Complex& p : out) {
        const double dx = noise(rng);
        const double dy = noise(rng);
        p += Complex(dx, dy);
    }
    return out;
}

}  // namespace latsep
