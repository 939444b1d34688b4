#include "latsep/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

#include "latsep/error.hpp"
#include "latsep/parallel.hpp"

namespace latsep {

namespace {

using std::numbers::pi;

constexpr int kKernelHalfWidth = 6;
constexpr double kKaiserBeta = 8.0;
constexpr int kKernelSteps = 8192;
// Magnitudes at or below this are rounding residue of an empty spectrum.
constexpr double kNumericalZero = 1e-9;

// Normalized Kaiser-windowed sinc weights for fractional offsets
// t = step / kKernelSteps.
// Row t holds the 2a taps at integer offsets -a+1 .. a relative to floor(s).
const std::vector<double>& kernel_table() {
    static const std::vector<double> table = [] {
        constexpr int taps = 2 * kKernelHalfWidth;
        std::vector<double> t(static_cast<std::size_t>(kKernelSteps + 1) * taps);
        auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x); };
        const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
        auto window = [&](double x) {
            const double u = x / kKernelHalfWidth;
            return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / norm;
        };
        for (int step = 0; step <= kKernelSteps; ++step) {
            const double frac = double(step) / kKernelSteps;
            double sum = 0.0;
            for (int k = 0; k < taps; ++k) {
                const double x = double(k - kKernelHalfWidth + 1) - frac;
                const double v = std::abs(x) < kKernelHalfWidth ? sinc(x) * window(x) : 0.0;
                t[static_cast<std::size_t>(step) * taps + k] = v;
                sum += v;
            }
            for (int k = 0; k < taps; ++k) t[static_cast<std::size_t>(step) * taps + k] /= sum;
        }
        return t;
    }();
    return table;
}

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

Sinogram radon(const GrayImage& img, int n_angles, bool subtract_mean) {
    if (img.empty()) throw BadDimensions("image is empty");
    if (n_angles < 2) throw BadDimensions("at least two projection angles are required");
    const int w = img.width(), h = img.height();
    const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
    const int half = static_cast<int>(std::ceil(std::hypot(cx, cy))) + kKernelHalfWidth + 1;
    const int len = 2 * half + 1;

    Sinogram s;
    s.angles.resize(static_cast<std::size_t>(n_angles));
    for (int a = 0; a < n_angles; ++a) s.angles[a] = pi * a / n_angles;
    s.offsets.resize(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) s.offsets[i] = double(i - half);
    s.values.assign(static_cast<std::size_t>(n_angles) * len, 0.0);

    const double mean = subtract_mean ? img.mean() : 0.0;
    std::vector<int> nz;  // indices of pixels with nonzero contribution
    nz.reserve(img.size());
    for (int i = 0; i < static_cast<int>(img.size()); ++i)
        if (img.pixels()[i] - mean != 0.0) nz.push_back(i);

    const auto& table = kernel_table();
    constexpr int taps = 2 * kKernelHalfWidth;
    parallel_for(static_cast<std::size_t>(n_angles), [&](std::size_t a) {
        const double c = std::cos(s.angles[a]), sn = std::sin(s.angles[a]);
        double* row = s.values.data() + a * len;
        for (int i : nz) {
            const int x = i % w, y = i / w;
            const double v = img.pixels()[i] - mean;
            const double pos = (x - cx) * c + (y - cy) * sn + half;
            const double fl = std::floor(pos);
            const int base = static_cast<int>(fl) - kKernelHalfWidth + 1;
            const int step = static_cast<int>(std::lround((pos - fl) * kKernelSteps));
            const double* k = table.data() + static_cast<std::size_t>(step) * taps;
            for (int t = 0; t < taps; ++t) row[base + t] += v * k[t];
        }
    });
    return s;
}

PolarSpectrum polar_spectrum(const GrayImage& img, int n_angles, bool subtract_mean) {
    const Sinogram s = radon(img, n_angles, subtract_mean);
    const int len = static_cast<int>(s.n_offsets());
    const int nfft = next_pow2(2 * len);
    const int nr = nfft / 2 + 1;

    PolarSpectrum p;
    p.angles = s.angles;
    p.nfft = nfft;
    p.radii.resize(static_cast<std::size_t>(nr));
    for (int r = 0; r < nr; ++r) p.radii[r] = double(r) / nfft;
    p.magnitudes.assign(s.n_angles() * nr, 0.0);

    double* in = fftw_alloc_real(static_cast<std::size_t>(nfft));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(nr));
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_plan_mutex());
        plan = fftw_plan_dft_r2c_1d(nfft, in, out, FFTW_ESTIMATE);
    }
    for (std::size_t a = 0; a < s.n_angles(); ++a) {
        const auto row = s.row(a);
        std::fill(in, in + nfft, 0.0);
        std::copy(row.begin(), row.end(), in);
        fftw_execute(plan);
        double* dst = p.magnitudes.data() + a * nr;
        for (int r = 0; r < nr; ++r) dst[r] = std::hypot(out[r][0], out[r][1]);
    }
    {
        std::lock_guard lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return p;
}

double radial_refine(std::span<const double> signal, double gamma0, double sigma_f) {
    const int n = static_cast<int>(signal.size());
    if (!(gamma0 > 0.0) || gamma0 > n - 1) throw OutOfRange("gamma0 outside the signal support");
    if (!(sigma_f > 0.0)) throw InvalidArgument("sigma_f must be positive");
    const double total = std::accumulate(signal.begin(), signal.end(), 0.0);
    const int reach = static_cast<int>(std::ceil(4.0 * sigma_f));
    const double inv2s2 = 1.0 / (2.0 * sigma_f * sigma_f);

    auto score = [&](double period) {
        double corr = 0.0, mass = 0.0;
        for (int k = 1; k * period <= n - 1; ++k) {
            const double c = k * period;
            const int lo = std::max(0, static_cast<int>(std::floor(c)) - reach);
            const int hi = std::min(n - 1, static_cast<int>(std::ceil(c)) + reach);
            for (int i = lo; i <= hi; ++i) {
                const double g = std::exp(-(i - c) * (i - c) * inv2s2);
                corr += signal[i] * g;
                mass += g;
            }
        }
        // Correlation with the train minus its mean over the support.
        return corr - total * mass / n;
    };

    double best = gamma0;
    double best_score = score(gamma0);
    for (int k = 1; k <= 50; ++k) {
        for (double sign : {-1.0, 1.0}) {
            const double period = gamma0 + sign * 0.01 * k;
            if (period <= 0.0) continue;
            const double v = score(period);
            if (v > best_score) {
                best_score = v;
                best = period;
            }
        }
    }
    return best;
}

std::vector<SpectralPeak> find_peaks(const PolarSpectrum& spec, int J, const PeakOptions& opts) {
    if (J < 1) throw InvalidArgument("J must be at least 1");
    const int na = static_cast<int>(spec.n_angles());
    const int nr = static_cast<int>(spec.n_radii());
    const int r0 = std::max(1, opts.dc_exclusion_bins + 1);
    if (na == 0 || nr <= r0) throw EmptySpectrum("spectrum has no usable bins");

    std::vector<int> cells;
    cells.reserve(static_cast<std::size_t>(na) * (nr - r0));
    for (int a = 0; a < na; ++a)
        for (int r = r0; r < nr; ++r)
            if (spec.at(a, r) > kNumericalZero) cells.push_back(a * nr + r);
    if (cells.empty()) throw EmptySpectrum("all non-DC magnitudes are zero");
    std::stable_sort(cells.begin(), cells.end(),
                     [&](int x, int y) { return spec.magnitudes[x] > spec.magnitudes[y]; });

    // Descending sweep with union-find; the component count is tracked after
    // each group of equal magnitudes.
    std::vector<int> parent(spec.magnitudes.size(), -1);
    std::vector<int> top(spec.magnitudes.size(), -1);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto add = [&](int c) {
        parent[c] = c;
        top[c] = c;
        int merged = 0;
        const int a = c / nr, r = c % nr;
        for (int da = -1; da <= 1; ++da)
            for (int dr = -1; dr <= 1; ++dr) {
                if (!da && !dr) continue;
                const int rr = r + dr;
                if (rr < r0 || rr >= nr) continue;
                const int aa = (a + da + na) % na;  // rows 0 and na-1 are adjacent
                const int nb = aa * nr + rr;
                if (parent[nb] < 0) continue;
                const int ra = find(c), rb = find(nb);
                if (ra == rb) continue;
                // Keep the root whose top cell is higher.
                if (spec.magnitudes[top[ra]] >= spec.magnitudes[top[rb]]) {
                    parent[rb] = ra;
                } else {
                    parent[ra] = rb;
                }
                ++merged;
            }
        return 1 - merged;
    };

    int count = 0, best_count = 0;
    std::size_t stop = 0, best_stop = 0;
    for (std::size_t i = 0; i < cells.size();) {
        const double level = spec.magnitudes[cells[i]];
        for (; i < cells.size() && spec.magnitudes[cells[i]] == level; ++i) count += add(cells[i]);
        if (count > best_count) {
            best_count = count;
            best_stop = i;
        }
        if (count == J) {
            stop = i;
            break;
        }
    }
    if (stop == 0) {
        // J components never coexist: use the threshold with the most components.
        stop = best_stop;
        std::fill(parent.begin(), parent.end(), -1);
        for (std::size_t i = 0; i < stop; ++i) add(cells[i]);
    }

    // Replay the sweep prefix to collect the components alive at the threshold.
    std::vector<int> roots;
    for (std::size_t i = 0; i < stop; ++i) {
        const int c = cells[i];
        if (find(c) == c) roots.push_back(top[c]);
    }
    std::sort(roots.begin(), roots.end(), [&](int x, int y) {
        if (spec.magnitudes[x] != spec.magnitudes[y]) return spec.magnitudes[x] > spec.magnitudes[y];
        return x < y;
    });

    const double dalpha = pi / na;
    std::vector<SpectralPeak> peaks;
    for (int c : roots) {
        const int a = c / nr, r = c % nr;
        const double rb = radial_refine(spec.row(static_cast<std::size_t>(a)), double(r), opts.sigma_f);
        double angle = spec.angles[a];
        if (opts.refine_angle) {
            auto sample = [&](int row) {
                const int aa = (row + na) % na;
                const double f = std::clamp(rb, 0.0, double(nr - 1));
                const int i0 = std::min(static_cast<int>(f), nr - 2);
                const double t = f - i0;
                return (1.0 - t) * spec.at(aa, i0) + t * spec.at(aa, i0 + 1);
            };
            const double l = sample(a - 1), m = sample(a), rr = sample(a + 1);
            const double den = l - 2.0 * m + rr;
            if (den < 0.0) angle += dalpha * std::clamp(0.5 * (l - rr) / den, -0.5, 0.5);
            if (angle < 0.0) angle += pi;
            if (angle >= pi) angle -= pi;
        }
        peaks.push_back({rb / spec.nfft, angle, spec.magnitudes[c]});
    }
    return peaks;
}

Complex subpixel_refine(const GrayImage& img, int x, int y) {
    if (!img.contains(x, y)) throw OutOfRange("pixel outside the image");
    auto axis = [&](int dx, int dy) {
        if (!img.contains(x - dx, y - dy) || !img.contains(x + dx, y + dy)) {
            throw FlatNeighborhood("peak on the image border");
        }
        const double lo = img.at(x - dx, y - dy), c = img.at(x, y), hi = img.at(x + dx, y + dy);
        if (!(lo > 0.0 && c > 0.0 && hi > 0.0)) throw FlatNeighborhood("non-positive neighborhood");
        const double llo = std::log(lo), lc = std::log(c), lhi = std::log(hi);
        const double den = 2.0 * (lhi + llo - 2.0 * lc);
        if (std::abs(den) < 1e-12) throw FlatNeighborhood("vanishing curvature");
        return std::clamp(-(lhi - llo) / den, -0.5, 0.5);
    };
    return {x + axis(1, 0), y + axis(0, 1)};
}

Complex subpixel_refine_or_center(const GrayImage& img, int x, int y) {
    auto axis = [&](int dx, int dy) {
        if (!img.contains(x - dx, y - dy) || !img.contains(x + dx, y + dy)) return 0.0;
        const double lo = img.at(x - dx, y - dy), c = img.at(x, y), hi = img.at(x + dx, y + dy);
        if (!(lo > 0.0 && c > 0.0 && hi > 0.0)) return 0.0;
        const double llo = std::log(lo), lc = std::log(c), lhi = std::log(hi);
        const double den = 2.0 * (lhi + llo - 2.0 * lc);
        if (std::abs(den) < 1e-12) return 0.0;
        return std::clamp(-(lhi - llo) / den, -0.5, 0.5);
    };
    return {x + axis(1, 0), y + axis(0, 1)};
}

std::vector<std::pair<int, int>> local_maxima(const GrayImage& img, double thresh) {
    std::vector<std::pair<int, int>> out;
    const int w = img.width(), h = img.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = img.at(x, y);
            if (v < thresh || v <= 0.0) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    if (!img.contains(x + dx, y + dy)) continue;
                    const double n = img.at(x + dx, y + dy);
                    if (n > v || (n == v && (dy < 0 || (dy == 0 && dx < 0)))) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) out.emplace_back(x, y);
        }
    }
    return out;
}

int count_particles(const GrayImage& img, double thresh) {
    return static_cast<int>(local_maxima(img, thresh).size());
}

}  // namespace latsep
