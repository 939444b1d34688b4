#include "latsep/metric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "latsep/error.hpp"

namespace latsep {

namespace {

using std::numbers::pi;

constexpr double kLo = pi / 3.0;
constexpr double kHi = 2.0 * pi / 3.0;
constexpr double kZeroClamp = 1e-12;
constexpr int kGoldenIterations = 20;

double raw_scale(Complex x, Complex y, double w) {
    const double dl = std::abs(x) - std::abs(y);
    const double ang = std::abs(std::arg(x * std::conj(y)));
    return std::sqrt(w * dl * dl + (1.0 - w) * ang * ang);
}

double raw_shape(Complex x, Complex y) {
    return 2.0 * std::asinh(std::abs(x - y) / (2.0 * std::sqrt(x.imag() * y.imag())));
}

double quotient_scale(Complex x, Complex y, double w) { return std::min(raw_scale(x, y, w), raw_scale(-x, y, w)); }

double quotient_shape(Complex x, Complex y) {
    return std::min({raw_shape(x, y), raw_shape(x - 1.0, y), raw_shape(x + 1.0, y)});
}

struct Point {
    Complex beta;
    Complex rho;
};

double product(const Point& a, const Point& b, double w) {
    return std::hypot(quotient_scale(a.beta, b.beta, w), quotient_shape(a.rho, b.rho));
}

// Waypoints on the unit arc: (beta, e^{i phi}) and its swapped representation
// (e^{i phi} beta, -e^{-i phi}).
Point on_arc(Complex beta, double phi) { return {beta, std::polar(1.0, phi)}; }
Point swapped(Complex beta, double phi) {
    const Complex e = std::polar(1.0, phi);
    return {e * beta, -std::conj(e)};
}

struct Candidate {
    double value = INFINITY;
    PathKind path = PathKind::Direct;
    std::optional<double> phi, phi_prime;
};

void keep(Candidate& best, double v, PathKind path, std::optional<double> phi, std::optional<double> phi_prime) {
    if (v < best.value) best = {v, path, phi, phi_prime};
}

double golden_min(auto&& f, double lo, double hi, double& arg) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < kGoldenIterations; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if (fc < fd) {
        arg = c;
        return fc;
    }
    arg = d;
    return fd;
}

std::vector<double> angle_grid(int n, const Point& a, const Point& b) {
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n) + 5);
    for (int j = 0; j <= n; ++j) grid.push_back(kLo + j * (kHi - kLo) / n);
    // Arc angles of the inputs make exact equivalences reachable on the grid.
    for (const Point& p : {a, b}) {
        const double t = std::arg(p.rho);
        for (double s : {t, pi - t}) grid.push_back(std::clamp(s, kLo, kHi));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

std::pair<double, double> bracket(const std::vector<double>& grid, std::size_t i) {
    return {grid[i == 0 ? 0 : i - 1], grid[std::min(i + 1, grid.size() - 1)]};
}

Candidate raw_lattice(const Point& a, const Point& b, const MetricConfig& cfg) {
    const double w = cfg.w;
    const std::vector<double> grid = angle_grid(cfg.N, a, b);
    const std::size_t n = grid.size();

    // Head and tail legs shared by several families.
    auto head = [&](double phi) { return product(a, on_arc(a.beta, phi), w); };
    auto tail = [&](double phi2) { return product(on_arc(b.beta, phi2), b, w); };

    auto d1 = [&](double p2) { return product(a, on_arc(b.beta, p2), w) + tail(p2); };
    auto d2 = [&](double p2) { return product(a, swapped(b.beta, p2), w) + tail(p2); };
    auto d3 = [&](double p) { return head(p) + product(on_arc(a.beta, p), b, w); };
    auto d6 = [&](double p) { return head(p) + product(swapped(a.beta, p), b, w); };
    auto d4 = [&](double p, double p2) { return head(p) + product(on_arc(a.beta, p), on_arc(b.beta, p2), w) + tail(p2); };
    auto d5 = [&](double p, double p2) { return head(p) + product(on_arc(a.beta, p), swapped(b.beta, p2), w) + tail(p2); };
    auto d7 = [&](double p, double p2) { return head(p) + product(swapped(a.beta, p), on_arc(b.beta, p2), w) + tail(p2); };
    auto d8 = [&](double p, double p2) { return head(p) + product(swapped(a.beta, p), swapped(b.beta, p2), w) + tail(p2); };

    Candidate best;
    keep(best, product(a, b, w), PathKind::Direct, std::nullopt, std::nullopt);

    std::vector<double> heads(n), tails(n);
    std::vector<Point> arc_a(n), swap_a(n), arc_b(n), swap_b(n);
    for (std::size_t i = 0; i < n; ++i) {
        heads[i] = head(grid[i]);
        tails[i] = tail(grid[i]);
        arc_a[i] = on_arc(a.beta, grid[i]);
        swap_a[i] = swapped(a.beta, grid[i]);
        arc_b[i] = on_arc(b.beta, grid[i]);
        swap_b[i] = swapped(b.beta, grid[i]);
    }

    // One-angle families: best grid index per family, refined afterwards.
    struct Best1 { double v = INFINITY; std::size_t i = 0; };
    std::array<Best1, 4> one;  // D1, D2, D3, D6
    for (std::size_t i = 0; i < n; ++i) {
        const double v1 = product(a, arc_b[i], w) + tails[i];
        const double v2 = product(a, swap_b[i], w) + tails[i];
        const double v3 = heads[i] + product(arc_a[i], b, w);
        const double v6 = heads[i] + product(swap_a[i], b, w);
        for (auto [k, v] : {std::pair{0, v1}, {1, v2}, {2, v3}, {3, v6}})
            if (v < one[k].v) one[k] = {v, i};
    }

    struct Best2 { double v = INFINITY; std::size_t i = 0, j = 0; };
    std::array<Best2, 4> two;  // D4, D5, D7, D8
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double ends = heads[i] + tails[j];
            const double v4 = ends + product(arc_a[i], arc_b[j], w);
            const double v5 = ends + product(arc_a[i], swap_b[j], w);
            const double v7 = ends + product(swap_a[i], arc_b[j], w);
            const double v8 = ends + product(swap_a[i], swap_b[j], w);
            for (auto [k, v] : {std::pair{0, v4}, {1, v5}, {2, v7}, {3, v8}})
                if (v < two[k].v) two[k] = {v, i, j};
        }
    }

    const PathKind one_kinds[] = {PathKind::D1, PathKind::D2, PathKind::D3, PathKind::D6};
    for (int k = 0; k < 4; ++k) {
        const double phi = grid[one[k].i];
        if (k < 2) keep(best, one[k].v, one_kinds[k], std::nullopt, phi);
        else keep(best, one[k].v, one_kinds[k], phi, std::nullopt);
    }
    const PathKind two_kinds[] = {PathKind::D4, PathKind::D5, PathKind::D7, PathKind::D8};
    for (int k = 0; k < 4; ++k) keep(best, two[k].v, two_kinds[k], grid[two[k].i], grid[two[k].j]);

    if (!cfg.refine) return best;

    auto refine1 = [&](auto&& f, std::size_t i, PathKind kind, bool first_side) {
        const auto [lo, hi] = bracket(grid, i);
        double arg = grid[i];
        const double v = golden_min(f, lo, hi, arg);
        if (first_side) keep(best, v, kind, arg, std::nullopt);
        else keep(best, v, kind, std::nullopt, arg);
    };
    refine1(d1, one[0].i, PathKind::D1, false);
    refine1(d2, one[1].i, PathKind::D2, false);
    refine1(d3, one[2].i, PathKind::D3, true);
    refine1(d6, one[3].i, PathKind::D6, true);

    auto refine2 = [&](auto&& f, const Best2& g, PathKind kind) {
        double p = grid[g.i], p2 = grid[g.j];
        const auto [lo, hi] = bracket(grid, g.i);
        const auto [lo2, hi2] = bracket(grid, g.j);
        double v = g.v;
        for (int sweep = 0; sweep < 2; ++sweep) {
            double arg = p;
            const double v1 = golden_min([&](double t) { return f(t, p2); }, lo, hi, arg);
            if (v1 < v) {
                v = v1;
                p = arg;
            }
            arg = p2;
            const double v2 = golden_min([&](double t) { return f(p, t); }, lo2, hi2, arg);
            if (v2 < v) {
                v = v2;
                p2 = arg;
            }
        }
        keep(best, v, kind, p, p2);
    };
    refine2(d4, two[0], PathKind::D4);
    refine2(d5, two[1], PathKind::D5);
    refine2(d7, two[2], PathKind::D7);
    refine2(d8, two[3], PathKind::D8);
    return best;
}

PathKind mirrored(PathKind k) {
    switch (k) {
        case PathKind::D1: return PathKind::D3;
        case PathKind::D3: return PathKind::D1;
        case PathKind::D2: return PathKind::D6;
        case PathKind::D6: return PathKind::D2;
        case PathKind::D5: return PathKind::D7;
        case PathKind::D7: return PathKind::D5;
        default: return k;
    }
}

void check_scale(Complex beta) {
    if (!is_finite(beta) || beta == Complex{}) throw ZeroScale("scale descriptor must be finite and nonzero");
}

void check_shape(Complex rho) {
    if (!is_finite(rho) || !(rho.imag() > 0.0)) throw NotUpperHalfPlane("shape descriptor must have Im > 0");
}

}  // namespace

std::string_view to_string(PathKind kind) {
    switch (kind) {
        case PathKind::Direct: return "direct";
        case PathKind::D1: return "D1";
        case PathKind::D2: return "D2";
        case PathKind::D3: return "D3";
        case PathKind::D4: return "D4";
        case PathKind::D5: return "D5";
        case PathKind::D6: return "D6";
        case PathKind::D7: return "D7";
        case PathKind::D8: return "D8";
    }
    return "direct";
}

double dist_scale(Complex beta, Complex beta2, double w) {
    check_scale(beta);
    check_scale(beta2);
    if (!(w > 0.0 && w < 1.0)) throw InvalidArgument("w must lie in (0, 1)");
    const double v = quotient_scale(beta, beta2, w);
    return v < kZeroClamp ? 0.0 : v;
}

double dist_shape(Complex rho, Complex rho2) {
    check_shape(rho);
    check_shape(rho2);
    const double v = quotient_shape(rho, rho2);
    return v < kZeroClamp ? 0.0 : v;
}

double dist_product(const LatticeDescriptors& a, const LatticeDescriptors& b, const MetricConfig& cfg) {
    const auto ca = LatticeDescriptors::canonical(a.beta, a.rho);
    const auto cb = LatticeDescriptors::canonical(b.beta, b.rho);
    return std::hypot(dist_scale(ca.beta, cb.beta, cfg.w), dist_shape(ca.rho, cb.rho));
}

MetricResult dist_lattice(const LatticeDescriptors& a, const LatticeDescriptors& b, const MetricConfig& cfg) {
    if (!(cfg.w > 0.0 && cfg.w < 1.0)) throw InvalidArgument("w must lie in (0, 1)");
    if (cfg.N < 1) throw InvalidArgument("N must be at least 1");
    check_scale(a.beta);
    check_scale(b.beta);
    check_shape(a.rho);
    check_shape(b.rho);
    const auto ca = LatticeDescriptors::canonical(a.beta, a.rho);
    const auto cb = LatticeDescriptors::canonical(b.beta, b.rho);
    const Point pa{ca.beta, ca.rho}, pb{cb.beta, cb.rho};

    const Candidate ab = raw_lattice(pa, pb, cfg);
    const Candidate ba = raw_lattice(pb, pa, cfg);
    MetricResult r;
    if (ba.value < ab.value) {
        r = {ba.value, mirrored(ba.path), ba.phi_prime, ba.phi};
    } else {
        r = {ab.value, ab.path, ab.phi, ab.phi_prime};
    }
    if (r.value < kZeroClamp) r.value = 0.0;
    return r;
}

FourTuple fourtuple(const LatticeBasis& basis) {
    const LatticeBasis r = gauss_reduce(basis);
    FourTuple t;
    t.len1 = std::abs(r.b1);
    t.len2 = std::abs(r.b2);
    double theta = std::arg(r.b1);
    if (theta <= -pi / 2.0) theta += pi;
    if (theta > pi / 2.0) theta -= pi;
    t.theta = theta;
    t.psi = std::arg(r.b2 / r.b1);
    return t;
}

FourTuple relative_difference(const FourTuple& a, const FourTuple& b) {
    auto rel = [](double x, double y) { return x == 0.0 ? (y == 0.0 ? 0.0 : INFINITY) : std::abs(y - x) / std::abs(x); };
    return {rel(a.len1, b.len1), rel(a.len2, b.len2), rel(a.theta, b.theta), rel(a.psi, b.psi)};
}

}  // namespace latsep
