#include "latsep/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <cctype>
#include <string>

#include "latsep/error.hpp"
#include "latsep/lisa.hpp"

namespace latsep {
namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            if (!tok.empty()) break;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

int header_int(std::istream& in, const char* what) {
    const std::string tok = header_token(in);
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; }))
        throw UnsupportedFormat(std::string("bad PGM ") + what);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw UnsupportedFormat(std::string("bad PGM ") + what);
    }
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

std::uint8_t quantize(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

MaskKind mask_kind_from(const std::string& s) {
    if (s == "lower-triangular") return MaskKind::LowerTriangular;
    if (s == "random") return MaskKind::Random;
    throw InvalidArgument("unknown mask kind: " + s);
}

std::string_view to_string(MaskKind k) { return k == MaskKind::LowerTriangular ? "lower-triangular" : "random"; }

std::optional<MissingMask> mask_from_json(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const auto& m = j.at(key);
    MissingMask mask;
    mask.kind = mask_kind_from(m.at("kind").get<std::string>());
    mask.fraction = m.at("fraction").get<double>();
    return mask;
}

nlohmann::json mask_to_json(const MissingMask& m) {
    return {{"kind", std::string(to_string(m.kind))}, {"fraction", m.fraction}};
}

void validate_mask(const MissingMask& m) {
    if (!(m.fraction >= 0.0 && m.fraction < 1.0)) throw InvalidArgument("mask fraction must be in [0, 1)");
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    if (header_token(in) != "P5") throw UnsupportedFormat("not a binary PGM (P5): " + path.string());
    const int w = header_int(in, "width");
    const int h = header_int(in, "height");
    const int maxval = header_int(in, "maxval");
    if (w < 1 || h < 1) throw UnsupportedFormat("PGM dimensions must be positive");
    if (maxval < 1 || maxval > 65535) throw UnsupportedFormat("PGM maxval out of range");
    const std::size_t bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw IoError("truncated PGM payload: " + path.string());
    GrayImage img(w, h);
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const unsigned v = bytes == 2 ? (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1] : raw[i];
        px[i] = std::min(1.0, double(v) / double(maxval));
    }
    return img;
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
    if (img.empty()) throw BadDimensions("cannot save an empty image");
    std::ofstream out = open_output(path);
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<std::uint8_t> raw;
    raw.reserve(img.size());
    for (double v : img.pixels()) raw.push_back(quantize(v));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

void save_rgb(const RgbImage& img, const std::filesystem::path& path) {
    if (img.width() < 1 || img.height() < 1) throw BadDimensions("cannot save an empty image");
    std::ofstream out = open_output(path);
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    for (const Rgb& c : img.pixels()) {
        const char bytes[3] = {static_cast<char>(c.r), static_cast<char>(c.g), static_cast<char>(c.b)};
        out.write(bytes, 3);
    }
    if (!out) throw IoError("write failed: " + path.string());
}

RgbImage render_overlay(const GrayImage& base, std::span<const TranslatedLattice> layers, double sigma) {
    if (layers.size() > kPalette.size()) throw TooManyLayers("overlay supports at most 8 layers");
    const int w = base.width(), h = base.height();
    RgbImage out(w, h);
    std::vector<int> claims(base.size(), 0);
    std::vector<int> owner(base.size(), -1);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const GrayImage stamp = rasterize(layers.subspan(l, 1), sigma, w, h);
        const auto px = stamp.pixels();
        for (std::size_t i = 0; i < px.size(); ++i) {
            if (px[i] >= kOverlayClaim) {
                ++claims[i];
                owner[i] = static_cast<int>(l);
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (claims[i] >= 2) {
                out.at(x, y) = {255, 255, 255};
            } else if (claims[i] == 1) {
                out.at(x, y) = kPalette[owner[i]].rgb;
            } else {
                const std::uint8_t g = quantize(0.4 * base.at(x, y));
                out.at(x, y) = {g, g, g};
            }
        }
    }
    return out;
}

void validate(const SceneSpec& spec) {
    if (spec.width < 1 || spec.height < 1) throw InvalidArgument("scene dimensions must be positive");
    if (!(spec.sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    if (spec.layers.empty()) throw InvalidArgument("scene needs at least one layer");
    if (!(spec.perturb_s >= 0.0)) throw InvalidArgument("perturb_s must be non-negative");
    if (spec.missing_mask) validate_mask(*spec.missing_mask);
    for (const SceneLayer& l : spec.layers)
        if (l.mask) validate_mask(*l.mask);
}

bool in_lower_triangle(double u, double v, double fraction) {
    if (fraction <= 0.0) return false;
    // Distance along u + (1 - v) at which the corner triangle holds the fraction.
    const double reach = fraction <= 0.5 ? std::sqrt(2.0 * fraction) : 2.0 - std::sqrt(2.0 * (1.0 - fraction));
    return u + (1.0 - v) <= reach;
}

std::vector<Complex> scene_layer_points(const SceneSpec& spec, std::size_t layer) {
    const SceneLayer& l = spec.layers.at(layer);
    const int margin = static_cast<int>(std::ceil(4.0 * spec.sigma)) + 1;
    const Window window = Window::of_image(spec.width, spec.height).grown(margin);
    std::vector<Complex> points = generate_points(l.lattice, window);
    const std::optional<MissingMask> mask = l.mask ? l.mask : spec.missing_mask;
    if (mask && mask->fraction > 0.0) {
        std::vector<Complex> kept;
        std::mt19937_64 rng(spec.seed ^ (0x9E3779B97F4A7C15ULL * (layer + 1)));
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        const double sx = std::max(1, spec.width - 1), sy = std::max(1, spec.height - 1);
        for (const Complex& p : points) {
            const bool drop = mask->kind == MaskKind::Random
                                  ? coin(rng) < mask->fraction
                                  : in_lower_triangle(p.real() / sx, p.imag() / sy, mask->fraction);
            if (!drop) kept.push_back(p);
        }
        points = std::move(kept);
    }
    return perturb_lattice(points, spec.perturb_s, spec.seed + layer);
}

GrayImage generate_scene(const SceneSpec& spec) {
    validate(spec);
    std::vector<Complex> all;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const std::vector<Complex> pts = scene_layer_points(spec, l);
        all.insert(all.end(), pts.begin(), pts.end());
    }
    return stamp_points(all, spec.sigma, spec.width, spec.height);
}

nlohmann::json to_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

Complex complex_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InvalidArgument("complex value must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json to_json(const LatticeDescriptors& d) { return {{"beta", to_json(d.beta)}, {"rho", to_json(d.rho)}}; }

nlohmann::json to_json(const SceneSpec& spec) {
    nlohmann::json layers = nlohmann::json::array();
    for (const SceneLayer& l : spec.layers) {
        nlohmann::json jl = to_json(l.lattice.descriptors);
        jl["mu"] = to_json(l.lattice.mu);
        if (l.mask) jl["missing_mask"] = mask_to_json(*l.mask);
        layers.push_back(jl);
    }
    nlohmann::json j{{"schema", "latsep/1"},     {"width", spec.width},         {"height", spec.height},
                     {"sigma", spec.sigma},       {"layers", layers},            {"perturb_s", spec.perturb_s},
                     {"seed", spec.seed}};
    if (spec.missing_mask) j["missing_mask"] = mask_to_json(*spec.missing_mask);
    return j;
}

SceneSpec scene_from_json(const nlohmann::json& j) {
    try {
        SceneSpec spec;
        spec.width = j.value("width", spec.width);
        spec.height = j.value("height", spec.height);
        spec.sigma = j.value("sigma", spec.sigma);
        spec.perturb_s = j.value("perturb_s", spec.perturb_s);
        spec.seed = j.value("seed", spec.seed);
        spec.missing_mask = mask_from_json(j, "missing_mask");
        for (const auto& jl : j.at("layers")) {
            SceneLayer l;
            const Complex beta = complex_from_json(jl.at("beta"));
            const Complex rho = complex_from_json(jl.at("rho"));
            l.lattice.descriptors = LatticeDescriptors::canonical(beta, rho);
            if (jl.contains("mu")) l.lattice.mu = complex_from_json(jl.at("mu"));
            l.mask = mask_from_json(jl, "missing_mask");
            spec.layers.push_back(l);
        }
        validate(spec);
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed scene: ") + e.what());
    } catch (const DegenerateBasis& e) {
        throw InvalidArgument(std::string("malformed scene layer: ") + e.what());
    }
}

SceneSpec load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("scene is not valid JSON: ") + e.what());
    }
    return scene_from_json(j);
}

}  // namespace latsep
