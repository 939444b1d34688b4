#include "latsep/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <tuple>

#include <CLI11.hpp>
#include <json.hpp>

#include "latsep/error.hpp"
#include "latsep/io.hpp"
#include "latsep/lisa.hpp"
#include "latsep/metric.hpp"
#include "latsep/spectral.hpp"

namespace latsep {
namespace {

using nlohmann::json;

constexpr const char* kSchema = "latsep/1";

// A failure that maps to the usage exit code.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || end != t.data() + t.size() || !std::isfinite(v))
        throw InvalidArgument("not a number: '" + text + "'");
    return v;
}

json fourtuple_json(const FourTuple& t) {
    return {{"len1", t.len1}, {"len2", t.len2}, {"theta", t.theta}, {"psi", t.psi}};
}

json candidate_json(const Candidate& c) {
    json j = to_json(c.descriptors);
    j["mu"] = to_json(c.mu);
    j["underfit"] = c.score.underfit;
    j["overfit"] = c.score.overfit;
    j["total"] = c.score.total;
    return j;
}

void print(std::ostream& out, json j) {
    j["schema"] = kSchema;
    out << j.dump(2) << '\n';
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed: " + path);
}

// Greedy one-to-one assignment by increasing d_L. Entry i is the truth index
// matched to found layer i, if any, with its distance.
std::vector<std::optional<std::pair<std::size_t, double>>> match_truth(const std::vector<LatticeDescriptors>& found,
                                                                       const std::vector<LatticeDescriptors>& truth) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < found.size(); ++i)
        for (std::size_t t = 0; t < truth.size(); ++t) pairs.emplace_back(dist_lattice(found[i], truth[t]).value, i, t);
    std::sort(pairs.begin(), pairs.end());
    std::vector<std::optional<std::pair<std::size_t, double>>> out(found.size());
    std::vector<bool> used(truth.size());
    for (const auto& [d, i, t] : pairs) {
        if (out[i] || used[t]) continue;
        out[i] = std::make_pair(t, d);
        used[t] = true;
    }
    return out;
}

struct GenerateArgs {
    std::string spec, out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    const SceneSpec spec = load_scene(a.spec);
    save_image(generate_scene(spec), a.out);
    json layers = json::array();
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        json jl = to_json(spec.layers[l].lattice.descriptors);
        jl["mu"] = to_json(spec.layers[l].lattice.mu);
        jl["points"] = scene_layer_points(spec, l).size();
        layers.push_back(jl);
    }
    print(out, {{"out", a.out}, {"width", spec.width}, {"height", spec.height}, {"layers", layers}});
    return kExitOk;
}

struct MetricArgs {
    std::string a, b;
    double w = 0.05;
    int N = 60;
};

int cmd_metric(const MetricArgs& m, std::ostream& out) {
    LatticeBasis ba, bb;
    try {
        ba = parse_basis(m.a);
        bb = parse_basis(m.b);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    if (!(m.w > 0.0) || m.N < 1) throw UsageError("--w must be positive and --N at least 1");
    const LatticeDescriptors da = to_descriptors(ba), db = to_descriptors(bb);
    MetricConfig cfg;
    cfg.w = m.w;
    cfg.N = m.N;
    const MetricResult r = dist_lattice(da, db, cfg);
    const FourTuple fa = fourtuple(ba), fb = fourtuple(bb);
    json j{{"d_L", r.value},
           {"path", std::string(to_string(r.path))},
           {"d_K", dist_scale(da.beta, db.beta, m.w)},
           {"d_P", dist_shape(da.rho, db.rho)},
           {"fourtuple_a", fourtuple_json(fa)},
           {"fourtuple_b", fourtuple_json(fb)},
           {"fourtuple_relative", fourtuple_json(relative_difference(fa, fb))},
           {"canonical_a", to_json(da)},
           {"canonical_b", to_json(db)}};
    if (r.phi) j["phi"] = *r.phi;
    if (r.phi_prime) j["phi_prime"] = *r.phi_prime;
    print(out, j);
    return kExitOk;
}

struct EquivArgs {
    std::string a, b;
};

int cmd_equiv(const EquivArgs& e, std::ostream& out) {
    LatticeBasis ba, bb;
    try {
        ba = parse_basis(e.a);
        bb = parse_basis(e.b);
    } catch (const InvalidArgument& err) {
        throw UsageError(err.what());
    }
    const LatticeDescriptors da = to_descriptors(ba), db = to_descriptors(bb);
    print(out, {{"equivalent", are_equivalent(da, db)}, {"canonical_a", to_json(da)}, {"canonical_b", to_json(db)}});
    return kExitOk;
}

struct SpectrumArgs {
    std::string in, out, peaks;
    int J = 6;
    int n_angles = 360;
};

int cmd_spectrum(const SpectrumArgs& s, std::ostream& out) {
    if (s.J < 1) throw UsageError("--J must be at least 1");
    if (s.n_angles < 4) throw UsageError("--angles must be at least 4");
    const GrayImage img = load_image(s.in);
    const PolarSpectrum spec = polar_spectrum(img, s.n_angles, true);

    // rows are angles, columns radii; log(1 + m) scaled to [0, 1]
    GrayImage view(static_cast<int>(spec.n_radii()), static_cast<int>(spec.n_angles()));
    double peak = 0.0;
    for (std::size_t a = 0; a < spec.n_angles(); ++a)
        for (std::size_t r = 0; r < spec.n_radii(); ++r) {
            const double v = std::log1p(spec.at(a, r));
            view.at(static_cast<int>(r), static_cast<int>(a)) = v;
            peak = std::max(peak, v);
        }
    if (peak > 0.0)
        for (double& v : view.pixels()) v /= peak;
    save_image(view, s.out);

    json peaks = json::array();
    bool empty = false;
    try {
        for (const SpectralPeak& p : find_peaks(spec, s.J))
            peaks.push_back({{"radius", p.radius}, {"angle", p.angle}, {"magnitude", p.magnitude}});
    } catch (const EmptySpectrum&) {
        empty = true;
    }
    json j{{"peaks", peaks}, {"empty_spectrum", empty}, {"out", s.out}};
    if (!s.peaks.empty()) {
        json file{{"schema", kSchema}, {"peaks", peaks}, {"empty_spectrum", empty}};
        write_json_file(s.peaks, file);
    }
    print(out, j);
    return kExitOk;
}

struct SeparateArgs {
    std::string in, out, overlay, truth;
    LisaConfig cfg;
};

int cmd_separate(const SeparateArgs& s, std::ostream& out) {
    try {
        validate(s.cfg);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    const GrayImage img = load_image(s.in);
    std::vector<LatticeDescriptors> expected;
    if (!s.truth.empty())
        for (const SceneLayer& l : load_scene(s.truth).layers) expected.push_back(l.lattice.descriptors);
    const SeparationResult r = lisa_run(img, s.cfg);

    json layers = json::array();
    for (const Candidate& c : r.layers) layers.push_back(candidate_json(c));
    json j{{"layers", layers},
           {"residual_mean", r.residual_mean},
           {"iterations", r.iterations},
           {"no_valid_candidate", r.no_valid_candidate}};
    if (!s.truth.empty()) {
        std::vector<LatticeDescriptors> found;
        for (const Candidate& c : r.layers) found.push_back(c.descriptors);
        const auto matches = match_truth(found, expected);
        double worst = 0.0;
        for (std::size_t i = 0; i < matches.size(); ++i) {
            if (matches[i]) {
                j["layers"][i]["truth_index"] = matches[i]->first;
                j["layers"][i]["d_L"] = matches[i]->second;
                worst = std::max(worst, matches[i]->second);
            } else {
                j["layers"][i]["truth_index"] = nullptr;
                j["layers"][i]["d_L"] = nullptr;
            }
        }
        j["truth_layers"] = expected.size();
        j["max_d_L"] = found.size() >= expected.size() ? json(worst) : json(nullptr);
    }
    if (!s.overlay.empty()) {
        std::vector<TranslatedLattice> lats;
        for (const Candidate& c : r.layers) lats.push_back(c.lattice());
        if (lats.size() > kPalette.size()) lats.resize(kPalette.size());
        save_rgb(render_overlay(img, lats, s.cfg.sigma), s.overlay);
    }
    j["schema"] = kSchema;
    if (!s.out.empty()) write_json_file(s.out, j);
    print(out, j);
    return kExitOk;
}

}  // namespace

Complex parse_complex(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos)
        throw InvalidArgument("complex value must be 're,im': '" + text + "'");
    return {parse_double(text.substr(0, comma)), parse_double(text.substr(comma + 1))};
}

LatticeBasis parse_basis(const std::string& text) {
    const auto semi = text.find(';');
    if (semi == std::string::npos || text.find(';', semi + 1) != std::string::npos)
        throw InvalidArgument("basis must be 're,im;re,im': '" + text + "'");
    return {parse_complex(text.substr(0, semi)), parse_complex(text.substr(semi + 1))};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lattice identification and separation in particle images.\n"
                 "Complex values are written 're,im' and bases 're,im;re,im'.\n"
                 "LATSEP_THREADS caps worker threads (0 = all cores).",
                 "latsep"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "render a synthetic scene from a JSON spec");
    g->add_option("--spec", gen.spec, "scene spec JSON")->required();
    g->add_option("--out", gen.out, "output PGM")->required();

    MetricArgs met;
    auto* m = app.add_subcommand("metric", "lattice distance between two bases");
    m->add_option("--a", met.a, "first basis 're,im;re,im'")->required();
    m->add_option("--b", met.b, "second basis 're,im;re,im'")->required();
    m->add_option("--w", met.w, "scale weight")->capture_default_str();
    m->add_option("--N", met.N, "angle grid intervals")->capture_default_str();

    SpectrumArgs spc;
    auto* sp = app.add_subcommand("spectrum", "polar magnitude spectrum and peaks");
    sp->add_option("--in", spc.in, "input PGM")->required();
    sp->add_option("--out", spc.out, "log-scaled spectrum PGM (rows are angles)")->required();
    sp->add_option("--peaks", spc.peaks, "peak list JSON");
    sp->add_option("--J", spc.J, "number of peaks")->capture_default_str();
    sp->add_option("--angles", spc.n_angles, "projection angles")->capture_default_str();

    SeparateArgs sep;
    auto* s = app.add_subcommand("separate", "extract the lattice layers of an image");
    s->add_option("--in", sep.in, "input PGM")->required();
    s->add_option("--J", sep.cfg.J, "spectral peaks per step")->capture_default_str();
    s->add_option("--K", sep.cfg.K, "correction rounds")->capture_default_str();
    s->add_option("--gamma", sep.cfg.gamma, "over-fit penalty")->capture_default_str();
    s->add_option("--sigma", sep.cfg.sigma, "particle standard deviation")->capture_default_str();
    s->add_option("--out", sep.out, "result JSON");
    s->add_option("--overlay", sep.overlay, "overlay PPM");
    s->add_option("--truth", sep.truth, "ground-truth scene JSON");
    s->add_flag("--otsu", sep.cfg.use_otsu, "zero pixels below the Otsu level first");
    bool literal = false;
    s->add_flag("--no-fit", literal, "skip the least-squares polish");

    EquivArgs eq;
    auto* e = app.add_subcommand("equiv", "test whether two bases span the same lattice shape and scale");
    e->add_option("--a", eq.a, "first basis")->required();
    e->add_option("--b", eq.b, "second basis")->required();

    std::vector<const char*> argv{"latsep"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& pe) {
        const int code = app.exit(pe, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*g) return cmd_generate(gen, out);
        if (*m) return cmd_metric(met, out);
        if (*sp) return cmd_spectrum(spc, out);
        if (*s) {
            sep.cfg.fit_lattice = !literal;
            return cmd_separate(sep, out);
        }
        if (*e) return cmd_equiv(eq, out);
    } catch (const UsageError& ue) {
        err << "error: " << ue.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace latsep
