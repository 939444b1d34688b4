#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "latsep/image.hpp"
#include "latsep/lattice.hpp"

namespace latsep {

/// Binary PGM (P5), maxval 1..65535. Throws IoError or UnsupportedFormat.
GrayImage load_image(const std::filesystem::path& path);

/// Writes 8-bit P5 with intensities clamped to [0, 1].
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// Writes binary PPM (P6).
void save_rgb(const RgbImage& img, const std::filesystem::path& path);

struct NamedColor {
    std::string_view name;
    Rgb rgb;
};

/// Layer colors in layer order.
inline constexpr std::array<NamedColor, 8> kPalette{{
    {"red", {230, 25, 75}},
    {"green", {60, 180, 75}},
    {"blue", {0, 130, 200}},
    {"orange", {245, 130, 48}},
    {"purple", {145, 30, 180}},
    {"cyan", {70, 240, 240}},
    {"magenta", {240, 50, 230}},
    {"yellow", {255, 225, 25}},
}};

/// Stamp value above which a layer claims a pixel: the particle disc of radius 2 sigma.
inline constexpr double kOverlayClaim = 0.1353352832366127;

/// Base dimmed to 40% gray, layer particles in palette colors, pixels claimed
/// by two or more layers white. Throws TooManyLayers above eight layers.
RgbImage render_overlay(const GrayImage& base, std::span<const TranslatedLattice> layers, double sigma);

enum class MaskKind { LowerTriangular, Random };

struct MissingMask {
    MaskKind kind = MaskKind::LowerTriangular;
    double fraction = 0.0;  // in [0, 1)
};

struct SceneLayer {
    TranslatedLattice lattice;
    std::optional<MissingMask> mask;  // overrides the scene-wide mask
};

struct SceneSpec {
    int width = 119;
    int height = 119;
    double sigma = 1.35;
    std::vector<SceneLayer> layers;
    double perturb_s = 0.0;
    std::optional<MissingMask> missing_mask;
    std::uint64_t seed = 0;
};

/// Throws InvalidArgument for empty layers, bad sizes, or a fraction outside [0, 1).
void validate(const SceneSpec& spec);

/// Particle centers of one layer after masking and perturbation.
std::vector<Complex> scene_layer_points(const SceneSpec& spec, std::size_t layer);

/// Max-composite of every layer's stamped particles.
GrayImage generate_scene(const SceneSpec& spec);

/// True when the normalized position (u, v) in [0, 1]^2 falls in the masked
/// region. The lower-triangular region is the corner triangle at u = 0, v = 1
/// with the given area fraction; fraction 0.5 is v >= u.
bool in_lower_triangle(double u, double v, double fraction);

nlohmann::json to_json(Complex z);
Complex complex_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LatticeDescriptors& d);
nlohmann::json to_json(const SceneSpec& spec);
/// Throws InvalidArgument on missing or malformed fields.
SceneSpec scene_from_json(const nlohmann::json& j);
SceneSpec load_scene(const std::filesystem::path& path);

}  // namespace latsep
