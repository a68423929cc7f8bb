#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "latentlink/core.hpp"

namespace latentlink {

struct Segment {
    std::string name;
    int dim = 0;
};

/// Geometry of the procedural scene and the named segmentation of its
/// factor vector. Defaults give 32x32x3 images (n = 3072) driven by 16
/// factors in [0,1], split background/face/eyes/mouth.
struct SceneSpec {
    int height = 32;
    int width = 32;
    int channels = 3;
    std::vector<Segment> segments = {
        {"background", 4}, {"face", 4}, {"eyes", 4}, {"mouth", 4}};

    int factor_dim() const {
        int d = 0;
        for (const auto& s : segments) d += s.dim;
        return d;
    }
    int pixel_value_count() const { return height * width * channels; }

    struct Span {
        int offset = 0;
        int dim = 0;
    };
    /// Offset/length of a named segment; throws on unknown names.
    Span segment_span(std::string_view name) const;
    bool has_segment(std::string_view name) const;
};

void validate_scene_spec(const SceneSpec& spec);

/// Row-major height x width x 3 pixel tensor with values in [0,1].
struct Image {
    int height = 0;
    int width = 0;
    Vec values;

    Scalar& at(int y, int x, int c) { return values[(y * width + x) * 3 + c]; }
    Scalar at(int y, int x, int c) const { return values[(y * width + x) * 3 + c]; }
};

Image image_from_values(const SceneSpec& spec, Vec values);

/// I.i.d. uniform factors in [0,1].
Vec sample_factors(Rng& rng, const SceneSpec& spec);

/// Deterministic reference renderer. Background factors drive a colour +
/// vertical shading gradient; face drives an ellipse (centre-y, size, two
/// tone channels); eyes drive two discs (spread, height, radius, colour);
/// mouth drives a rounded bar (width, height, thickness, colour). Shapes
/// have a 1-pixel smoothstep edge band and each segment only ever touches
/// its own region. Rejects out-of-range factors.
Image render_scene(const Vec& factors, const SceneSpec& spec);

/// Pixels (height*width flags) the named segment can influence at these
/// factors: coverage support for shapes, the not-fully-occluded set for
/// the background. Used by the disentanglement tests.
std::vector<std::uint8_t> segment_region_mask(const Vec& factors,
                                              const SceneSpec& spec,
                                              std::string_view segment);

struct Dataset {
    SceneSpec spec;
    std::uint64_t seed = 0;
    Mat factors;  // factor_dim x count, one column per sample
    Mat images;   // pixel_value_count x count

    Eigen::Index count() const { return factors.cols(); }
    Image image_at(Eigen::Index i) const {
        return Image{spec.height, spec.width, images.col(i)};
    }
};

/// Reproducible dataset of (factors, rendered image) pairs. count must be
/// positive.
Dataset make_dataset(int count, std::uint64_t seed, const SceneSpec& spec);

// Dataset file: magic "LLDS", version, count, spec, then per-sample factor
// and image floats. Round-trips bit-exactly.
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

// Spec block payload, shared by the dataset file and model containers.
std::string encode_scene_spec(const SceneSpec& spec);
SceneSpec decode_scene_spec(std::string_view payload, const std::string& context = {});

/// 8-bit PNG export, value = round(255 * v).
void write_png(const std::string& path, const Image& img);

}  // namespace latentlink
