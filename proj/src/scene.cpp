#include "latentlink/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "latentlink/serialize.hpp"

namespace latentlink {

SceneSpec::Span SceneSpec::segment_span(std::string_view name) const {
    int offset = 0;
    for (const auto& s : segments) {
        if (s.name == name) return {offset, s.dim};
        offset += s.dim;
    }
    throw std::invalid_argument("unknown segment \"" + std::string(name) + "\"");
}

bool SceneSpec::has_segment(std::string_view name) const {
    for (const auto& s : segments)
        if (s.name == name) return true;
    return false;
}

void validate_scene_spec(const SceneSpec& spec) {
    if (spec.height <= 0 || spec.width <= 0 || spec.channels != 3)
        throw std::invalid_argument("scene spec must have positive size and 3 channels");
    if (spec.segments.empty()) throw std::invalid_argument("scene spec has no segments");
    for (const auto& s : spec.segments)
        if (s.dim <= 0 || s.name.empty())
            throw std::invalid_argument("scene segment \"" + s.name + "\" invalid");
}

Image image_from_values(const SceneSpec& spec, Vec values) {
    if (values.size() != spec.pixel_value_count())
        throw std::invalid_argument("image has " + std::to_string(values.size()) +
                                    " values, spec expects " +
                                    std::to_string(spec.pixel_value_count()));
    return Image{spec.height, spec.width, std::move(values)};
}

Vec sample_factors(Rng& rng, const SceneSpec& spec) {
    validate_scene_spec(spec);
    return rng.uniform_vec(spec.factor_dim());
}

namespace {

// The renderer assumes the default 16-factor layout.
struct Factors {
    // background
    Scalar bg_r, bg_g, bg_b, bg_grad;
    // face ellipse
    Scalar face_cy, face_size, face_tone_a, face_tone_b;
    // eye discs
    Scalar eye_spread, eye_height, eye_radius, eye_color;
    // mouth bar
    Scalar mouth_width, mouth_height, mouth_thick, mouth_color;
};

Factors unpack(const Vec& f) {
    return Factors{f[0], f[1], f[2],  f[3],  f[4],  f[5],  f[6],  f[7],
                   f[8], f[9], f[10], f[11], f[12], f[13], f[14], f[15]};
}

Scalar smooth01(Scalar t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

// Coverage ramps from 0 to 1 as the pixel-space signed distance crosses a
// 1-pixel band around the shape boundary. Exactly 0 outside the band.
Scalar edge_coverage(Scalar signed_dist_px) { return smooth01(signed_dist_px + 0.5); }

struct ShapeParams {
    // face ellipse, centre u fixed at 0.5
    Scalar face_cy, face_au, face_av;
    Scalar face_col[3];
    // eyes
    Scalar eye_du, eye_cv, eye_rpx;
    Scalar eye_col[3];
    // mouth
    Scalar mouth_wu, mouth_cv, mouth_tv;
    Scalar mouth_col[3];
};

Scalar lerp(Scalar a, Scalar b, Scalar t) { return a + (b - a) * t; }

ShapeParams shape_params(const Factors& f) {
    ShapeParams p;
    p.face_cy = 0.40 + 0.20 * f.face_cy;
    p.face_au = 0.26 + 0.10 * f.face_size;
    p.face_av = 0.30 + 0.10 * f.face_size;
    p.face_col[0] = 0.30 + 0.55 * f.face_tone_a;
    p.face_col[1] = 0.25 + 0.45 * f.face_tone_b;
    p.face_col[2] = 0.20 + 0.10 * f.face_tone_a + 0.10 * f.face_tone_b;

    p.eye_du = 0.12 + 0.11 * f.eye_spread;
    p.eye_cv = 0.32 + 0.12 * f.eye_height;
    p.eye_rpx = 0.055 + 0.055 * f.eye_radius;  // in width units, scaled later
    p.eye_col[0] = lerp(0.12, 0.60, f.eye_color);
    p.eye_col[1] = lerp(0.15, 0.42, f.eye_color);
    p.eye_col[2] = lerp(0.45, 0.14, f.eye_color);

    p.mouth_wu = 0.08 + 0.12 * f.mouth_width;
    p.mouth_cv = 0.60 + 0.14 * f.mouth_height;
    p.mouth_tv = 0.025 + 0.045 * f.mouth_thick;
    p.mouth_col[0] = lerp(0.40, 0.85, f.mouth_color);
    p.mouth_col[1] = lerp(0.08, 0.35, f.mouth_color);
    p.mouth_col[2] = lerp(0.10, 0.30, f.mouth_color);
    return p;
}

struct PixelCoverage {
    Scalar face, eyes, mouth;
};

PixelCoverage coverage_at(const ShapeParams& p, Scalar u, Scalar v, int W, int H) {
    PixelCoverage c;

    const Scalar rho = std::sqrt(((u - 0.5) / p.face_au) * ((u - 0.5) / p.face_au) +
                                 ((v - p.face_cy) / p.face_av) * ((v - p.face_cy) / p.face_av));
    const Scalar face_scale = std::min(p.face_au * W, p.face_av * H);
    c.face = edge_coverage((1.0 - rho) * face_scale);

    const Scalar rpx = p.eye_rpx * W;
    Scalar eye = 0.0;
    for (const Scalar cu : {0.5 - p.eye_du, 0.5 + p.eye_du}) {
        const Scalar dx = (u - cu) * W;
        const Scalar dy = (v - p.eye_cv) * H;
        eye = std::max(eye, edge_coverage(rpx - std::sqrt(dx * dx + dy * dy)));
    }
    c.eyes = eye;

    const Scalar bx = std::abs(u - 0.5) * W - p.mouth_wu * W;
    const Scalar by = std::abs(v - p.mouth_cv) * H - p.mouth_tv * H;
    const Scalar sd = (bx > 0.0 || by > 0.0)
                          ? std::hypot(std::max(bx, 0.0), std::max(by, 0.0))
                          : std::max(bx, by);
    c.mouth = edge_coverage(-sd);
    return c;
}

void check_factors(const Vec& factors, const SceneSpec& spec) {
    validate_scene_spec(spec);
    if (factors.size() != spec.factor_dim())
        throw std::invalid_argument("factor vector has " + std::to_string(factors.size()) +
                                    " entries, spec expects " +
                                    std::to_string(spec.factor_dim()));
    if (spec.factor_dim() != 16)
        throw std::invalid_argument("renderer supports the default 16-factor layout only");
    for (Eigen::Index i = 0; i < factors.size(); ++i)
        if (!(factors[i] >= 0.0 && factors[i] <= 1.0))
            throw std::invalid_argument("factor " + std::to_string(i) + " = " +
                                        std::to_string(factors[i]) + " outside [0,1]");
}

}  // namespace

Image render_scene(const Vec& factors, const SceneSpec& spec) {
    check_factors(factors, spec);
    const Factors f = unpack(factors);
    const ShapeParams p = shape_params(f);
    const int W = spec.width;
    const int H = spec.height;

    Image img{H, W, Vec(spec.pixel_value_count())};
    for (int y = 0; y < H; ++y) {
        const Scalar v = (y + 0.5) / H;
        for (int x = 0; x < W; ++x) {
            const Scalar u = (x + 0.5) / W;
            const PixelCoverage c = coverage_at(p, u, v, W, H);

            Scalar col[3];
            col[0] = 0.08 + 0.55 * f.bg_r + 0.30 * f.bg_grad * v;
            col[1] = 0.08 + 0.55 * f.bg_g + 0.30 * f.bg_grad * v;
            col[2] = 0.08 + 0.55 * f.bg_b + 0.30 * f.bg_grad * v;
            for (int ch = 0; ch < 3; ++ch) {
                col[ch] = lerp(col[ch], p.face_col[ch], c.face);
                col[ch] = lerp(col[ch], p.eye_col[ch], c.eyes);
                col[ch] = lerp(col[ch], p.mouth_col[ch], c.mouth);
                img.at(y, x, ch) = col[ch];
            }
        }
    }
    return img;
}

std::vector<std::uint8_t> segment_region_mask(const Vec& factors,
                                              const SceneSpec& spec,
                                              std::string_view segment) {
    check_factors(factors, spec);
    if (!spec.has_segment(segment))
        throw std::invalid_argument("unknown segment \"" + std::string(segment) + "\"");
    const ShapeParams p = shape_params(unpack(factors));
    const int W = spec.width;
    const int H = spec.height;

    std::vector<std::uint8_t> mask(static_cast<std::size_t>(W) * H, 0);
    for (int y = 0; y < H; ++y) {
        const Scalar v = (y + 0.5) / H;
        for (int x = 0; x < W; ++x) {
            const Scalar u = (x + 0.5) / W;
            const PixelCoverage c = coverage_at(p, u, v, W, H);
            bool in;
            if (segment == "face") {
                in = c.face > 0.0;
            } else if (segment == "eyes") {
                in = c.eyes > 0.0;
            } else if (segment == "mouth") {
                in = c.mouth > 0.0;
            } else {  // background: visible wherever the foreground is not opaque
                in = (1.0 - c.face) * (1.0 - c.eyes) * (1.0 - c.mouth) > 0.0;
            }
            mask[static_cast<std::size_t>(y) * W + x] = in ? 1 : 0;
        }
    }
    return mask;
}

Dataset make_dataset(int count, std::uint64_t seed, const SceneSpec& spec) {
    validate_scene_spec(spec);
    if (count <= 0) throw std::invalid_argument("dataset count must be positive");
    Rng rng(seed);
    Dataset ds;
    ds.spec = spec;
    ds.seed = seed;
    ds.factors.resize(spec.factor_dim(), count);
    ds.images.resize(spec.pixel_value_count(), count);
    for (int i = 0; i < count; ++i) {
        const Vec f = sample_factors(rng, spec);
        ds.factors.col(i) = f;
        ds.images.col(i) = render_scene(f, spec).values;
    }
    return ds;
}

std::string encode_scene_spec(const SceneSpec& spec) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(spec.height));
    w.u32(static_cast<std::uint32_t>(spec.width));
    w.u32(static_cast<std::uint32_t>(spec.channels));
    w.u32(static_cast<std::uint32_t>(spec.segments.size()));
    for (const auto& s : spec.segments) {
        w.str(s.name);
        w.u32(static_cast<std::uint32_t>(s.dim));
    }
    return std::move(w.buf);
}

SceneSpec decode_scene_spec(std::string_view payload, const std::string& context) {
    ByteReader r(payload, context);
    SceneSpec spec;
    spec.height = static_cast<int>(r.u32());
    spec.width = static_cast<int>(r.u32());
    spec.channels = static_cast<int>(r.u32());
    spec.segments.resize(r.u32());
    for (auto& s : spec.segments) {
        s.name = r.str();
        s.dim = static_cast<int>(r.u32());
    }
    validate_scene_spec(spec);
    return spec;
}

namespace {
constexpr char kDatasetMagic[4] = {'L', 'L', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;
}  // namespace

void save_dataset(const std::string& path, const Dataset& ds) {
    ByteWriter w;
    w.raw(kDatasetMagic, 4);
    w.u32(kDatasetVersion);
    w.u64(ds.seed);
    w.u64(static_cast<std::uint64_t>(ds.count()));
    w.str(encode_scene_spec(ds.spec));
    const auto n = static_cast<std::size_t>(ds.images.rows());
    const auto d = static_cast<std::size_t>(ds.factors.rows());
    for (Eigen::Index i = 0; i < ds.count(); ++i) {
        w.raw(ds.factors.col(i).data(), sizeof(double) * d);
        w.raw(ds.images.col(i).data(), sizeof(double) * n);
    }
    write_file(path, w.buf);
}

Dataset load_dataset(const std::string& path) {
    const std::string bytes = read_file(path);
    ByteReader r(bytes, path);
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kDatasetMagic, 4) != 0) r.fail("bad magic, not a dataset file");
    const std::uint32_t version = r.u32();
    if (version != kDatasetVersion)
        r.fail("unsupported dataset version " + std::to_string(version));
    Dataset ds;
    ds.seed = r.u64();
    const std::uint64_t count = r.u64();
    ds.spec = decode_scene_spec(r.str(), path);
    const int d = ds.spec.factor_dim();
    const int n = ds.spec.pixel_value_count();
    ds.factors.resize(d, static_cast<Eigen::Index>(count));
    ds.images.resize(n, static_cast<Eigen::Index>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        r.raw(ds.factors.col(static_cast<Eigen::Index>(i)).data(), sizeof(double) * d);
        r.raw(ds.images.col(static_cast<Eigen::Index>(i)).data(), sizeof(double) * n);
    }
    if (!r.done()) r.fail("trailing bytes after last record");
    return ds;
}

}  // namespace latentlink
