#include "occ/lifting.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "occ/parallel.hpp"

namespace occ {

namespace {

// Nearest pixel index for a continuous coordinate: round half to even, then
// clamp into [0, extent).
std::int64_t nearest_pixel(double x, std::int64_t extent) {
    const double r = std::nearbyint(x);
    if (r <= 0.0) return 0;
    if (r >= static_cast<double>(extent - 1)) return extent - 1;
    return static_cast<std::int64_t>(r);
}

// Edge-clamped bilinear taps around a continuous coordinate pair.
struct BilinearTaps {
    std::int64_t x0, x1, y0, y1;
    double w00, w01, w10, w11;  // (y0,x0), (y0,x1), (y1,x0), (y1,x1)
};

BilinearTaps bilinear_taps(double x, double y, std::int64_t width, std::int64_t height) {
    const double xf = std::floor(x);
    const double yf = std::floor(y);
    const double tx = x - xf;
    const double ty = y - yf;
    const auto clamp_idx = [](double f, std::int64_t extent) {
        if (f <= 0.0) return std::int64_t{0};
        if (f >= static_cast<double>(extent - 1)) return extent - 1;
        return static_cast<std::int64_t>(f);
    };
    BilinearTaps t;
    t.x0 = clamp_idx(xf, width);
    t.x1 = clamp_idx(xf + 1.0, width);
    t.y0 = clamp_idx(yf, height);
    t.y1 = clamp_idx(yf + 1.0, height);
    t.w00 = (1.0 - tx) * (1.0 - ty);
    t.w01 = tx * (1.0 - ty);
    t.w10 = (1.0 - tx) * ty;
    t.w11 = tx * ty;
    return t;
}

// Error is invalid_argument when building a pyramid (bad input) and
// domain_error when sampling (objects that do not belong together).
template <typename Error>
void check_scale_extents(int base_h, int base_w, int scale, int h, int w, const char* what) {
    if (scale < 1 || base_h % scale != 0 || base_w % scale != 0) {
        throw Error(std::string(what) + ": scale " + std::to_string(scale) +
                    " does not divide the image extents");
    }
    if (h != base_h / scale || w != base_w / scale) {
        throw Error(std::string(what) + ": extents " + std::to_string(h) + "x" +
                    std::to_string(w) + " do not match scale " + std::to_string(scale));
    }
}

}  // namespace

FeaturePyramid::FeaturePyramid(int base_height, int base_width)
    : base_height_(base_height), base_width_(base_width) {
    if (base_height < 1 || base_width < 1) {
        throw std::invalid_argument("pyramid base extents must be positive");
    }
}

void FeaturePyramid::add_level(FeatureLevel level) {
    if (level.channels < 1) throw std::invalid_argument("feature level needs channels");
    check_scale_extents<std::invalid_argument>(base_height_, base_width_, level.scale,
                                               level.height, level.width, "feature level");
    if (channels_ != 0 && level.channels != channels_) {
        throw std::invalid_argument("feature level channel count " +
                                    std::to_string(level.channels) + " differs from pyramid's " +
                                    std::to_string(channels_));
    }
    const std::size_t expect =
        static_cast<std::size_t>(level.channels) * level.height * level.width;
    if (level.data.size() != expect) {
        throw std::invalid_argument("feature level buffer size does not match extents");
    }
    if (levels_.count(level.scale)) {
        throw std::invalid_argument("duplicate feature level at scale " +
                                    std::to_string(level.scale));
    }
    channels_ = level.channels;
    levels_.emplace(level.scale, std::move(level));
}

const FeatureLevel& FeaturePyramid::level(int scale) const {
    const auto it = levels_.find(scale);
    if (it == levels_.end()) {
        throw std::domain_error("no feature level at scale " + std::to_string(scale));
    }
    return it->second;
}

std::vector<int> FeaturePyramid::scales() const {
    std::vector<int> out;
    out.reserve(levels_.size());
    for (const auto& [scale, level] : levels_) out.push_back(scale);
    return out;
}

double VoxelProjection::valid_fraction() const {
    if (valid.empty()) return 0.0;
    std::uint64_t n = 0;
    for (std::uint8_t v : valid) n += (v != 0);
    return static_cast<double>(n) / static_cast<double>(valid.size());
}

VoxelProjection project_voxels(const CameraModel& cam, const GridSpec& spec) {
    VoxelProjection proj{spec, cam.width(), cam.height(), {}, {}, {}, {}};
    const std::size_t count = static_cast<std::size_t>(spec.voxel_count());
    proj.u.resize(count);
    proj.v.resize(count);
    proj.z.resize(count);
    proj.valid.resize(count);
    std::size_t idx = 0;
    for (std::int64_t i = 0; i < spec.dims[0]; ++i) {
        for (std::int64_t j = 0; j < spec.dims[1]; ++j) {
            for (std::int64_t k = 0; k < spec.dims[2]; ++k, ++idx) {
                const PixelDepth pd = project(cam, centroid(spec, i, j, k));
                proj.u[idx] = pd.u;
                proj.v[idx] = pd.v;
                proj.z[idx] = pd.z;
                proj.valid[idx] = in_fov(cam, pd) ? 1 : 0;
            }
        }
    }
    return proj;
}

std::vector<float> sample_features(const FeatureLevel& level, const VoxelProjection& proj,
                                   SampleMode mode) {
    check_scale_extents<std::domain_error>(proj.image_height, proj.image_width, level.scale,
                                           level.height, level.width, "sample_features");
    const std::size_t count = proj.valid.size();
    const int ch = level.channels;
    const std::size_t plane = static_cast<std::size_t>(level.height) * level.width;
    std::vector<float> out(count * static_cast<std::size_t>(ch), 0.0f);
    const double inv_scale = 1.0 / static_cast<double>(level.scale);

    for (std::size_t vx = 0; vx < count; ++vx) {
        if (!proj.valid[vx]) continue;
        const double x = proj.u[vx] * inv_scale;
        const double y = proj.v[vx] * inv_scale;
        float* dst = out.data() + vx * static_cast<std::size_t>(ch);
        if (mode == SampleMode::nearest) {
            const std::int64_t col = nearest_pixel(x, level.width);
            const std::int64_t row = nearest_pixel(y, level.height);
            const float* src = level.data.data() + static_cast<std::size_t>(row) * level.width + col;
            for (int c = 0; c < ch; ++c) dst[c] = src[static_cast<std::size_t>(c) * plane];
        } else {
            const BilinearTaps t = bilinear_taps(x, y, level.width, level.height);
            const float* base = level.data.data();
            for (int c = 0; c < ch; ++c) {
                const float* p = base + static_cast<std::size_t>(c) * plane;
                const double val = t.w00 * p[t.y0 * level.width + t.x0] +
                                   t.w01 * p[t.y0 * level.width + t.x1] +
                                   t.w10 * p[t.y1 * level.width + t.x0] +
                                   t.w11 * p[t.y1 * level.width + t.x1];
                dst[c] = static_cast<float>(val);
            }
        }
    }
    return out;
}

std::vector<float> sample_depth_weights(const DepthDistribution& dist, int scale,
                                        const VoxelProjection& proj, const DepthBinSpec& bins,
                                        SampleMode mode) {
    check_scale_extents<std::domain_error>(proj.image_height, proj.image_width, scale,
                                           dist.height(), dist.width(), "sample_depth_weights");
    if (dist.n_bins() != bins.n_bins) {
        throw std::domain_error("distribution has " + std::to_string(dist.n_bins()) +
                                " bins, discretization has " + std::to_string(bins.n_bins));
    }
    const std::size_t count = proj.valid.size();
    const std::size_t plane = static_cast<std::size_t>(dist.height()) * dist.width();
    const auto probs = dist.probs();
    std::vector<float> out(count, 0.0f);
    const double inv_scale = 1.0 / static_cast<double>(scale);

    for (std::size_t vx = 0; vx < count; ++vx) {
        if (!proj.valid[vx]) continue;
        const double x = proj.u[vx] * inv_scale;
        const double y = proj.v[vx] * inv_scale;
        const int bin = bin_index(bins, proj.z[vx]);
        const float* p = probs.data() + static_cast<std::size_t>(bin) * plane;
        if (mode == SampleMode::nearest) {
            const std::int64_t col = nearest_pixel(x, dist.width());
            const std::int64_t row = nearest_pixel(y, dist.height());
            out[vx] = p[static_cast<std::size_t>(row) * dist.width() + col];
        } else {
            const BilinearTaps t = bilinear_taps(x, y, dist.width(), dist.height());
            const double val = t.w00 * p[t.y0 * dist.width() + t.x0] +
                               t.w01 * p[t.y0 * dist.width() + t.x1] +
                               t.w10 * p[t.y1 * dist.width() + t.x0] +
                               t.w11 * p[t.y1 * dist.width() + t.x1];
            out[vx] = static_cast<float>(val);
        }
    }
    return out;
}

DenseTensor VoxelFeatureVolume::to_tensor() const {
    return DenseTensor::from_f32({static_cast<std::uint64_t>(spec.dims[0]),
                                  static_cast<std::uint64_t>(spec.dims[1]),
                                  static_cast<std::uint64_t>(spec.dims[2]),
                                  static_cast<std::uint64_t>(channels)},
                                 features);
}

VoxelFeatureVolume fuse(const FeaturePyramid& pyramid,
                        const std::map<int, DepthDistribution>& dists,
                        const VoxelProjection& proj, const DepthBinSpec& bins,
                        SampleMode mode, int threads) {
    const std::vector<int> scales = pyramid.scales();
    if (scales.empty()) throw std::domain_error("feature pyramid has no levels");
    if (pyramid.base_height() != proj.image_height || pyramid.base_width() != proj.image_width) {
        throw std::domain_error("pyramid base extents do not match the projected image");
    }

    struct LevelCtx {
        int scale;
        int width, height;
        double inv_scale;
        std::vector<float> voxel_major;  // (row, col, channel), channel fastest
        const DepthDistribution* dist;
        std::size_t dist_plane;
    };

    const int ch = pyramid.channels();
    std::vector<LevelCtx> ctx;
    ctx.reserve(scales.size());
    for (int s : scales) {
        const FeatureLevel& lvl = pyramid.level(s);
        const auto dit = dists.find(s);
        if (dit == dists.end()) {
            throw std::domain_error("missing depth distribution for scale " + std::to_string(s));
        }
        const DepthDistribution& dist = dit->second;
        check_scale_extents<std::domain_error>(proj.image_height, proj.image_width, s,
                                               dist.height(), dist.width(),
                                               "fuse depth distribution");
        if (dist.n_bins() != bins.n_bins) {
            throw std::domain_error("distribution bin count differs from the discretization");
        }

        // Transpose the level to channel-fastest so each voxel reads one
        // contiguous feature column.
        LevelCtx c{s, lvl.width, lvl.height, 1.0 / static_cast<double>(s), {}, &dist,
                   static_cast<std::size_t>(dist.height()) * dist.width()};
        const std::size_t plane = static_cast<std::size_t>(lvl.height) * lvl.width;
        c.voxel_major.resize(plane * static_cast<std::size_t>(ch));
        for (int cc = 0; cc < ch; ++cc) {
            const float* src = lvl.data.data() + static_cast<std::size_t>(cc) * plane;
            float* dst = c.voxel_major.data() + cc;
            for (std::size_t px = 0; px < plane; ++px) dst[px * ch] = src[px];
        }
        ctx.push_back(std::move(c));
    }

    const std::size_t count = proj.valid.size();
    VoxelFeatureVolume vol{proj.spec, ch,
                           std::vector<float>(count * static_cast<std::size_t>(ch), 0.0f)};

    parallel_for(0, static_cast<std::int64_t>(count), threads,
                 [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t vi = lo; vi < hi; ++vi) {
                         const std::size_t vx = static_cast<std::size_t>(vi);
                         if (!proj.valid[vx]) continue;
                         float* dst = vol.features.data() + vx * static_cast<std::size_t>(ch);
                         const int bin = bin_index(bins, proj.z[vx]);
                         for (const LevelCtx& c : ctx) {
                             const double x = proj.u[vx] * c.inv_scale;
                             const double y = proj.v[vx] * c.inv_scale;
                             const float* pd =
                                 c.dist->probs().data() + static_cast<std::size_t>(bin) * c.dist_plane;
                             if (mode == SampleMode::nearest) {
                                 const std::int64_t col = nearest_pixel(x, c.width);
                                 const std::int64_t row = nearest_pixel(y, c.height);
                                 const float w = pd[static_cast<std::size_t>(row) * c.width + col];
                                 const float* f = c.voxel_major.data() +
                                                  (static_cast<std::size_t>(row) * c.width + col) *
                                                      static_cast<std::size_t>(ch);
                                 for (int cc = 0; cc < ch; ++cc) dst[cc] += w * f[cc];
                             } else {
                                 const BilinearTaps t = bilinear_taps(x, y, c.width, c.height);
                                 const float w = static_cast<float>(
                                     t.w00 * pd[t.y0 * c.width + t.x0] +
                                     t.w01 * pd[t.y0 * c.width + t.x1] +
                                     t.w10 * pd[t.y1 * c.width + t.x0] +
                                     t.w11 * pd[t.y1 * c.width + t.x1]);
                                 const float* f00 = c.voxel_major.data() +
                                                    (static_cast<std::size_t>(t.y0) * c.width + t.x0) *
                                                        static_cast<std::size_t>(ch);
                                 const float* f01 = c.voxel_major.data() +
                                                    (static_cast<std::size_t>(t.y0) * c.width + t.x1) *
                                                        static_cast<std::size_t>(ch);
                                 const float* f10 = c.voxel_major.data() +
                                                    (static_cast<std::size_t>(t.y1) * c.width + t.x0) *
                                                        static_cast<std::size_t>(ch);
                                 const float* f11 = c.voxel_major.data() +
                                                    (static_cast<std::size_t>(t.y1) * c.width + t.x1) *
                                                        static_cast<std::size_t>(ch);
                                 for (int cc = 0; cc < ch; ++cc) {
                                     const float fv = static_cast<float>(
                                         t.w00 * f00[cc] + t.w01 * f01[cc] +
                                         t.w10 * f10[cc] + t.w11 * f11[cc]);
                                     dst[cc] += w * fv;
                                 }
                             }
                         }
                     }
                 });
    return vol;
}

}  // namespace occ
