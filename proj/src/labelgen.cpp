#include "occ/labelgen.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "occ/errors.hpp"
#include "occ/rng.hpp"

namespace occ {

LabeledPointSet::LabeledPointSet(std::vector<LabeledPoint> points, double source_voxel_size)
    : points_(std::move(points)), source_voxel_size_(source_voxel_size) {
    if (!(source_voxel_size > 0.0) || !std::isfinite(source_voxel_size)) {
        throw std::invalid_argument("source voxel size must be positive and finite");
    }
    for (const LabeledPoint& p : points_) {
        if (!finite(p.position)) throw std::invalid_argument("point positions must be finite");
        if (p.label > kSemanticClassCount) {
            throw std::invalid_argument("point label " + std::to_string(p.label) +
                                        " outside 0..11");
        }
    }
}

LabeledPointSet point_set_from_tensor(const DenseTensor& tensor, double source_voxel_size) {
    if (tensor.rank() != 2 || tensor.dims()[1] != 4) {
        throw format_error("point set tensor must be rank 2 with 4 columns");
    }
    if (tensor.dtype() != Dtype::f32 && tensor.dtype() != Dtype::f64) {
        throw format_error("point set tensor must be f32 or f64");
    }
    const std::vector<float> values = tensor.to_f32_values();
    const std::size_t count = static_cast<std::size_t>(tensor.dims()[0]);
    std::vector<LabeledPoint> points(count);
    for (std::size_t i = 0; i < count; ++i) {
        const float* row = values.data() + i * 4;
        points[i].position = {static_cast<double>(row[0]), static_cast<double>(row[1]),
                              static_cast<double>(row[2])};
        const float lf = row[3];
        const float rounded = std::nearbyint(lf);
        if (!(std::fabs(lf - rounded) <= 1e-3f) || rounded < 0.0f ||
            rounded > static_cast<float>(kSemanticClassCount)) {
            throw format_error("point label column holds a non-label value");
        }
        points[i].label = static_cast<std::uint8_t>(rounded);
    }
    return LabeledPointSet(std::move(points), source_voxel_size);
}

DenseTensor point_set_to_tensor(const LabeledPointSet& points) {
    const auto pts = points.points();
    std::vector<float> values(pts.size() * 4);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        values[i * 4 + 0] = static_cast<float>(pts[i].position.x);
        values[i * 4 + 1] = static_cast<float>(pts[i].position.y);
        values[i * 4 + 2] = static_cast<float>(pts[i].position.z);
        values[i * 4 + 3] = static_cast<float>(pts[i].label);
    }
    return DenseTensor::from_f32({pts.size(), 4}, values);
}

const char* to_string(Verdict v) { return v == Verdict::keep ? "keep" : "reject"; }

const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::none: return "none";
        case RejectReason::invalid_pose: return "invalid_pose";
        case RejectReason::out_of_bounds: return "out_of_bounds";
        case RejectReason::empty_ratio: return "empty_ratio";
        case RejectReason::class_count: return "class_count";
    }
    return "unknown";
}

std::vector<std::string> sample_frames(std::span<const std::string> frame_ids, int count,
                                       std::uint64_t seed) {
    if (count < 1) throw std::domain_error("sample count must be positive");
    if (frame_ids.empty()) throw std::invalid_argument("frame sequence is empty");
    const std::uint64_t n = frame_ids.size();
    if (n <= static_cast<std::uint64_t>(count)) {
        return {frame_ids.begin(), frame_ids.end()};
    }
    // One pick per equal-length span. Spans partition the sequence, so picks
    // are distinct and cover it evenly; the jitter inside each span is
    // seeded, making the selection reproducible.
    SplitMix64 rng(seed);
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(count); ++i) {
        const std::uint64_t lo = i * n / static_cast<std::uint64_t>(count);
        const std::uint64_t hi = (i + 1) * n / static_cast<std::uint64_t>(count);
        out.push_back(frame_ids[lo + rng.bounded(hi - lo)]);
    }
    return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_frames(
    std::span<const std::string> selected, double train_ratio, std::uint64_t seed) {
    if (selected.empty()) throw std::invalid_argument("cannot split an empty selection");
    if (!(train_ratio >= 0.0 && train_ratio <= 1.0)) {
        throw std::domain_error("train ratio must lie in [0, 1]");
    }
    const std::size_t n = selected.size();
    std::size_t n_train =
        static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(n)));
    if (n_train > n) n_train = n;

    // Fisher-Yates over indices; the first n_train shuffled slots go to
    // train. Output preserves the input order within each half.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SplitMix64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.bounded(i + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

    std::pair<std::vector<std::string>, std::vector<std::string>> out;
    for (std::size_t i = 0; i < n; ++i) {
        (in_train[i] ? out.first : out.second).push_back(selected[i]);
    }
    return out;
}

FrameDecision validate_pose(const CameraModel& cam, const Aabb& scene_bounds) {
    const Mat4& pose = cam.cam_to_world();
    if (!finite(pose)) return FrameDecision::rejected(RejectReason::invalid_pose);
    if (!rotation_orthonormal(pose, kPoseValidationTol)) {
        return FrameDecision::rejected(RejectReason::invalid_pose);
    }
    if (!scene_bounds.contains(cam.position())) {
        return FrameDecision::rejected(RejectReason::out_of_bounds);
    }
    return FrameDecision::kept();
}

Vec3 select_origin(const CameraModel& cam, const std::array<std::int64_t, 3>& dims,
                   double voxel_size, double floor_height) {
    for (std::int64_t d : dims) {
        if (d < 1) throw std::invalid_argument("grid extents must be positive");
    }
    if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
        throw std::invalid_argument("voxel size must be positive and finite");
    }
    const Vec3 fwd = cam.forward();
    const double hn = std::hypot(fwd.x, fwd.y);
    if (hn < 1e-6) {
        throw degenerate_view_error("camera looks along the vertical axis; no horizontal forward");
    }
    const double fx = fwd.x / hn;
    const double fy = fwd.y / hn;
    const double half_x = static_cast<double>(dims[0]) * voxel_size * 0.5;
    const double half_y = static_cast<double>(dims[1]) * voxel_size * 0.5;
    const Vec3 pos = cam.position();
    const double center_x = pos.x + half_x * fx;
    const double center_y = pos.y + half_x * fy;
    return {center_x - half_x, center_y - half_y, floor_height};
}

namespace {

struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (std::uint64_t v : {static_cast<std::uint64_t>(k.x), static_cast<std::uint64_t>(k.y),
                                static_cast<std::uint64_t>(k.z)}) {
            h ^= v;
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

std::int64_t cell_coord(double v, double cell) {
    return static_cast<std::int64_t>(std::floor(v / cell));
}

}  // namespace

LabelGrid transfer_labels(const LabeledPointSet& points, const GridSpec& spec, double max_dist) {
    if (!(max_dist > 0.0) || !std::isfinite(max_dist)) {
        throw std::domain_error("transfer cutoff must be positive and finite");
    }
    LabelGrid grid(spec);
    const auto pts = points.points();
    if (pts.empty()) {
        // no evidence anywhere: everything is unknown
        std::vector<std::uint8_t> all(static_cast<std::size_t>(spec.voxel_count()), kUnknownLabel);
        return LabelGrid(spec, std::move(all));
    }

    // Hash grid with cells slightly wider than the cutoff: every point that
    // passes the distance check lives in one of the 27 cells around a
    // centroid's cell even when the distance sits exactly at the cutoff (the
    // margin absorbs the division rounding). Buckets keep ascending point
    // order, which makes the (distance, index) tie-break below identical to
    // a full scan.
    const double cell = max_dist * (1.0 + 1e-9);
    std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> cells;
    cells.reserve(pts.size() * 2);
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
        const Vec3& p = pts[i].position;
        cells[{cell_coord(p.x, cell), cell_coord(p.y, cell), cell_coord(p.z, cell)}].push_back(i);
    }

    const double cutoff_sq = max_dist * max_dist;
    for (std::int64_t i = 0; i < spec.dims[0]; ++i) {
        for (std::int64_t j = 0; j < spec.dims[1]; ++j) {
            for (std::int64_t k = 0; k < spec.dims[2]; ++k) {
                const Vec3 c = centroid(spec, i, j, k);
                const std::int64_t cx = cell_coord(c.x, cell);
                const std::int64_t cy = cell_coord(c.y, cell);
                const std::int64_t cz = cell_coord(c.z, cell);
                double best_sq = std::numeric_limits<double>::infinity();
                std::int64_t best_idx = -1;
                for (std::int64_t dx = -1; dx <= 1; ++dx) {
                    for (std::int64_t dy = -1; dy <= 1; ++dy) {
                        for (std::int64_t dz = -1; dz <= 1; ++dz) {
                            const auto it = cells.find({cx + dx, cy + dy, cz + dz});
                            if (it == cells.end()) continue;
                            for (std::uint32_t pi : it->second) {
                                const Vec3& p = pts[pi].position;
                                const double ddx = p.x - c.x;
                                const double ddy = p.y - c.y;
                                const double ddz = p.z - c.z;
                                const double d_sq = ddx * ddx + ddy * ddy + ddz * ddz;
                                if (d_sq < best_sq ||
                                    (d_sq == best_sq && static_cast<std::int64_t>(pi) < best_idx)) {
                                    best_sq = d_sq;
                                    best_idx = static_cast<std::int64_t>(pi);
                                }
                            }
                        }
                    }
                }
                const std::uint8_t label = (best_idx >= 0 && best_sq <= cutoff_sq)
                                               ? pts[static_cast<std::size_t>(best_idx)].label
                                               : kUnknownLabel;
                grid.set(i, j, k, label);
            }
        }
    }
    return grid;
}

FrameDecision frame_filter(const LabelGrid& grid) {
    const auto hist = class_histogram(grid);
    const std::uint64_t total = static_cast<std::uint64_t>(grid.spec().voxel_count());
    const std::uint64_t empty = hist[kFreeLabel] + hist[kUnknownLabel];
    // empty / total > 95/100, kept exact with integers
    if (empty * 100 > total * 95) {
        return FrameDecision::rejected(RejectReason::empty_ratio);
    }
    int classes = 0;
    for (int c = 1; c <= kSemanticClassCount; ++c) classes += (hist[c] > 0);
    if (classes < kMinSemanticClasses) {
        return FrameDecision::rejected(RejectReason::class_count);
    }
    return FrameDecision::kept();
}

FrameLabelResult generate_frame_label(const CameraModel& cam, const LabeledPointSet& points,
                                      const Aabb& scene_bounds, const LabelGenConfig& config) {
    const FrameDecision pose = validate_pose(cam, scene_bounds);
    if (pose.verdict == Verdict::reject) return {pose, std::nullopt};

    const double max_dist = config.max_dist > 0.0
                                ? config.max_dist
                                : points.source_voxel_size() * std::sqrt(3.0);
    const Vec3 origin = select_origin(cam, config.dims, config.voxel_size, config.floor_height);
    const GridSpec spec(config.dims, origin, config.voxel_size);
    LabelGrid grid = transfer_labels(points, spec, max_dist);

    const FrameDecision content = frame_filter(grid);
    if (content.verdict == Verdict::reject) return {content, std::nullopt};
    return {content, std::move(grid)};
}

}  // namespace occ
