#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "occ/camera.hpp"
#include "occ/geometry.hpp"
#include "occ/voxel.hpp"

namespace occ {

// Poses are re-checked against R^T R = I at this looser tolerance when
// deciding whether a frame is usable at all.
inline constexpr double kPoseValidationTol = 1e-3;

// A frame is rejected when more than this fraction of its grid carries no
// geometry (free or unknown).
inline constexpr double kMaxEmptyFraction = 0.95;

// Minimum number of distinct semantic classes a kept frame must contain.
inline constexpr int kMinSemanticClasses = 2;

struct LabeledPoint {
    Vec3 position;
    std::uint8_t label = 0;  // semantic 1..11, or 0 for free-space evidence
};

// Semantically labeled reconstruction of a scene, with the edge length of
// the voxels the points were sampled from (controls the default transfer
// cutoff).
class LabeledPointSet {
public:
    LabeledPointSet(std::vector<LabeledPoint> points, double source_voxel_size);

    std::span<const LabeledPoint> points() const noexcept { return points_; }
    double source_voxel_size() const noexcept { return source_voxel_size_; }

private:
    std::vector<LabeledPoint> points_;
    double source_voxel_size_;
};

// Rank-2 f32 tensor, P x 4 rows of (x, y, z, label).
LabeledPointSet point_set_from_tensor(const DenseTensor& tensor, double source_voxel_size);
DenseTensor point_set_to_tensor(const LabeledPointSet& points);

enum class Verdict : std::uint8_t { keep, reject };
enum class RejectReason : std::uint8_t {
    none,
    invalid_pose,
    out_of_bounds,
    empty_ratio,
    class_count,
};

const char* to_string(Verdict v);
const char* to_string(RejectReason r);

struct FrameDecision {
    Verdict verdict = Verdict::keep;
    RejectReason reason = RejectReason::none;

    static FrameDecision kept() { return {Verdict::keep, RejectReason::none}; }
    static FrameDecision rejected(RejectReason r) { return {Verdict::reject, r}; }

    bool operator==(const FrameDecision&) const = default;
};

// Picks `count` distinct frame ids, evenly covering the sequence: the
// sequence is cut into `count` equal spans and one seeded-uniform element is
// drawn per span. Sequences no longer than `count` are returned whole.
// Order follows the input sequence.
std::vector<std::string> sample_frames(std::span<const std::string> frame_ids, int count,
                                       std::uint64_t seed);

// Seeded shuffle split into (train, val); train gets round(ratio * n)
// frames. Both halves keep the input order.
std::pair<std::vector<std::string>, std::vector<std::string>> split_frames(
    std::span<const std::string> selected, double train_ratio, std::uint64_t seed);

// Frame admission by pose: non-finite pose entries or a sloppy rotation
// reject as invalid_pose; a camera center outside the scene bounds rejects
// as out_of_bounds.
FrameDecision validate_pose(const CameraModel& cam, const Aabb& scene_bounds);

// Minimum corner for a frame's label grid: the grid footprint (extents
// dims * voxel_size in x and y) is centered half the x-extent ahead of the
// camera along its horizontal forward direction; the grid floor sits at
// floor_height. Throws degenerate_view_error when the camera looks straight
// up or down.
Vec3 select_origin(const CameraModel& cam, const std::array<std::int64_t, 3>& dims,
                   double voxel_size, double floor_height);

// Nearest-point label transfer: each voxel takes the label of the closest
// point within max_dist of its centroid (ties to the smallest point index);
// voxels with no point in range become unknown. Free-space points (label 0)
// mark voxels as free.
LabelGrid transfer_labels(const LabeledPointSet& points, const GridSpec& spec, double max_dist);

// Content filter: reject when the empty fraction (free + unknown) exceeds
// 95% exactly (integer arithmetic, no float threshold), or when fewer than
// two distinct semantic classes appear.
FrameDecision frame_filter(const LabelGrid& grid);

struct LabelGenConfig {
    std::array<std::int64_t, 3> dims{60, 60, 36};
    double voxel_size = 0.08;
    double floor_height = 0.0;
    // Transfer cutoff; anything <= 0 means "source voxel diagonal", i.e.
    // source_voxel_size * sqrt(3).
    double max_dist = 0.0;
};

struct FrameLabelResult {
    FrameDecision decision;
    std::optional<LabelGrid> grid;  // present only for kept frames
};

// Full per-frame pipeline: pose validation, grid placement, label transfer,
// content filter.
FrameLabelResult generate_frame_label(const CameraModel& cam, const LabeledPointSet& points,
                                      const Aabb& scene_bounds, const LabelGenConfig& config);

}  // namespace occ
