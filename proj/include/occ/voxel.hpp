#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "occ/geometry.hpp"
#include "occ/tensor.hpp"

namespace occ {

// Label alphabet: 0 free space, 1..11 semantic classes, 255 unknown.
inline constexpr std::uint8_t kFreeLabel = 0;
inline constexpr std::uint8_t kUnknownLabel = 255;
inline constexpr int kSemanticClassCount = 11;

// Canonical semantic class order shared by reports and per-class metrics.
std::span<const char* const> semantic_class_names();

// Axis-aligned voxel grid geometry. `origin` is the minimum corner of voxel
// (0, 0, 0); voxels are cubes of edge `voxel_size`.
struct GridSpec {
    std::array<std::int64_t, 3> dims{};
    Vec3 origin{};
    double voxel_size = 0.0;

    GridSpec(std::array<std::int64_t, 3> dims, Vec3 origin, double voxel_size);

    std::int64_t voxel_count() const noexcept { return dims[0] * dims[1] * dims[2]; }

    // Row-major flattening: axis 0 slowest, axis 2 fastest.
    std::int64_t flat_index(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
        return (i * dims[1] + j) * dims[2] + k;
    }

    bool in_range(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
        return i >= 0 && i < dims[0] && j >= 0 && j < dims[1] && k >= 0 && k < dims[2];
    }

    bool operator==(const GridSpec&) const = default;
};

// World-space center of voxel (i, j, k). Throws std::domain_error when the
// index is outside the grid.
Vec3 centroid(const GridSpec& spec, std::int64_t i, std::int64_t j, std::int64_t k);

// Dataset grid presets. Voxel sizes are configurable defaults; the grids
// carry their own geometry so files stay self-describing.
GridSpec nyuv2_full_grid(Vec3 origin = {});   // 240 x 144 x 240 at 0.02 m
GridSpec nyuv2_eval_grid(Vec3 origin = {});   // 60 x 36 x 60 at 0.08 m
GridSpec occ_scannet_grid(Vec3 origin = {});  // 60 x 60 x 36 at 0.08 m

// Dense voxel label volume. Stored labels are validated: anything outside
// {0..11, 255} is rejected.
class LabelGrid {
public:
    explicit LabelGrid(GridSpec spec);  // all free
    LabelGrid(GridSpec spec, std::vector<std::uint8_t> labels);

    const GridSpec& spec() const noexcept { return spec_; }
    std::span<const std::uint8_t> labels() const noexcept { return labels_; }

    std::uint8_t at(std::int64_t i, std::int64_t j, std::int64_t k) const;
    void set(std::int64_t i, std::int64_t j, std::int64_t k, std::uint8_t label);

    bool operator==(const LabelGrid&) const = default;

private:
    GridSpec spec_;
    std::vector<std::uint8_t> labels_;
};

// Valid stored label: free, semantic 1..11, or unknown.
inline bool valid_label(std::uint8_t label) {
    return label <= kSemanticClassCount || label == kUnknownLabel;
}

// Reduces each factor^3 block to one voxel. Semantic labels win by
// plurality (ties to the smallest class id); blocks with no semantic label
// become free if any voxel is free, otherwise unknown. Grid extents must be
// divisible by `factor`.
LabelGrid downsample_labels(const LabelGrid& grid, std::int64_t factor);

// Count of each label value, indexed by label byte.
std::array<std::uint64_t, 256> class_histogram(const LabelGrid& grid);

// Tensor bridge: rank-3 u8 tensor with axis order (x, y, z). Geometry is
// not stored in the tensor; readers supply origin and voxel size.
DenseTensor label_grid_to_tensor(const LabelGrid& grid);
LabelGrid label_grid_from_tensor(const DenseTensor& tensor, Vec3 origin = {},
                                 double voxel_size = 1.0);

}  // namespace occ
