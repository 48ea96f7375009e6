#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "occ/camera.hpp"
#include "occ/depth_bins.hpp"
#include "occ/voxel.hpp"

namespace occ {

enum class SampleMode : std::uint8_t { nearest, bilinear };

// One feature map of the pyramid, stored (channel, row, col) with col
// fastest, matching the tensor layout on disk. `scale` is the downsampling
// factor relative to the input image.
struct FeatureLevel {
    int scale = 1;
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    float at(int c, int row, int col) const {
        return data[(static_cast<std::size_t>(c) * height + row) * width + col];
    }
};

// Multi-scale feature maps over one image. All levels share the channel
// count; level extents must equal the base extents divided by the scale.
class FeaturePyramid {
public:
    FeaturePyramid(int base_height, int base_width);

    void add_level(FeatureLevel level);

    int base_height() const noexcept { return base_height_; }
    int base_width() const noexcept { return base_width_; }
    int channels() const noexcept { return channels_; }  // 0 until a level is added

    bool has_level(int scale) const { return levels_.count(scale) != 0; }
    const FeatureLevel& level(int scale) const;
    std::vector<int> scales() const;  // ascending

private:
    int base_height_, base_width_;
    int channels_ = 0;
    std::map<int, FeatureLevel> levels_;
};

// Pixel coordinates (at scale 1) and camera depth of every voxel centroid of
// a grid, flattened in grid order. `valid` marks voxels that project in
// front of the camera and inside the image rectangle.
struct VoxelProjection {
    GridSpec spec;
    int image_width = 0;
    int image_height = 0;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> z;
    std::vector<std::uint8_t> valid;

    double valid_fraction() const;
};

VoxelProjection project_voxels(const CameraModel& cam, const GridSpec& spec);

// Per-voxel feature columns gathered from one level: voxel-major, channel
// fastest (V x C). Invalid voxels yield zero columns. Coordinates are the
// scale-1 pixel positions divided by the level's scale; bilinear taps are
// clamped to the level rectangle.
std::vector<float> sample_features(const FeatureLevel& level, const VoxelProjection& proj,
                                   SampleMode mode);

// Per-voxel scalar weight: the probability mass of each voxel's depth bin,
// sampled from a distribution at the given scale. Invalid voxels yield 0.
std::vector<float> sample_depth_weights(const DepthDistribution& dist, int scale,
                                        const VoxelProjection& proj, const DepthBinSpec& bins,
                                        SampleMode mode);

// Fused multi-scale voxel features, (x, y, z, channel) with channel fastest.
struct VoxelFeatureVolume {
    GridSpec spec;
    int channels = 0;
    std::vector<float> features;

    DenseTensor to_tensor() const;
};

// Depth-weighted multi-scale lifting: for every voxel, accumulate over the
// pyramid's scales (ascending) the level's sampled feature column times the
// voxel's depth-bin weight at that scale. Voxels outside the view keep
// all-zero features. Each scale present in the pyramid needs a distribution
// in `dists` with matching extents and bin count.
VoxelFeatureVolume fuse(const FeaturePyramid& pyramid,
                        const std::map<int, DepthDistribution>& dists,
                        const VoxelProjection& proj, const DepthBinSpec& bins,
                        SampleMode mode, int threads = 1);

}  // namespace occ
