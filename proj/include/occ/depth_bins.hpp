#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "occ/tensor.hpp"

namespace occ {

// Probabilities are clamped to [eps, 1-eps] inside the log terms of the
// depth loss so one-hot predictions stay finite.
inline constexpr double kBceEpsilon = 1e-7;

// Linearly increasing depth discretization of [d_min, d_max] into n_bins
// bins: bin i covers [edge_i, edge_{i+1}) with width (i+1) * delta, so near
// bins are narrow and far bins are wide. The last bin includes d_max.
struct DepthBinSpec {
    double d_min;
    double d_max;
    int n_bins;
    double delta;  // 2 (d_max - d_min) / (n_bins (n_bins + 1))

    DepthBinSpec(double d_min, double d_max, int n_bins);

    bool operator==(const DepthBinSpec&) const = default;
};

// n_bins + 1 edges; edge_i = d_min + delta * i (i + 1) / 2.
std::vector<double> bin_edges(const DepthBinSpec& spec);

// Fractional bin position of a depth: the inverse of the edge formula,
//   l(d) = -0.5 + 0.5 * sqrt(1 + 8 (d - d_min) / delta).
// Depths below d_min give l < 0; depths above d_max give l > n_bins - 1.
double continuous_index(const DepthBinSpec& spec, double depth);

// floor(l) clamped into [0, n_bins - 1].
int bin_index(const DepthBinSpec& spec, double depth);

// Per-pixel distribution over depth bins, stored (bin, row, col) with col
// fastest. Values are validated to lie in [0, 1]; normalization across bins
// is the caller's contract, checked on demand via is_normalized().
class DepthDistribution {
public:
    DepthDistribution(int n_bins, int height, int width, std::vector<float> probs);

    static DepthDistribution uniform(int n_bins, int height, int width);

    int n_bins() const noexcept { return n_bins_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }

    std::span<const float> probs() const noexcept { return probs_; }

    float at(int bin, int row, int col) const {
        return probs_[(static_cast<std::size_t>(bin) * height_ + row) * width_ + col];
    }

    // True when every pixel's bin column sums to 1 within tol.
    bool is_normalized(double tol = 1e-5) const;

    DenseTensor to_tensor() const;
    static DepthDistribution from_tensor(const DenseTensor& tensor);

    bool operator==(const DepthDistribution&) const = default;

private:
    int n_bins_, height_, width_;
    std::vector<float> probs_;
};

// Metric depth image, row-major (row, col). Depths <= 0 mean "missing".
class DepthMap {
public:
    DepthMap(int height, int width, std::vector<float> depth);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::span<const float> values() const noexcept { return depth_; }

    float at(int row, int col) const {
        return depth_[static_cast<std::size_t>(row) * width_ + col];
    }

    static DepthMap from_tensor(const DenseTensor& tensor);

private:
    int height_, width_;
    std::vector<float> depth_;
};

// One-hot discretization target. mask is per pixel (row-major, 1 = pixel
// carries a measurement); masked-out pixels have all-zero columns.
struct OneHotTarget {
    DepthDistribution dist;
    std::vector<std::uint8_t> mask;
};

OneHotTarget one_hot_target(const DepthMap& depth, const DepthBinSpec& spec);

// Spatial average pooling per bin over factor x factor windows. Extents
// must be divisible by factor. Preserves per-pixel normalization.
DepthDistribution downsample_distribution(const DepthDistribution& dist, int factor);

// Masked binary cross-entropy between predicted and target distributions,
// treating every (pixel, bin) cell as an independent Bernoulli. `mask` is
// per pixel (empty = all valid); the sum is divided by n_bins * number of
// unmasked pixels. Returns 0 when every pixel is masked out.
double bce_depth_loss(const DepthDistribution& pred, const DepthDistribution& target,
                      std::span<const std::uint8_t> mask, int threads = 1);

// Analytic d(loss)/d(pred) with the same masking and normalization; entries
// where the clamp saturates (pred outside [eps, 1-eps]) are zero. Layout
// matches the distribution buffer.
std::vector<double> bce_depth_loss_grad(const DepthDistribution& pred,
                                        const DepthDistribution& target,
                                        std::span<const std::uint8_t> mask, int threads = 1);

}  // namespace occ
