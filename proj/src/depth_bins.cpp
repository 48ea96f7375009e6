#include "occ/depth_bins.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "occ/errors.hpp"
#include "occ/parallel.hpp"

namespace occ {

DepthBinSpec::DepthBinSpec(double d_min_in, double d_max_in, int n_bins_in)
    : d_min(d_min_in), d_max(d_max_in), n_bins(n_bins_in), delta(0.0) {
    if (!std::isfinite(d_min) || !std::isfinite(d_max)) {
        throw std::invalid_argument("depth range must be finite");
    }
    if (!(d_min < d_max)) throw std::invalid_argument("requires d_min < d_max");
    if (n_bins < 1) throw std::invalid_argument("need at least one depth bin");
    delta = 2.0 * (d_max - d_min) /
            (static_cast<double>(n_bins) * (static_cast<double>(n_bins) + 1.0));
}

std::vector<double> bin_edges(const DepthBinSpec& spec) {
    std::vector<double> edges(static_cast<std::size_t>(spec.n_bins) + 1);
    for (int i = 0; i <= spec.n_bins; ++i) {
        edges[static_cast<std::size_t>(i)] =
            spec.d_min + spec.delta * (static_cast<double>(i) * (i + 1)) * 0.5;
    }
    return edges;
}

double continuous_index(const DepthBinSpec& spec, double depth) {
    const double radicand = 1.0 + 8.0 * (depth - spec.d_min) / spec.delta;
    // Depths far below d_min would push the radicand negative; clamping keeps
    // the index defined (still < 0, so discretization lands in bin 0).
    return -0.5 + 0.5 * std::sqrt(radicand > 0.0 ? radicand : 0.0);
}

int bin_index(const DepthBinSpec& spec, double depth) {
    const double l = std::floor(continuous_index(spec, depth));
    if (l < 0.0) return 0;
    if (l > static_cast<double>(spec.n_bins - 1)) return spec.n_bins - 1;
    return static_cast<int>(l);
}

namespace {

void check_image_extents(int height, int width) {
    if (height < 1 || width < 1) throw std::invalid_argument("image extents must be positive");
}

}  // namespace

DepthDistribution::DepthDistribution(int n_bins, int height, int width, std::vector<float> probs)
    : n_bins_(n_bins), height_(height), width_(width), probs_(std::move(probs)) {
    if (n_bins < 1) throw std::invalid_argument("need at least one depth bin");
    check_image_extents(height, width);
    const std::size_t expect = static_cast<std::size_t>(n_bins) * height * width;
    if (probs_.size() != expect) {
        throw std::invalid_argument("probability buffer size does not match (bins, height, width)");
    }
    for (float p : probs_) {
        if (!(p >= 0.0f && p <= 1.0f)) {
            throw std::invalid_argument("probabilities must lie in [0, 1]");
        }
    }
}

DepthDistribution DepthDistribution::uniform(int n_bins, int height, int width) {
    if (n_bins < 1) throw std::invalid_argument("need at least one depth bin");
    check_image_extents(height, width);
    const float p = 1.0f / static_cast<float>(n_bins);
    return DepthDistribution(
        n_bins, height, width,
        std::vector<float>(static_cast<std::size_t>(n_bins) * height * width, p));
}

bool DepthDistribution::is_normalized(double tol) const {
    const std::size_t plane = static_cast<std::size_t>(height_) * width_;
    for (std::size_t px = 0; px < plane; ++px) {
        double sum = 0.0;
        for (int b = 0; b < n_bins_; ++b) sum += probs_[b * plane + px];
        if (std::fabs(sum - 1.0) > tol) return false;
    }
    return true;
}

DenseTensor DepthDistribution::to_tensor() const {
    return DenseTensor::from_f32({static_cast<std::uint64_t>(n_bins_),
                                  static_cast<std::uint64_t>(height_),
                                  static_cast<std::uint64_t>(width_)},
                                 probs_);
}

DepthDistribution DepthDistribution::from_tensor(const DenseTensor& tensor) {
    if (tensor.rank() != 3) throw format_error("depth distribution tensor must be rank 3");
    const auto& d = tensor.dims();
    return DepthDistribution(static_cast<int>(d[0]), static_cast<int>(d[1]),
                             static_cast<int>(d[2]), tensor.to_f32_values());
}

DepthMap::DepthMap(int height, int width, std::vector<float> depth)
    : height_(height), width_(width), depth_(std::move(depth)) {
    check_image_extents(height, width);
    if (depth_.size() != static_cast<std::size_t>(height) * width) {
        throw std::invalid_argument("depth buffer size does not match (height, width)");
    }
    for (float d : depth_) {
        if (!std::isfinite(d)) throw std::invalid_argument("depth values must be finite");
    }
}

DepthMap DepthMap::from_tensor(const DenseTensor& tensor) {
    if (tensor.rank() != 2) throw format_error("depth map tensor must be rank 2");
    const auto& d = tensor.dims();
    return DepthMap(static_cast<int>(d[0]), static_cast<int>(d[1]), tensor.to_f32_values());
}

OneHotTarget one_hot_target(const DepthMap& depth, const DepthBinSpec& spec) {
    const int h = depth.height();
    const int w = depth.width();
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::vector<float> probs(static_cast<std::size_t>(spec.n_bins) * plane, 0.0f);
    std::vector<std::uint8_t> mask(plane, 0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t px = static_cast<std::size_t>(r) * w + c;
            const float d = depth.at(r, c);
            if (!(d > 0.0f)) continue;  // missing measurement
            mask[px] = 1;
            const int bin = bin_index(spec, static_cast<double>(d));
            probs[static_cast<std::size_t>(bin) * plane + px] = 1.0f;
        }
    }
    return {DepthDistribution(spec.n_bins, h, w, std::move(probs)), std::move(mask)};
}

DepthDistribution downsample_distribution(const DepthDistribution& dist, int factor) {
    if (factor < 1) throw std::domain_error("downsample factor must be positive");
    const int h = dist.height();
    const int w = dist.width();
    if (h % factor != 0 || w % factor != 0) {
        throw std::domain_error("distribution extents not divisible by factor " +
                                std::to_string(factor));
    }
    const int ho = h / factor;
    const int wo = w / factor;
    const std::size_t plane_in = static_cast<std::size_t>(h) * w;
    const std::size_t plane_out = static_cast<std::size_t>(ho) * wo;
    const auto in = dist.probs();
    std::vector<float> out(static_cast<std::size_t>(dist.n_bins()) * plane_out);
    const double inv_area = 1.0 / (static_cast<double>(factor) * factor);
    for (int b = 0; b < dist.n_bins(); ++b) {
        for (int ro = 0; ro < ho; ++ro) {
            for (int co = 0; co < wo; ++co) {
                double acc = 0.0;
                for (int dr = 0; dr < factor; ++dr) {
                    for (int dc = 0; dc < factor; ++dc) {
                        acc += in[b * plane_in +
                                  static_cast<std::size_t>(ro * factor + dr) * w +
                                  (co * factor + dc)];
                    }
                }
                out[b * plane_out + static_cast<std::size_t>(ro) * wo + co] =
                    static_cast<float>(acc * inv_area);
            }
        }
    }
    return DepthDistribution(dist.n_bins(), ho, wo, std::move(out));
}

namespace {

void check_loss_inputs(const DepthDistribution& pred, const DepthDistribution& target,
                       std::span<const std::uint8_t> mask) {
    if (pred.n_bins() != target.n_bins() || pred.height() != target.height() ||
        pred.width() != target.width()) {
        throw std::domain_error("prediction and target distribution shapes differ");
    }
    const std::size_t plane = static_cast<std::size_t>(pred.height()) * pred.width();
    if (!mask.empty() && mask.size() != plane) {
        throw std::domain_error("mask size does not match the pixel count");
    }
}

std::uint64_t count_valid(std::span<const std::uint8_t> mask, std::size_t plane) {
    if (mask.empty()) return plane;
    std::uint64_t n = 0;
    for (std::uint8_t m : mask) n += (m != 0);
    return n;
}

inline double clamp_prob(double p) {
    if (p < kBceEpsilon) return kBceEpsilon;
    if (p > 1.0 - kBceEpsilon) return 1.0 - kBceEpsilon;
    return p;
}

}  // namespace

double bce_depth_loss(const DepthDistribution& pred, const DepthDistribution& target,
                      std::span<const std::uint8_t> mask, int threads) {
    check_loss_inputs(pred, target, mask);
    const std::size_t plane = static_cast<std::size_t>(pred.height()) * pred.width();
    const std::uint64_t valid = count_valid(mask, plane);
    if (valid == 0) return 0.0;

    const auto p = pred.probs();
    const auto t = target.probs();
    const int n_bins = pred.n_bins();

    // One partial sum per pixel, combined by a fixed-shape pairwise tree, so
    // the result is independent of the thread count.
    std::vector<double> per_pixel(plane, 0.0);
    parallel_for(0, static_cast<std::int64_t>(plane), threads,
                 [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t px = lo; px < hi; ++px) {
                         if (!mask.empty() && mask[static_cast<std::size_t>(px)] == 0) continue;
                         double s = 0.0;
                         for (int b = 0; b < n_bins; ++b) {
                             const std::size_t idx =
                                 static_cast<std::size_t>(b) * plane + static_cast<std::size_t>(px);
                             const double pb = clamp_prob(static_cast<double>(p[idx]));
                             const double tb = static_cast<double>(t[idx]);
                             s += tb * std::log(pb) + (1.0 - tb) * std::log1p(-pb);
                         }
                         per_pixel[static_cast<std::size_t>(px)] = s;
                     }
                 });

    const double normalizer = static_cast<double>(n_bins) * static_cast<double>(valid);
    return -pairwise_sum(per_pixel) / normalizer;
}

std::vector<double> bce_depth_loss_grad(const DepthDistribution& pred,
                                        const DepthDistribution& target,
                                        std::span<const std::uint8_t> mask, int threads) {
    check_loss_inputs(pred, target, mask);
    const std::size_t plane = static_cast<std::size_t>(pred.height()) * pred.width();
    const std::size_t total = static_cast<std::size_t>(pred.n_bins()) * plane;
    std::vector<double> grad(total, 0.0);

    const std::uint64_t valid = count_valid(mask, plane);
    if (valid == 0) return grad;

    const auto p = pred.probs();
    const auto t = target.probs();
    const int n_bins = pred.n_bins();
    const double inv_norm = 1.0 / (static_cast<double>(n_bins) * static_cast<double>(valid));

    parallel_for(0, static_cast<std::int64_t>(plane), threads,
                 [&](std::int64_t lo, std::int64_t hi) {
                     for (std::int64_t px = lo; px < hi; ++px) {
                         if (!mask.empty() && mask[static_cast<std::size_t>(px)] == 0) continue;
                         for (int b = 0; b < n_bins; ++b) {
                             const std::size_t idx =
                                 static_cast<std::size_t>(b) * plane + static_cast<std::size_t>(px);
                             const double pb = static_cast<double>(p[idx]);
                             if (pb < kBceEpsilon || pb > 1.0 - kBceEpsilon) continue;  // clamp is flat
                             const double tb = static_cast<double>(t[idx]);
                             grad[idx] = ((1.0 - tb) / (1.0 - pb) - tb / pb) * inv_norm;
                         }
                     }
                 });
    return grad;
}

}  // namespace occ
