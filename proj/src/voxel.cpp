#include "occ/voxel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "occ/errors.hpp"

namespace occ {

namespace {

constexpr const char* kClassNames[kSemanticClassCount] = {
    "ceiling", "floor", "wall", "window", "chair", "bed",
    "sofa", "table", "tvs", "furniture", "objects",
};

}  // namespace

std::span<const char* const> semantic_class_names() {
    return {kClassNames, kSemanticClassCount};
}

GridSpec::GridSpec(std::array<std::int64_t, 3> dims_in, Vec3 origin_in, double voxel_size_in)
    : dims(dims_in), origin(origin_in), voxel_size(voxel_size_in) {
    for (std::int64_t d : dims) {
        if (d < 1) throw std::invalid_argument("grid extents must be positive");
    }
    if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
        throw std::invalid_argument("voxel size must be positive and finite");
    }
    if (!finite(origin)) throw std::invalid_argument("grid origin must be finite");
    // keep flat indices inside int64
    if (dims[0] > (std::int64_t{1} << 21) || dims[1] > (std::int64_t{1} << 21) ||
        dims[2] > (std::int64_t{1} << 21)) {
        throw std::invalid_argument("grid extents unreasonably large");
    }
}

Vec3 centroid(const GridSpec& spec, std::int64_t i, std::int64_t j, std::int64_t k) {
    if (!spec.in_range(i, j, k)) {
        throw std::domain_error("voxel index (" + std::to_string(i) + ", " + std::to_string(j) +
                                ", " + std::to_string(k) + ") outside grid");
    }
    return {spec.origin.x + spec.voxel_size * (static_cast<double>(i) + 0.5),
            spec.origin.y + spec.voxel_size * (static_cast<double>(j) + 0.5),
            spec.origin.z + spec.voxel_size * (static_cast<double>(k) + 0.5)};
}

GridSpec nyuv2_full_grid(Vec3 origin) { return GridSpec({240, 144, 240}, origin, 0.02); }
GridSpec nyuv2_eval_grid(Vec3 origin) { return GridSpec({60, 36, 60}, origin, 0.08); }
GridSpec occ_scannet_grid(Vec3 origin) { return GridSpec({60, 60, 36}, origin, 0.08); }

LabelGrid::LabelGrid(GridSpec spec)
    : spec_(spec), labels_(static_cast<std::size_t>(spec.voxel_count()), kFreeLabel) {}

LabelGrid::LabelGrid(GridSpec spec, std::vector<std::uint8_t> labels)
    : spec_(spec), labels_(std::move(labels)) {
    if (labels_.size() != static_cast<std::size_t>(spec_.voxel_count())) {
        throw std::invalid_argument("label buffer size does not match grid extents");
    }
    for (std::uint8_t v : labels_) {
        if (!valid_label(v)) {
            throw std::invalid_argument("label value " + std::to_string(v) +
                                        " outside {0..11, 255}");
        }
    }
}

std::uint8_t LabelGrid::at(std::int64_t i, std::int64_t j, std::int64_t k) const {
    if (!spec_.in_range(i, j, k)) throw std::domain_error("voxel index outside grid");
    return labels_[static_cast<std::size_t>(spec_.flat_index(i, j, k))];
}

void LabelGrid::set(std::int64_t i, std::int64_t j, std::int64_t k, std::uint8_t label) {
    if (!spec_.in_range(i, j, k)) throw std::domain_error("voxel index outside grid");
    if (!valid_label(label)) {
        throw std::invalid_argument("label value " + std::to_string(label) + " outside {0..11, 255}");
    }
    labels_[static_cast<std::size_t>(spec_.flat_index(i, j, k))] = label;
}

LabelGrid downsample_labels(const LabelGrid& grid, std::int64_t factor) {
    if (factor < 1) throw std::domain_error("downsample factor must be positive");
    const GridSpec& in = grid.spec();
    for (std::int64_t d : in.dims) {
        if (d % factor != 0) {
            throw std::domain_error("grid extents not divisible by downsample factor " +
                                    std::to_string(factor));
        }
    }
    GridSpec out_spec({in.dims[0] / factor, in.dims[1] / factor, in.dims[2] / factor},
                      in.origin, in.voxel_size * static_cast<double>(factor));
    LabelGrid out(out_spec);

    for (std::int64_t i = 0; i < out_spec.dims[0]; ++i) {
        for (std::int64_t j = 0; j < out_spec.dims[1]; ++j) {
            for (std::int64_t k = 0; k < out_spec.dims[2]; ++k) {
                std::uint64_t counts[kSemanticClassCount + 1] = {};
                bool any_free = false;
                for (std::int64_t di = 0; di < factor; ++di) {
                    for (std::int64_t dj = 0; dj < factor; ++dj) {
                        for (std::int64_t dk = 0; dk < factor; ++dk) {
                            const std::uint8_t v =
                                grid.at(i * factor + di, j * factor + dj, k * factor + dk);
                            if (v == kUnknownLabel) continue;
                            if (v == kFreeLabel) {
                                any_free = true;
                            } else {
                                ++counts[v];
                            }
                        }
                    }
                }
                std::uint8_t best = 0;
                std::uint64_t best_count = 0;
                for (int c = 1; c <= kSemanticClassCount; ++c) {
                    if (counts[c] > best_count) {  // ties keep the smaller id
                        best_count = counts[c];
                        best = static_cast<std::uint8_t>(c);
                    }
                }
                std::uint8_t label;
                if (best_count > 0) {
                    label = best;
                } else {
                    label = any_free ? kFreeLabel : kUnknownLabel;
                }
                out.set(i, j, k, label);
            }
        }
    }
    return out;
}

std::array<std::uint64_t, 256> class_histogram(const LabelGrid& grid) {
    std::array<std::uint64_t, 256> hist{};
    for (std::uint8_t v : grid.labels()) ++hist[v];
    return hist;
}

DenseTensor label_grid_to_tensor(const LabelGrid& grid) {
    const auto& d = grid.spec().dims;
    return DenseTensor::from_u8({static_cast<std::uint64_t>(d[0]),
                                 static_cast<std::uint64_t>(d[1]),
                                 static_cast<std::uint64_t>(d[2])},
                                grid.labels());
}

LabelGrid label_grid_from_tensor(const DenseTensor& tensor, Vec3 origin, double voxel_size) {
    if (tensor.rank() != 3 || tensor.dtype() != Dtype::u8) {
        throw format_error("label grid tensor must be a rank-3 u8 tensor");
    }
    const auto& d = tensor.dims();
    GridSpec spec({static_cast<std::int64_t>(d[0]), static_cast<std::int64_t>(d[1]),
                   static_cast<std::int64_t>(d[2])},
                  origin, voxel_size);
    auto bytes = tensor.as_u8();
    return LabelGrid(spec, {bytes.begin(), bytes.end()});
}

}  // namespace occ
