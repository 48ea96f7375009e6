#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occ/voxel.hpp"

namespace occ {

// Confusion counts over labels 0..11, pooled across every accumulated
// volume. Ground-truth unknown voxels (255) are tallied separately and
// never influence a metric; predictions must not contain 255 at voxels that
// are scored.
class ConfusionMatrix {
public:
    static constexpr int kClassCount = kSemanticClassCount + 1;  // free + 11 classes

    void accumulate(const LabelGrid& pred, const LabelGrid& gt);

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);

    std::uint64_t count(int gt, int pred) const {
        return counts_[static_cast<std::size_t>(gt) * kClassCount + pred];
    }
    std::uint64_t ignored() const noexcept { return ignored_; }
    std::uint64_t scored() const noexcept { return scored_; }

    // Intersection over union of semantic class cls (1..11). Empty when the
    // class appears in neither ground truth nor prediction.
    std::optional<double> class_iou(int cls) const;

    // Mean over all 11 semantic classes; classes with undefined IoU
    // contribute zero while the denominator stays 11.
    double miou() const;

    // Binary occupied-vs-free IoU, where "occupied" is any semantic label.
    // Empty when no voxel is occupied in either volume.
    std::optional<double> occupancy_iou() const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::array<std::uint64_t, kClassCount * kClassCount> counts_{};
    std::uint64_t ignored_ = 0;
    std::uint64_t scored_ = 0;
};

// One labelled row of a report: a method or run name plus its pooled
// confusion counts.
struct EvalRow {
    std::string name;
    ConfusionMatrix conf;
};

// Fixed-layout report: columns are occupancy IoU, the 11 semantic classes
// in canonical order, then mIoU; values are percentages with two decimals,
// undefined entries shown as "-". Both renderings carry identical numbers.
std::string render_report_text(std::span<const EvalRow> rows);
std::string render_report_csv(std::span<const EvalRow> rows);

}  // namespace occ
