#include "occ/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "occ/errors.hpp"

namespace occ {

void ConfusionMatrix::accumulate(const LabelGrid& pred, const LabelGrid& gt) {
    if (pred.spec().dims != gt.spec().dims) {
        throw std::domain_error("prediction and ground-truth grid extents differ");
    }
    const auto p = pred.labels();
    const auto g = gt.labels();
    // validate before touching the counts, so a bad volume never leaves a
    // half-accumulated matrix behind
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] != kUnknownLabel && p[i] > kSemanticClassCount) {
            throw invalid_prediction_error("prediction holds label " + std::to_string(p[i]) +
                                           " at a scored voxel");
        }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] == kUnknownLabel) {
            ++ignored_;
            continue;
        }
        ++counts_[static_cast<std::size_t>(g[i]) * kClassCount + p[i]];
        ++scored_;
    }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    ignored_ += other.ignored_;
    scored_ += other.scored_;
    return *this;
}

std::optional<double> ConfusionMatrix::class_iou(int cls) const {
    if (cls < 1 || cls > kSemanticClassCount) {
        throw std::domain_error("class id " + std::to_string(cls) + " outside 1..11");
    }
    const std::uint64_t tp = count(cls, cls);
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    for (int other = 0; other < kClassCount; ++other) {
        if (other == cls) continue;
        fp += count(other, cls);
        fn += count(cls, other);
    }
    const std::uint64_t denom = tp + fp + fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(denom);
}

double ConfusionMatrix::miou() const {
    double sum = 0.0;
    for (int cls = 1; cls <= kSemanticClassCount; ++cls) {
        sum += class_iou(cls).value_or(0.0);
    }
    return sum / static_cast<double>(kSemanticClassCount);
}

std::optional<double> ConfusionMatrix::occupancy_iou() const {
    // occupied = any semantic label; intersection is "both occupied",
    // regardless of which classes
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (int g = 1; g <= kSemanticClassCount; ++g) {
        for (int p = 1; p <= kSemanticClassCount; ++p) tp += count(g, p);
        fn += count(g, 0);
    }
    for (int p = 1; p <= kSemanticClassCount; ++p) fp += count(0, p);
    const std::uint64_t denom = tp + fp + fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(denom);
}

namespace {

std::string format_cell(const std::optional<double>& value) {
    if (!value) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *value * 100.0);
    return buf;
}

std::vector<std::string> column_names() {
    std::vector<std::string> names;
    names.push_back("IoU");
    for (const char* c : semantic_class_names()) names.push_back(c);
    names.push_back("mIoU");
    return names;
}

std::vector<std::string> row_cells(const ConfusionMatrix& conf) {
    std::vector<std::string> cells;
    cells.push_back(format_cell(conf.occupancy_iou()));
    for (int cls = 1; cls <= kSemanticClassCount; ++cls) {
        cells.push_back(format_cell(conf.class_iou(cls)));
    }
    cells.push_back(format_cell(conf.miou()));
    return cells;
}

}  // namespace

std::string render_report_text(std::span<const EvalRow> rows) {
    const std::vector<std::string> names = column_names();

    std::size_t name_width = std::string("method").size();
    for (const EvalRow& r : rows) name_width = std::max(name_width, r.name.size());

    std::vector<std::size_t> widths(names.size());
    std::vector<std::vector<std::string>> cells;
    for (std::size_t i = 0; i < names.size(); ++i) widths[i] = names[i].size();
    for (const EvalRow& r : rows) {
        cells.push_back(row_cells(r.conf));
        for (std::size_t i = 0; i < names.size(); ++i) {
            widths[i] = std::max(widths[i], cells.back()[i].size());
        }
    }

    std::ostringstream out;
    const auto pad_left = [&out](const std::string& s, std::size_t w) {
        for (std::size_t i = s.size(); i < w; ++i) out << ' ';
        out << s;
    };
    const auto pad_right = [&out](const std::string& s, std::size_t w) {
        out << s;
        for (std::size_t i = s.size(); i < w; ++i) out << ' ';
    };

    pad_right("method", name_width);
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << "  ";
        pad_left(names[i], widths[i]);
    }
    out << "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        pad_right(rows[r].name, name_width);
        for (std::size_t i = 0; i < names.size(); ++i) {
            out << "  ";
            pad_left(cells[r][i], widths[i]);
        }
        out << "\n";
    }
    return out.str();
}

std::string render_report_csv(std::span<const EvalRow> rows) {
    std::ostringstream out;
    out << "method";
    for (const std::string& n : column_names()) out << "," << n;
    out << "\n";
    for (const EvalRow& r : rows) {
        out << r.name;
        for (const std::string& cell : row_cells(r.conf)) {
            out << "," << (cell == "-" ? "" : cell);
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace occ
