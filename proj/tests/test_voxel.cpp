#include <doctest.h>

#include <map>
#include <stdexcept>

#include "occ/rng.hpp"
#include "occ/voxel.hpp"

using namespace occ;

TEST_CASE("centroid fixtures") {
    const GridSpec unit({2, 2, 2}, {0, 0, 0}, 1.0);
    const Vec3 c = centroid(unit, 0, 0, 0);
    CHECK(c.x == 0.5);
    CHECK(c.y == 0.5);
    CHECK(c.z == 0.5);

    const GridSpec eval({60, 36, 60}, {-2.4, 0.0, -2.4}, 0.08);
    const Vec3 mid = centroid(eval, 30, 18, 30);
    CHECK(mid.x == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(mid.y == doctest::Approx(1.48).epsilon(1e-12));
    CHECK(mid.z == doctest::Approx(0.04).epsilon(1e-12));

    CHECK_THROWS_AS(centroid(unit, 2, 0, 0), std::domain_error);
    CHECK_THROWS_AS(centroid(unit, 0, -1, 0), std::domain_error);
}

TEST_CASE("adjacent centroids differ by exactly one voxel edge") {
    const GridSpec spec({4, 4, 4}, {1.0, -2.0, 0.5}, 0.25);
    const Vec3 a = centroid(spec, 1, 2, 3);
    CHECK(centroid(spec, 2, 2, 3).x - a.x == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(centroid(spec, 1, 3, 3).y - a.y == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(centroid(spec, 1, 2, 2).z - a.z == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("grid spec validation and flat order") {
    CHECK_THROWS_AS(GridSpec({0, 1, 1}, {}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec({1, 1, 1}, {}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec({1, 1, 1}, {}, -2.0), std::invalid_argument);

    const GridSpec spec({2, 3, 4}, {}, 1.0);
    CHECK(spec.voxel_count() == 24);
    // axis 2 fastest
    CHECK(spec.flat_index(0, 0, 1) == 1);
    CHECK(spec.flat_index(0, 1, 0) == 4);
    CHECK(spec.flat_index(1, 0, 0) == 12);
}

TEST_CASE("grid presets") {
    const GridSpec full = nyuv2_full_grid();
    CHECK(full.dims == std::array<std::int64_t, 3>{240, 144, 240});
    CHECK(full.voxel_size == 0.02);

    const GridSpec eval = nyuv2_eval_grid();
    CHECK(eval.dims == std::array<std::int64_t, 3>{60, 36, 60});
    CHECK(eval.voxel_size == 0.08);

    const GridSpec scannet = occ_scannet_grid();
    CHECK(scannet.dims == std::array<std::int64_t, 3>{60, 60, 36});
    CHECK(scannet.voxel_size == 0.08);

    // downsampling the full grid by 4 yields the evaluation geometry
    const LabelGrid fine(full);
    const LabelGrid coarse = downsample_labels(fine, 4);
    CHECK(coarse.spec().dims == eval.dims);
    CHECK(coarse.spec().voxel_size == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("label grid validates stored values") {
    const GridSpec spec({2, 2, 2}, {}, 1.0);
    CHECK_THROWS_AS(LabelGrid(spec, std::vector<std::uint8_t>(8, 12)), std::invalid_argument);
    CHECK_THROWS_AS(LabelGrid(spec, std::vector<std::uint8_t>(7, 0)), std::invalid_argument);
    LabelGrid g(spec);
    CHECK_THROWS_AS(g.set(0, 0, 0, 100), std::invalid_argument);
    CHECK_NOTHROW(g.set(0, 0, 0, kUnknownLabel));
    CHECK_NOTHROW(g.set(0, 0, 0, 11));
}

namespace {

// The reduction rule, restated independently: semantic plurality with ties
// to the smaller id, otherwise free beats unknown.
std::uint8_t expected_block_label(const std::vector<std::uint8_t>& block) {
    std::map<std::uint8_t, int> semantic;
    bool any_free = false;
    for (std::uint8_t v : block) {
        if (v == kFreeLabel) any_free = true;
        else if (v != kUnknownLabel) semantic[v]++;
    }
    if (!semantic.empty()) {
        // std::map iterates ids ascending, so strict > keeps the smallest
        std::uint8_t best = 0;
        int best_count = 0;
        for (const auto& [label, count] : semantic) {
            if (count > best_count) {
                best = label;
                best_count = count;
            }
        }
        return best;
    }
    return any_free ? kFreeLabel : kUnknownLabel;
}

}  // namespace

TEST_CASE("downsample fixtures") {
    const GridSpec spec({2, 2, 2}, {}, 0.5);

    SUBCASE("majority semantic label wins") {
        std::vector<std::uint8_t> v{3, 3, 3, 3, 3, 3, 3, 5};
        const LabelGrid out = downsample_labels(LabelGrid(spec, v), 2);
        CHECK(out.at(0, 0, 0) == 3);
    }
    SUBCASE("one semantic voxel beats seven free") {
        std::vector<std::uint8_t> v{0, 0, 0, 0, 0, 0, 0, 9};
        CHECK(downsample_labels(LabelGrid(spec, v), 2).at(0, 0, 0) == 9);
    }
    SUBCASE("tie goes to the smaller class id") {
        std::vector<std::uint8_t> v{2, 2, 7, 7, 2, 7, 2, 7};
        CHECK(downsample_labels(LabelGrid(spec, v), 2).at(0, 0, 0) == 2);
    }
    SUBCASE("free wins over unknown when no semantics") {
        std::vector<std::uint8_t> v{255, 255, 255, 255, 255, 255, 255, 0};
        CHECK(downsample_labels(LabelGrid(spec, v), 2).at(0, 0, 0) == 0);
    }
    SUBCASE("all unknown stays unknown") {
        std::vector<std::uint8_t> v(8, 255);
        CHECK(downsample_labels(LabelGrid(spec, v), 2).at(0, 0, 0) == 255);
    }
    SUBCASE("factor one is the identity") {
        std::vector<std::uint8_t> v{1, 0, 255, 4, 0, 11, 2, 2};
        const LabelGrid g(spec, v);
        CHECK(downsample_labels(g, 1) == g);
    }
    SUBCASE("factor must divide the extents") {
        CHECK_THROWS_AS(downsample_labels(LabelGrid(GridSpec({3, 2, 2}, {}, 1.0)), 2),
                        std::domain_error);
    }
}

TEST_CASE("downsample matches the independent rule on every 2-cube") {
    // all 4^8 blocks over the alphabet {free, 2, 9, unknown}
    const std::uint8_t alphabet[4] = {0, 2, 9, 255};
    const GridSpec spec({2, 2, 2}, {}, 1.0);
    for (std::uint32_t code = 0; code < 65536; ++code) {
        std::vector<std::uint8_t> block(8);
        for (int i = 0; i < 8; ++i) block[i] = alphabet[(code >> (2 * i)) & 3];
        const LabelGrid out = downsample_labels(LabelGrid(spec, block), 2);
        CHECK(out.at(0, 0, 0) == expected_block_label(block));
    }
}

TEST_CASE("downsample plurality property on random grids") {
    SplitMix64 rng(0xD0);
    for (int iter = 0; iter < 40; ++iter) {
        const std::int64_t f = 1 + static_cast<std::int64_t>(rng.bounded(3));
        const std::array<std::int64_t, 3> dims{2 * f, f, 3 * f};
        const GridSpec spec(dims, {}, 0.1);
        std::vector<std::uint8_t> v(static_cast<std::size_t>(spec.voxel_count()));
        for (auto& x : v) {
            const auto r = rng.bounded(14);
            x = r <= 11 ? static_cast<std::uint8_t>(r) : kUnknownLabel;
        }
        const LabelGrid g(spec, v);
        const LabelGrid out = downsample_labels(g, f);

        for (std::int64_t i = 0; i < out.spec().dims[0]; ++i)
        for (std::int64_t j = 0; j < out.spec().dims[1]; ++j)
        for (std::int64_t k = 0; k < out.spec().dims[2]; ++k) {
            std::vector<std::uint8_t> block;
            for (std::int64_t di = 0; di < f; ++di)
            for (std::int64_t dj = 0; dj < f; ++dj)
            for (std::int64_t dk = 0; dk < f; ++dk) {
                block.push_back(g.at(i * f + di, j * f + dj, k * f + dk));
            }
            CHECK(out.at(i, j, k) == expected_block_label(block));
        }
    }
}

TEST_CASE("class histogram") {
    const GridSpec spec({2, 2, 1}, {}, 1.0);
    const LabelGrid g(spec, {0, 5, 5, 255});
    const auto hist = class_histogram(g);
    CHECK(hist[0] == 1);
    CHECK(hist[5] == 2);
    CHECK(hist[255] == 1);
    std::uint64_t total = 0;
    for (auto c : hist) total += c;
    CHECK(total == 4);
}

TEST_CASE("label grid tensor bridge") {
    const GridSpec spec({2, 3, 2}, {1, 2, 3}, 0.25);
    LabelGrid g(spec);
    g.set(1, 2, 0, 7);
    g.set(0, 0, 1, 255);

    const DenseTensor t = label_grid_to_tensor(g);
    CHECK(t.dtype() == Dtype::u8);
    CHECK(t.dims() == std::vector<std::uint64_t>{2, 3, 2});

    const LabelGrid back = label_grid_from_tensor(t, spec.origin, spec.voxel_size);
    CHECK(back == g);

    const DenseTensor wrong(Dtype::f32, {2, 3, 2});
    CHECK_THROWS(label_grid_from_tensor(wrong));
}
