#pragma once

// Helpers shared by the test suites. Everything seeded goes through
// occ::SplitMix64 so expectations stay stable across platforms.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "occ/geometry.hpp"
#include "occ/rng.hpp"

namespace occtest {

inline double uniform(occ::SplitMix64& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.unit();
}

// Rotation from a random unit quaternion; orthonormal to machine precision.
inline occ::Mat4 random_rotation(occ::SplitMix64& rng) {
    double q[4];
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (double& v : q) {
            v = uniform(rng, -1.0, 1.0);
            n2 += v * v;
        }
    } while (n2 < 1e-6);
    const double inv = 1.0 / std::sqrt(n2);
    const double w = q[0] * inv, x = q[1] * inv, y = q[2] * inv, z = q[3] * inv;
    occ::Mat4 m = occ::identity_mat4();
    m[0] = 1 - 2 * (y * y + z * z);
    m[1] = 2 * (x * y - w * z);
    m[2] = 2 * (x * z + w * y);
    m[4] = 2 * (x * y + w * z);
    m[5] = 1 - 2 * (x * x + z * z);
    m[6] = 2 * (y * z - w * x);
    m[8] = 2 * (x * z - w * y);
    m[9] = 2 * (y * z + w * x);
    m[10] = 1 - 2 * (x * x + y * y);
    return m;
}

inline occ::Mat4 random_pose(occ::SplitMix64& rng, double translation_range = 5.0) {
    occ::Mat4 m = random_rotation(rng);
    m[3] = uniform(rng, -translation_range, translation_range);
    m[7] = uniform(rng, -translation_range, translation_range);
    m[11] = uniform(rng, -translation_range, translation_range);
    return m;
}

// Pose whose camera looks along the world direction (cos t, sin t, 0) with
// +y of the image pointing down (world -z). Useful for indoor-style frames.
inline occ::Mat4 heading_pose(double theta, const occ::Vec3& position) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const occ::Vec3 fwd{c, s, 0.0};        // camera +z
    const occ::Vec3 down{0.0, 0.0, -1.0};  // camera +y
    const occ::Vec3 right = occ::cross(down, fwd);
    occ::Mat4 m = occ::identity_mat4();
    m[0] = right.x; m[1] = down.x; m[2] = fwd.x; m[3] = position.x;
    m[4] = right.y; m[5] = down.y; m[6] = fwd.y; m[7] = position.y;
    m[8] = right.z; m[9] = down.z; m[10] = fwd.z; m[11] = position.z;
    return m;
}

inline std::filesystem::path make_temp_dir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    for (int tries = 0; tries < 100; ++tries) {
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        const auto name = "occtest-" + std::to_string(stamp) + "-" + std::to_string(counter++);
        std::error_code ec;
        const auto p = base / name;
        if (std::filesystem::create_directory(p, ec) && !ec) return p;
    }
    throw std::runtime_error("cannot create a temporary directory");
}

// Self-deleting temporary directory.
class TempDir {
public:
    TempDir() : path_(make_temp_dir()) {}
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace occtest
