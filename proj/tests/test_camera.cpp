#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "occ/camera.hpp"
#include "occ/rng.hpp"
#include "support.hpp"

using namespace occ;

namespace {

CameraModel simple_camera() {
    return CameraModel(100.0, 100.0, 50.0, 50.0, 100, 100, identity_mat4());
}

Mat4 matmul(const Mat4& a, const Mat4& b) {
    Mat4 r{};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += a[4 * i + k] * b[4 * k + j];
            r[4 * i + j] = s;
        }
    }
    return r;
}

}  // namespace

TEST_CASE("identity pose leaves points unchanged") {
    const CameraModel cam = simple_camera();
    const Vec3 p{0.3, -0.7, 2.5};
    const Vec3 c = cam.world_to_camera(p);
    CHECK(c.x == p.x);
    CHECK(c.y == p.y);
    CHECK(c.z == p.z);
}

TEST_CASE("projection fixtures") {
    const CameraModel cam = simple_camera();

    SUBCASE("point on the optical axis hits the principal point") {
        const PixelDepth pd = project(cam, {0, 0, 2});
        REQUIRE(pd.valid);
        CHECK(pd.u == 50.0);
        CHECK(pd.v == 50.0);
        CHECK(pd.z == 2.0);
        CHECK(in_fov(cam, pd));
    }
    SUBCASE("offset point") {
        const PixelDepth pd = project(cam, {0.5, -0.25, 2.0});
        REQUIRE(pd.valid);
        CHECK(pd.u == doctest::Approx(75.0).epsilon(1e-12));
        CHECK(pd.v == doctest::Approx(37.5).epsilon(1e-12));
    }
    SUBCASE("points behind the camera are flagged, not errors") {
        const PixelDepth pd = project(cam, {0, 0, -1});
        CHECK_FALSE(pd.valid);
        CHECK(pd.z == -1.0);
        CHECK_FALSE(in_fov(cam, pd));
    }
    SUBCASE("points on the camera plane are flagged") {
        CHECK_FALSE(project(cam, {1, 1, 0}).valid);
        CHECK_FALSE(project(cam, {0, 0, 1e-10}).valid);
    }
}

TEST_CASE("depth is camera-frame z, not ray length") {
    const CameraModel cam = simple_camera();
    // far off-axis point: ray length differs from z by >10%
    const PixelDepth pd = project(cam, {1.0, 0.0, 2.0});
    CHECK(pd.z == 2.0);
}

TEST_CASE("image rectangle bounds are half-open") {
    const CameraModel cam = simple_camera();
    PixelDepth pd;
    pd.valid = true;
    pd.z = 1.0;

    pd.u = 0.0; pd.v = 0.0;
    CHECK(in_fov(cam, pd));
    pd.u = 99.999; pd.v = 99.999;
    CHECK(in_fov(cam, pd));
    pd.u = 100.0; pd.v = 50.0;
    CHECK_FALSE(in_fov(cam, pd));
    pd.u = -0.001; pd.v = 50.0;
    CHECK_FALSE(in_fov(cam, pd));
    pd.u = 50.0; pd.v = 100.0;
    CHECK_FALSE(in_fov(cam, pd));
}

TEST_CASE("projection is scale invariant along rays") {
    const CameraModel cam = simple_camera();
    SplitMix64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const Vec3 p{occtest::uniform(rng, -2, 2), occtest::uniform(rng, -2, 2),
                     occtest::uniform(rng, 0.5, 4.0)};
        const PixelDepth a = project(cam, p);
        const PixelDepth b = project(cam, {2 * p.x, 2 * p.y, 2 * p.z});
        REQUIRE(a.valid);
        REQUIRE(b.valid);
        // doubling all coordinates is exact in floating point
        CHECK(a.u == b.u);
        CHECK(a.v == b.v);
    }
}

TEST_CASE("unproject inverts project under arbitrary rigid poses") {
    SplitMix64 rng(0xCAFE);
    for (int i = 0; i < 100; ++i) {
        const CameraModel cam(occtest::uniform(rng, 50, 800), occtest::uniform(rng, 50, 800),
                              occtest::uniform(rng, 100, 540), occtest::uniform(rng, 100, 380),
                              640, 480, occtest::random_pose(rng));
        // a point guaranteed to be in front: build it in the camera frame
        const Vec3 cam_pt{occtest::uniform(rng, -1, 1), occtest::uniform(rng, -1, 1),
                          occtest::uniform(rng, 0.1, 10.0)};
        const Vec3 world = cam.camera_to_world(cam_pt);
        const PixelDepth pd = project(cam, world);
        REQUIRE(pd.valid);
        const Vec3 back = unproject(cam, pd.u, pd.v, pd.z);
        const double tol = 1e-6 * std::max(1.0, norm(world));
        CHECK(std::fabs(back.x - world.x) <= tol);
        CHECK(std::fabs(back.y - world.y) <= tol);
        CHECK(std::fabs(back.z - world.z) <= tol);
    }
}

TEST_CASE("unproject rejects non-positive depth") {
    const CameraModel cam = simple_camera();
    CHECK_THROWS_AS(unproject(cam, 50, 50, 0.0), std::domain_error);
    CHECK_THROWS_AS(unproject(cam, 50, 50, -2.0), std::domain_error);
}

TEST_CASE("camera construction rejects bad arguments") {
    const Mat4 id = identity_mat4();
    CHECK_THROWS_AS(CameraModel(0, 100, 50, 50, 100, 100, id), std::invalid_argument);
    CHECK_THROWS_AS(CameraModel(-5, 100, 50, 50, 100, 100, id), std::invalid_argument);
    CHECK_THROWS_AS(CameraModel(100, 100, 50, 50, 0, 100, id), std::invalid_argument);
    CHECK_THROWS_AS(CameraModel(100, 100, 50, 50, 100, -1, id), std::invalid_argument);

    Mat4 scaled = id;
    scaled[0] = 2.0;  // not a rotation
    CHECK_THROWS_AS(CameraModel(100, 100, 50, 50, 100, 100, scaled), std::invalid_argument);

    Mat4 skewed = id;
    skewed[1] = 1e-3;  // beyond the orthonormality tolerance
    CHECK_THROWS_AS(CameraModel(100, 100, 50, 50, 100, 100, skewed), std::invalid_argument);

    Mat4 nearly = id;
    nearly[1] = 1e-7;  // within tolerance
    CHECK_NOTHROW(CameraModel(100, 100, 50, 50, 100, 100, nearly));
}

TEST_CASE("pose inverse and accessors") {
    SplitMix64 rng(99);
    for (int i = 0; i < 25; ++i) {
        const Mat4 pose = occtest::random_pose(rng);
        const CameraModel cam(200, 200, 320, 240, 640, 480, pose);
        const Mat4 prod = matmul(pose, cam.world_to_cam());
        const Mat4 id = identity_mat4();
        for (int e = 0; e < 16; ++e) CHECK(std::fabs(prod[e] - id[e]) < 1e-12);
        CHECK(cam.position().x == pose[3]);
        CHECK(cam.forward().x == doctest::Approx(pose[2]));
    }
}

TEST_CASE("heading pose helper looks along the requested direction") {
    const Mat4 m = occtest::heading_pose(0.0, {1, 2, 3});
    const CameraModel cam(100, 100, 50, 50, 100, 100, m);
    CHECK(cam.forward().x == doctest::Approx(1.0));
    CHECK(cam.forward().y == doctest::Approx(0.0));
    CHECK(cam.forward().z == doctest::Approx(0.0));
    CHECK(cam.position().x == 1.0);
    // a point ahead of the camera lands near the principal point
    const PixelDepth pd = project(cam, {3, 2, 3});
    REQUIRE(pd.valid);
    CHECK(pd.u == doctest::Approx(50.0));
    CHECK(pd.v == doctest::Approx(50.0));
    CHECK(pd.z == doctest::Approx(2.0));
}
