#pragma once

#include "occ/geometry.hpp"

namespace occ {

// Points with camera-frame z at or below this are treated as behind the
// camera: no meaningful pixel exists for them.
inline constexpr double kMinCameraDepth = 1e-9;

// Rotation blocks are checked against R^T R = I at this tolerance when a
// camera is constructed.
inline constexpr double kRotationTol = 1e-5;

// Pinhole camera with a rigid pose.
//
// Conventions: the camera frame looks along +z with +x right and +y down in
// the image. Depth is camera-frame z (z-buffer style), not distance along
// the ray. Integer pixel (col, row) sits at continuous (u, v) = (col, row);
// there is no half-pixel offset, and callers must apply the same convention
// when rasterizing.
class CameraModel {
public:
    CameraModel(double fx, double fy, double cx, double cy,
                int width, int height, const Mat4& cam_to_world);

    double fx() const noexcept { return fx_; }
    double fy() const noexcept { return fy_; }
    double cx() const noexcept { return cx_; }
    double cy() const noexcept { return cy_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    const Mat4& cam_to_world() const noexcept { return cam_to_world_; }
    const Mat4& world_to_cam() const noexcept { return world_to_cam_; }

    // World-space camera center and viewing direction.
    Vec3 position() const { return translation_of(cam_to_world_); }
    Vec3 forward() const { return transform_direction(cam_to_world_, {0, 0, 1}); }

    Vec3 world_to_camera(const Vec3& p) const { return transform_point(world_to_cam_, p); }
    Vec3 camera_to_world(const Vec3& p) const { return transform_point(cam_to_world_, p); }

private:
    double fx_, fy_, cx_, cy_;
    int width_, height_;
    Mat4 cam_to_world_;
    Mat4 world_to_cam_;
};

// Projection result: continuous pixel coordinates plus camera-frame depth.
// `valid` is false for points at or behind the camera plane; u and v are
// zero in that case and must not be consumed.
struct PixelDepth {
    double u = 0.0;
    double v = 0.0;
    double z = 0.0;
    bool valid = false;
};

PixelDepth project(const CameraModel& cam, const Vec3& world_point);

// True when the projection is valid and lands inside the image rectangle:
// 0 <= u < width, 0 <= v < height.
bool in_fov(const CameraModel& cam, const PixelDepth& pd);

// Pixel + depth back to a world point. Throws std::domain_error for z <= 0.
Vec3 unproject(const CameraModel& cam, double u, double v, double z);

}  // namespace occ
