#include "occ/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace occ {

CameraModel::CameraModel(double fx, double fy, double cx, double cy,
                         int width, int height, const Mat4& cam_to_world)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height),
      cam_to_world_(cam_to_world) {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw std::invalid_argument("camera focal lengths must be positive");
    }
    if (!std::isfinite(fx) || !std::isfinite(fy) ||
        !std::isfinite(cx) || !std::isfinite(cy)) {
        throw std::invalid_argument("camera intrinsics must be finite");
    }
    if (width < 1 || height < 1) {
        throw std::invalid_argument("image extents must be at least 1x1");
    }
    if (!rotation_orthonormal(cam_to_world_, kRotationTol)) {
        throw std::invalid_argument("camera rotation block is not orthonormal");
    }
    world_to_cam_ = rigid_inverse(cam_to_world_);
}

PixelDepth project(const CameraModel& cam, const Vec3& world_point) {
    const Vec3 c = cam.world_to_camera(world_point);
    PixelDepth pd;
    pd.z = c.z;
    if (!(c.z > kMinCameraDepth)) return pd;
    pd.u = cam.fx() * c.x / c.z + cam.cx();
    pd.v = cam.fy() * c.y / c.z + cam.cy();
    pd.valid = true;
    return pd;
}

bool in_fov(const CameraModel& cam, const PixelDepth& pd) {
    return pd.valid &&
           pd.u >= 0.0 && pd.u < static_cast<double>(cam.width()) &&
           pd.v >= 0.0 && pd.v < static_cast<double>(cam.height());
}

Vec3 unproject(const CameraModel& cam, double u, double v, double z) {
    if (!(z > 0.0)) throw std::domain_error("unproject requires depth > 0");
    const Vec3 c{(u - cam.cx()) / cam.fx() * z,
                 (v - cam.cy()) / cam.fy() * z,
                 z};
    return cam.camera_to_world(c);
}

}  // namespace occ
