#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace occ {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Vec3&) const = default;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline bool finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Row-major 4x4 matrix. Rigid transforms keep the last row (0 0 0 1).
using Mat4 = std::array<double, 16>;

inline Mat4 identity_mat4() {
    return {1, 0, 0, 0,
            0, 1, 0, 0,
            0, 0, 1, 0,
            0, 0, 0, 1};
}

inline Vec3 transform_point(const Mat4& m, const Vec3& p) {
    return {m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3],
            m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7],
            m[8] * p.x + m[9] * p.y + m[10] * p.z + m[11]};
}

// Rotates without translating; used for direction vectors.
inline Vec3 transform_direction(const Mat4& m, const Vec3& d) {
    return {m[0] * d.x + m[1] * d.y + m[2] * d.z,
            m[4] * d.x + m[5] * d.y + m[6] * d.z,
            m[8] * d.x + m[9] * d.y + m[10] * d.z};
}

inline Vec3 translation_of(const Mat4& m) { return {m[3], m[7], m[11]}; }

// Inverse of a rigid transform: transpose the rotation, rotate the negated
// translation. Not valid for general matrices.
inline Mat4 rigid_inverse(const Mat4& m) {
    Mat4 r = identity_mat4();
    r[0] = m[0]; r[1] = m[4]; r[2] = m[8];
    r[4] = m[1]; r[5] = m[5]; r[6] = m[9];
    r[8] = m[2]; r[9] = m[6]; r[10] = m[10];
    const Vec3 t = translation_of(m);
    r[3] = -(r[0] * t.x + r[1] * t.y + r[2] * t.z);
    r[7] = -(r[4] * t.x + r[5] * t.y + r[6] * t.z);
    r[11] = -(r[8] * t.x + r[9] * t.y + r[10] * t.z);
    return r;
}

// max |R^T R - I| over the 3x3 rotation block. NaN entries make this return
// false rather than poisoning later math.
inline bool rotation_orthonormal(const Mat4& m, double tol) {
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += m[4 * k + i] * m[4 * k + j];
            const double target = (i == j) ? 1.0 : 0.0;
            ok = ok && (std::fabs(s - target) <= tol);
        }
    }
    return ok;
}

inline bool finite(const Mat4& m) {
    for (double v : m) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

struct Aabb {
    Vec3 min;
    Vec3 max;

    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x &&
               p.y >= min.y && p.y <= max.y &&
               p.z >= min.z && p.z <= max.z;
    }
};

}  // namespace occ
