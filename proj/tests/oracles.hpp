#pragma once

// Test-only oracles. Everything here goes through plain 4x4 homogeneous
// matrices with Gauss-Jordan inversion, independent of the quaternion
// algebra under test; comparisons happen entrywise in matrix space.

#include <array>
#include <cmath>
#include <cstdint>

#include "demogen/geometry.hpp"
#include "demogen/rng.hpp"

namespace oracle {

using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 mat_identity() {
    Mat4 m{};
    for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
    return m;
}

// Standard quaternion -> rotation matrix formula, written out here so the
// oracle does not depend on library rotate().
inline Mat4 pose_to_mat(const demogen::Pose& p) {
    const double w = p.rotation.w, x = p.rotation.x, y = p.rotation.y, z = p.rotation.z;
    Mat4 m = mat_identity();
    m[0][0] = 1 - 2 * (y * y + z * z);
    m[0][1] = 2 * (x * y - w * z);
    m[0][2] = 2 * (x * z + w * y);
    m[1][0] = 2 * (x * y + w * z);
    m[1][1] = 1 - 2 * (x * x + z * z);
    m[1][2] = 2 * (y * z - w * x);
    m[2][0] = 2 * (x * z - w * y);
    m[2][1] = 2 * (y * z + w * x);
    m[2][2] = 1 - 2 * (x * x + y * y);
    m[0][3] = p.translation.x;
    m[1][3] = p.translation.y;
    m[2][3] = p.translation.z;
    return m;
}

inline Mat4 mat_mul(const Mat4& a, const Mat4& b) {
    Mat4 out{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0;
            for (int k = 0; k < 4; ++k) s += a[i][k] * b[k][j];
            out[i][j] = s;
        }
    return out;
}

// General 4x4 inverse by Gauss-Jordan elimination with partial pivoting.
inline Mat4 mat_inverse(Mat4 a) {
    Mat4 inv = mat_identity();
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = a[col][col];
        for (int j = 0; j < 4; ++j) {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (int j = 0; j < 4; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

inline double mat_max_abs_diff(const Mat4& a, const Mat4& b) {
    double worst = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
    return worst;
}

// Uniform random rotation (4 normals normalized) and translation in a cube.
inline demogen::Pose random_pose(demogen::RandomStream& rng, double box = 1.0) {
    demogen::Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    return demogen::Pose(q, {rng.uniform(-box, box), rng.uniform(-box, box), rng.uniform(-box, box)});
}

inline double pose_max_abs_diff(const demogen::Pose& a, const demogen::Pose& b) {
    return mat_max_abs_diff(pose_to_mat(a), pose_to_mat(b));
}

}  // namespace oracle
