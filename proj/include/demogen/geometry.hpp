#pragma once

// Rigid-pose algebra for the demo-synthesis pipeline.
//
// Poses are unit quaternion + translation rather than 4x4 matrices; matrix
// form appears only in test oracles. Quaternions carry a canonical sign
// (w >= 0, ties resolved by the first nonzero of x,y,z) so equal rotations
// compare equal bytewise after serialization.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace demogen {

inline constexpr double kPi = std::numbers::pi;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    double norm_xy() const { return std::sqrt(x * x + y * y); }
};

struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    static Quat identity() { return {}; }

    static Quat from_axis_angle(const Vec3& axis, double angle) {
        const double n = axis.norm();
        if (n < 1e-300) return identity();
        const double half = 0.5 * angle;
        const double s = std::sin(half) / n;
        return {std::cos(half), axis.x * s, axis.y * s, axis.z * s};
    }

    // Hamilton product
    Quat operator*(const Quat& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }

    Quat conjugate() const { return {w, -x, -y, -z}; }

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }

    Vec3 rotate(const Vec3& v) const {
        // q v q* expanded via the double-cross identity
        const Vec3 u{x, y, z};
        const Vec3 c{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
        const Vec3 cc{u.y * c.z - u.z * c.y, u.z * c.x - u.x * c.z, u.x * c.y - u.y * c.x};
        return v + c * (2.0 * w) + cc * 2.0;
    }
};

// Unit quaternion, canonical sign. Normalized on construction so norm
// stays within 1e-9 of 1 after arbitrarily long chains of operations.
inline Quat normalized_canonical(Quat q) {
    const double n = q.norm();
    if (!(n > 1e-12)) throw std::invalid_argument("degenerate quaternion");
    q = {q.w / n, q.x / n, q.y / n, q.z / n};
    bool flip = q.w < 0.0;
    if (q.w == 0.0) {
        if (q.x != 0.0) flip = q.x < 0.0;
        else if (q.y != 0.0) flip = q.y < 0.0;
        else flip = q.z < 0.0;
    }
    if (flip) q = {-q.w, -q.x, -q.y, -q.z};
    return q;
}

// Principal-branch log: axis-angle vector with |angle| <= pi.
// The magnitude is nudged just below pi so downstream delta actions keep
// their strict |d_rot| < pi invariant; the nudge is ~1e-12 rad.
inline Vec3 quat_to_axis_angle(const Quat& qin) {
    const Quat q = normalized_canonical(qin);
    const double s = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
    if (s < 1e-300) return {0.0, 0.0, 0.0};
    double angle = 2.0 * std::atan2(s, q.w);
    constexpr double kMaxAngle = kPi * (1.0 - 1e-12);
    if (angle > kMaxAngle) angle = kMaxAngle;
    return Vec3{q.x, q.y, q.z} * (angle / s);
}

inline Quat axis_angle_to_quat(const Vec3& aa) {
    const double angle = aa.norm();
    if (angle < 1e-300) return Quat::identity();
    return Quat::from_axis_angle(aa, angle);
}

// Shorter-arc spherical interpolation; falls back to normalized lerp
// when the arc is tiny.
inline Quat slerp(const Quat& a, Quat b, double t) {
    double d = a.dot(b);
    if (d < 0.0) {
        b = {-b.w, -b.x, -b.y, -b.z};
        d = -d;
    }
    if (d > 1.0 - 1e-10) {
        Quat r{a.w + (b.w - a.w) * t, a.x + (b.x - a.x) * t,
               a.y + (b.y - a.y) * t, a.z + (b.z - a.z) * t};
        return normalized_canonical(r);
    }
    const double theta = std::acos(d);
    const double sin_theta = std::sin(theta);
    const double wa = std::sin((1.0 - t) * theta) / sin_theta;
    const double wb = std::sin(t * theta) / sin_theta;
    return normalized_canonical({a.w * wa + b.w * wb, a.x * wa + b.x * wb,
                                 a.y * wa + b.y * wb, a.z * wa + b.z * wb});
}

struct Pose {
    Quat rotation;
    Vec3 translation;

    Pose() = default;
    Pose(const Quat& q, const Vec3& t) : rotation(normalized_canonical(q)), translation(t) {}

    static Pose identity() { return {}; }
    static Pose translate(double x, double y, double z) {
        return {Quat::identity(), {x, y, z}};
    }
    static Pose rot_z(double angle) {
        return {Quat::from_axis_angle({0, 0, 1}, angle), {0, 0, 0}};
    }

    double yaw() const {
        const Quat& q = rotation;
        return std::atan2(2.0 * (q.w * q.z + q.x * q.y),
                          1.0 - 2.0 * (q.y * q.y + q.z * q.z));
    }
};

inline Pose compose(const Pose& a, const Pose& b) {
    return Pose(a.rotation * b.rotation, a.translation + a.rotation.rotate(b.translation));
}

inline Pose inverse(const Pose& p) {
    const Quat inv = p.rotation.conjugate();
    return Pose(inv, inv.rotate(-p.translation));
}

// 7-component action: translation delta, axis-angle rotation delta
// (magnitude = angle, principal branch), gripper command in {-1 open,
// +1 close}; 0 means "leave gripper as is" for raw extracted deltas.
struct DeltaAction {
    Vec3 d_pos;
    Vec3 d_rot;
    double gripper = 0.0;

    bool finite() const {
        return std::isfinite(d_pos.x) && std::isfinite(d_pos.y) && std::isfinite(d_pos.z) &&
               std::isfinite(d_rot.x) && std::isfinite(d_rot.y) && std::isfinite(d_rot.z) &&
               std::isfinite(gripper);
    }
};

// Absolute controller target implied by a delta action: translation adds,
// rotation delta is applied on the world side of the current rotation.
inline Pose apply_delta(const Pose& current, const DeltaAction& action) {
    return Pose(axis_angle_to_quat(action.d_rot) * current.rotation,
                current.translation + action.d_pos);
}

// Inverse of apply_delta; gripper left unset (0).
inline DeltaAction extract_delta(const Pose& current, const Pose& target) {
    DeltaAction a;
    a.d_pos = target.translation - current.translation;
    a.d_rot = quat_to_axis_angle(target.rotation * current.rotation.conjugate());
    return a;
}

// One controller-target trajectory slice: absolute poses plus the gripper
// command paired with each of them.
struct PoseSegment {
    std::vector<Pose> targets;
    std::vector<double> grippers;

    std::size_t size() const { return targets.size(); }
};

// Rigid remap of a segment so every target keeps its pose relative to the
// reference object: out_t = obj_new * inverse(obj_src) * in_t.
inline PoseSegment transform_segment(const PoseSegment& seg, const Pose& obj_src,
                                     const Pose& obj_new) {
    const Pose rel = compose(obj_new, inverse(obj_src));
    PoseSegment out;
    out.targets.reserve(seg.targets.size());
    for (const Pose& p : seg.targets) out.targets.push_back(compose(rel, p));
    out.grippers = seg.grippers;
    return out;
}

// n_interp poses at fractions k/(n_interp+1) (positions linear, rotations
// slerp along the shorter arc) followed by n_fixed copies of end. Every
// emitted pose carries gripper_value.
inline PoseSegment interpolate(const Pose& start, const Pose& end, int n_interp, int n_fixed,
                               double gripper_value) {
    if (n_interp < 0 || n_fixed < 0) throw std::invalid_argument("negative interpolation count");
    PoseSegment out;
    out.targets.reserve(static_cast<std::size_t>(n_interp + n_fixed));
    for (int k = 1; k <= n_interp; ++k) {
        const double f = static_cast<double>(k) / (n_interp + 1);
        out.targets.emplace_back(slerp(start.rotation, end.rotation, f),
                                 start.translation + (end.translation - start.translation) * f);
    }
    for (int k = 0; k < n_fixed; ++k) out.targets.push_back(end);
    out.grippers.assign(out.targets.size(), gripper_value);
    return out;
}

// L2 translation distance plus the angle of the relative rotation.
inline double pose_distance(const Pose& a, const Pose& b) {
    const double dt = (a.translation - b.translation).norm();
    return dt + quat_to_axis_angle(b.rotation * a.rotation.conjugate()).norm();
}

}  // namespace demogen
