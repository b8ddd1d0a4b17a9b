// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Vector algebra, rotations, moving frames and rigid-body kinematics.
//
// Conventions: every vector is expressed in global components unless the name
// says otherwise. A LocalFrame stores its axes as the columns of a rotation
// matrix, so that global = origin + axes * local.

#include <array>
#include <cmath>
#include <numbers>

namespace drt {

struct Vec3
{
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double &operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 &operator+=(const Vec3 &o)
    {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Vec3 &operator-=(const Vec3 &o)
    {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    constexpr Vec3 &operator*=(double s)
    {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }

    constexpr bool operator==(const Vec3 &) const = default;
};

constexpr Vec3 operator*(double s, const Vec3 &v) { return v * s; }

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3 &a, const Vec3 &b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3 &v) { return std::sqrt(dot(v, v)); }

// Returns the zero vector for a zero input.
inline Vec3 normalized(const Vec3 &v)
{
    const double n = norm(v);
    return n > 0.0 ? v / n : Vec3{};
}

inline bool is_finite(const Vec3 &v)
{
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Any unit vector orthogonal to v (v need not be normalised).
Vec3 any_orthogonal(const Vec3 &v);

/// Row-major 3x3 matrix.
struct Mat3
{
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return {}; }
    static Mat3 from_columns(const Vec3 &c0, const Vec3 &c1, const Vec3 &c2);

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }
    double &operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }

    Vec3 column(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }
    Mat3 transposed() const;
    double determinant() const;

    Vec3 operator*(const Vec3 &v) const;
    Mat3 operator*(const Mat3 &o) const;

    bool operator==(const Mat3 &) const = default;
};

/// Rotation by `angle` (right-hand rule) about the unit axis `axis`.
Mat3 rodrigues(const Vec3 &axis, double angle);

/// max |R^T R - I| and |det R - 1|; both ~0 for a proper rotation.
double orthonormality_error(const Mat3 &r);

/// Position, velocity and acceleration of a point at a reference time.
struct KinematicState
{
    Vec3 position;
    Vec3 velocity;
    Vec3 acceleration;
    double time = 0.0;

    bool operator==(const KinematicState &) const = default;
};

/// Second-order Taylor step r + v dt + a dt^2 / 2 (exact for constant acceleration).
Vec3 taylor_extrapolate(const KinematicState &state, double dt);

/// Full state advanced by dt under constant acceleration.
KinematicState advance(const KinematicState &state, double dt);

/// Roto-translation of a rigid body about a fixed axis, referenced to the
/// scene time t0. The rotation centre travels with the translation.
struct RigidMotion
{
    Vec3 translation_velocity;
    Vec3 translation_acceleration;
    Vec3 rotation_center;
    Vec3 rotation_axis{0.0, 0.0, 1.0};
    double angular_speed = 0.0;        // rad/s, about rotation_axis
    double angular_acceleration = 0.0; // rad/s^2

    bool is_static() const
    {
        return translation_velocity == Vec3{} && translation_acceleration == Vec3{} &&
               angular_speed == 0.0 && angular_acceleration == 0.0;
    }
    Vec3 omega() const { return rotation_axis * angular_speed; }
    Vec3 omega_dot() const { return rotation_axis * angular_acceleration; }

    bool operator==(const RigidMotion &) const = default;
};

/// v_Pi + omega x (Q - O) at the motion's reference instant.
Vec3 rigid_point_velocity(const RigidMotion &motion, const Vec3 &point);

/// a_Pi + omega_dot x r + omega x (omega x r) at the reference instant.
Vec3 rigid_point_acceleration(const RigidMotion &motion, const Vec3 &point);

/// Instantaneous velocity field of a moving frame: origin velocity and
/// acceleration plus angular velocity/acceleration. This is what the relative
/// motion transformations need; `r` arguments are measured from the origin.
struct FrameMotion
{
    Vec3 velocity;
    Vec3 acceleration;
    Vec3 omega;
    Vec3 omega_dot;
};

/// v0 - v_Pi - omega x r  (global components).
Vec3 relative_velocity(const Vec3 &v_global, const FrameMotion &motion, const Vec3 &r);

/// a0 - a_Pi - omega_dot x r - 2 omega x v_rel - omega x (omega x r).
Vec3 relative_acceleration(const Vec3 &a_global, const FrameMotion &motion, const Vec3 &r,
                           const Vec3 &v_rel);

/// Inverse of relative_velocity.
Vec3 inverse_relative_velocity(const Vec3 &v_rel, const FrameMotion &motion, const Vec3 &r);

/// Inverse of relative_acceleration.
Vec3 inverse_relative_acceleration(const Vec3 &a_rel, const FrameMotion &motion, const Vec3 &r,
                                   const Vec3 &v_rel);

/// Frame pose: global = origin + axes * local.
struct LocalFrame
{
    Vec3 origin;
    Mat3 axes;
    double angle = 0.0; // accumulated rotation angle of the owning body

    Vec3 to_local_point(const Vec3 &p) const { return axes.transposed() * (p - origin); }
    Vec3 to_global_point(const Vec3 &p) const { return axes * p + origin; }
    Vec3 to_local_vector(const Vec3 &v) const { return axes.transposed() * v; }
    Vec3 to_global_vector(const Vec3 &v) const { return axes * v; }
};

/// A frame pose together with its instantaneous motion. Converts full
/// kinematic states between global observers and observers riding the frame.
struct MovingFrame
{
    LocalFrame frame;
    FrameMotion motion;

    /// Position, relative velocity and relative acceleration in local components.
    KinematicState to_local(const KinematicState &global) const;
    /// Inverse of to_local.
    KinematicState to_global(const KinematicState &local) const;
};

/// Pose and instantaneous motion of a rigid body at absolute time t, for a body
/// whose motion is referenced to time t0.
class BodyState
{
public:
    BodyState() = default;
    BodyState(const RigidMotion &motion, double t0, double t);

    const Mat3 &rotation() const { return rotation_; }
    double angle() const { return angle_; }
    const Vec3 &center() const { return center_; }

    /// Maps a body-fixed point given at t0 to its position at t.
    Vec3 map_point(const Vec3 &p0) const;
    Vec3 map_vector(const Vec3 &v0) const { return rotation_ * v0; }

    /// Full kinematics at t of a body-fixed point given at t0.
    KinematicState point_state(const Vec3 &p0) const;

    /// Body-fixed frame whose origin is p0 and axes are the columns of axes0 at t0.
    MovingFrame frame(const Vec3 &origin0, const Mat3 &axes0) const;

private:
    Vec3 center0_;
    Vec3 center_;
    Vec3 center_velocity_;
    Vec3 center_acceleration_;
    Vec3 omega_;
    Vec3 omega_dot_;
    Mat3 rotation_;
    double angle_ = 0.0;
    double time_ = 0.0;
};

} // namespace drt
