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

#include "drt/geometry.hpp"

#include <algorithm>

namespace drt {

Vec3 any_orthogonal(const Vec3 &v)
{
    const Vec3 a{std::abs(v.x), std::abs(v.y), std::abs(v.z)};
    Vec3 helper{1.0, 0.0, 0.0};
    if (a.x > a.y && a.x >= a.z)
        helper = {0.0, 1.0, 0.0};
    return normalized(cross(v, helper));
}

Mat3 Mat3::from_columns(const Vec3 &c0, const Vec3 &c1, const Vec3 &c2)
{
    Mat3 r;
    for (int i = 0; i < 3; ++i)
    {
        r(i, 0) = c0[i];
        r(i, 1) = c1[i];
        r(i, 2) = c2[i];
    }
    return r;
}

Mat3 Mat3::transposed() const
{
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = (*this)(j, i);
    return r;
}

double Mat3::determinant() const
{
    const auto &a = *this;
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Vec3 Mat3::operator*(const Vec3 &v) const
{
    const auto &a = *this;
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

Mat3 Mat3::operator*(const Mat3 &o) const
{
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
        {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += (*this)(i, k) * o(k, j);
            r(i, j) = s;
        }
    return r;
}

Mat3 rodrigues(const Vec3 &axis, double angle)
{
    const Vec3 k = normalized(axis);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double t = 1.0 - c;
    Mat3 r;
    r(0, 0) = c + k.x * k.x * t;
    r(0, 1) = k.x * k.y * t - k.z * s;
    r(0, 2) = k.x * k.z * t + k.y * s;
    r(1, 0) = k.y * k.x * t + k.z * s;
    r(1, 1) = c + k.y * k.y * t;
    r(1, 2) = k.y * k.z * t - k.x * s;
    r(2, 0) = k.z * k.x * t - k.y * s;
    r(2, 1) = k.z * k.y * t + k.x * s;
    r(2, 2) = c + k.z * k.z * t;
    return r;
}

double orthonormality_error(const Mat3 &r)
{
    const Mat3 g = r.transposed() * r;
    double err = std::abs(r.determinant() - 1.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            err = std::max(err, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
    return err;
}

Vec3 taylor_extrapolate(const KinematicState &state, double dt)
{
    return state.position + state.velocity * dt + state.acceleration * (0.5 * dt * dt);
}

KinematicState advance(const KinematicState &state, double dt)
{
    return {taylor_extrapolate(state, dt), state.velocity + state.acceleration * dt,
            state.acceleration, state.time + dt};
}

Vec3 rigid_point_velocity(const RigidMotion &motion, const Vec3 &point)
{
    return motion.translation_velocity + cross(motion.omega(), point - motion.rotation_center);
}

Vec3 rigid_point_acceleration(const RigidMotion &motion, const Vec3 &point)
{
    const Vec3 r = point - motion.rotation_center;
    const Vec3 w = motion.omega();
    return motion.translation_acceleration + cross(motion.omega_dot(), r) + cross(w, cross(w, r));
}

Vec3 relative_velocity(const Vec3 &v_global, const FrameMotion &motion, const Vec3 &r)
{
    return v_global - motion.velocity - cross(motion.omega, r);
}

Vec3 relative_acceleration(const Vec3 &a_global, const FrameMotion &motion, const Vec3 &r,
                           const Vec3 &v_rel)
{
    const Vec3 &w = motion.omega;
    return a_global - motion.acceleration - cross(motion.omega_dot, r) - 2.0 * cross(w, v_rel) -
           cross(w, cross(w, r));
}

Vec3 inverse_relative_velocity(const Vec3 &v_rel, const FrameMotion &motion, const Vec3 &r)
{
    return v_rel + motion.velocity + cross(motion.omega, r);
}

Vec3 inverse_relative_acceleration(const Vec3 &a_rel, const FrameMotion &motion, const Vec3 &r,
                                   const Vec3 &v_rel)
{
    const Vec3 &w = motion.omega;
    return a_rel + motion.acceleration + cross(motion.omega_dot, r) + 2.0 * cross(w, v_rel) +
           cross(w, cross(w, r));
}

KinematicState MovingFrame::to_local(const KinematicState &global) const
{
    const Vec3 r = global.position - frame.origin;
    const Vec3 v_rel = relative_velocity(global.velocity, motion, r);
    const Vec3 a_rel = relative_acceleration(global.acceleration, motion, r, v_rel);
    return {frame.to_local_vector(r), frame.to_local_vector(v_rel), frame.to_local_vector(a_rel),
            global.time};
}

KinematicState MovingFrame::to_global(const KinematicState &local) const
{
    const Vec3 r = frame.to_global_vector(local.position);
    const Vec3 v_rel = frame.to_global_vector(local.velocity);
    const Vec3 a_rel = frame.to_global_vector(local.acceleration);
    return {frame.origin + r, inverse_relative_velocity(v_rel, motion, r),
            inverse_relative_acceleration(a_rel, motion, r, v_rel), local.time};
}

BodyState::BodyState(const RigidMotion &motion, double t0, double t) : time_(t)
{
    const double dt = t - t0;
    center0_ = motion.rotation_center;
    center_ = taylor_extrapolate(
        {motion.rotation_center, motion.translation_velocity, motion.translation_acceleration}, dt);
    center_velocity_ = motion.translation_velocity + motion.translation_acceleration * dt;
    center_acceleration_ = motion.translation_acceleration;
    angle_ = motion.angular_speed * dt + 0.5 * motion.angular_acceleration * dt * dt;
    omega_ = motion.rotation_axis * (motion.angular_speed + motion.angular_acceleration * dt);
    omega_dot_ = motion.omega_dot();
    rotation_ = angle_ == 0.0 ? Mat3::identity() : rodrigues(motion.rotation_axis, angle_);
}

Vec3 BodyState::map_point(const Vec3 &p0) const
{
    return center_ + rotation_ * (p0 - center0_);
}

KinematicState BodyState::point_state(const Vec3 &p0) const
{
    const Vec3 p = map_point(p0);
    const Vec3 r = p - center_;
    return {p, center_velocity_ + cross(omega_, r),
            center_acceleration_ + cross(omega_dot_, r) + cross(omega_, cross(omega_, r)), time_};
}

MovingFrame BodyState::frame(const Vec3 &origin0, const Mat3 &axes0) const
{
    const KinematicState o = point_state(origin0);
    return {LocalFrame{o.position, rotation_ * axes0, angle_},
            FrameMotion{o.velocity, o.acceleration, omega_, omega_dot_}};
}

} // namespace drt
