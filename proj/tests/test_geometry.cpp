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


#include "support.hpp"

#include <numbers>

using namespace drt;
using drt::test::Random;
using drt::test::vec_near;

namespace {

constexpr double pi = std::numbers::pi;
const Vec3 z_axis{0, 0, 1};

FrameMotion spinning(double omega) { return {{}, {}, z_axis * omega, {}}; }

} // namespace

TEST(TaylorExtrapolate, RestStaysAtRest)
{
    EXPECT_EQ(taylor_extrapolate({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, 0}, 5.0), (Vec3{0, 0, 0}));
}

TEST(TaylorExtrapolate, UniformMotion)
{
    EXPECT_TRUE(vec_near(taylor_extrapolate({{1, 2, 3}, {2, 0, 0}, {}, 0}, 0.5), {2, 2, 3}, 1e-15));
}

TEST(TaylorExtrapolate, ConstantAcceleration)
{
    EXPECT_TRUE(vec_near(taylor_extrapolate({{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, 0}, 2.0), {2, 4, 0}, 1e-15));
}

TEST(TaylorExtrapolate, FiniteDifferenceMatchesVelocity)
{
    Random rng(7);
    const double h = 1e-5;
    for (int i = 0; i < 1000; ++i)
    {
        const KinematicState s{rng.vec(-100, 100), rng.vec(-30, 30), rng.vec(-5, 5), 0};
        const double dt = rng.uniform(0, 5);
        const Vec3 fd = (taylor_extrapolate(s, dt + h) - taylor_extrapolate(s, dt - h)) / (2 * h);
        EXPECT_LT(test::rel_error(fd, s.velocity + s.acceleration * dt), 1e-6);
    }
}

TEST(RigidPointVelocity, PureTranslation)
{
    RigidMotion m;
    m.translation_velocity = {1, 0, 0};
    EXPECT_EQ(rigid_point_velocity(m, {7, -3, 2}), (Vec3{1, 0, 0}));
}

TEST(RigidPointVelocity, Spin)
{
    RigidMotion m;
    m.angular_speed = 2;
    EXPECT_TRUE(vec_near(rigid_point_velocity(m, {1, 0, 0}), {0, 2, 0}, 1e-15));
}

TEST(RigidPointVelocity, Superposition)
{
    RigidMotion m;
    m.translation_velocity = {0, 0, 1};
    m.rotation_center = {1, 0, 0};
    m.angular_speed = 1;
    EXPECT_TRUE(vec_near(rigid_point_velocity(m, {2, 0, 0}), {0, 1, 1}, 1e-15));
}

TEST(LocalFrame, IdentityFrame)
{
    const LocalFrame f{{}, Mat3::identity(), 0};
    EXPECT_EQ(f.to_local_point({1, 2, 3}), (Vec3{1, 2, 3}));
}

TEST(LocalFrame, QuarterTurnClockwise)
{
    const LocalFrame f{{}, rodrigues(z_axis, -pi / 2), 0};
    EXPECT_TRUE(vec_near(f.to_local_point({1, 0, 0}), {0, 1, 0}, 1e-15));
}

TEST(LocalFrame, OriginMapsToZero)
{
    const LocalFrame f{{0, 5, 0}, Mat3::identity(), 0};
    EXPECT_EQ(f.to_local_point({0, 5, 0}), (Vec3{0, 0, 0}));
}

TEST(LocalFrame, RoundTripRandomFrames)
{
    Random rng(11);
    double worst = 0;
    for (int i = 0; i < 10000; ++i)
    {
        const LocalFrame f{rng.vec(-1000, 1000), rodrigues(rng.unit(), rng.uniform(-10, 10)), 0};
        const Vec3 p = rng.vec(-1000, 1000);
        worst = std::max(worst, norm(f.to_global_point(f.to_local_point(p)) - p));
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(Rotation, OrthonormalUnderComposition)
{
    Random rng(3);
    Mat3 r = Mat3::identity();
    for (int i = 0; i < 1000; ++i)
    {
        const Mat3 step = rodrigues(rng.unit(), rng.uniform(-pi, pi));
        EXPECT_LT(orthonormality_error(step), 1e-12);
        r = r * step;
    }
    EXPECT_LT(orthonormality_error(r), 1e-12);
}

TEST(Rotation, DeterminantIsOne)
{
    Random rng(5);
    for (int i = 0; i < 100; ++i)
    {
        const Mat3 r = rodrigues(rng.unit(), rng.uniform(-10, 10));
        const double det = dot(r.column(0), cross(r.column(1), r.column(2)));
        EXPECT_NEAR(det, 1.0, 1e-12);
    }
}

TEST(RelativeVelocity, FrameAtRest)
{
    EXPECT_EQ(relative_velocity({3, -1, 2}, FrameMotion{}, {4, 5, 6}), (Vec3{3, -1, 2}));
}

TEST(RelativeVelocity, StaticPointCounterRotates)
{
    EXPECT_TRUE(vec_near(relative_velocity({}, spinning(1), {1, 0, 0}), {0, -1, 0}, 1e-15));
}

TEST(RelativeVelocity, ComovingPointAtRest)
{
    const FrameMotion m{{2, 0, 0}, {}, {}, {}};
    EXPECT_EQ(relative_velocity({2, 0, 0}, m, {3, 1, 0}), (Vec3{0, 0, 0}));
}

TEST(RelativeAcceleration, FrameAtRest)
{
    EXPECT_EQ(relative_acceleration({1, 2, 3}, FrameMotion{}, {4, 5, 6}, {0, 1, 0}), (Vec3{1, 2, 3}));
}

// A globally static point at (1,0,0) seen from a frame spinning at 1 rad/s
// about z has local coordinates (cos t, -sin t, 0): second derivative (-1,0,0).
TEST(RelativeAcceleration, StaticPointInSpinningFrame)
{
    const Vec3 a = relative_acceleration({}, spinning(1), {1, 0, 0}, {0, -1, 0});
    EXPECT_TRUE(vec_near(a, {-1, 0, 0}, 1e-15));

    const double h = 1e-4;
    auto local = [](double t) { return rodrigues(z_axis, t).transposed() * Vec3{1, 0, 0}; };
    const Vec3 fd = (local(h) - local(0) * 2.0 + local(-h)) / (h * h);
    EXPECT_TRUE(vec_near(a, fd, 1e-6));
}

TEST(RelativeAcceleration, ComovingAccelerationCancels)
{
    const FrameMotion m{{}, {0, 1, 0}, {}, {}};
    EXPECT_EQ(relative_acceleration({0, 1, 0}, m, {2, 2, 2}, {}), (Vec3{0, 0, 0}));
}

TEST(RelativeAcceleration, MatchesSecondDifferenceOfLocalTrajectory)
{
    Random rng(17);
    const double h = 1e-4;
    for (int i = 0; i < 200; ++i)
    {
        RigidMotion m;
        m.translation_velocity = rng.vec(-10, 10);
        m.translation_acceleration = rng.vec(-2, 2);
        m.rotation_center = rng.vec(-5, 5);
        m.rotation_axis = rng.unit();
        m.angular_speed = rng.uniform(-1, 1);
        m.angular_acceleration = rng.uniform(-0.5, 0.5);
        const Vec3 origin0 = rng.vec(-5, 5);
        const Mat3 axes0 = rodrigues(rng.unit(), rng.uniform(0, 6));
        const Vec3 r0 = rng.vec(-20, 20), v0 = rng.vec(-15, 15), a0 = rng.vec(-5, 5);
        const double t = rng.uniform(0, 1);
        auto global = [&](double s) {
            return KinematicState{r0 + v0 * s + a0 * (0.5 * s * s), v0 + a0 * s, a0, s};
        };
        auto local = [&](double s) { return BodyState(m, 0, s).frame(origin0, axes0).to_local(global(s)); };
        const KinematicState k = local(t);
        const Vec3 fd_v = (local(t + h).position - local(t - h).position) / (2 * h);
        const Vec3 fd_a = (local(t + h).position - k.position * 2.0 + local(t - h).position) / (h * h);
        EXPECT_LT(test::rel_error(k.velocity, fd_v), 1e-6);
        EXPECT_LT(test::rel_error(k.acceleration, fd_a), 1e-5);
    }
}

TEST(InverseRelativeMotion, RoundTrip)
{
    Random rng(23);
    double worst = 0;
    for (int i = 0; i < 10000; ++i)
    {
        const FrameMotion m{rng.vec(-10, 10), rng.vec(-5, 5), rng.vec(-1, 1), rng.vec(-1, 1)};
        const Vec3 r = rng.vec(-50, 50), v = rng.vec(-30, 30), a = rng.vec(-10, 10);
        const Vec3 v_rel = relative_velocity(v, m, r);
        const Vec3 a_rel = relative_acceleration(a, m, r, v_rel);
        worst = std::max({worst, norm(inverse_relative_velocity(v_rel, m, r) - v),
                          norm(inverse_relative_acceleration(a_rel, m, r, v_rel) - a)});
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(InverseRelativeMotion, BodyFixedPointMatchesRigidVelocity)
{
    Random rng(29);
    for (int i = 0; i < 1000; ++i)
    {
        RigidMotion m;
        m.translation_velocity = rng.vec(-10, 10);
        m.rotation_center = rng.vec(-5, 5);
        m.rotation_axis = rng.unit();
        m.angular_speed = rng.uniform(-2, 2);
        const Vec3 q = rng.vec(-20, 20);
        const FrameMotion f{m.translation_velocity, {}, m.omega(), {}};
        EXPECT_TRUE(vec_near(inverse_relative_velocity({}, f, q - m.rotation_center),
                             rigid_point_velocity(m, q), 1e-12));
    }
}

TEST(InverseRelativeMotion, CentripetalOnly)
{
    const FrameMotion m{{}, {1, 2, 3}, z_axis * 2.0, {}};
    const Vec3 r{1.5, 0, 0};
    EXPECT_TRUE(vec_near(inverse_relative_acceleration({}, m, r, {}),
                         Vec3{1, 2, 3} + cross(m.omega, cross(m.omega, r)), 1e-15));
}

TEST(BodyState, AngleFollowsConstantAngularAcceleration)
{
    RigidMotion m;
    m.angular_speed = 0.5;
    m.angular_acceleration = 0.2;
    const BodyState b(m, 1.0, 3.0);
    EXPECT_NEAR(b.angle(), 0.5 * 2 + 0.5 * 0.2 * 4, 1e-15);
}

TEST(BodyState, PointStateMatchesFiniteDifferences)
{
    Random rng(31);
    const double h = 1e-4;
    for (int i = 0; i < 200; ++i)
    {
        RigidMotion m;
        m.translation_velocity = rng.vec(-10, 10);
        m.translation_acceleration = rng.vec(-3, 3);
        m.rotation_center = rng.vec(-5, 5);
        m.rotation_axis = rng.unit();
        m.angular_speed = rng.uniform(-1, 1);
        m.angular_acceleration = rng.uniform(-1, 1);
        const Vec3 p0 = rng.vec(-10, 10);
        const double t = rng.uniform(0, 2);
        auto pos = [&](double s) { return BodyState(m, 0, s).map_point(p0); };
        const KinematicState k = BodyState(m, 0, t).point_state(p0);
        EXPECT_LT(test::rel_error(k.velocity, (pos(t + h) - pos(t - h)) / (2 * h)), 1e-6);
        EXPECT_LT(test::rel_error(k.acceleration, (pos(t + h) - pos(t) * 2.0 + pos(t - h)) / (h * h)), 1e-5);
    }
}
