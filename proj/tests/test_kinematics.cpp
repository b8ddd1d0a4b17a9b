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


#include "drt/kinematics.hpp"
#include "support.hpp"

#include <map>
#include <numbers>

using namespace drt;
using drt::test::Random;
using drt::test::rel_error;
using drt::test::vec_near;

namespace {

constexpr double pi = std::numbers::pi;

KinematicState at(const Vec3 &p, const Vec3 &v = {}, const Vec3 &a = {}) { return {p, v, a, 0.0}; }

KinematicState moved(const KinematicState &s, double dt) { return advance(s, dt); }

// Static wall y = 0 seen from +y.
const MovingFrame static_wall{{{}, Mat3::identity(), 0.0}, {}};

std::map<std::string, RayPath> by_key(const std::vector<RayPath> &paths)
{
    std::map<std::string, RayPath> m;
    for (const auto &p : paths)
        m.emplace(p.key(), p);
    return m;
}

std::string terminals(const Vec3 &tx, const Vec3 &rx)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "terminal a tx position %.17g %.17g %.17g\nterminal b rx position %.17g %.17g %.17g\n",
                  tx.x, tx.y, tx.z, rx.x, rx.y, rx.z);
    return buf;
}

// Interaction points of `key` traced afresh at t.
std::vector<Vec3> traced_points(const Scene &s, double t, const std::string &key, const TraceConfig &cfg)
{
    const auto paths = by_key(trace_snapshot(s, t, cfg));
    const auto it = paths.find(key);
    if (it == paths.end())
        return {};
    std::vector<Vec3> pts;
    for (const auto &i : it->second.interactions)
        pts.push_back(i.point);
    return pts;
}

Scene transformed(const Scene &s, const Mat3 &r, const Vec3 &shift)
{
    Scene out = s;
    auto point = [&](const Vec3 &p) { return r * p + shift; };
    for (auto &o : out.objects)
    {
        for (auto &f : o.faces)
            for (auto &v : f.vertices)
                v = point(v);
        o.motion.translation_velocity = r * o.motion.translation_velocity;
        o.motion.translation_acceleration = r * o.motion.translation_acceleration;
        o.motion.rotation_center = point(o.motion.rotation_center);
        o.motion.rotation_axis = r * o.motion.rotation_axis;
    }
    for (Terminal *t : {&out.tx, &out.rx})
    {
        t->kinematics.position = point(t->kinematics.position);
        t->kinematics.velocity = r * t->kinematics.velocity;
        t->kinematics.acceleration = r * t->kinematics.acceleration;
        t->antenna.orientation = r * t->antenna.orientation;
    }
    finalize_scene(out);
    return out;
}

} // namespace

// ---- reflection, wall frame ---------------------------------------------------

TEST(ReflectionLocal, PointExamples)
{
    EXPECT_TRUE(vec_near(reflection_point_local({0, 2, 0}, {4, 4, 0}), {4.0 / 3.0, 0, 0}, 1e-15));
    EXPECT_TRUE(vec_near(reflection_point_local({-1, 1, 0}, {1, 1, 0}), {0, 0, 0}, 1e-15));
    EXPECT_TRUE(vec_near(reflection_point_local({0, 1, 2}, {2, 1, 0}), {1, 0, 1}, 1e-15));
}

TEST(ReflectionLocal, VelocityExamples)
{
    EXPECT_TRUE(vec_near(reflection_point_velocity({0, 1, 0}, {2, 1, 0}, {1, 0, 0}, {1, 0, 0}), {1, 0, 0}, 1e-15));
    EXPECT_TRUE(vec_near(reflection_point_velocity({0, 1, 0}, {2, 1, 0}, {}, {}), {}, 0.0));

    const Vec3 v = reflection_point_velocity({0, 1, 0}, {2, 1, 0}, {}, {0, 1, 0});
    EXPECT_NEAR(v.x, -0.5, 1e-15);
    const double h = 1e-6;
    const double fd = (reflection_point_local({0, 1, 0}, {2, 1 + h, 0}).x -
                       reflection_point_local({0, 1, 0}, {2, 1 - h, 0}).x) / (2 * h);
    EXPECT_NEAR(v.x, fd, 1e-6);
}

TEST(ReflectionLocal, AccelerationExamples)
{
    EXPECT_EQ(reflection_point_acceleration({0, 1, 0}, {2, 1, 0}, {}, {}, {}, {}), (Vec3{}));

    // Motion parallel to the wall keeps x_Q linear in time; a normal
    // component makes it curve.
    auto second_difference = [](const KinematicState &tx, const KinematicState &rx) {
        const double h = 1e-4;
        auto x = [&](double t) { return reflection_point_local(moved(tx, t).position, moved(rx, t).position).x; };
        return (x(h) - 2 * x(0) + x(-h)) / (h * h);
    };
    const KinematicState rx = at({2, 1, 0});
    for (const Vec3 &v : {Vec3{1, 0, 0}, Vec3{1, 1, 0}})
    {
        const KinematicState tx = at({0, 1, 0}, v);
        const double fd = second_difference(tx, rx);
        const Vec3 a = reflection_point_acceleration(tx.position, rx.position, tx.velocity, {}, {}, {});
        EXPECT_LT(std::abs(a.x - fd) / std::max(std::abs(fd), 1.0), 1e-5);
        if (v.y != 0.0)
            EXPECT_GT(std::abs(a.x), 0.1);
        else
            EXPECT_EQ(a.x, 0.0);
    }

    // Pure TX acceleration: a_x = dx_Q/dx_TX = 1 - y_TX / (y_TX + y_RX).
    const Vec3 a2 = reflection_point_acceleration({0, 1, 0}, {2, 1, 0}, {}, {}, {1, 0, 0}, {});
    EXPECT_NEAR(a2.x, 0.5, 1e-15);
}

TEST(ReflectionLocal, DerivativesMatchFiniteDifferences)
{
    Random rng(5);
    for (int i = 0; i < 1000; ++i)
    {
        KinematicState tx = at(rng.vec(-20, 20), rng.vec(-15, 15), rng.vec(-5, 5));
        KinematicState rx = at(rng.vec(-20, 20), rng.vec(-15, 15), rng.vec(-5, 5));
        tx.position.y = rng.uniform(1, 20);
        rx.position.y = rng.uniform(1, 20);
        const KinematicState q = reflection_point_kinematics_local(tx, rx);
        EXPECT_EQ(q.position.y, 0.0);
        EXPECT_EQ(q.velocity.y, 0.0);
        EXPECT_EQ(q.acceleration.y, 0.0);
        auto pos = [&](double t) { return reflection_point_local(moved(tx, t).position, moved(rx, t).position); };
        const double hv = 1e-6, ha = 1e-4;
        EXPECT_LT(rel_error(q.velocity, (pos(hv) - pos(-hv)) / (2 * hv)), 1e-6);
        EXPECT_LT(rel_error(q.acceleration, (pos(ha) - pos(0) * 2.0 + pos(-ha)) / (ha * ha)), 1e-5);
    }
}

TEST(ReflectionLocal, DegenerateDenominatorThrows)
{
    EXPECT_THROW(reflection_point_kinematics_local(at({0, 0, 0}), at({1, 0, 0})), DegenerateGeometry);
}

// ---- reflection, moving walls -----------------------------------------------------

TEST(ReflectionGlobal, StaticWallCollapsesToLocal)
{
    const KinematicState tx = at({0, 1, 0}, {1, 0.3, 0}, {0.1, 0, 0.2}), rx = at({2, 3, 1}, {0, 1, 0}, {0, 0, -1});
    const KinematicState g = reflection_point_kinematics_global(static_wall, tx, rx);
    const KinematicState l = reflection_point_kinematics_local(tx, rx);
    EXPECT_TRUE(vec_near(g.position, l.position, 1e-15));
    EXPECT_TRUE(vec_near(g.velocity, l.velocity, 1e-15));
    EXPECT_TRUE(vec_near(g.acceleration, l.acceleration, 1e-15));
}

TEST(ReflectionGlobal, RotatingWallMatchesRetrace)
{
    const Vec3 tx{-3, 6, 1.5}, rx{4, 5, 1.5};
    const Scene s = parse_scene("scene r\nGEOMETRY\nmaterial m pec\nobject wall open\n"
                                "  face m  -20 0 -5  -20 0 5  20 0 5  20 0 -5\nend\n" +
                                terminals(tx, rx) + "DYNAMICS\nmotion wall axis 0 0 1 omega " +
                                std::to_string(pi / 6) + "\n");
    const TraceConfig cfg{1, false, false};
    for (double t : {0.0, 0.4, 1.1})
    {
        const auto k = path_kinematics(s, {{InteractionKind::reflection, 0, 0, {}}}, t);
        const double h = 1e-5;
        const auto plus = traced_points(s, t + h, "R:0:0", cfg), minus = traced_points(s, t - h, "R:0:0", cfg);
        ASSERT_EQ(plus.size(), 1u);
        ASSERT_EQ(minus.size(), 1u);
        EXPECT_GT(norm(k[1].velocity), 0.1);
        EXPECT_LT(rel_error(k[1].velocity, (plus[0] - minus[0]) / (2 * h)), 1e-5);
        EXPECT_TRUE(vec_near(k[1].position, traced_points(s, t, "R:0:0", cfg)[0], 1e-9));
    }
}

TEST(ReflectionGlobal, ComovingSystemTranslatesRigidly)
{
    const Vec3 u{3, -2, 0.5};
    const MovingFrame wall{{{1, 0, 0}, Mat3::identity(), 0.0}, {u, {}, {}, {}}};
    const KinematicState q = reflection_point_kinematics_global(wall, at({0, 2, 0}, u), at({4, 4, 0}, u));
    EXPECT_TRUE(vec_near(q.velocity, u, 1e-14));
    EXPECT_TRUE(vec_near(q.acceleration, {}, 1e-14));
}

// ---- image source ---------------------------------------------------------------

TEST(ImageSource, StaticWall)
{
    const KinematicState i = image_source_kinematics(at({0, 2, 0}, {1, 1, 0}), static_wall);
    EXPECT_TRUE(vec_near(i.position, {0, -2, 0}, 1e-15));
    EXPECT_TRUE(vec_near(i.velocity, {1, -1, 0}, 1e-15));
}

TEST(ImageSource, DoubleMirrorRestoresSource)
{
    Random rng(8);
    for (int n = 0; n < 100; ++n)
    {
        const KinematicState s = at(rng.vec(-10, 10), rng.vec(-10, 10), rng.vec(-3, 3));
        const MovingFrame wall{{rng.vec(-5, 5), rodrigues(rng.unit(), rng.uniform(0, 6)), 0.0}, {}};
        const KinematicState back = image_source_kinematics(image_source_kinematics(s, wall), wall);
        EXPECT_TRUE(vec_near(back.position, s.position, 1e-12));
        EXPECT_TRUE(vec_near(back.velocity, s.velocity, 1e-12));
        EXPECT_TRUE(vec_near(back.acceleration, s.acceleration, 1e-12));
    }
}

TEST(ImageSource, StaticSourceBehindRotatingWallMoves)
{
    RigidMotion m;
    m.angular_speed = 0.7;
    const KinematicState src = at({1, 3, 0});
    auto mirrored = [&](double t) {
        const BodyState b(m, 0, t);
        const Vec3 n = b.map_vector({0, 1, 0});
        return mirror_point(src.position, n, 0.0);
    };
    const double h = 1e-6;
    for (double t : {0.0, 0.5, 2.0})
    {
        const KinematicState i = image_source_kinematics(src, BodyState(m, 0, t).frame({}, Mat3::identity()));
        EXPECT_TRUE(vec_near(i.position, mirrored(t), 1e-12));
        EXPECT_GT(norm(i.velocity), 0.1);
        EXPECT_LT(rel_error(i.velocity, (mirrored(t + h) - mirrored(t - h)) / (2 * h)), 1e-6);
    }
}

// ---- multi-bounce -----------------------------------------------------------------

TEST(MultiBounce, FirstOrderEqualsSingleReflection)
{
    const Scene s = load_scene_file(test::scene_path("canyon_bus_rotating.scn"));
    const double t = 0.8;
    const int bus = s.find_object("bus");
    const auto k = path_kinematics(s, {{InteractionKind::reflection, bus, 2, {}}}, t);
    const KinematicState q = reflection_point_kinematics_global(face_frame(s, bus, 2, t), terminal_state(s, s.tx, t),
                                                                terminal_state(s, s.rx, t));
    EXPECT_TRUE(vec_near(k[1].position, q.position, 1e-12));
    EXPECT_TRUE(vec_near(k[1].velocity, q.velocity, 1e-12));
    EXPECT_TRUE(vec_near(k[1].acceleration, q.acceleration, 1e-12));
}

namespace {

void expect_double_bounce_matches_retrace(const std::string &dynamics)
{
    // Corner reflector: wall 0 is x = 0 facing +x, wall 1 is y = 0 facing +y.
    const Scene s = parse_scene("scene c\nGEOMETRY\nmaterial m pec\n"
                                "object w1 open\n  face m  0 -50 -5  0 50 -5  0 50 5  0 -50 5\nend\n"
                                "object w2 open\n  face m  -50 0 -5  -50 0 5  50 0 5  50 0 -5\nend\n" +
                                terminals({3, 8, 1}, {9, 2, 1.5}) + "DYNAMICS\n" + dynamics);
    const TraceConfig cfg{2, false, false};
    const std::vector<Interaction> topo{{InteractionKind::reflection, 0, 0, {}}, {InteractionKind::reflection, 1, 0, {}}};
    const double h = 1e-5;
    for (double t : {0.0, 0.3})
    {
        const auto k = path_kinematics(s, topo, t);
        const auto plus = traced_points(s, t + h, "R:0:0>R:1:0", cfg);
        const auto minus = traced_points(s, t - h, "R:0:0>R:1:0", cfg);
        ASSERT_EQ(plus.size(), 2u);
        ASSERT_EQ(minus.size(), 2u);
        for (int j = 0; j < 2; ++j)
            EXPECT_LT(rel_error(k[static_cast<std::size_t>(j) + 1].velocity, (plus[static_cast<std::size_t>(j)] - minus[static_cast<std::size_t>(j)]) / (2 * h)), 1e-5);
    }
}

} // namespace

TEST(MultiBounce, CornerReflectorWithMovingTransmitter)
{
    expect_double_bounce_matches_retrace("terminal a velocity 0 4 0\n");
}

TEST(MultiBounce, CornerReflectorWithTranslatingWall)
{
    expect_double_bounce_matches_retrace("terminal a velocity 0 4 0\nmotion w2 velocity 0 -1.5 0 acceleration 0 -0.5 0\n");
}

// ---- diffraction ------------------------------------------------------------------

TEST(DiffractionLocal, EqualHeights)
{
    const KinematicState d = diffraction_point_kinematics_local(at({1, 2, 1.5}), at({-3, 1, 1.5}));
    EXPECT_TRUE(vec_near(d.position, {0, 0, 1.5}, 1e-15));
    EXPECT_EQ(d.velocity, (Vec3{}));
}

TEST(DiffractionLocal, KellerPointMatchesShortestPath)
{
    const Vec3 tx{0, -1, 2}, rx{1, 1, 0};
    const KinematicState d = diffraction_point_kinematics_local(at(tx), at(rx));
    EXPECT_NEAR(d.position.z, 2 * std::sqrt(2.0) / (1 + std::sqrt(2.0)), 1e-12);
    EXPECT_NEAR(d.position.z, 1.17157, 1e-5);

    auto length = [&](double z) { return norm(tx - Vec3{0, 0, z}) + norm(rx - Vec3{0, 0, z}); };
    double lo = -10, hi = 10;
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int i = 0; i < 200; ++i)
    {
        const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        (length(a) < length(b) ? hi : lo) = (length(a) < length(b) ? b : a);
    }
    EXPECT_NEAR(d.position.z, 0.5 * (lo + hi), 1e-8);
}

TEST(DiffractionLocal, MovingReceiverMatchesFiniteDifference)
{
    const KinematicState tx = at({0, -1, 2}), rx = at({1, 1, 0}, {1, 0, 0});
    const KinematicState d = diffraction_point_kinematics_local(tx, rx);
    const double h = 1e-6;
    auto z = [&](double t) { return diffraction_point_kinematics_local(tx, at(moved(rx, t).position)).position.z; };
    EXPECT_LT(std::abs(d.velocity.z - (z(h) - z(-h)) / (2 * h)) / std::max(std::abs(d.velocity.z), 1.0), 1e-6);
}

TEST(DiffractionLocal, DerivativesMatchFiniteDifferences)
{
    Random rng(13);
    for (int i = 0; i < 1000; ++i)
    {
        KinematicState tx = at(rng.vec(-20, 20), rng.vec(-15, 15), rng.vec(-5, 5));
        KinematicState rx = at(rng.vec(-20, 20), rng.vec(-15, 15), rng.vec(-5, 5));
        if (std::hypot(tx.position.x, tx.position.y) < 1 || std::hypot(rx.position.x, rx.position.y) < 1)
            continue;
        const KinematicState d = diffraction_point_kinematics_local(tx, rx);
        EXPECT_EQ(d.position.x, 0.0);
        EXPECT_EQ(d.position.y, 0.0);
        EXPECT_EQ(d.velocity.x, 0.0);
        EXPECT_EQ(d.velocity.y, 0.0);
        EXPECT_EQ(d.acceleration.x, 0.0);
        EXPECT_EQ(d.acceleration.y, 0.0);
        auto pos = [&](double t) { return diffraction_point_kinematics_local(moved(tx, t), moved(rx, t)).position; };
        const double hv = 1e-6, ha = 1e-4;
        EXPECT_LT(rel_error(d.velocity, (pos(hv) - pos(-hv)) / (2 * hv)), 1e-6);
        EXPECT_LT(rel_error(d.acceleration, (pos(ha) - pos(0) * 2.0 + pos(-ha)) / (ha * ha)), 1e-5);
    }
}

TEST(DiffractionGlobal, KellerConeHoldsOnMovingEdge)
{
    const Scene s = load_scene_file(test::scene_path("canyon_bus_rotating.scn"));
    const int bus = s.find_object("bus");
    const auto &edges = s.objects[static_cast<std::size_t>(bus)].edges;
    for (int e = 0; e < static_cast<int>(edges.size()); ++e)
        for (double t : {0.0, 0.5, 1.0})
        {
            const auto k = path_kinematics(s, {{InteractionKind::diffraction, bus, e, {}}}, t);
            const MovingFrame f = edge_frame(s, bus, e, t);
            const Vec3 dir = f.frame.axes.column(2);
            const double in = std::acos(dot(normalized(k[1].position - k[0].position), dir));
            const double out = std::acos(dot(normalized(k[2].position - k[1].position), dir));
            EXPECT_NEAR(in, out, 1e-8);
        }
}

// ---- scattering ---------------------------------------------------------------------

TEST(Scatter, TileKinematics)
{
    RigidMotion m;
    EXPECT_EQ(scatter_point_kinematics(BodyState(m, 0, 3), {1, 2, 3}).velocity, (Vec3{}));

    m.translation_velocity = {-30 / 3.6, 0, 0};
    for (const Vec3 &c : {Vec3{12, 1.25, 1}, Vec3{24, -1, 2}})
        EXPECT_TRUE(vec_near(scatter_point_kinematics(BodyState(m, 0, 1.5), c).velocity, {-8.3333333333333333, 0, 0}, 1e-12));

    RigidMotion spin;
    spin.angular_speed = 1;
    const KinematicState k = scatter_point_kinematics(BodyState(spin, 0, 0.3), {2, 0, 0});
    EXPECT_NEAR(norm(k.velocity), 2.0, 1e-12);
    EXPECT_NEAR(dot(k.velocity, k.position), 0.0, 1e-12);
}

// ---- extrapolation ----------------------------------------------------------------

TEST(Extrapolate, ZeroStepReproducesTrace)
{
    const Scene s = load_scene_file(test::scene_path("intersection.scn"));
    const auto paths = trace_snapshot(s, 0.0, {2, true, true});
    const auto same = extrapolate_paths(paths, s, 0.0);
    ASSERT_EQ(same.size(), paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i)
    {
        EXPECT_FALSE(same[i].expired) << paths[i].key() << " " << same[i].expiry_reason;
        EXPECT_NEAR(same[i].length, paths[i].length, 1e-12);
        for (std::size_t j = 0; j < paths[i].vertices.size(); ++j)
            EXPECT_TRUE(vec_near(same[i].vertices[j].position, paths[i].vertices[j].position, 1e-12));
    }
}

TEST(Extrapolate, StaticSceneIsUnchanged)
{
    Scene s = load_scene_file(test::scene_path("intersection.scn"));
    s.tx.kinematics.velocity = s.rx.kinematics.velocity = {};
    const auto paths = trace_snapshot(s, 0.0, {2, true, true});
    for (double dt : {0.5, 7.0, 100.0})
    {
        const auto later = extrapolate_paths(paths, s, dt);
        for (std::size_t i = 0; i < paths.size(); ++i)
        {
            EXPECT_FALSE(later[i].expired);
            EXPECT_NEAR(later[i].length, paths[i].length, 1e-12);
            EXPECT_EQ(norm(later[i].vertices[1].velocity), 0.0);
        }
    }
}

TEST(Extrapolate, CanyonMatchesFreshTraceForThreeSeconds)
{
    const Scene s = load_scene_file(test::scene_path("canyon.scn"));
    const TraceConfig cfg{2, true, false};
    const auto initial = trace_snapshot(s, 0.0, cfg);
    double worst = 0;
    long compared = 0;
    for (int i = 0; i <= 300; ++i)
    {
        const double dt = i * 0.01;
        const auto fresh = by_key(trace_snapshot(s, dt, cfg));
        for (const auto &p : extrapolate_paths(initial, s, dt))
        {
            if (p.expired)
                continue;
            const auto it = fresh.find(p.key());
            ASSERT_NE(it, fresh.end()) << p.key() << " at " << dt;
            for (std::size_t j = 0; j < p.vertices.size(); ++j)
                worst = std::max(worst, norm(p.vertices[j].position - it->second.vertices[j].position));
            ++compared;
        }
    }
    EXPECT_LT(worst, 1e-6);
    EXPECT_GT(compared, 3000);
}

TEST(Extrapolate, FrameIndependence)
{
    const Scene s = load_scene_file(test::scene_path("canyon_bus_rotating.scn"));
    const Mat3 r = rodrigues(normalized(Vec3{1, 2, 3}), 0.9);
    const Vec3 shift{100, -40, 7};
    const Scene moved_scene = transformed(s, r, shift);
    const Mat3 rt = r.transposed();
    const auto paths = trace_snapshot(s, 0.0, {2, true, false});
    ASSERT_FALSE(paths.empty());
    for (const auto &p : paths)
        for (double t : {0.0, 0.6})
        {
            const auto a = path_kinematics(s, p.interactions, t);
            const auto b = path_kinematics(moved_scene, p.interactions, t);
            for (std::size_t j = 0; j < a.size(); ++j)
            {
                EXPECT_TRUE(vec_near(rt * (b[j].position - shift), a[j].position, 1e-9)) << p.key();
                EXPECT_TRUE(vec_near(rt * b[j].velocity, a[j].velocity, 1e-9)) << p.key();
                EXPECT_TRUE(vec_near(rt * b[j].acceleration, a[j].acceleration, 1e-9)) << p.key();
            }
        }
}
