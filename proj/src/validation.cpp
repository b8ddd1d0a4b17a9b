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

#include "drt/validation.hpp"

#include "drt/channel.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace drt {

double relative_error(const Vec3 &a, const Vec3 &b) { return norm(a - b) / std::max(norm(b), 1.0); }

double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1.0); }

const CategoryResult *ValidationReport::find(const std::string &name) const
{
    for (const auto &c : categories)
        if (c.name == name)
            return &c;
    return nullptr;
}

namespace {

// Portable uniform draws (the standard distributions are implementation-defined).
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi)
    {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    Vec3 vec(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }

    Vec3 ball(double radius)
    {
        for (;;)
        {
            const Vec3 v = vec(-1.0, 1.0);
            if (dot(v, v) <= 1.0)
                return v * radius;
        }
    }

    Vec3 unit()
    {
        for (;;)
        {
            const Vec3 v = vec(-1.0, 1.0);
            const double n2 = dot(v, v);
            if (n2 > 1e-4 && n2 <= 1.0)
                return v / std::sqrt(n2);
        }
    }

private:
    std::mt19937_64 engine_;
};

struct Transform
{
    Mat3 rotation;
    Vec3 offset;
    Vec3 point(const Vec3 &p) const { return rotation * p + offset; }
    Vec3 vector(const Vec3 &v) const { return rotation * v; }
};

enum class MotionKind
{
    rest,
    translating,
    rotating
};

const char *motion_name(MotionKind k)
{
    switch (k)
    {
    case MotionKind::rest:
        return "static";
    case MotionKind::translating:
        return "translating";
    case MotionKind::rotating:
        return "rotating";
    }
    return "?";
}

RigidMotion random_motion(Rng &rng, MotionKind kind, const Vec3 &center, double max_speed,
                          double max_omega)
{
    RigidMotion m;
    m.rotation_center = center;
    if (kind == MotionKind::rest)
        return m;
    m.translation_velocity = rng.ball(max_speed);
    m.translation_acceleration = rng.ball(2.0);
    if (kind == MotionKind::rotating)
    {
        m.rotation_axis = rng.unit();
        m.angular_speed = rng.uniform(-max_omega, max_omega);
        m.angular_acceleration = rng.uniform(-0.3, 0.3);
    }
    return m;
}

RigidMotion transformed(const RigidMotion &m, const Transform &g)
{
    RigidMotion r = m;
    r.translation_velocity = g.vector(m.translation_velocity);
    r.translation_acceleration = g.vector(m.translation_acceleration);
    r.rotation_center = g.point(m.rotation_center);
    r.rotation_axis = g.vector(m.rotation_axis);
    return r;
}

struct OracleCase
{
    Scene scene;
    double t = 0.0;
    std::string label;
    std::vector<std::pair<std::string, std::vector<Interaction>>> topologies;
};

// Wall (plane y = 0 in the canonical pose) plus a box on its front side, both
// with random motion, terminals between them, all moved by a random rigid
// transform.
OracleCase make_case(Rng &rng, int index)
{
    const MotionKind wall_kind = static_cast<MotionKind>(index % 3);
    const MotionKind box_kind = static_cast<MotionKind>((index / 3) % 3);
    Transform g{rodrigues(rng.unit(), rng.uniform(0.0, 2.0 * std::numbers::pi)), rng.vec(-50.0, 50.0)};

    OracleCase c;
    Scene &s = c.scene;
    s.name = "oracle";
    s.materials = {Material{"concrete", 5.0, 0.01, 0.4, false}, Material{"metal", 1.0, 0.0, 0.0, true}};

    const double half = 30.0;
    SceneObject wall;
    wall.id = "wall";
    wall.closed = false;
    wall.faces.push_back(make_face({g.point({-half, 0, -half}), g.point({-half, 0, half}),
                                    g.point({half, 0, half}), g.point({half, 0, -half})},
                                   0, "wall"));
    wall.motion = transformed(random_motion(rng, wall_kind, rng.vec(-5.0, 5.0), 5.0, 0.5), g);

    const Vec3 bc{rng.uniform(-5.0, 5.0), rng.uniform(8.0, 14.0), rng.uniform(-3.0, 3.0)};
    const Vec3 bh{rng.uniform(1.0, 3.0), rng.uniform(1.0, 3.0), rng.uniform(1.0, 3.0)};
    SceneObject box;
    box.id = "box";
    box.closed = true;
    for (const auto &f : make_box(bc - bh, bc + bh, 1))
    {
        std::vector<Vec3> verts;
        for (const auto &v : f.vertices)
            verts.push_back(g.point(v));
        box.faces.push_back(make_face(verts, 1, "box"));
    }
    box.motion = transformed(random_motion(rng, box_kind, bc + rng.ball(1.0), 10.0, 0.8), g);

    const double ymax = bc.y - bh.y - 1.0;
    auto terminal = [&](const char *id, TerminalRole role) {
        Terminal t;
        t.id = id;
        t.role = role;
        const Vec3 p{rng.uniform(-10.0, 10.0), rng.uniform(1.0, ymax), rng.uniform(-3.0, 3.0)};
        t.kinematics = {g.point(p), g.vector(rng.ball(15.0)), g.vector(rng.ball(5.0)), 0.0};
        return t;
    };
    s.tx = terminal("tx", TerminalRole::transmitter);
    s.rx = terminal("rx", TerminalRole::receiver);
    s.objects = {std::move(wall), std::move(box)};
    finalize_scene(s);
    c.t = rng.uniform(0.0, 0.3);

    const auto &bx = s.objects[1];
    int edge = 0;
    for (std::size_t e = 0; e < bx.edges.size(); ++e)
    {
        const auto &ed = bx.edges[e];
        if ((ed.face_a == 2 && ed.face_b == 0) || (ed.face_a == 0 && ed.face_b == 2))
            edge = static_cast<int>(e);
    }
    const Vec3 target = g.point({0.0, 0.0, 0.0});
    int tile = 0;
    double best = 1e300;
    const auto &tiles = s.objects[0].tiles;
    const Vec3 mid = (s.tx.kinematics.position + s.rx.kinematics.position) * 0.5;
    const Vec3 n = s.objects[0].faces[0].normal;
    const Vec3 foot = mid - n * dot(n, mid - target);
    for (std::size_t k = 0; k < tiles.size(); ++k)
    {
        const double d = norm(tiles[k].centroid - foot);
        if (d < best)
        {
            best = d;
            tile = static_cast<int>(k);
        }
    }

    const Interaction rw{InteractionKind::reflection, 0, 0, {}};
    const Interaction rb{InteractionKind::reflection, 1, 2, {}};
    const Interaction d{InteractionKind::diffraction, 1, edge, {}};
    const Interaction sc{InteractionKind::scatter, 0, tile, {}};
    c.topologies = {{"reflection", {rw}},       {"multi_bounce", {rw, rb}},
                    {"multi_bounce", {rb, rw}}, {"diffraction", {d}},
                    {"diffraction", {rw, d}},   {"diffraction", {d, rw}},
                    {"scatter", {sc}},          {"scatter", {rb, sc}}};

    char buf[160];
    std::snprintf(buf, sizeof buf, "case %d: wall %s, box %s, t = %.17g", index,
                  motion_name(wall_kind), motion_name(box_kind), c.t);
    c.label = buf;
    return c;
}

// Both terminals must stay in front of the wall and of the box's lower face at
// the sample time; otherwise the closed form is undefined and the case is redrawn.
bool well_posed(const OracleCase &c)
{
    const Scene &s = c.scene;
    for (const auto &[object, face] : {std::pair{0, 0}, std::pair{1, 2}})
    {
        const MovingFrame f = face_frame(s, object, face, c.t);
        for (const Terminal *term : {&s.tx, &s.rx})
            if (f.frame.to_local_point(terminal_state(s, *term, c.t).position).y < 0.5)
                return false;
    }
    return true;
}

class Tracker
{
public:
    Tracker(std::string name, std::string metric, double tolerance)
    {
        result_.name = std::move(name);
        result_.metric = std::move(metric);
        result_.tolerance = tolerance;
    }

    void add(double error, const std::function<std::string()> &describe)
    {
        ++result_.cases;
        if (!(error <= result_.max_error) || result_.cases == 1)
        {
            result_.max_error = std::isnan(error) ? std::numeric_limits<double>::infinity() : error;
            result_.worst_case = describe();
        }
    }

    const CategoryResult &result() const { return result_; }

private:
    CategoryResult result_;
};

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const Vec3 &v) { return "(" + fmt(v.x) + ", " + fmt(v.y) + ", " + fmt(v.z) + ")"; }

} // namespace

ValidationReport run_validation(const ValidationOptions &o)
{
    Rng rng(o.seed);
    const double hv = o.velocity_step;
    const double ha = o.acceleration_step;

    std::map<std::string, std::pair<Tracker, Tracker>> derivative;
    auto tracker_pair = [&](const std::string &name) -> std::pair<Tracker, Tracker> & {
        auto it = derivative.find(name);
        if (it == derivative.end())
            it = derivative
                     .emplace(name, std::make_pair(
                                        Tracker(name + ".velocity", "rel_error", o.velocity_tolerance),
                                        Tracker(name + ".acceleration", "rel_error",
                                                o.acceleration_tolerance)))
                     .first;
        return it->second;
    };
    for (const char *name : {"relative_motion", "reflection", "image_source", "multi_bounce",
                             "diffraction", "scatter"})
        tracker_pair(name);
    Tracker equivalence("snapshot_equivalence", "abs_error_m", o.position_tolerance);
    Tracker doppler("doppler_phase", "rel_error", o.doppler_tolerance);

    // Checks analytic velocity and acceleration of a trajectory against central differences.
    auto check_derivatives = [&](const std::string &name,
                                 const std::function<KinematicState(double)> &f, double t,
                                 const std::function<std::string()> &describe) {
        auto &[tv, ta] = tracker_pair(name);
        const KinematicState k = f(t);
        const Vec3 fd_v = (f(t + hv).position - f(t - hv).position) / (2.0 * hv);
        const Vec3 fd_a =
            (f(t + ha).position - k.position * 2.0 + f(t - ha).position) / (ha * ha);
        tv.add(relative_error(k.velocity, fd_v),
               [&] { return describe() + "; analytic v " + fmt(k.velocity) + ", fd " + fmt(fd_v); });
        ta.add(relative_error(k.acceleration, fd_a), [&] {
            return describe() + "; analytic a " + fmt(k.acceleration) + ", fd " + fmt(fd_a);
        });
    };

    int attempts = 0;
    for (int i = 0; i < o.cases; ++i)
    {
        // Relative motion: scripted global trajectory seen from a rotating frame.
        {
            const RigidMotion m = random_motion(rng, MotionKind::rotating, rng.vec(-5, 5), 10.0, 1.0);
            const Vec3 origin0 = rng.vec(-5, 5);
            const Mat3 axes0 = rodrigues(rng.unit(), rng.uniform(0, 6.0));
            const Vec3 r0 = rng.vec(-20, 20), v0 = rng.ball(15), a0 = rng.ball(5), w = rng.ball(3);
            const double t = rng.uniform(0, 0.5);
            auto global = [=](double s) {
                return KinematicState{r0 + v0 * s + a0 * (0.5 * s * s) + w * std::sin(2 * s),
                                      v0 + a0 * s + w * (2 * std::cos(2 * s)),
                                      a0 - w * (4 * std::sin(2 * s)), s};
            };
            auto local = [&, m, origin0, axes0](double s) {
                const MovingFrame fr = BodyState(m, 0.0, s).frame(origin0, axes0);
                const KinematicState p = global(s);
                const Vec3 r = p.position - fr.frame.origin;
                const Vec3 v_rel = relative_velocity(p.velocity, fr.motion, r);
                const Vec3 a_rel = o.relative_acceleration(p.acceleration, fr.motion, r, v_rel);
                return KinematicState{fr.frame.to_local_vector(r), fr.frame.to_local_vector(v_rel),
                                      fr.frame.to_local_vector(a_rel), s};
            };
            check_derivatives("relative_motion", local, t, [&, i, t] {
                return "relative motion case " + std::to_string(i) + ", t = " + fmt(t) +
                       ", r0 " + fmt(r0) + ", v0 " + fmt(v0) + ", a0 " + fmt(a0) + ", omega " +
                       fmt(m.omega()) + ", omega_dot " + fmt(m.omega_dot()) + ", centre " +
                       fmt(m.rotation_center);
            });
        }

        // Interaction points on a random wall/box scene.
        OracleCase c = make_case(rng, i);
        ++attempts;
        while (!well_posed(c))
        {
            c = make_case(rng, i);
            ++attempts;
        }
        const Scene &s = c.scene;
        const std::string scene_text = serialize_scene(s);
        auto describe = [&](const std::string &topo) {
            return [&, topo] { return c.label + ", topology " + topo + "\n" + scene_text; };
        };

        check_derivatives(
            "image_source",
            [&](double t) {
                return image_source_kinematics(terminal_state(s, s.tx, t), face_frame(s, 0, 0, t));
            },
            c.t, describe("image of tx in wall"));

        const SceneSnapshot snap = make_snapshot(s, c.t);
        for (const auto &[name, topo] : c.topologies)
        {
            RayPath probe;
            probe.interactions = topo;
            const std::string key = probe.key();
            try
            {
                const auto at = path_kinematics(s, topo, c.t);
                for (std::size_t k = 0; k < topo.size(); ++k)
                    check_derivatives(
                        name, [&](double t) { return path_kinematics(s, topo, t)[k + 1]; }, c.t,
                        describe(key + " vertex " + std::to_string(k + 1)));

                const auto image_points = solve_points(snap, topo);
                if (image_points)
                {
                    double err = 0.0;
                    for (std::size_t k = 0; k < topo.size(); ++k)
                        err = std::max(err, norm((*image_points)[k] - at[k + 1].position));
                    equivalence.add(err, describe(key));
                }

                RayPath path;
                path.interactions = topo;
                path.vertices = at;
                const double f0 = s.tx.frequency;
                auto length = [&](double t) {
                    const auto v = path_kinematics(s, topo, t);
                    double len = 0.0;
                    for (std::size_t k = 0; k + 1 < v.size(); ++k)
                        len += norm(v[k + 1].position - v[k].position);
                    return len;
                };
                const double rate = (length(c.t + hv) - length(c.t - hv)) / (2.0 * hv);
                const double analytic = doppler_shift(path, f0).shift;
                const double oracle = phase_doppler(rate, f0);
                doppler.add(relative_error(analytic, oracle), [&] {
                    return describe(key)() + "\nanalytic " + fmt(analytic) + " Hz, phase " +
                           fmt(oracle) + " Hz";
                });
            }
            catch (const DegenerateGeometry &e)
            {
                equivalence.add(std::numeric_limits<double>::infinity(),
                                [&] { return describe(key)() + "\n" + e.what(); });
            }
        }
    }

    ValidationReport report;
    for (const char *name : {"relative_motion", "reflection", "image_source", "multi_bounce",
                             "diffraction", "scatter"})
    {
        const auto &p = derivative.at(name);
        report.categories.push_back(p.first.result());
        report.categories.push_back(p.second.result());
    }
    report.categories[0].name = "relative_velocity";
    report.categories[1].name = "relative_acceleration";
    report.categories.push_back(equivalence.result());
    report.categories.push_back(doppler.result());

    std::ostringstream out;
    char line[256];
    out << "validation report\n";
    out << "seed " << o.seed << ", configurations " << attempts << "\n";
    std::snprintf(line, sizeof line, "%-28s %8s %-12s %12s %10s  %s\n", "category", "cases",
                  "metric", "max_error", "tolerance", "status");
    out << line;
    report.passed = true;
    for (const auto &c : report.categories)
    {
        std::snprintf(line, sizeof line, "%-28s %8d %-12s %12.3e %10.1e  %s\n", c.name.c_str(),
                      c.cases, c.metric.c_str(), c.max_error, c.tolerance,
                      c.passed() ? "PASS" : "FAIL");
        out << line;
        report.passed = report.passed && c.passed();
    }
    for (const auto &c : report.categories)
        if (!c.passed())
            out << "\nworst case for " << c.name << ":\n" << c.worst_case << "\n";
    out << (report.passed ? "overall PASS\n" : "overall FAIL\n");
    report.text = out.str();
    return report;
}

} // namespace drt
