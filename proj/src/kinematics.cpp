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

#include <algorithm>

namespace drt {

namespace {

// Split fraction s = y_T / (y_T + y_R) of the reflection point along TX-RX and
// its first two time derivatives.
struct Fraction
{
    double s, ds, dds;
};

Fraction reflection_fraction(const KinematicState &tx, const KinematicState &rx)
{
    const double yt = tx.position.y, yr = rx.position.y;
    const double vt = tx.velocity.y, vr = rx.velocity.y;
    const double at = tx.acceleration.y, ar = rx.acceleration.y;
    const double S = yt + yr;
    if (!(S > degeneracy_epsilon))
        throw DegenerateGeometry("terminals on or behind the wall plane");
    const double dS = vt + vr;
    const double N = vt * yr - yt * vr;
    const double dN = at * yr - yt * ar;
    return {yt / S, N / (S * S), dN / (S * S) - 2.0 * N * dS / (S * S * S)};
}

// q = p_t + (p_r - p_t) s, differentiated twice.
double lerp_value(double pt, double pr, const Fraction &f) { return pt + (pr - pt) * f.s; }
double lerp_rate(double pt, double pr, double vt, double vr, const Fraction &f)
{
    return vt + (vr - vt) * f.s + (pr - pt) * f.ds;
}
double lerp_accel(double pt, double pr, double vt, double vr, double at, double ar,
                  const Fraction &f)
{
    return at + (ar - at) * f.s + 2.0 * (vr - vt) * f.ds + (pr - pt) * f.dds;
}

Vec3 mirror_y(const Vec3 &v) { return {v.x, -v.y, v.z}; }

} // namespace

Vec3 reflection_point_local(const Vec3 &tx, const Vec3 &rx)
{
    return reflection_point_kinematics_local({tx, {}, {}, 0.0}, {rx, {}, {}, 0.0}).position;
}

Vec3 reflection_point_velocity(const Vec3 &tx, const Vec3 &rx, const Vec3 &v_tx, const Vec3 &v_rx)
{
    return reflection_point_kinematics_local({tx, v_tx, {}, 0.0}, {rx, v_rx, {}, 0.0}).velocity;
}

Vec3 reflection_point_acceleration(const Vec3 &tx, const Vec3 &rx, const Vec3 &v_tx,
                                   const Vec3 &v_rx, const Vec3 &a_tx, const Vec3 &a_rx)
{
    return reflection_point_kinematics_local({tx, v_tx, a_tx, 0.0}, {rx, v_rx, a_rx, 0.0})
        .acceleration;
}

KinematicState reflection_point_kinematics_local(const KinematicState &tx, const KinematicState &rx)
{
    const Fraction f = reflection_fraction(tx, rx);
    const Vec3 &pt = tx.position, &pr = rx.position;
    const Vec3 &vt = tx.velocity, &vr = rx.velocity;
    const Vec3 &at = tx.acceleration, &ar = rx.acceleration;
    KinematicState q;
    q.time = tx.time;
    q.position = {lerp_value(pt.x, pr.x, f), 0.0, lerp_value(pt.z, pr.z, f)};
    q.velocity = {lerp_rate(pt.x, pr.x, vt.x, vr.x, f), 0.0, lerp_rate(pt.z, pr.z, vt.z, vr.z, f)};
    q.acceleration = {lerp_accel(pt.x, pr.x, vt.x, vr.x, at.x, ar.x, f), 0.0,
                      lerp_accel(pt.z, pr.z, vt.z, vr.z, at.z, ar.z, f)};
    return q;
}

KinematicState diffraction_point_kinematics_local(const KinematicState &tx,
                                                  const KinematicState &rx)
{
    struct Radial
    {
        double d, dd, ddd;
    };
    auto radial = [](const KinematicState &p) {
        const double x = p.position.x, y = p.position.y;
        const double vx = p.velocity.x, vy = p.velocity.y;
        const double ax = p.acceleration.x, ay = p.acceleration.y;
        const double d = std::sqrt(x * x + y * y);
        if (!(d > degeneracy_epsilon))
            throw DegenerateGeometry("terminal on the edge line");
        const double dd = (x * vx + y * vy) / d;
        const double ddd = (vx * vx + vy * vy + x * ax + y * ay - dd * dd) / d;
        return Radial{d, dd, ddd};
    };
    const Radial t = radial(tx);
    const Radial r = radial(rx);
    const double D = t.d + r.d;
    const double dD = t.dd + r.dd;
    const double N = r.dd * t.d - r.d * t.dd;
    const double dN = r.ddd * t.d - r.d * t.ddd;
    const double w = r.d / D;
    const double dw = N / (D * D);
    const double ddw = dN / (D * D) - 2.0 * N * dD / (D * D * D);

    const double zt = tx.position.z, zr = rx.position.z;
    const double vzt = tx.velocity.z, vzr = rx.velocity.z;
    const double azt = tx.acceleration.z, azr = rx.acceleration.z;
    const double dz = zt - zr, dvz = vzt - vzr, daz = azt - azr;

    KinematicState q;
    q.time = tx.time;
    q.position = {0.0, 0.0, zr + w * dz};
    q.velocity = {0.0, 0.0, vzr + dw * dz + w * dvz};
    q.acceleration = {0.0, 0.0, azr + ddw * dz + 2.0 * dw * dvz + w * daz};
    return q;
}

KinematicState reflection_point_kinematics_global(const MovingFrame &wall, const KinematicState &tx,
                                                  const KinematicState &rx)
{
    return wall.to_global(reflection_point_kinematics_local(wall.to_local(tx), wall.to_local(rx)));
}

KinematicState image_source_kinematics(const KinematicState &source, const MovingFrame &wall)
{
    KinematicState local = wall.to_local(source);
    local.position = mirror_y(local.position);
    local.velocity = mirror_y(local.velocity);
    local.acceleration = mirror_y(local.acceleration);
    return wall.to_global(local);
}

KinematicState diffraction_point_kinematics(const MovingFrame &edge, const KinematicState &tx,
                                            const KinematicState &rx)
{
    return edge.to_global(diffraction_point_kinematics_local(edge.to_local(tx), edge.to_local(rx)));
}

KinematicState scatter_point_kinematics(const BodyState &body, const Vec3 &centroid0)
{
    return body.point_state(centroid0);
}

MovingFrame face_frame(const Scene &scene, int object, int face, double t)
{
    const Face &f = scene.objects[static_cast<std::size_t>(object)].faces[static_cast<std::size_t>(face)];
    return body_state(scene, object, t).frame(f.vertices[0], f.axes);
}

MovingFrame edge_frame(const Scene &scene, int object, int edge, double t)
{
    const auto &obj = scene.objects[static_cast<std::size_t>(object)];
    const Edge &e = obj.edges[static_cast<std::size_t>(edge)];
    const Face &fa = obj.faces[static_cast<std::size_t>(e.face_a)];
    const Vec3 dir = e.direction();
    Vec3 tangent = normalized(cross(fa.normal, dir));
    double best = 0.0;
    for (const auto &v : fa.vertices)
    {
        const double d = dot(v - e.start, tangent);
        if (std::abs(d) > std::abs(best))
            best = d;
    }
    if (best < 0)
        tangent = -tangent;
    const Mat3 axes = Mat3::from_columns(tangent, fa.normal, cross(tangent, fa.normal));
    return body_state(scene, object, t).frame(e.start, axes);
}

namespace {

struct ChainContext
{
    const Scene &scene;
    double t;

    MovingFrame wall(const Interaction &i) const { return face_frame(scene, i.object, i.primitive, t); }
};

std::vector<KinematicState> reflections_only(const KinematicState &a, const KinematicState &b,
                                             const std::vector<MovingFrame> &walls)
{
    const std::size_t m = walls.size();
    std::vector<KinematicState> images(m);
    if (m > 0)
        images[0] = a;
    for (std::size_t k = 1; k < m; ++k)
        images[k] = image_source_kinematics(images[k - 1], walls[k - 1]);
    std::vector<KinematicState> points(m);
    KinematicState target = b;
    for (std::size_t k = m; k-- > 0;)
    {
        points[k] = reflection_point_kinematics_global(walls[k], images[k], target);
        target = points[k];
    }
    return points;
}

std::vector<KinematicState> subchain(const ChainContext &ctx, const KinematicState &a,
                                     const KinematicState &b, const std::vector<Interaction> &items)
{
    std::size_t diff = items.size();
    for (std::size_t k = 0; k < items.size(); ++k)
        if (items[k].kind == InteractionKind::diffraction)
            diff = k;
    std::vector<MovingFrame> before, after;
    for (std::size_t k = 0; k < items.size(); ++k)
        if (k != diff)
            (k < diff ? before : after).push_back(ctx.wall(items[k]));
    if (diff == items.size())
        return reflections_only(a, b, before);

    KinematicState ai = a;
    for (const auto &w : before)
        ai = image_source_kinematics(ai, w);
    KinematicState bi = b;
    for (auto it = after.rbegin(); it != after.rend(); ++it)
        bi = image_source_kinematics(bi, *it);
    const Interaction &d = items[diff];
    const KinematicState qd =
        diffraction_point_kinematics(edge_frame(ctx.scene, d.object, d.primitive, ctx.t), ai, bi);
    auto out = reflections_only(a, qd, before);
    out.push_back(qd);
    const auto rest = reflections_only(qd, b, after);
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

} // namespace

std::vector<KinematicState> path_kinematics(const Scene &scene,
                                            const std::vector<Interaction> &topology, double t)
{
    const ChainContext ctx{scene, t};
    std::vector<KinematicState> out;
    out.reserve(topology.size() + 2);
    out.push_back(terminal_state(scene, scene.tx, t));
    KinematicState anchor = out.front();
    std::vector<Interaction> chain;
    auto flush = [&](const KinematicState &next) {
        const auto pts = subchain(ctx, anchor, next, chain);
        out.insert(out.end(), pts.begin(), pts.end());
        chain.clear();
    };
    for (const auto &it : topology)
    {
        if (it.kind == InteractionKind::scatter)
        {
            const Tile &tile = scene.objects[static_cast<std::size_t>(it.object)]
                                   .tiles[static_cast<std::size_t>(it.primitive)];
            const KinematicState c =
                scatter_point_kinematics(body_state(scene, it.object, t), tile.centroid);
            flush(c);
            out.push_back(c);
            anchor = c;
        }
        else
            chain.push_back(it);
    }
    const KinematicState rx = terminal_state(scene, scene.rx, t);
    flush(rx);
    out.push_back(rx);
    for (auto &v : out)
        v.time = t;
    return out;
}

bool fill_path_kinematics(RayPath &path, const Scene &scene, double t)
{
    path.time = t;
    try
    {
        path.vertices = path_kinematics(scene, path.interactions, t);
    }
    catch (const DegenerateGeometry &)
    {
        path.expired = true;
        path.expiry_reason = "degenerate geometry";
        return false;
    }
    for (std::size_t k = 0; k < path.interactions.size(); ++k)
        path.interactions[k].point = path.vertices[k + 1].position;
    update_length(path);
    return true;
}

std::vector<RayPath> extrapolate_paths(const std::vector<RayPath> &paths, const Scene &scene,
                                       const SceneSnapshot &snapshot)
{
    std::vector<RayPath> out;
    out.reserve(paths.size());
    for (const auto &p : paths)
    {
        RayPath q;
        q.interactions = p.interactions;
        if (fill_path_kinematics(q, scene, snapshot.time))
        {
            const PathCheck check = validate_path(q, snapshot);
            q.expired = !check.valid;
            q.expiry_reason = check.reason;
        }
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<RayPath> extrapolate_paths(const std::vector<RayPath> &paths, const Scene &scene,
                                       double dt)
{
    if (paths.empty())
        return {};
    bool tiles = false;
    for (const auto &p : paths)
        tiles = tiles || p.count(InteractionKind::scatter) > 0;
    return extrapolate_paths(paths, scene, make_snapshot(scene, paths.front().time + dt, tiles));
}

} // namespace drt
