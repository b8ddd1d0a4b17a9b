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

#include "drt/raytrace.hpp"

#include <algorithm>
#include <numbers>

namespace drt {

namespace {

// Plane tolerance for analytically computed points; rounding in the posed
// frame grows with the distance from the scene origin.
constexpr double plane_tolerance = 1e-6;
// Segments are not blocked by faces they touch within this distance of an end.
constexpr double endpoint_margin = 1e-7;
constexpr double angle_margin = 1e-9;

char kind_letter(InteractionKind k)
{
    switch (k)
    {
    case InteractionKind::reflection:
        return 'R';
    case InteractionKind::diffraction:
        return 'D';
    case InteractionKind::scatter:
        return 'S';
    }
    return '?';
}

const PosedFace &face_at(const SceneSnapshot &s, const Interaction &i)
{
    return s.faces[static_cast<std::size_t>(s.face_id(i.object, i.primitive))];
}

const PosedEdge &edge_at(const SceneSnapshot &s, const Interaction &i)
{
    return s.edges[static_cast<std::size_t>(s.edge_id(i.object, i.primitive))];
}

const PosedTile &tile_at(const SceneSnapshot &s, const Interaction &i)
{
    return s.tiles[static_cast<std::size_t>(s.tile_id(i.object, i.primitive))];
}

std::optional<Vec3> keller_point(const PosedEdge &e, const Vec3 &a, const Vec3 &b)
{
    const double za = dot(a - e.start, e.direction);
    const double zb = dot(b - e.start, e.direction);
    const double da = norm(a - e.start - e.direction * za);
    const double db = norm(b - e.start - e.direction * zb);
    if (da + db <= geometric_epsilon)
        return std::nullopt;
    const double z = zb + db / (da + db) * (za - zb);
    return e.start + e.direction * z;
}

std::optional<std::vector<Vec3>> solve_reflections(const Vec3 &a, const Vec3 &b,
                                                   const std::vector<const PosedFace *> &walls)
{
    const std::size_t m = walls.size();
    std::vector<Vec3> images(m);
    Vec3 source = a;
    for (std::size_t k = 0; k < m; ++k)
        images[k] = source = mirror_point(source, *walls[k]);
    std::vector<Vec3> points(m);
    Vec3 target = b;
    for (std::size_t k = m; k-- > 0;)
    {
        const PosedFace &w = *walls[k];
        const double d0 = w.signed_distance(images[k]);
        const double d1 = w.signed_distance(target);
        if (!(d0 * d1 < 0.0))
            return std::nullopt;
        const double t = d0 / (d0 - d1);
        points[k] = images[k] + (target - images[k]) * t;
        target = points[k];
    }
    return points;
}

std::optional<std::vector<Vec3>> solve_subchain(const SceneSnapshot &s, const Vec3 &a,
                                                const Vec3 &b,
                                                const std::vector<Interaction> &items)
{
    std::size_t diff = items.size();
    for (std::size_t k = 0; k < items.size(); ++k)
        if (items[k].kind == InteractionKind::diffraction)
            diff = k;
    if (diff == items.size())
    {
        std::vector<const PosedFace *> walls;
        for (const auto &it : items)
            walls.push_back(&face_at(s, it));
        return solve_reflections(a, b, walls);
    }
    std::vector<const PosedFace *> before, after;
    for (std::size_t k = 0; k < diff; ++k)
        before.push_back(&face_at(s, items[k]));
    for (std::size_t k = diff + 1; k < items.size(); ++k)
        after.push_back(&face_at(s, items[k]));
    Vec3 ai = a;
    for (const auto *w : before)
        ai = mirror_point(ai, *w);
    Vec3 bi = b;
    for (auto it = after.rbegin(); it != after.rend(); ++it)
        bi = mirror_point(bi, **it);
    const auto qd = keller_point(edge_at(s, items[diff]), ai, bi);
    if (!qd)
        return std::nullopt;
    auto p0 = solve_reflections(a, *qd, before);
    auto p1 = solve_reflections(*qd, b, after);
    if (!p0 || !p1)
        return std::nullopt;
    std::vector<Vec3> out = *p0;
    out.push_back(*qd);
    out.insert(out.end(), p1->begin(), p1->end());
    return out;
}

bool boxes_overlap(const Vec3 &alo, const Vec3 &ahi, const Vec3 &blo, const Vec3 &bhi)
{
    constexpr double m = 1e-9;
    return alo.x <= bhi.x + m && blo.x <= ahi.x + m && alo.y <= bhi.y + m &&
           blo.y <= ahi.y + m && alo.z <= bhi.z + m && blo.z <= ahi.z + m;
}

} // namespace

std::string Interaction::id() const
{
    std::string s(1, kind_letter(kind));
    s += ':';
    s += std::to_string(object);
    s += ':';
    s += std::to_string(primitive);
    return s;
}

std::string RayPath::key() const
{
    if (interactions.empty())
        return "LOS";
    std::string k;
    for (std::size_t i = 0; i < interactions.size(); ++i)
    {
        if (i)
            k += '>';
        k += interactions[i].id();
    }
    return k;
}

int RayPath::count(InteractionKind kind) const
{
    return static_cast<int>(std::count_if(interactions.begin(), interactions.end(),
                                          [&](const Interaction &i) { return i.kind == kind; }));
}

Vec3 mirror_point(const Vec3 &p, const Vec3 &plane_normal, double plane_offset)
{
    return p - plane_normal * (2.0 * (dot(plane_normal, p) - plane_offset));
}

Vec3 mirror_point(const Vec3 &p, const PosedFace &face)
{
    return mirror_point(p, face.normal, face.offset);
}

std::optional<std::vector<Vec3>> solve_points(const SceneSnapshot &s,
                                              const std::vector<Interaction> &topology)
{
    std::vector<Vec3> out;
    Vec3 anchor = s.tx.position;
    std::vector<Interaction> chain;
    auto flush = [&](const Vec3 &next) -> bool {
        auto pts = solve_subchain(s, anchor, next, chain);
        if (!pts)
            return false;
        out.insert(out.end(), pts->begin(), pts->end());
        chain.clear();
        return true;
    };
    for (const auto &it : topology)
    {
        if (it.kind == InteractionKind::scatter)
        {
            const Vec3 c = tile_at(s, it).centroid;
            if (!flush(c))
                return std::nullopt;
            out.push_back(c);
            anchor = c;
        }
        else
            chain.push_back(it);
    }
    if (!flush(s.rx.position))
        return std::nullopt;
    return out;
}

std::vector<int> faces_of(const SceneSnapshot &s, const Interaction &i)
{
    switch (i.kind)
    {
    case InteractionKind::reflection:
        return {s.face_id(i.object, i.primitive)};
    case InteractionKind::diffraction:
    {
        const PosedEdge &e = edge_at(s, i);
        return {e.face_a, e.face_b};
    }
    case InteractionKind::scatter:
        return {tile_at(s, i).face_global};
    }
    return {};
}

int obstruction(const SceneSnapshot &s, const Vec3 &a, const Vec3 &b,
                const std::vector<int> &skip_faces)
{
    const double len = norm(b - a);
    if (len <= endpoint_margin)
        return -1;
    Vec3 lo = a, hi = a;
    for (int k = 0; k < 3; ++k)
    {
        lo[k] = std::min(a[k], b[k]);
        hi[k] = std::max(a[k], b[k]);
    }
    for (std::size_t f = 0; f < s.faces.size(); ++f)
    {
        const PosedFace &face = s.faces[f];
        if (!boxes_overlap(lo, hi, face.box_lo, face.box_hi))
            continue;
        if (std::find(skip_faces.begin(), skip_faces.end(), static_cast<int>(f)) != skip_faces.end())
            continue;
        const double d0 = face.signed_distance(a);
        const double d1 = face.signed_distance(b);
        if ((d0 > 0 && d1 > 0) || (d0 < 0 && d1 < 0) || d0 == d1)
            continue;
        const double t = d0 / (d0 - d1);
        if (t * len <= endpoint_margin || (1.0 - t) * len <= endpoint_margin)
            continue;
        if (face.contains(a + (b - a) * t, 0.0))
            return static_cast<int>(f);
    }
    return -1;
}

PathCheck validate_path(const RayPath &path, const SceneSnapshot &s)
{
    const auto &v = path.vertices;
    const std::size_t n = path.interactions.size();
    if (v.size() != n + 2)
        return {false, "malformed path"};
    for (const auto &st : v)
        if (!is_finite(st.position))
            return {false, "degenerate geometry"};

    for (std::size_t k = 0; k < n; ++k)
    {
        const Interaction &it = path.interactions[k];
        const Vec3 &p = v[k + 1].position;
        const Vec3 &prev = v[k].position;
        const Vec3 &next = v[k + 2].position;
        switch (it.kind)
        {
        case InteractionKind::reflection:
        case InteractionKind::scatter:
        {
            const PosedFace &f = it.kind == InteractionKind::reflection
                                     ? face_at(s, it)
                                     : s.faces[static_cast<std::size_t>(tile_at(s, it).face_global)];
            if (std::abs(f.signed_distance(p)) > plane_tolerance)
                return {false, "point left face plane"};
            if (it.kind == InteractionKind::reflection && !f.contains(p, geometric_epsilon))
                return {false, "point left face polygon"};
            if (f.signed_distance(prev) <= geometric_epsilon ||
                f.signed_distance(next) <= geometric_epsilon)
                return {false, "vertex behind face"};
            break;
        }
        case InteractionKind::diffraction:
        {
            const PosedEdge &e = edge_at(s, it);
            if (!e.enabled)
                return {false, "edge not diffracting"};
            const double z = dot(p - e.start, e.direction);
            if (norm(p - e.start - e.direction * z) > plane_tolerance)
                return {false, "point left edge"};
            if (z < -geometric_epsilon || z > e.length + geometric_epsilon)
                return {false, "point left edge"};
            const double limit = e.wedge_n * std::numbers::pi - angle_margin;
            for (const Vec3 *q : {&prev, &next})
            {
                const double phi = e.azimuth(*q);
                if (!(phi > angle_margin && phi < limit))
                    return {false, "vertex inside wedge"};
            }
            break;
        }
        }
    }

    for (std::size_t k = 0; k + 1 < v.size(); ++k)
    {
        std::vector<int> skip;
        if (k > 0)
        {
            auto f = faces_of(s, path.interactions[k - 1]);
            skip.insert(skip.end(), f.begin(), f.end());
        }
        if (k < n)
        {
            auto f = faces_of(s, path.interactions[k]);
            skip.insert(skip.end(), f.begin(), f.end());
        }
        if (obstruction(s, v[k].position, v[k + 1].position, skip) >= 0)
            return {false, "segment obstructed"};
    }
    return {};
}

PathCheck validate_path(const RayPath &path, const Scene &scene, double t)
{
    return validate_path(path, make_snapshot(scene, t));
}

void update_length(RayPath &path)
{
    double len = 0.0;
    for (std::size_t k = 0; k + 1 < path.vertices.size(); ++k)
        len += norm(path.vertices[k + 1].position - path.vertices[k].position);
    path.length = len;
    path.delay = len / speed_of_light;
}

std::vector<std::vector<Interaction>> enumerate_topologies(const SceneSnapshot &s,
                                                           const TraceConfig &config)
{
    const int max_refl = std::clamp(config.max_reflections, 0, max_reflections_cap);
    std::vector<Interaction> faces, edges, tiles;
    for (const auto &f : s.faces)
        faces.push_back({InteractionKind::reflection, f.object, f.index, {}});
    for (const auto &e : s.edges)
        if (e.enabled)
            edges.push_back({InteractionKind::diffraction, e.object, e.index, {}});
    for (const auto &t : s.tiles)
        tiles.push_back({InteractionKind::scatter, t.object, t.index, {}});

    std::vector<std::vector<Interaction>> out;
    out.push_back({});
    if (max_refl >= 1)
        for (const auto &f : faces)
            out.push_back({f});
    if (max_refl >= 2)
        for (const auto &f1 : faces)
            for (const auto &f2 : faces)
                if (!(f1.object == f2.object && f1.primitive == f2.primitive))
                    out.push_back({f1, f2});

    auto add_single = [&](const std::vector<Interaction> &prims) {
        for (const auto &p : prims)
        {
            out.push_back({p});
            if (max_refl >= 1)
                for (const auto &f : faces)
                {
                    out.push_back({f, p});
                    out.push_back({p, f});
                }
        }
    };
    if (config.diffraction)
        add_single(edges);
    if (config.scattering)
        add_single(tiles);
    return out;
}

namespace {

// Cheap visibility pre-checks on the first and last interaction.
bool plausible(const SceneSnapshot &s, const std::vector<Interaction> &topo)
{
    if (topo.empty())
        return true;
    auto sees = [&](const Interaction &it, const Vec3 &p) {
        switch (it.kind)
        {
        case InteractionKind::reflection:
            return face_at(s, it).signed_distance(p) > geometric_epsilon;
        case InteractionKind::scatter:
            return s.faces[static_cast<std::size_t>(tile_at(s, it).face_global)].signed_distance(p) >
                   geometric_epsilon;
        case InteractionKind::diffraction:
        {
            const PosedEdge &e = edge_at(s, it);
            const double phi = e.azimuth(p);
            return phi > angle_margin && phi < e.wedge_n * std::numbers::pi - angle_margin;
        }
        }
        return false;
    };
    return sees(topo.front(), s.tx.position) && sees(topo.back(), s.rx.position);
}

} // namespace

std::vector<RayPath> trace_snapshot(const SceneSnapshot &s, const TraceConfig &config)
{
    std::vector<RayPath> paths;
    for (auto &topo : enumerate_topologies(s, config))
    {
        if (!plausible(s, topo))
            continue;
        const auto pts = solve_points(s, topo);
        if (!pts)
            continue;
        RayPath path;
        path.time = s.time;
        path.interactions = topo;
        path.vertices.reserve(topo.size() + 2);
        path.vertices.push_back(s.tx);
        for (std::size_t k = 0; k < topo.size(); ++k)
        {
            path.interactions[k].point = (*pts)[k];
            path.vertices.push_back({(*pts)[k], {}, {}, s.time});
        }
        path.vertices.push_back(s.rx);
        for (auto &vtx : path.vertices)
            vtx = {vtx.position, {}, {}, s.time};
        if (!validate_path(path, s))
            continue;
        update_length(path);
        paths.push_back(std::move(path));
    }
    std::sort(paths.begin(), paths.end(), [](const RayPath &a, const RayPath &b) {
        if (a.delay != b.delay)
            return a.delay < b.delay;
        return a.key() < b.key();
    });
    return paths;
}

std::vector<RayPath> trace_snapshot(const Scene &scene, double t, const TraceConfig &config)
{
    return trace_snapshot(make_snapshot(scene, t, config.scattering), config);
}

} // namespace drt
