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

#include "drt/scene.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace drt {

ParseError::ParseError(int line, int column, const std::string &what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + what),
      line_(line), column_(column)
{
}

int Scene::find_object(std::string_view id) const
{
    for (std::size_t i = 0; i < objects.size(); ++i)
        if (objects[i].id == id)
            return static_cast<int>(i);
    return -1;
}

namespace {

// ---- polygon helpers ---------------------------------------------------

double cross2(const Point2 &o, const Point2 &a, const Point2 &b)
{
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool segments_intersect_2d(const Point2 &p1, const Point2 &p2, const Point2 &q1, const Point2 &q2)
{
    const double d1 = cross2(q1, q2, p1);
    const double d2 = cross2(q1, q2, p2);
    const double d3 = cross2(p1, p2, q1);
    const double d4 = cross2(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on_segment = [](const Point2 &a, const Point2 &b, const Point2 &p) {
        return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) &&
               std::min(a[1], b[1]) <= p[1] && p[1] <= std::max(a[1], b[1]);
    };
    if (d1 == 0 && on_segment(q1, q2, p1))
        return true;
    if (d2 == 0 && on_segment(q1, q2, p2))
        return true;
    if (d3 == 0 && on_segment(p1, p2, q1))
        return true;
    if (d4 == 0 && on_segment(p1, p2, q2))
        return true;
    return false;
}

double point_segment_distance_2d(const Point2 &p, const Point2 &a, const Point2 &b)
{
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double s = len2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    const double ex = a[0] + s * dx - p[0], ey = a[1] + s * dy - p[1];
    return std::sqrt(ex * ex + ey * ey);
}

bool polygon_contains(const std::vector<Point2> &poly, const Point2 &p, double tol)
{
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    {
        const Point2 &a = poly[i];
        const Point2 &b = poly[j];
        if ((a[1] > p[1]) != (b[1] > p[1]))
        {
            const double x = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
            if (p[0] < x)
                inside = !inside;
        }
    }
    if (inside)
        return true;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        if (point_segment_distance_2d(p, poly[j], poly[i]) <= tol)
            return true;
    return false;
}

double polygon_area_2d(const std::vector<Point2> &poly, Point2 *centroid = nullptr)
{
    double a = 0.0, cx = 0.0, cy = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        const Point2 &p = poly[i];
        const Point2 &q = poly[(i + 1) % n];
        const double c = p[0] * q[1] - q[0] * p[1];
        a += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    a *= 0.5;
    if (centroid && a != 0.0)
        *centroid = {cx / (6.0 * a), cy / (6.0 * a)};
    return a;
}

// Sutherland-Hodgman against the half-plane sign * (coord[axis] - bound) <= 0.
std::vector<Point2> clip_half_plane(const std::vector<Point2> &poly, int axis, double bound,
                                    double sign)
{
    std::vector<Point2> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        const Point2 &p = poly[i];
        const Point2 &q = poly[(i + 1) % n];
        const double dp = sign * (p[static_cast<std::size_t>(axis)] - bound);
        const double dq = sign * (q[static_cast<std::size_t>(axis)] - bound);
        if (dp <= 0)
            out.push_back(p);
        if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0))
        {
            const double s = dp / (dp - dq);
            out.push_back({p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])});
        }
    }
    return out;
}

std::vector<Tile> tile_face(const Face &face, int face_index)
{
    double umin = 1e300, umax = -1e300, wmin = 1e300, wmax = -1e300;
    for (const auto &p : face.outline)
    {
        umin = std::min(umin, p[0]);
        umax = std::max(umax, p[0]);
        wmin = std::min(wmin, p[1]);
        wmax = std::max(wmax, p[1]);
    }
    const int nu = std::max(1, static_cast<int>(std::ceil((umax - umin) / max_tile_size - 1e-9)));
    const int nw = std::max(1, static_cast<int>(std::ceil((wmax - wmin) / max_tile_size - 1e-9)));
    const double du = (umax - umin) / nu;
    const double dw = (wmax - wmin) / nw;
    const Vec3 ex = face.axes.column(0);
    const Vec3 ez = face.axes.column(2);

    std::vector<Tile> tiles;
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nw; ++j)
        {
            auto piece = face.outline;
            piece = clip_half_plane(piece, 0, umin + i * du, -1.0);
            piece = clip_half_plane(piece, 0, umin + (i + 1) * du, 1.0);
            piece = clip_half_plane(piece, 1, wmin + j * dw, -1.0);
            piece = clip_half_plane(piece, 1, wmin + (j + 1) * dw, 1.0);
            if (piece.size() < 3)
                continue;
            Point2 c{};
            const double a = std::abs(polygon_area_2d(piece, &c));
            if (a <= 1e-12)
                continue;
            tiles.push_back({face_index, face.vertices[0] + ex * c[0] + ez * c[1], a});
        }
    return tiles;
}

bool same_point(const Vec3 &a, const Vec3 &b) { return norm(a - b) <= geometric_epsilon; }

void derive_edges(SceneObject &obj, const std::string &where)
{
    obj.edges.clear();
    const std::size_t nf = obj.faces.size();
    std::vector<std::vector<int>> shared(nf);
    for (std::size_t i = 0; i < nf; ++i)
        shared[i].assign(obj.faces[i].vertices.size(), 0);

    for (std::size_t i = 0; i < nf; ++i)
    {
        const auto &fa = obj.faces[i];
        for (std::size_t k = 0; k < fa.vertices.size(); ++k)
        {
            const Vec3 &p = fa.vertices[k];
            const Vec3 &q = fa.vertices[(k + 1) % fa.vertices.size()];
            for (std::size_t j = i + 1; j < nf; ++j)
            {
                const auto &fb = obj.faces[j];
                for (std::size_t m = 0; m < fb.vertices.size(); ++m)
                {
                    const Vec3 &r = fb.vertices[m];
                    const Vec3 &s = fb.vertices[(m + 1) % fb.vertices.size()];
                    if (!((same_point(p, s) && same_point(q, r)) ||
                          (same_point(p, r) && same_point(q, s))))
                        continue;
                    ++shared[i][k];
                    ++shared[j][m];

                    Edge e;
                    e.start = p;
                    e.end = q;
                    e.face_a = static_cast<int>(i);
                    e.face_b = static_cast<int>(j);
                    const double c = std::clamp(dot(fa.normal, fb.normal), -1.0, 1.0);
                    const double gamma = std::acos(c);
                    // A vertex of face b off the edge tells convex from reflex.
                    double side = 0.0;
                    for (const auto &v : fb.vertices)
                    {
                        const double d = dot(fa.normal, v - fa.vertices[0]);
                        if (std::abs(d) > std::abs(side))
                            side = d;
                    }
                    if (std::abs(side) <= geometric_epsilon)
                    {
                        e.wedge_angle = std::numbers::pi; // coplanar neighbours: no wedge
                        e.exterior = false;
                    }
                    else if (side < 0)
                    {
                        e.wedge_angle = std::numbers::pi - gamma;
                        e.exterior = true;
                    }
                    else
                    {
                        e.wedge_angle = std::numbers::pi + gamma;
                        e.exterior = false;
                    }
                    e.diffraction_enabled = e.exterior && obj.diffraction;
                    obj.edges.push_back(e);
                }
            }
        }
    }

    if (obj.closed)
    {
        for (std::size_t i = 0; i < nf; ++i)
            for (std::size_t k = 0; k < shared[i].size(); ++k)
                if (shared[i][k] != 1)
                    throw SceneError(where + ": closed object is not a 2-manifold (face " +
                                     std::to_string(i) + ", side " + std::to_string(k) + ")");
    }
}

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_vec(const Vec3 &v)
{
    return fmt_double(v.x) + " " + fmt_double(v.y) + " " + fmt_double(v.z);
}

// ---- tokenizer -----------------------------------------------------------

struct Token
{
    std::string text;
    int line = 0;
    int column = 0;
};

std::vector<std::vector<Token>> tokenize(std::string_view text)
{
    std::vector<std::vector<Token>> lines;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        ++line_no;
        std::string_view line = text.substr(pos, eol - pos);
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        std::vector<Token> toks;
        std::size_t i = 0;
        while (i < line.size())
        {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
                ++i;
            const std::size_t start = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
                ++i;
            if (i > start)
                toks.push_back({std::string(line.substr(start, i - start)), line_no,
                                static_cast<int>(start) + 1});
        }
        if (!toks.empty())
            lines.push_back(std::move(toks));
        pos = eol + 1;
    }
    return lines;
}

class Statement
{
public:
    explicit Statement(const std::vector<Token> &toks) : toks_(toks) {}

    bool done() const { return i_ >= toks_.size(); }
    const Token &peek() const { return toks_[i_]; }

    const Token &next(const char *expecting)
    {
        if (done())
        {
            const Token &last = toks_.back();
            throw ParseError(last.line, last.column + static_cast<int>(last.text.size()),
                             std::string("expected ") + expecting);
        }
        return toks_[i_++];
    }

    std::string word(const char *expecting) { return next(expecting).text; }

    double number(const char *expecting)
    {
        const Token &t = next(expecting);
        errno = 0;
        char *end = nullptr;
        double v = std::strtod(t.text.c_str(), &end);
        if (end == t.text.c_str() || errno == ERANGE)
            throw ParseError(t.line, t.column, "expected " + std::string(expecting) + ", got '" +
                                                   t.text + "'");
        const std::string suffix(end);
        if (suffix == "kmh")
            v *= kmh;
        else if (suffix == "deg")
            v *= std::numbers::pi / 180.0;
        else if (!suffix.empty())
            throw ParseError(t.line, t.column, "unknown unit suffix '" + suffix + "'");
        if (!std::isfinite(v))
            throw ParseError(t.line, t.column, "non-finite number");
        return v;
    }

    Vec3 vec(const char *expecting)
    {
        const double x = number(expecting);
        const double y = number(expecting);
        const double z = number(expecting);
        return {x, y, z};
    }

    [[noreturn]] void fail(const Token &t, const std::string &what) const
    {
        throw ParseError(t.line, t.column, what);
    }

private:
    const std::vector<Token> &toks_;
    std::size_t i_ = 0;
};

} // namespace

// ---- construction ---------------------------------------------------------

Face make_face(std::vector<Vec3> vertices, int material, const std::string &where)
{
    if (vertices.size() < 3)
        throw SceneError(where + ": polygon needs at least 3 vertices, got " +
                         std::to_string(vertices.size()));
    Face f;
    f.vertices = std::move(vertices);
    f.material = material;
    const auto &v = f.vertices;
    const std::size_t n = v.size();

    for (std::size_t i = 0; i < n; ++i)
        if (same_point(v[i], v[(i + 1) % n]))
            throw SceneError(where + ": repeated vertex " + std::to_string(i));

    Vec3 nw; // Newell normal
    for (std::size_t i = 0; i < n; ++i)
    {
        const Vec3 &a = v[i];
        const Vec3 &b = v[(i + 1) % n];
        nw.x += (a.y - b.y) * (a.z + b.z);
        nw.y += (a.z - b.z) * (a.x + b.x);
        nw.z += (a.x - b.x) * (a.y + b.y);
    }
    if (norm(nw) <= 1e-12)
        throw SceneError(where + ": degenerate polygon (zero area)");
    f.normal = normalized(nw);
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(dot(f.normal, v[i] - v[0])) > geometric_epsilon)
            throw SceneError(where + ": vertices are not coplanar");

    Vec3 ex = v[1] - v[0];
    ex = normalized(ex - f.normal * dot(ex, f.normal));
    const Vec3 ez = cross(ex, f.normal);
    f.axes = Mat3::from_columns(ex, f.normal, ez);
    for (const auto &p : v)
        f.outline.push_back({dot(p - v[0], ex), dot(p - v[0], ez)});

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
        {
            if (j == i + 1 || (i == 0 && j == n - 1))
                continue;
            if (segments_intersect_2d(f.outline[i], f.outline[(i + 1) % n], f.outline[j],
                                      f.outline[(j + 1) % n]))
                throw SceneError(where + ": polygon is self-intersecting");
        }
    return f;
}

std::vector<Face> make_box(const Vec3 &lo, const Vec3 &hi, int material)
{
    const Vec3 c = (lo + hi) * 0.5;
    const Vec3 h = (hi - lo) * 0.5;
    const Vec3 e[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    std::vector<Face> faces;
    for (int axis = 0; axis < 3; ++axis)
        for (double sign : {-1.0, 1.0})
        {
            Vec3 a = e[(axis + 1) % 3] * h[(axis + 1) % 3];
            Vec3 b = e[(axis + 2) % 3] * h[(axis + 2) % 3];
            if (sign < 0)
                std::swap(a, b);
            const Vec3 fc = c + e[axis] * (sign * h[axis]);
            faces.push_back(make_face({fc - a - b, fc + a - b, fc + a + b, fc - a + b}, material,
                                      "box"));
        }
    return faces;
}

void finalize_scene(Scene &scene)
{
    std::set<std::string> names;
    for (const auto &m : scene.materials)
    {
        if (!names.insert(m.name).second)
            throw SceneError("duplicate material '" + m.name + "'");
        if (!(m.permittivity >= 1.0))
            throw SceneError("material '" + m.name + "': permittivity must be >= 1");
        if (!(m.conductivity >= 0.0))
            throw SceneError("material '" + m.name + "': conductivity must be >= 0");
        if (!(m.scattering >= 0.0 && m.scattering <= 1.0))
            throw SceneError("material '" + m.name + "': scattering must be in [0, 1]");
    }

    std::set<std::string> ids;
    for (auto &obj : scene.objects)
    {
        const std::string where = "object '" + obj.id + "'";
        if (!ids.insert(obj.id).second)
            throw SceneError("duplicate object id '" + obj.id + "'");
        if (obj.faces.empty())
            throw SceneError(where + ": no faces");
        for (std::size_t i = 0; i < obj.faces.size(); ++i)
        {
            auto &f = obj.faces[i];
            if (f.material < 0 || f.material >= static_cast<int>(scene.materials.size()))
                throw SceneError(where + " face " + std::to_string(i) + ": unknown material");
            f = make_face(f.vertices, f.material, where + " face " + std::to_string(i));
        }
        auto &m = obj.motion;
        if (!is_finite(m.translation_velocity) || !is_finite(m.translation_acceleration) ||
            !is_finite(m.rotation_center) || !std::isfinite(m.angular_speed) ||
            !std::isfinite(m.angular_acceleration))
            throw SceneError(where + ": non-finite motion");
        if (norm(m.rotation_axis) <= 0.0)
            throw SceneError(where + ": rotation axis must be non-zero");
        m.rotation_axis = normalized(m.rotation_axis);
        derive_edges(obj, where);
        obj.tiles.clear();
        for (std::size_t i = 0; i < obj.faces.size(); ++i)
            if (scene.materials[static_cast<std::size_t>(obj.faces[i].material)].scattering > 0.0)
            {
                auto t = tile_face(obj.faces[i], static_cast<int>(i));
                obj.tiles.insert(obj.tiles.end(), t.begin(), t.end());
            }
    }

    if (scene.tx.role != TerminalRole::transmitter || scene.rx.role != TerminalRole::receiver)
        throw SceneError("scene needs exactly one TX and one RX terminal");
    if (scene.tx.id.empty() || scene.rx.id.empty())
        throw SceneError("scene needs exactly one TX and one RX terminal");
    if (scene.tx.id == scene.rx.id)
        throw SceneError("duplicate terminal id '" + scene.tx.id + "'");
    for (const Terminal *t : {&scene.tx, &scene.rx})
    {
        if (!(t->frequency > 0.0))
            throw SceneError("terminal '" + t->id + "': frequency must be > 0");
        if (!(t->power > 0.0))
            throw SceneError("terminal '" + t->id + "': power must be > 0");
        if (!is_finite(t->kinematics.position) || !is_finite(t->kinematics.velocity) ||
            !is_finite(t->kinematics.acceleration))
            throw SceneError("terminal '" + t->id + "': non-finite kinematics");
        if (norm(t->antenna.orientation) <= 0.0)
            throw SceneError("terminal '" + t->id + "': antenna orientation must be non-zero");
    }
    scene.tx.antenna.orientation = normalized(scene.tx.antenna.orientation);
    scene.rx.antenna.orientation = normalized(scene.rx.antenna.orientation);
    scene.tx.kinematics.time = scene.t0;
    scene.rx.kinematics.time = scene.t0;
}

// ---- parsing --------------------------------------------------------------

Scene parse_scene(std::string_view text)
{
    Scene scene;
    enum class Section
    {
        header,
        geometry,
        dynamics
    } section = Section::header;

    struct PendingTerminal
    {
        Terminal terminal;
        bool seen_geometry = false;
    };
    std::vector<PendingTerminal> terminals;
    auto find_terminal = [&](const std::string &id) -> PendingTerminal * {
        for (auto &t : terminals)
            if (t.terminal.id == id)
                return &t;
        return nullptr;
    };

    SceneObject *open_object = nullptr;
    int open_object_line = 0;

    auto material_index = [&](Statement &st, const Token &tok) {
        for (std::size_t i = 0; i < scene.materials.size(); ++i)
            if (scene.materials[i].name == tok.text)
                return static_cast<int>(i);
        st.fail(tok, "unknown material '" + tok.text + "'");
    };

    for (const auto &toks : tokenize(text))
    {
        Statement st(toks);
        const Token &kw = st.next("keyword");

        if (kw.text == "GEOMETRY" || kw.text == "DYNAMICS")
        {
            if (open_object)
                st.fail(kw, "section change inside object (missing 'end')");
            section = kw.text == "GEOMETRY" ? Section::geometry : Section::dynamics;
        }
        else if (section == Section::header && kw.text == "scene")
            scene.name = st.word("scene name");
        else if (section == Section::header && kw.text == "time")
            scene.t0 = st.number("reference time");
        else if (section == Section::geometry && kw.text == "material")
        {
            Material m;
            m.name = st.word("material name");
            while (!st.done())
            {
                const Token &key = st.next("material property");
                if (key.text == "permittivity")
                    m.permittivity = st.number("permittivity");
                else if (key.text == "conductivity")
                    m.conductivity = st.number("conductivity");
                else if (key.text == "scattering")
                    m.scattering = st.number("scattering coefficient");
                else if (key.text == "pec")
                    m.perfect_conductor = true;
                else
                    st.fail(key, "unknown material property '" + key.text + "'");
            }
            scene.materials.push_back(m);
        }
        else if (section == Section::geometry && kw.text == "object")
        {
            if (open_object)
                st.fail(kw, "nested object (missing 'end')");
            SceneObject obj;
            obj.id = st.word("object id");
            const Token &kind = st.next("'open' or 'closed'");
            if (kind.text == "open")
                obj.closed = false;
            else if (kind.text == "closed")
                obj.closed = true;
            else
                st.fail(kind, "expected 'open' or 'closed'");
            while (!st.done())
            {
                const Token &opt = st.next("object option");
                if (opt.text == "nodiffraction")
                    obj.diffraction = false;
                else
                    st.fail(opt, "unknown object option '" + opt.text + "'");
            }
            scene.objects.push_back(std::move(obj));
            open_object = &scene.objects.back();
            open_object_line = kw.line;
        }
        else if (section == Section::geometry && (kw.text == "face" || kw.text == "box"))
        {
            if (!open_object)
                st.fail(kw, "'" + kw.text + "' outside an object");
            const Token &mtok = st.next("material name");
            const int mat = material_index(st, mtok);
            if (kw.text == "box")
            {
                const Vec3 lo = st.vec("box corner");
                const Vec3 hi = st.vec("box corner");
                if (!(hi.x > lo.x && hi.y > lo.y && hi.z > lo.z))
                    st.fail(kw, "box needs max > min on every axis");
                for (auto &f : make_box(lo, hi, mat))
                    open_object->faces.push_back(std::move(f));
            }
            else
            {
                std::vector<Vec3> verts;
                while (!st.done())
                    verts.push_back(st.vec("vertex coordinate"));
                Face f;
                f.vertices = std::move(verts);
                f.material = mat;
                const std::string where = "object '" + open_object->id + "' face " +
                                          std::to_string(open_object->faces.size()) + " (line " +
                                          std::to_string(kw.line) + ")";
                open_object->faces.push_back(make_face(f.vertices, mat, where));
            }
        }
        else if (section == Section::geometry && kw.text == "end")
        {
            if (!open_object)
                st.fail(kw, "'end' without object");
            open_object = nullptr;
        }
        else if (kw.text == "terminal" && section != Section::header)
        {
            const std::string id = st.word("terminal id");
            PendingTerminal *pt = find_terminal(id);
            if (section == Section::geometry)
            {
                if (pt)
                    st.fail(kw, "duplicate terminal id '" + id + "'");
                terminals.push_back({});
                pt = &terminals.back();
                pt->terminal.id = id;
                pt->seen_geometry = true;
                const Token &role = st.next("'tx' or 'rx'");
                if (role.text == "tx")
                    pt->terminal.role = TerminalRole::transmitter;
                else if (role.text == "rx")
                    pt->terminal.role = TerminalRole::receiver;
                else
                    st.fail(role, "expected 'tx' or 'rx'");
                while (!st.done())
                {
                    const Token &key = st.next("terminal property");
                    if (key.text == "position")
                        pt->terminal.kinematics.position = st.vec("position");
                    else if (key.text == "frequency")
                        pt->terminal.frequency = st.number("frequency");
                    else if (key.text == "power")
                        pt->terminal.power = st.number("power");
                    else if (key.text == "orientation")
                        pt->terminal.antenna.orientation = st.vec("orientation");
                    else if (key.text == "antenna")
                    {
                        const Token &a = st.next("antenna kind");
                        if (a.text == "isotropic")
                            pt->terminal.antenna.kind = AntennaKind::isotropic;
                        else if (a.text == "dipole")
                            pt->terminal.antenna.kind = AntennaKind::half_wave_dipole;
                        else
                            st.fail(a, "unknown antenna '" + a.text + "'");
                    }
                    else
                        st.fail(key, "unknown terminal property '" + key.text + "'");
                }
            }
            else
            {
                if (!pt)
                    st.fail(kw, "terminal '" + id + "' not declared in GEOMETRY");
                while (!st.done())
                {
                    const Token &key = st.next("terminal dynamics");
                    if (key.text == "velocity")
                        pt->terminal.kinematics.velocity = st.vec("velocity");
                    else if (key.text == "acceleration")
                        pt->terminal.kinematics.acceleration = st.vec("acceleration");
                    else
                        st.fail(key, "unknown terminal dynamics '" + key.text + "'");
                }
            }
        }
        else if (section == Section::dynamics && kw.text == "motion")
        {
            const Token &idt = st.next("object id");
            const int oi = scene.find_object(idt.text);
            if (oi < 0)
                st.fail(idt, "unknown object '" + idt.text + "'");
            auto &m = scene.objects[static_cast<std::size_t>(oi)].motion;
            while (!st.done())
            {
                const Token &key = st.next("motion property");
                if (key.text == "velocity")
                    m.translation_velocity = st.vec("velocity");
                else if (key.text == "acceleration")
                    m.translation_acceleration = st.vec("acceleration");
                else if (key.text == "center")
                    m.rotation_center = st.vec("rotation center");
                else if (key.text == "axis")
                {
                    const Vec3 a = st.vec("rotation axis");
                    if (norm(a) <= 0.0)
                        st.fail(key, "rotation axis must be non-zero");
                    m.rotation_axis = normalized(a);
                }
                else if (key.text == "omega")
                    m.angular_speed = st.number("angular speed");
                else if (key.text == "omega_dot")
                    m.angular_acceleration = st.number("angular acceleration");
                else
                    st.fail(key, "unknown motion property '" + key.text + "'");
            }
        }
        else
        {
            st.fail(kw, "unexpected '" + kw.text + "'");
        }
        if (!st.done())
            st.fail(st.peek(), "trailing token '" + st.peek().text + "'");
    }
    if (open_object)
        throw ParseError(open_object_line, 1, "object '" + open_object->id + "' missing 'end'");

    int ntx = 0, nrx = 0;
    for (const auto &pt : terminals)
    {
        if (pt.terminal.role == TerminalRole::transmitter)
        {
            scene.tx = pt.terminal;
            ++ntx;
        }
        else
        {
            scene.rx = pt.terminal;
            ++nrx;
        }
    }
    if (ntx != 1 || nrx != 1)
        throw SceneError("scene needs exactly one TX and one RX terminal (found " +
                         std::to_string(ntx) + " TX, " + std::to_string(nrx) + " RX)");
    finalize_scene(scene);
    return scene;
}

Scene load_scene_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("scene not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str());
}

std::string serialize_scene(const Scene &scene)
{
    std::ostringstream out;
    out << "scene " << scene.name << "\n";
    out << "time " << fmt_double(scene.t0) << "\n";
    out << "GEOMETRY\n";
    for (const auto &m : scene.materials)
    {
        out << "material " << m.name;
        if (m.perfect_conductor)
            out << " pec";
        else
            out << " permittivity " << fmt_double(m.permittivity) << " conductivity "
                << fmt_double(m.conductivity);
        out << " scattering " << fmt_double(m.scattering) << "\n";
    }
    for (const auto &o : scene.objects)
    {
        out << "object " << o.id << (o.closed ? " closed" : " open")
            << (o.diffraction ? "" : " nodiffraction") << "\n";
        for (const auto &f : o.faces)
        {
            out << "  face " << scene.materials[static_cast<std::size_t>(f.material)].name;
            for (const auto &v : f.vertices)
                out << "  " << fmt_vec(v);
            out << "\n";
        }
        out << "end\n";
    }
    for (const Terminal *t : {&scene.tx, &scene.rx})
    {
        out << "terminal " << t->id << (t->role == TerminalRole::transmitter ? " tx" : " rx")
            << " position " << fmt_vec(t->kinematics.position) << " frequency "
            << fmt_double(t->frequency) << " power " << fmt_double(t->power) << " antenna "
            << (t->antenna.kind == AntennaKind::isotropic ? "isotropic" : "dipole")
            << " orientation " << fmt_vec(t->antenna.orientation) << "\n";
    }
    out << "DYNAMICS\n";
    for (const auto &o : scene.objects)
    {
        const auto &m = o.motion;
        out << "motion " << o.id << " velocity " << fmt_vec(m.translation_velocity)
            << " acceleration " << fmt_vec(m.translation_acceleration) << " center "
            << fmt_vec(m.rotation_center) << " axis " << fmt_vec(m.rotation_axis) << " omega "
            << fmt_double(m.angular_speed) << " omega_dot " << fmt_double(m.angular_acceleration)
            << "\n";
    }
    for (const Terminal *t : {&scene.tx, &scene.rx})
        out << "terminal " << t->id << " velocity " << fmt_vec(t->kinematics.velocity)
            << " acceleration " << fmt_vec(t->kinematics.acceleration) << "\n";
    return out.str();
}

// ---- posing ---------------------------------------------------------------

bool PosedFace::contains(const Vec3 &p, double tol) const
{
    const Vec3 d = p - origin;
    const Point2 q{dot(d, axes.column(0)), dot(d, axes.column(2))};
    return polygon_contains(face->outline, q, tol);
}

double PosedEdge::azimuth(const Vec3 &p) const
{
    Vec3 u = p - start;
    u -= direction * dot(u, direction);
    double a = std::atan2(dot(u, normal_a), dot(u, tangent_a));
    if (a < 0)
        a += 2.0 * std::numbers::pi;
    return a;
}

BodyState body_state(const Scene &scene, int object, double t)
{
    return BodyState(scene.objects[static_cast<std::size_t>(object)].motion, scene.t0, t);
}

KinematicState terminal_state(const Scene &scene, const Terminal &terminal, double t)
{
    return advance(terminal.kinematics, t - scene.t0);
}

namespace {

// Fills pf in place so re-posing reuses its vertex storage.
void pose_face(PosedFace &pf, const Scene &scene, const BodyState &body, int object, int index)
{
    const Face &f = scene.objects[static_cast<std::size_t>(object)].faces[static_cast<std::size_t>(index)];
    pf.object = object;
    pf.index = index;
    pf.face = &f;
    pf.material = &scene.materials[static_cast<std::size_t>(f.material)];
    pf.axes = body.rotation() * f.axes;
    pf.normal = pf.axes.column(1);
    pf.vertices.clear();
    for (const auto &v : f.vertices)
        pf.vertices.push_back(body.map_point(v));
    pf.origin = pf.vertices[0];
    pf.offset = dot(pf.normal, pf.origin);
    pf.box_lo = pf.box_hi = pf.origin;
    for (const auto &v : pf.vertices)
        for (int k = 0; k < 3; ++k)
        {
            pf.box_lo[k] = std::min(pf.box_lo[k], v[k]);
            pf.box_hi[k] = std::max(pf.box_hi[k], v[k]);
        }
}

PosedFace pose_face(const Scene &scene, const BodyState &body, int object, int index)
{
    PosedFace pf;
    pose_face(pf, scene, body, object, index);
    return pf;
}

PosedEdge pose_edge(const Scene &scene, const BodyState &body, int object, int index,
                    const std::vector<PosedFace> &faces, int face_base)
{
    const Edge &e = scene.objects[static_cast<std::size_t>(object)].edges[static_cast<std::size_t>(index)];
    PosedEdge pe;
    pe.object = object;
    pe.index = index;
    pe.edge = &e;
    pe.start = body.map_point(e.start);
    pe.end = body.map_point(e.end);
    pe.length = norm(pe.end - pe.start);
    pe.direction = (pe.end - pe.start) / pe.length;
    pe.face_a = face_base + e.face_a;
    pe.face_b = face_base + e.face_b;
    const PosedFace &fa = faces[static_cast<std::size_t>(pe.face_a)];
    const PosedFace &fb = faces[static_cast<std::size_t>(pe.face_b)];
    pe.normal_a = fa.normal;
    pe.normal_b = fb.normal;
    pe.tangent_a = normalized(cross(pe.normal_a, pe.direction));
    // Orient the in-face tangents so they point into their faces.
    auto into_face = [&](const PosedFace &f, Vec3 t) {
        double best = 0.0;
        for (const auto &v : f.vertices)
        {
            const double d = dot(v - pe.start, t);
            if (std::abs(d) > std::abs(best))
                best = d;
        }
        return best < 0 ? -t : t;
    };
    pe.tangent_a = into_face(fa, pe.tangent_a);
    pe.tangent_b = into_face(fb, normalized(cross(pe.normal_b, pe.direction)));
    pe.wedge_n = (2.0 * std::numbers::pi - e.wedge_angle) / std::numbers::pi;
    pe.enabled = e.diffraction_enabled;
    return pe;
}

} // namespace

SceneSnapshot make_snapshot(const Scene &scene, double t, bool with_tiles)
{
    SceneSnapshot s;
    s.time = t;
    s.scene = &scene;
    s.tx = terminal_state(scene, scene.tx, t);
    s.rx = terminal_state(scene, scene.rx, t);
    for (std::size_t o = 0; o < scene.objects.size(); ++o)
    {
        const auto &obj = scene.objects[o];
        const int oi = static_cast<int>(o);
        const BodyState body = body_state(scene, oi, t);
        const int face_base = static_cast<int>(s.faces.size());
        s.face_offset.push_back(face_base);
        for (std::size_t f = 0; f < obj.faces.size(); ++f)
            s.faces.push_back(pose_face(scene, body, oi, static_cast<int>(f)));
        s.edge_offset.push_back(static_cast<int>(s.edges.size()));
        for (std::size_t e = 0; e < obj.edges.size(); ++e)
            s.edges.push_back(pose_edge(scene, body, oi, static_cast<int>(e), s.faces, face_base));
        s.tile_offset.push_back(static_cast<int>(s.tiles.size()));
        if (with_tiles)
            for (std::size_t k = 0; k < obj.tiles.size(); ++k)
            {
                const Tile &tile = obj.tiles[k];
                PosedTile pt;
                pt.object = oi;
                pt.face = tile.face;
                pt.index = static_cast<int>(k);
                pt.face_global = face_base + tile.face;
                pt.centroid = body.map_point(tile.centroid);
                pt.normal = s.faces[static_cast<std::size_t>(pt.face_global)].normal;
                pt.area = tile.area;
                s.tiles.push_back(pt);
            }
    }
    return s;
}

void repose_snapshot(SceneSnapshot &s, double t)
{
    const Scene &scene = *s.scene;
    s.time = t;
    s.tx = terminal_state(scene, scene.tx, t);
    s.rx = terminal_state(scene, scene.rx, t);
    for (std::size_t o = 0; o < scene.objects.size(); ++o)
    {
        const auto &obj = scene.objects[o];
        if (obj.motion.is_static())
            continue;
        const int oi = static_cast<int>(o);
        const BodyState body = body_state(scene, oi, t);
        const int face_base = s.face_offset[o];
        for (std::size_t f = 0; f < obj.faces.size(); ++f)
            pose_face(s.faces[static_cast<std::size_t>(face_base) + f], scene, body, oi,
                      static_cast<int>(f));
        for (std::size_t e = 0; e < obj.edges.size(); ++e)
            s.edges[static_cast<std::size_t>(s.edge_offset[o]) + e] =
                pose_edge(scene, body, oi, static_cast<int>(e), s.faces, face_base);
        const std::size_t tile_end =
            o + 1 < scene.objects.size() ? static_cast<std::size_t>(s.tile_offset[o + 1]) : s.tiles.size();
        for (std::size_t k = static_cast<std::size_t>(s.tile_offset[o]); k < tile_end; ++k)
        {
            PosedTile &pt = s.tiles[k];
            pt.centroid = body.map_point(obj.tiles[static_cast<std::size_t>(pt.index)].centroid);
            pt.normal = s.faces[static_cast<std::size_t>(pt.face_global)].normal;
        }
    }
}

PosedObject pose_at(const Scene &scene, std::string_view object_id, double t)
{
    const int oi = scene.find_object(object_id);
    if (oi < 0)
        throw SceneError("unknown object '" + std::string(object_id) + "'");
    const auto &obj = scene.objects[static_cast<std::size_t>(oi)];
    const BodyState body = body_state(scene, oi, t);
    PosedObject po;
    for (std::size_t f = 0; f < obj.faces.size(); ++f)
        po.faces.push_back(pose_face(scene, body, oi, static_cast<int>(f)));
    for (std::size_t e = 0; e < obj.edges.size(); ++e)
        po.edges.push_back(pose_edge(scene, body, oi, static_cast<int>(e), po.faces, 0));
    return po;
}

} // namespace drt
