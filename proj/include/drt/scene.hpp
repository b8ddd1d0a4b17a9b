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

// Dynamic environment database: polyhedral objects with materials and
// rigid-body motion, plus the two radio terminals. The file format is
// documented in docs/scene-format.md.

#include "drt/geometry.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace drt {

/// Absolute tolerance for coplanarity and on-primitive tests (m).
inline constexpr double geometric_epsilon = 1e-9;

/// Largest tile edge used for diffuse scattering (m).
inline constexpr double max_tile_size = 5.0;

class ParseError : public std::runtime_error
{
public:
    ParseError(int line, int column, const std::string &what);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class SceneError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Material
{
    std::string name;
    double permittivity = 1.0; // relative, >= 1
    double conductivity = 0.0; // S/m
    double scattering = 0.0;   // effective-roughness S in [0, 1]
    bool perfect_conductor = false;

    bool operator==(const Material &) const = default;
};

using Point2 = std::array<double, 2>;

struct Face
{
    std::vector<Vec3> vertices; // at t0, counter-clockwise seen from the front
    Vec3 normal;                // outward unit normal at t0
    int material = 0;           // index into Scene::materials
    // Derived: local axes at t0 (x in-plane, y = normal, z = x cross y) and the
    // polygon in (x, z) coordinates relative to vertices[0].
    Mat3 axes;
    std::vector<Point2> outline;

    bool operator==(const Face &) const = default;
};

struct Edge
{
    Vec3 start; // at t0
    Vec3 end;
    int face_a = -1; // reference ("0") face of the wedge
    int face_b = -1;
    double wedge_angle = 0.0; // interior angle, rad
    bool exterior = false;    // convex wedge
    bool diffraction_enabled = false;

    Vec3 direction() const { return normalized(end - start); }
    bool operator==(const Edge &) const = default;
};

struct Tile
{
    int face = -1;
    Vec3 centroid; // at t0
    double area = 0.0;

    bool operator==(const Tile &) const = default;
};

struct SceneObject
{
    std::string id;
    bool closed = false;
    bool diffraction = true; // allow edge diffraction on this object's exterior wedges
    std::vector<Face> faces;
    std::vector<Edge> edges;
    std::vector<Tile> tiles;
    RigidMotion motion;

    bool operator==(const SceneObject &) const = default;
};

enum class AntennaKind
{
    isotropic,
    half_wave_dipole
};

struct Antenna
{
    AntennaKind kind = AntennaKind::isotropic;
    Vec3 orientation{0.0, 0.0, 1.0}; // dipole axis; polarisation reference for isotropic

    bool operator==(const Antenna &) const = default;
};

enum class TerminalRole
{
    transmitter,
    receiver
};

struct Terminal
{
    std::string id;
    TerminalRole role = TerminalRole::transmitter;
    KinematicState kinematics; // at t0
    Antenna antenna;
    double frequency = 3e9; // Hz
    double power = 1.0;     // W (transmitter only)

    bool operator==(const Terminal &) const = default;
};

struct Scene
{
    std::string name = "scene";
    double t0 = 0.0;
    std::vector<Material> materials;
    std::vector<SceneObject> objects;
    Terminal tx;
    Terminal rx;

    int find_object(std::string_view id) const; // -1 if absent
    bool operator==(const Scene &) const = default;
};

/// Parses and validates the text form. Throws ParseError or SceneError.
Scene parse_scene(std::string_view text);

/// Reads a scene file; throws std::runtime_error("scene not found: ...") when missing.
Scene load_scene_file(const std::string &path);

/// Canonical text form; parse_scene(serialize_scene(s)) == s.
std::string serialize_scene(const Scene &scene);

/// Fills derived data (normals, axes, outlines, edges, tiles) and checks every
/// invariant. parse_scene calls this; programmatic builders must too.
void finalize_scene(Scene &scene);

/// Face with its t0 outline from raw vertices; throws SceneError on invalid polygons.
Face make_face(std::vector<Vec3> vertices, int material, const std::string &where);

/// Six outward-facing faces of an axis-aligned box.
std::vector<Face> make_box(const Vec3 &lo, const Vec3 &hi, int material);

// ------------------------------------------------------------------------
// Posed geometry at a given time.

struct PosedFace
{
    int object = -1;
    int index = -1;
    Vec3 origin; // vertex 0
    Mat3 axes;   // columns: in-plane x, normal, in-plane z
    Vec3 normal;
    double offset = 0.0; // plane: dot(normal, p) = offset
    std::vector<Vec3> vertices;
    Vec3 box_lo, box_hi;
    const Face *face = nullptr;
    const Material *material = nullptr;

    double signed_distance(const Vec3 &p) const { return dot(normal, p) - offset; }
    /// True when p (assumed on the plane) lies inside the polygon or within tol of it.
    bool contains(const Vec3 &p, double tol = geometric_epsilon) const;
};

struct PosedEdge
{
    int object = -1;
    int index = -1;
    Vec3 start, end, direction;
    double length = 0.0;
    int face_a = -1; // indices into SceneSnapshot::faces
    int face_b = -1;
    Vec3 tangent_a; // in face a, perpendicular to the edge, pointing into the face
    Vec3 normal_a;
    Vec3 tangent_b;
    Vec3 normal_b;
    double wedge_n = 2.0; // exterior angle / pi
    bool enabled = false;
    const Edge *edge = nullptr;

    /// Angle in [0, 2pi) of the direction from the edge to p, measured from face a
    /// towards its outward normal in the plane perpendicular to the edge.
    double azimuth(const Vec3 &p) const;
};

struct PosedTile
{
    int object = -1;
    int face = -1;  // face index within the object
    int index = -1; // tile index within the object
    int face_global = -1;
    Vec3 centroid;
    Vec3 normal;
    double area = 0.0;
};

/// Entire scene posed at absolute time t.
struct SceneSnapshot
{
    double time = 0.0;
    const Scene *scene = nullptr;
    std::vector<PosedFace> faces;
    std::vector<PosedEdge> edges;
    std::vector<PosedTile> tiles;
    std::vector<int> face_offset; // first snapshot face of each object
    std::vector<int> edge_offset;
    std::vector<int> tile_offset;
    KinematicState tx;
    KinematicState rx;

    int face_id(int object, int face) const { return face_offset[static_cast<std::size_t>(object)] + face; }
    int edge_id(int object, int edge) const { return edge_offset[static_cast<std::size_t>(object)] + edge; }
    int tile_id(int object, int tile) const { return tile_offset[static_cast<std::size_t>(object)] + tile; }
};

SceneSnapshot make_snapshot(const Scene &scene, double t, bool with_tiles = true);

/// Moves a snapshot made by make_snapshot to time t. Only moving objects are
/// re-posed; the result equals make_snapshot(scene, t) with the same tile choice.
void repose_snapshot(SceneSnapshot &snapshot, double t);

/// Pose of one object at time t. Throws SceneError for an unknown id.
struct PosedObject
{
    std::vector<PosedFace> faces;
    std::vector<PosedEdge> edges;
};
PosedObject pose_at(const Scene &scene, std::string_view object_id, double t);

/// Body state of an object at absolute time t.
BodyState body_state(const Scene &scene, int object, double t);

/// Terminal kinematics at absolute time t.
KinematicState terminal_state(const Scene &scene, const Terminal &terminal, double t);

/// Unit-speed conversions accepted by the scene format.
inline constexpr double kmh = 1.0 / 3.6;

} // namespace drt
