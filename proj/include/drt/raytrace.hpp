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

// Image-method snapshot ray tracer and path validation.

#include "drt/scene.hpp"

#include <optional>
#include <string>
#include <vector>

namespace drt {

enum class InteractionKind
{
    reflection,
    diffraction,
    scatter
};

struct Interaction
{
    InteractionKind kind = InteractionKind::reflection;
    int object = -1;
    int primitive = -1; // face, edge or tile index within the object
    Vec3 point;

    /// "R:obj:face", "D:obj:edge" or "S:obj:tile" with object and primitive indices.
    std::string id() const;
};

struct RayPath
{
    std::vector<Interaction> interactions;
    /// TX, each interaction point, RX. Velocities and accelerations are zero
    /// until filled by path_kinematics.
    std::vector<KinematicState> vertices;
    double time = 0.0;
    double length = 0.0;
    double delay = 0.0;
    bool expired = false;
    std::string expiry_reason;

    bool is_los() const { return interactions.empty(); }
    /// "LOS" or interaction ids joined by '>'. Identifies the path topology.
    std::string key() const;
    int count(InteractionKind kind) const;
};

struct TraceConfig
{
    int max_reflections = 2;
    bool diffraction = false;
    bool scattering = false;
};

/// Hard caps on the interaction budget.
inline constexpr int max_reflections_cap = 2;

inline constexpr double speed_of_light = 299792458.0;

/// Mirror image of p across the plane of a face.
Vec3 mirror_point(const Vec3 &p, const PosedFace &face);
Vec3 mirror_point(const Vec3 &p, const Vec3 &plane_normal, double plane_offset);

/// All valid, unobstructed paths between TX and RX at the snapshot time,
/// sorted by delay then by key.
std::vector<RayPath> trace_snapshot(const SceneSnapshot &snapshot, const TraceConfig &config);
std::vector<RayPath> trace_snapshot(const Scene &scene, double t, const TraceConfig &config);

/// Interaction topologies admitted by the budget, ignoring geometry.
std::vector<std::vector<Interaction>> enumerate_topologies(const SceneSnapshot &snapshot,
                                                           const TraceConfig &config);

/// Interaction points of a topology at the snapshot time by the image method,
/// or nullopt when the image construction degenerates.
std::optional<std::vector<Vec3>> solve_points(const SceneSnapshot &snapshot,
                                              const std::vector<Interaction> &topology);

struct PathCheck
{
    bool valid = true;
    std::string reason;

    explicit operator bool() const { return valid; }
};

/// Checks that every interaction point lies on its primitive, that the
/// neighbouring vertices see the primitive from its illuminated side and that
/// every segment is unobstructed at the snapshot time.
PathCheck validate_path(const RayPath &path, const SceneSnapshot &snapshot);
PathCheck validate_path(const RayPath &path, const Scene &scene, double t);

/// First face (snapshot index) crossed by the open segment a-b, skipping the
/// listed faces; -1 when clear.
int obstruction(const SceneSnapshot &snapshot, const Vec3 &a, const Vec3 &b,
                const std::vector<int> &skip_faces);

/// Snapshot faces that a segment touching this interaction must not be tested against.
std::vector<int> faces_of(const SceneSnapshot &snapshot, const Interaction &interaction);

/// Sets length and delay from the vertex positions.
void update_length(RayPath &path);

} // namespace drt
