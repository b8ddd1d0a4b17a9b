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

// Closed-form position, velocity and acceleration of interaction points.
//
// Each moving wall or edge is handled in a frame riding on it, where the
// primitive is at rest: terminals are mapped in with the relative-motion
// transforms, the static formulas are applied, and the result is mapped back.
//
// Wall frame: the wall is the plane y = 0 and the illuminated side is y > 0.
// Edge frame: the edge is the z axis.

#include "drt/raytrace.hpp"

#include <stdexcept>
#include <vector>

namespace drt {

/// Vanishing denominator (terminal on the wall plane or on the edge line).
class DegenerateGeometry : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Threshold for the degenerate denominators, m.
inline constexpr double degeneracy_epsilon = 1e-9;

// ---- wall frame, static wall ---------------------------------------------

Vec3 reflection_point_local(const Vec3 &tx, const Vec3 &rx);
Vec3 reflection_point_velocity(const Vec3 &tx, const Vec3 &rx, const Vec3 &v_tx, const Vec3 &v_rx);
Vec3 reflection_point_acceleration(const Vec3 &tx, const Vec3 &rx, const Vec3 &v_tx,
                                   const Vec3 &v_rx, const Vec3 &a_tx, const Vec3 &a_rx);
/// All three at once; the y components are exactly zero.
KinematicState reflection_point_kinematics_local(const KinematicState &tx, const KinematicState &rx);

// ---- edge frame, static edge ------------------------------------------------

/// Point on the z axis with equal incidence and diffraction cone angles.
KinematicState diffraction_point_kinematics_local(const KinematicState &tx,
                                                  const KinematicState &rx);

// ---- moving primitives --------------------------------------------------------

KinematicState reflection_point_kinematics_global(const MovingFrame &wall, const KinematicState &tx,
                                                  const KinematicState &rx);

/// Mirror image of a source across a moving wall, with its velocity and acceleration.
KinematicState image_source_kinematics(const KinematicState &source, const MovingFrame &wall);

KinematicState diffraction_point_kinematics(const MovingFrame &edge, const KinematicState &tx,
                                            const KinematicState &rx);

/// Rigid-body kinematics of a tile centroid given at t0.
KinematicState scatter_point_kinematics(const BodyState &body, const Vec3 &centroid0);

/// Wall frame of a face at time t.
MovingFrame face_frame(const Scene &scene, int object, int face, double t);

/// Edge frame at time t: origin at the edge start, x into face a, y along the
/// outward normal of face a, z along the edge.
MovingFrame edge_frame(const Scene &scene, int object, int edge, double t);

/// Kinematics of every vertex (TX, interaction points, RX) of a path topology at
/// absolute time t. Throws DegenerateGeometry.
std::vector<KinematicState> path_kinematics(const Scene &scene,
                                            const std::vector<Interaction> &topology, double t);

/// Fills vertices, interaction points, length and delay of a path at time t.
/// Returns false (and marks the path expired) on degenerate geometry.
bool fill_path_kinematics(RayPath &path, const Scene &scene, double t);

/// Paths of a trace at time t0 prolonged to t0 + dt. Every point is recomputed
/// in closed form; paths that are no longer valid are flagged, never dropped.
std::vector<RayPath> extrapolate_paths(const std::vector<RayPath> &paths, const Scene &scene,
                                       double dt);

/// Same, against an already posed snapshot at the target time.
std::vector<RayPath> extrapolate_paths(const std::vector<RayPath> &paths, const Scene &scene,
                                       const SceneSnapshot &snapshot);

} // namespace drt
