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

// Ray fields: spreading, Fresnel reflection, UTD wedge diffraction, effective
// roughness scattering and antenna weighting. Time convention exp(+jwt), so a
// travelling wave carries exp(-jks). Fields are rms.

#include "drt/raytrace.hpp"

#include <complex>
#include <stdexcept>

namespace drt {

using Complex = std::complex<double>;

inline constexpr double vacuum_permittivity = 8.8541878128e-12;
inline constexpr double free_space_impedance = 120.0 * std::numbers::pi;
inline constexpr double dipole_peak_gain = 1.6409224;

struct CVec3
{
    Complex x, y, z;

    CVec3 operator+(const CVec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    CVec3 operator-(const CVec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    CVec3 operator*(Complex s) const { return {x * s, y * s, z * s}; }
    double norm2() const { return std::norm(x) + std::norm(y) + std::norm(z); }
};

inline CVec3 operator*(const Vec3 &v, Complex s) { return {v.x * s, v.y * s, v.z * s}; }
/// Bilinear (unconjugated) projection onto a real direction.
inline Complex dot(const CVec3 &e, const Vec3 &v) { return e.x * v.x + e.y * v.y + e.z * v.z; }

/// Relative permittivity with the conduction term, er - j sigma / (w e0).
Complex complex_permittivity(const Material &material, double frequency);

struct FresnelCoefficients
{
    Complex te; // E perpendicular to the plane of incidence
    Complex tm; // E in the plane of incidence
};

/// Half-space reflection coefficients at incidence angle theta (from the
/// normal). Sign convention: a perfect conductor gives te = -1, tm = +1.
FresnelCoefficients fresnel_coefficients(double theta, const Material &material, double frequency);

struct FresnelIntegrals
{
    double c, s;
};

/// C(x) and S(x) with the pi t^2 / 2 kernel.
FresnelIntegrals fresnel_integrals(double x);

/// UTD transition function 2j sqrt(X) exp(jX) int_{sqrt X}^inf exp(-j t^2) dt.
Complex utd_transition(double x);

struct WedgeGeometry
{
    double n = 2.0;              // exterior wedge angle / pi
    double phi_incident = 0.0;   // from face a, rad
    double phi_diffracted = 0.0; // from face a, rad
    double beta0 = std::numbers::pi / 2; // angle between incident ray and edge
    double distance_incident = 1.0;      // s', m
    double distance_diffracted = 1.0;    // s, m
};

struct UtdCoefficients
{
    Complex soft; // E parallel to the edge-fixed beta direction
    Complex hard;
};

/// Wedge diffraction coefficients with face reflection coefficients of the
/// two wedge faces (perfect conductor when a material pointer is null).
UtdCoefficients utd_coefficient(const WedgeGeometry &wedge, double frequency,
                                const Material *face_a = nullptr,
                                const Material *face_b = nullptr);

/// Effective roughness Lambertian scattering: |Es|^2 / |Ei|^2 at distance r.
double er_scatter_field(double scattering, double area, double cos_incident, double cos_scattered,
                        double distance);

/// Antenna gain (linear) towards a unit direction.
double antenna_gain(const Antenna &antenna, const Vec3 &direction);

/// Unit polarisation of the field radiated towards a unit direction.
Vec3 antenna_polarization(const Antenna &antenna, const Vec3 &direction);

struct RayField
{
    CVec3 field;           // at RX, V/m
    Complex amplitude;     // |amplitude|^2 = power
    double power = 0.0;    // W
    double length = 0.0;   // m
    double delay = 0.0;    // s
    double divergence = 0.0; // cumulative spreading factor, 1/m for a point source
};

class InvalidPath : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Field of a path whose vertices are posed at the snapshot time.
RayField path_field(const RayPath &path, const SceneSnapshot &snapshot);

/// Validates first; throws InvalidPath with the reason when the path is invalid at t.
RayField path_field(const RayPath &path, const Scene &scene, double t);

double watts_to_dbm(double watts);

} // namespace drt
