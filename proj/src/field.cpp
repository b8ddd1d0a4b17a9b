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

#include "drt/field.hpp"

#include <algorithm>

namespace drt {

namespace {

constexpr double pi = std::numbers::pi;
constexpr Complex j{0.0, 1.0};

} // namespace

Complex complex_permittivity(const Material &material, double frequency)
{
    return {material.permittivity,
            -material.conductivity / (2.0 * pi * frequency * vacuum_permittivity)};
}

FresnelCoefficients fresnel_coefficients(double theta, const Material &material, double frequency)
{
    if (material.perfect_conductor)
        return {-1.0, 1.0};
    const Complex eps = complex_permittivity(material, frequency);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Complex root = std::sqrt(eps - s * s);
    return {(c - root) / (c + root), (eps * c - root) / (eps * c + root)};
}

FresnelIntegrals fresnel_integrals(double x)
{
    constexpr double eps = 1e-16;
    constexpr int max_iter = 200;
    constexpr double tiny = 1e-300;
    constexpr double series_limit = 1.5;
    const double ax = std::abs(x);
    double c = 0.0, s = 0.0;
    if (ax < std::sqrt(tiny))
    {
        c = ax;
    }
    else if (ax <= series_limit)
    {
        double sum = 0.0, sums = 0.0, sumc = ax;
        double sign = 1.0;
        const double fact = pi / 2.0 * ax * ax;
        bool odd = true;
        double term = ax;
        double n = 3.0;
        for (int k = 1; k <= max_iter; ++k)
        {
            term *= fact / k;
            sum += sign * term / n;
            const double test = std::abs(sum) * eps;
            if (odd)
            {
                sign = -sign;
                sums = sum;
                sum = sumc;
            }
            else
            {
                sumc = sum;
                sum = sums;
            }
            if (term < test)
                break;
            odd = !odd;
            n += 2.0;
        }
        s = sums;
        c = sumc;
    }
    else
    {
        // Continued fraction for the complementary error function (modified Lentz).
        const double pix2 = pi * ax * ax;
        Complex b{1.0, -pix2};
        Complex cc = 1.0 / tiny;
        Complex d = 1.0 / b;
        Complex h = d;
        double n = -1.0;
        for (int k = 2; k <= max_iter; ++k)
        {
            n += 2.0;
            const double a = -n * (n + 1.0);
            b += 4.0;
            d = 1.0 / (a * d + b);
            cc = b + a / cc;
            const Complex del = cc * d;
            h *= del;
            if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps)
                break;
        }
        h *= Complex{ax, -ax};
        const Complex cs =
            Complex{0.5, 0.5} * (1.0 - Complex{std::cos(0.5 * pix2), std::sin(0.5 * pix2)} * h);
        c = cs.real();
        s = cs.imag();
    }
    if (x < 0)
    {
        c = -c;
        s = -s;
    }
    return {c, s};
}

Complex utd_transition(double x)
{
    if (x <= 0.0)
        return 0.0;
    const double sx = std::sqrt(x);
    const FresnelIntegrals f = fresnel_integrals(std::sqrt(2.0 * x / pi));
    const Complex tail = std::sqrt(pi / 2.0) * Complex{0.5 - f.c, -(0.5 - f.s)};
    return 2.0 * j * sx * std::exp(j * x) * tail;
}

namespace {

// cot((pi + sign * beta) / 2n) F(kL a(beta)) with its finite limit at the
// shadow boundaries.
Complex utd_term(double sign, double beta, double n, double kl)
{
    const double nn = std::round((beta + sign * pi) / (2.0 * pi * n));
    const double arg = (pi + sign * beta) / (2.0 * n);
    const double a = 2.0 * std::pow(std::cos((2.0 * n * pi * nn - beta) / 2.0), 2);
    const double eps = pi + sign * beta - 2.0 * pi * n * nn;
    if (std::abs(eps) < 1e-8)
    {
        const double sgn = eps >= 0 ? 1.0 : -1.0;
        const Complex e4 = std::exp(j * (pi / 4.0));
        return n * (std::sqrt(2.0 * pi * kl) * sgn - 2.0 * kl * eps * e4) * e4;
    }
    return std::cos(arg) / std::sin(arg) * utd_transition(kl * a);
}

// Face reflection coefficient at a grazing angle (soft: te, hard: tm).
FresnelCoefficients grazing(const Material *m, double psi, double frequency)
{
    if (!m || m->perfect_conductor)
        return {-1.0, 1.0};
    const double theta = std::clamp(pi / 2.0 - std::abs(psi), 0.0, pi / 2.0);
    return fresnel_coefficients(theta, *m, frequency);
}

} // namespace

UtdCoefficients utd_coefficient(const WedgeGeometry &w, double frequency, const Material *face_a,
                                const Material *face_b)
{
    const double k = 2.0 * pi * frequency / speed_of_light;
    const double sb = std::sin(w.beta0);
    const double s = w.distance_diffracted, sp = w.distance_incident;
    const double kl = k * s * sp * sb * sb / (s + sp);
    const double n = w.n;
    const double bm = w.phi_diffracted - w.phi_incident;
    const double bp = w.phi_diffracted + w.phi_incident;

    const Complex d1 = utd_term(+1.0, bm, n, kl);
    const Complex d2 = utd_term(-1.0, bm, n, kl);
    const Complex d3 = utd_term(-1.0, bp, n, kl);
    const Complex d4 = utd_term(+1.0, bp, n, kl);

    const FresnelCoefficients r0 = grazing(face_a, w.phi_incident, frequency);
    const FresnelCoefficients rn = grazing(face_b, n * pi - w.phi_diffracted, frequency);

    const Complex pre = -std::exp(-j * (pi / 4.0)) / (2.0 * n * std::sqrt(2.0 * pi * k) * sb);
    return {pre * (d1 + d2 + r0.te * d3 + rn.te * d4), pre * (d1 + d2 + r0.tm * d3 + rn.tm * d4)};
}

double er_scatter_field(double scattering, double area, double cos_incident, double cos_scattered,
                        double distance)
{
    return scattering * scattering * area * std::max(cos_incident, 0.0) *
           std::max(cos_scattered, 0.0) / (pi * distance * distance);
}

double antenna_gain(const Antenna &antenna, const Vec3 &direction)
{
    if (antenna.kind == AntennaKind::isotropic)
        return 1.0;
    const double c = std::clamp(dot(normalized(antenna.orientation), direction), -1.0, 1.0);
    const double s2 = 1.0 - c * c;
    if (s2 <= 1e-24)
        return 0.0;
    const double f = std::cos(pi / 2.0 * c);
    return dipole_peak_gain * f * f / s2;
}

Vec3 antenna_polarization(const Antenna &antenna, const Vec3 &direction)
{
    const Vec3 a = normalized(antenna.orientation);
    const Vec3 p = a - direction * dot(a, direction);
    if (norm(p) <= 1e-12)
        return any_orthogonal(direction);
    return normalized(p);
}

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

namespace {

CVec3 reflect(const CVec3 &e, const Vec3 &k_in, const Vec3 &normal, const FresnelCoefficients &g)
{
    const Vec3 k_out = k_in - normal * (2.0 * dot(k_in, normal));
    Vec3 perp = cross(k_in, normal);
    perp = norm(perp) > 1e-12 ? normalized(perp) : any_orthogonal(normal);
    const Vec3 par_in = cross(perp, k_in);
    const Vec3 par_out = cross(perp, k_out);
    return perp * (g.te * dot(e, perp)) + par_out * (g.tm * dot(e, par_in));
}

} // namespace

RayField path_field(const RayPath &path, const SceneSnapshot &snap)
{
    const Scene &scene = *snap.scene;
    const double f = scene.tx.frequency;
    const double k = 2.0 * pi * f / speed_of_light;
    const double lambda = speed_of_light / f;
    const auto &v = path.vertices;
    const std::size_t nseg = v.size() - 1;

    std::vector<double> seg(nseg);
    std::vector<Vec3> dir(nseg);
    for (std::size_t i = 0; i < nseg; ++i)
    {
        const Vec3 d = v[i + 1].position - v[i].position;
        seg[i] = norm(d);
        dir[i] = d / seg[i];
    }

    enum class Mode
    {
        source,    // amplitude referenced to unit distance from a point source
        spherical, // spreading s_src / (s_src + l)
        edge       // sqrt(s' / (s (s + s')))
    } mode = Mode::source;

    CVec3 e = antenna_polarization(scene.tx.antenna, dir[0]) *
              Complex(std::sqrt(30.0 * scene.tx.power * antenna_gain(scene.tx.antenna, dir[0])));
    double s_src = 0.0, caustic = 0.0, s_edge = 0.0;
    double divergence = 1.0;
    auto edge_spread = [&](double s) { return std::sqrt(caustic / (s * (s + caustic))); };

    for (std::size_t i = 0; i < nseg; ++i)
    {
        const double l = seg[i];
        double spread = 1.0;
        switch (mode)
        {
        case Mode::source:
            spread = 1.0 / l;
            s_src = l;
            mode = Mode::spherical;
            break;
        case Mode::spherical:
            spread = s_src / (s_src + l);
            s_src += l;
            break;
        case Mode::edge:
            spread = s_edge == 0.0 ? edge_spread(l) : edge_spread(s_edge + l) / edge_spread(s_edge);
            s_edge += l;
            break;
        }
        divergence *= spread;
        e = e * (spread * std::exp(-j * (k * l)));

        if (i + 1 >= v.size() - 1)
            break;
        const Interaction &it = path.interactions[i];
        switch (it.kind)
        {
        case InteractionKind::reflection:
        {
            const PosedFace &face =
                snap.faces[static_cast<std::size_t>(snap.face_id(it.object, it.primitive))];
            const double c = std::clamp(-dot(dir[i], face.normal), -1.0, 1.0);
            e = reflect(e, dir[i], face.normal, fresnel_coefficients(std::acos(c), *face.material, f));
            break;
        }
        case InteractionKind::diffraction:
        {
            const PosedEdge &edge =
                snap.edges[static_cast<std::size_t>(snap.edge_id(it.object, it.primitive))];
            double s_after = 0.0;
            for (std::size_t m = i + 1; m < nseg; ++m)
                s_after += seg[m];
            WedgeGeometry w;
            w.n = edge.wedge_n;
            w.phi_incident = edge.azimuth(v[i].position);
            w.phi_diffracted = edge.azimuth(v[i + 2].position);
            const double cb = std::clamp(dot(dir[i], edge.direction), -1.0, 1.0);
            w.beta0 = std::acos(cb);
            w.distance_incident = s_src;
            w.distance_diffracted = s_after;
            const UtdCoefficients d =
                utd_coefficient(w, f, snap.faces[static_cast<std::size_t>(edge.face_a)].material,
                                snap.faces[static_cast<std::size_t>(edge.face_b)].material);
            const Vec3 &si = dir[i];
            const Vec3 &sd = dir[i + 1];
            const Vec3 phi_i = -normalized(cross(edge.direction, si));
            const Vec3 beta_i = cross(phi_i, si);
            const Vec3 phi_d = normalized(cross(edge.direction, sd));
            const Vec3 beta_d = cross(phi_d, sd);
            e = beta_d * (-d.soft * dot(e, beta_i)) + phi_d * (-d.hard * dot(e, phi_i));
            caustic = s_src;
            s_edge = 0.0;
            mode = Mode::edge;
            break;
        }
        case InteractionKind::scatter:
        {
            const PosedTile &tile =
                snap.tiles[static_cast<std::size_t>(snap.tile_id(it.object, it.primitive))];
            const Material &mat = *snap.faces[static_cast<std::size_t>(tile.face_global)].material;
            const Vec3 &out = dir[i + 1];
            const double ci = std::abs(dot(dir[i], tile.normal));
            const double cs = std::abs(dot(out, tile.normal));
            const double gain = std::sqrt(er_scatter_field(mat.scattering, tile.area, ci, cs, 1.0));
            // Carry the polarisation along the minimal rotation from the incident to
            // the scattered direction; its transpose is the reverse path's rotation.
            Vec3 axis = cross(dir[i], out);
            const double sn = norm(axis);
            axis = sn > 1e-12 ? axis / sn : any_orthogonal(out);
            const Mat3 r = rodrigues(axis, std::atan2(sn, dot(dir[i], out)));
            const Vec3 re = r * Vec3{e.x.real(), e.y.real(), e.z.real()};
            const Vec3 im = r * Vec3{e.x.imag(), e.y.imag(), e.z.imag()};
            const CVec3 carried{Complex(re.x, im.x), Complex(re.y, im.y), Complex(re.z, im.z)};
            e = carried * Complex(gain);
            divergence *= gain;
            mode = Mode::source;
            break;
        }
        }
    }

    RayField rf;
    rf.field = e;
    rf.divergence = divergence;
    for (double l : seg)
        rf.length += l;
    rf.delay = rf.length / speed_of_light;
    const Vec3 arrival = -dir[nseg - 1];
    const double gr = antenna_gain(scene.rx.antenna, arrival);
    const double scale = std::sqrt(lambda * lambda * gr / (4.0 * pi * free_space_impedance));
    if (scene.rx.antenna.kind == AntennaKind::isotropic)
    {
        // Polarisation matched: all field power is received.
        const Complex comps[3] = {e.x, e.y, e.z};
        Complex dominant = comps[0];
        for (const auto &c : comps)
            if (std::abs(c) > std::abs(dominant))
                dominant = c;
        const double mag = std::sqrt(e.norm2());
        rf.amplitude = std::abs(dominant) > 0 ? dominant / std::abs(dominant) * (mag * scale) : 0.0;
    }
    else
    {
        rf.amplitude = dot(e, antenna_polarization(scene.rx.antenna, arrival)) * scale;
    }
    rf.power = std::norm(rf.amplitude);
    return rf;
}

RayField path_field(const RayPath &path, const Scene &scene, double t)
{
    bool tiles = path.count(InteractionKind::scatter) > 0;
    const SceneSnapshot snap = make_snapshot(scene, t, tiles);
    const PathCheck check = validate_path(path, snap);
    if (!check)
        throw InvalidPath(check.reason);
    return path_field(path, snap);
}

} // namespace drt
