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

#include "drt/channel.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace drt {

DopplerRay doppler_shift(const RayPath &path, double carrier)
{
    // Sum of log ratios keeps the shift exact instead of subtracting two ~GHz values.
    const auto &v = path.vertices;
    double log_ratio = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i)
    {
        const Vec3 k = normalized(v[i].position - v[i - 1].position);
        const double from = dot(v[i - 1].velocity, k), to = dot(v[i].velocity, k);
        log_ratio += std::log1p((from - to) / (speed_of_light - from));
    }
    const double shift = carrier * std::expm1(log_ratio);
    return {carrier + shift, shift};
}

double phase_doppler(double length_rate, double carrier)
{
    return -carrier / speed_of_light * length_rate;
}

double ProfileGrid::total_power() const
{
    double s = 0.0;
    for (const auto &[k, p] : power)
        s += p;
    return s;
}

long time_bin_index(double t, double time_bin)
{
    return static_cast<long>(std::floor(t / time_bin + 1e-9));
}

long delay_bin_index(double delay, double delay_bin)
{
    return static_cast<long>(std::floor(delay / delay_bin + 1e-9));
}

long doppler_bin_index(double doppler, double doppler_bin)
{
    return static_cast<long>(std::llround(doppler / doppler_bin));
}

namespace {

ProfileGrid build(const std::vector<ChannelSnapshot> &snapshots, ProfileAxis axis, double axis_bin,
                  double time_bin)
{
    if (snapshots.empty())
        throw std::invalid_argument("profile needs at least one snapshot");
    if (!(axis_bin > 0) || !(time_bin > 0))
        throw std::invalid_argument("bin widths must be positive");
    ProfileGrid g;
    g.axis = axis;
    g.axis_bin = axis_bin;
    g.time_bin = time_bin;
    for (const auto &s : snapshots)
    {
        const long ti = time_bin_index(s.time, time_bin);
        for (const auto &r : s.rays)
        {
            if (!(r.power > 0.0))
                continue;
            const long ai = axis == ProfileAxis::delay ? delay_bin_index(r.delay, axis_bin)
                                                       : doppler_bin_index(r.doppler, axis_bin);
            g.power[{ti, ai}] += r.power;
        }
    }
    return g;
}

} // namespace

ProfileGrid build_pdp(const std::vector<ChannelSnapshot> &snapshots, double delay_bin,
                      double time_bin)
{
    return build(snapshots, ProfileAxis::delay, delay_bin, time_bin);
}

ProfileGrid build_pdfp(const std::vector<ChannelSnapshot> &snapshots, double doppler_bin,
                       double time_bin)
{
    return build(snapshots, ProfileAxis::doppler, doppler_bin, time_bin);
}

ErrorMap error_map(const ProfileGrid &a, const ProfileGrid &b)
{
    if (!a.same_layout(b))
        throw std::invalid_argument("profile grids have different bin layouts");
    ErrorMap m;
    m.errors.axis = a.axis;
    m.errors.axis_bin = a.axis_bin;
    m.errors.time_bin = a.time_bin;
    for (const auto &[k, p] : a.power)
    {
        const auto it = b.power.find(k);
        if (it == b.power.end())
        {
            ++m.structural;
            continue;
        }
        const double e = std::abs(watts_to_dbm(p) - watts_to_dbm(it->second));
        m.errors.power[k] = e;
        m.max_error = std::max(m.max_error, e);
    }
    for (const auto &[k, p] : b.power)
        if (!a.power.count(k))
            ++m.structural;
    return m;
}

void TcSchedule::check() const
{
    if (instants.empty() || instants.front() != 0.0)
        throw std::invalid_argument("refresh schedule must start at 0");
    for (std::size_t i = 1; i < instants.size(); ++i)
        if (!(instants[i] > instants[i - 1]))
            throw std::invalid_argument("refresh schedule must be strictly increasing");
    if (causes.size() != instants.size())
        throw std::invalid_argument("refresh schedule causes do not match instants");
}

TcSchedule TcSchedule::parse(const std::string &list)
{
    TcSchedule s;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        char *end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0' || !std::isfinite(v))
            throw std::invalid_argument("malformed refresh instant '" + item + "'");
        s.instants.push_back(v);
        s.causes.push_back(RefreshCause::manual);
    }
    s.check();
    return s;
}

const char *to_string(RefreshCause cause)
{
    switch (cause)
    {
    case RefreshCause::manual:
        return "manual";
    case RefreshCause::expiry:
        return "expiry";
    case RefreshCause::new_path:
        return "new_path";
    }
    return "?";
}

std::string csv_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_grid_csv(std::ostream &out, const ProfileGrid &grid)
{
    out << "t_bin_s," << (grid.axis == ProfileAxis::delay ? "delay_s" : "doppler_hz")
        << ",power_dbm\n";
    for (const auto &[k, p] : grid.power)
        out << csv_number(grid.time_of(k.first)) << ',' << csv_number(grid.axis_of(k.second)) << ','
            << csv_number(watts_to_dbm(p)) << '\n';
}

void write_error_csv(std::ostream &out, const ErrorMap &map)
{
    out << "t_bin_s," << (map.errors.axis == ProfileAxis::delay ? "delay_s" : "doppler_hz")
        << ",abs_error_db\n";
    for (const auto &[k, e] : map.errors.power)
        out << csv_number(map.errors.time_of(k.first)) << ','
            << csv_number(map.errors.axis_of(k.second)) << ',' << csv_number(e) << '\n';
}

} // namespace drt
