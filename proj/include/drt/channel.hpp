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

// Channel observables: Doppler shifts, binned power profiles, error maps and
// refresh schedules.

#include "drt/field.hpp"

#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace drt {

inline constexpr double default_doppler_bin = 14.34; // Hz
inline constexpr double default_time_bin = 0.2;      // s
inline constexpr double default_delay_bin = 1e-8;    // s

struct DopplerRay
{
    double apparent_frequency = 0.0; // Hz
    double shift = 0.0;              // apparent - carrier, Hz
};

/// Multi-bounce Doppler product over the path segments, using the velocity of
/// every vertex (terminals and interaction points).
DopplerRay doppler_shift(const RayPath &path, double carrier);

/// Doppler from the rate of change of the path length, -(f0 / c) dL/dt.
double phase_doppler(double length_rate, double carrier);

/// One ray at one instant.
struct RaySample
{
    std::string key;
    double delay = 0.0;   // s
    double length = 0.0;  // m
    double doppler = 0.0; // Hz
    double power = 0.0;   // W
    Complex amplitude;
};

struct ChannelSnapshot
{
    double time = 0.0;
    std::vector<RaySample> rays;         // valid paths only
    std::vector<std::string> expired;    // keys of paths flagged expired at this instant
    std::vector<std::string> reasons;    // matching expiry reasons
    bool refreshed = false;              // a fresh trace was run for this instant
};

enum class ProfileAxis
{
    delay,
    doppler
};

/// Sparse 2-D grid of incoherently summed ray power. Only occupied bins exist.
struct ProfileGrid
{
    ProfileAxis axis = ProfileAxis::delay;
    double time_bin = default_time_bin;
    double axis_bin = default_delay_bin;
    std::map<std::pair<long, long>, double> power; // (time index, axis index) -> W

    double total_power() const;
    /// Lower edge of a time bin, s.
    double time_of(long index) const { return static_cast<double>(index) * time_bin; }
    /// Delay bins are labelled by their lower edge, Doppler bins by their centre.
    double axis_of(long index) const { return static_cast<double>(index) * axis_bin; }
    bool same_layout(const ProfileGrid &o) const
    {
        return axis == o.axis && time_bin == o.time_bin && axis_bin == o.axis_bin;
    }
};

long time_bin_index(double t, double time_bin);
long delay_bin_index(double delay, double delay_bin);
long doppler_bin_index(double doppler, double doppler_bin);

/// Throws std::invalid_argument on empty input or non-positive bins.
ProfileGrid build_pdp(const std::vector<ChannelSnapshot> &snapshots, double delay_bin = default_delay_bin,
                      double time_bin = default_time_bin);
ProfileGrid build_pdfp(const std::vector<ChannelSnapshot> &snapshots,
                       double doppler_bin = default_doppler_bin, double time_bin = default_time_bin);

struct ErrorMap
{
    ProfileGrid errors;   // |dB difference| stored in the power field, jointly occupied bins only
    long structural = 0;  // bins occupied in exactly one grid
    double max_error = 0.0;
};

/// Throws std::invalid_argument when the layouts differ.
ErrorMap error_map(const ProfileGrid &a, const ProfileGrid &b);

enum class RefreshCause
{
    manual,
    expiry,
    new_path
};

/// Instants (relative to the run start) at which a fresh trace is run.
struct TcSchedule
{
    std::vector<double> instants;
    std::vector<RefreshCause> causes;

    /// Throws std::invalid_argument unless strictly increasing and starting at 0.
    void check() const;
    /// Parses "0,3,4.5"; throws std::invalid_argument on malformed lists.
    static TcSchedule parse(const std::string &list);
};

const char *to_string(RefreshCause cause);

/// CSV with columns t_bin_s, delay_s | doppler_hz, power_dbm.
void write_grid_csv(std::ostream &out, const ProfileGrid &grid);
/// CSV with columns t_bin_s, delay_s | doppler_hz, abs_error_db.
void write_error_csv(std::ostream &out, const ErrorMap &map);

/// Fixed-format number used in every CSV so runs are byte-comparable.
std::string csv_number(double v);

} // namespace drt
