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

// Time-stepped simulations: dynamic extrapolation with periodic re-traces,
// and the per-step snapshot trace it is compared against.

#include "drt/channel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace drt {

struct RunOptions
{
    double span = 1.0; // s
    double step = 0.1; // s
    TraceConfig trace;
    std::optional<TcSchedule> schedule; // manual refresh instants; automatic when empty
    int threads = 1;                    // 0: hardware concurrency
    bool keep_paths = false;            // retain full RayPath sets per step
};

struct TimingReport
{
    double trace = 0.0;       // s spent in snapshot traces
    double extrapolate = 0.0; // s spent recomputing and validating paths
    double field = 0.0;       // s spent in field and Doppler evaluation
    double total = 0.0;       // wall clock
    int traces = 0;
    int steps = 0;
};

struct RunResult
{
    std::vector<ChannelSnapshot> snapshots;
    std::vector<std::vector<RayPath>> paths; // only with keep_paths
    TcSchedule refreshes;                    // instants actually used
    TimingReport timing;
};

struct ProfileBins
{
    double delay = default_delay_bin;     // s
    double doppler = default_doppler_bin; // Hz
    double time = default_time_bin;       // s
};

/// DRT against per-step RT on the rays valid in both runs at each step.
/// Rays only RT knows about are paths born after the last DRT trace; they are
/// counted, not compared.
struct RunComparison
{
    ErrorMap pdp;
    ErrorMap pdfp;
    long matched_rays = 0;
    long rt_only_rays = 0;  // births not yet seen by the extrapolation
    long drt_only_rays = 0; // extrapolated rays the snapshot trace does not confirm
    double max_ray_error_db = 0.0;
};

/// Throws std::invalid_argument when the runs have different step counts.
RunComparison compare_runs(const RunResult &drt, const RunResult &rt, const ProfileBins &bins);

/// Number of steps of a run: round(span / step).
int step_count(const RunOptions &options);

/// Dynamic ray tracing: trace at each refresh instant, extrapolate in between.
/// Automatic mode re-traces when a path expires or a line of sight appears.
RunResult run_drt(const Scene &scene, const RunOptions &options);

/// Reference: a full snapshot trace at every step.
RunResult run_rt(const Scene &scene, const RunOptions &options);

/// Evaluates field and Doppler of valid paths at one instant.
ChannelSnapshot evaluate_snapshot(const std::vector<RayPath> &paths, const SceneSnapshot &snapshot);

/// Set of valid path keys of a snapshot, sorted.
std::vector<std::string> valid_keys(const ChannelSnapshot &snapshot);

} // namespace drt
