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

// Run orchestration shared by the C API and the command line: executes a run
// and writes its CSV files and manifest to an output directory.

#include "drt/run.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace drt {

enum class RunMode
{
    drt,
    rt,
    compare
};

const char *to_string(RunMode mode);

/// An output file or directory could not be written.
class OutputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct RunRequest
{
    std::string scene_path; // recorded in the manifest only
    RunMode mode = RunMode::drt;
    RunOptions run;
    ProfileBins bins;
    std::uint64_t seed = 42;
};

struct RunSummary
{
    int steps = 0;
    int traces = 0;
    std::optional<RunComparison> comparison; // compare mode only
    TimingReport drt_timing;
    TimingReport rt_timing;
    std::vector<std::string> files; // written, relative to the output directory
};

/// Runs the request and writes rays.csv, pdp.csv, pdfp.csv, refresh.csv,
/// timing.csv and manifest.json (plus the RT and error-map files in compare
/// mode). Everything except timing.csv is byte-identical across runs.
RunSummary execute_run(const Scene &scene, const RunRequest &request,
                       const std::filesystem::path &out_dir);

/// One row per valid ray per step: t_s,key,delay_s,length_m,doppler_hz,power_dbm.
void write_rays_csv(std::ostream &out, const RunResult &result);

/// Refresh instants and expiries: t_s,event,key,detail.
void write_refresh_csv(std::ostream &out, const RunResult &result);

} // namespace drt
