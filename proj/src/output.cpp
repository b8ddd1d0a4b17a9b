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


#include "drt/output.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace drt {

namespace {

using nlohmann::ordered_json;

struct FileSpec
{
    std::string name;
    std::string description;
    std::vector<std::string> columns;
};

std::ofstream open_output(const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw OutputError("cannot write " + path.string());
    return out;
}

std::vector<std::string> grid_columns(ProfileAxis axis, const char *value)
{
    return {"t_bin_s", axis == ProfileAxis::delay ? "delay_s" : "doppler_hz", value};
}

class Writer
{
public:
    explicit Writer(std::filesystem::path dir) : dir_(std::move(dir)) {}

    template <class Fn>
    void file(FileSpec spec, Fn &&write)
    {
        auto out = open_output(dir_ / spec.name);
        write(out);
        out.flush();
        if (!out)
            throw OutputError("write failed: " + (dir_ / spec.name).string());
        specs_.push_back(std::move(spec));
    }

    void run_files(const RunResult &r, const ProfileBins &bins, const std::string &suffix,
                   const std::string &label)
    {
        file({"rays" + suffix + ".csv", "valid rays per step (" + label + ")",
              {"t_s", "key", "delay_s", "length_m", "doppler_hz", "power_dbm"}},
             [&](std::ostream &o) { write_rays_csv(o, r); });
        file({"pdp" + suffix + ".csv", "power-delay profile (" + label + ")",
              grid_columns(ProfileAxis::delay, "power_dbm")},
             [&](std::ostream &o) { write_grid_csv(o, build_pdp(r.snapshots, bins.delay, bins.time)); });
        file({"pdfp" + suffix + ".csv", "power-Doppler profile (" + label + ")",
              grid_columns(ProfileAxis::doppler, "power_dbm")},
             [&](std::ostream &o) {
                 write_grid_csv(o, build_pdfp(r.snapshots, bins.doppler, bins.time));
             });
    }

    const std::vector<FileSpec> &specs() const { return specs_; }

private:
    std::filesystem::path dir_;
    std::vector<FileSpec> specs_;
};

void timing_rows(std::ostream &o, const char *mode, const TimingReport &t)
{
    o << mode << ",trace_s," << csv_number(t.trace) << '\n'
      << mode << ",extrapolate_s," << csv_number(t.extrapolate) << '\n'
      << mode << ",field_s," << csv_number(t.field) << '\n'
      << mode << ",total_s," << csv_number(t.total) << '\n'
      << mode << ",traces," << t.traces << '\n'
      << mode << ",steps," << t.steps << '\n';
}

ordered_json schedule_json(const TcSchedule &s)
{
    ordered_json a = ordered_json::array();
    for (std::size_t i = 0; i < s.instants.size(); ++i)
        a.push_back({{"t_s", s.instants[i]}, {"cause", to_string(s.causes[i])}});
    return a;
}

} // namespace

const char *to_string(RunMode mode)
{
    switch (mode)
    {
    case RunMode::drt:
        return "drt";
    case RunMode::rt:
        return "rt";
    case RunMode::compare:
        return "compare";
    }
    return "?";
}

void write_rays_csv(std::ostream &out, const RunResult &result)
{
    out << "t_s,key,delay_s,length_m,doppler_hz,power_dbm\n";
    for (const auto &s : result.snapshots)
        for (const auto &r : s.rays)
            out << csv_number(s.time) << ',' << r.key << ',' << csv_number(r.delay) << ','
                << csv_number(r.length) << ',' << csv_number(r.doppler) << ','
                << csv_number(watts_to_dbm(r.power)) << '\n';
}

void write_refresh_csv(std::ostream &out, const RunResult &result)
{
    out << "t_s,event,key,detail\n";
    for (std::size_t i = 0; i < result.refreshes.instants.size(); ++i)
        out << csv_number(result.refreshes.instants[i]) << ",trace,,"
            << to_string(result.refreshes.causes[i]) << '\n';
    for (const auto &s : result.snapshots)
        for (std::size_t k = 0; k < s.expired.size(); ++k)
            out << csv_number(s.time) << ",expired," << s.expired[k] << ',' << s.reasons[k] << '\n';
}

RunSummary execute_run(const Scene &scene, const RunRequest &request,
                       const std::filesystem::path &out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw OutputError("cannot create " + out_dir.string() + ": " + ec.message());
    RunSummary summary;
    summary.steps = step_count(request.run);

    std::optional<RunResult> drt, rt;
    if (request.mode != RunMode::rt)
        drt = run_drt(scene, request.run);
    if (request.mode != RunMode::drt)
    {
        RunOptions o = request.run;
        o.schedule.reset();
        rt = run_rt(scene, o);
    }

    Writer w(out_dir);
    const RunResult &primary = drt ? *drt : *rt;
    summary.traces = primary.timing.traces;
    w.run_files(primary, request.bins, "", drt ? "drt" : "rt");
    if (request.mode == RunMode::compare)
    {
        w.run_files(*rt, request.bins, "_rt", "rt");
        summary.comparison = compare_runs(*drt, *rt, request.bins);
        const auto &c = *summary.comparison;
        w.file({"error_map_pdp.csv", "|dB| difference of jointly occupied PDP bins",
                grid_columns(ProfileAxis::delay, "abs_error_db")},
               [&](std::ostream &o) { write_error_csv(o, c.pdp); });
        w.file({"error_map_pdfp.csv", "|dB| difference of jointly occupied PDfP bins",
                grid_columns(ProfileAxis::doppler, "abs_error_db")},
               [&](std::ostream &o) { write_error_csv(o, c.pdfp); });
    }
    w.file({"refresh.csv", "trace instants and path expiries", {"t_s", "event", "key", "detail"}},
           [&](std::ostream &o) { write_refresh_csv(o, primary); });
    if (drt)
        summary.drt_timing = drt->timing;
    if (rt)
        summary.rt_timing = rt->timing;
    w.file({"timing.csv", "wall-clock breakdown (varies between runs)", {"mode", "quantity", "value"}},
           [&](std::ostream &o) {
               o << "mode,quantity,value\n";
               if (drt)
                   timing_rows(o, "drt", drt->timing);
               if (rt)
                   timing_rows(o, "rt", rt->timing);
           });

    ordered_json m;
    m["scene"] = request.scene_path;
    m["scene_name"] = scene.name;
    m["mode"] = to_string(request.mode);
    m["span_s"] = request.run.span;
    m["step_s"] = request.run.step;
    m["steps"] = summary.steps;
    m["tc"] = request.run.schedule ? ordered_json(request.run.schedule->instants) : ordered_json("auto");
    m["refreshes"] = schedule_json(primary.refreshes);
    m["max_reflections"] = request.run.trace.max_reflections;
    m["diffraction"] = request.run.trace.diffraction;
    m["scattering"] = request.run.trace.scattering;
    m["bins"] = {{"time_s", request.bins.time},
                 {"delay_s", request.bins.delay},
                 {"doppler_hz", request.bins.doppler}};
    m["seed"] = request.seed;
    if (summary.comparison)
    {
        const auto &c = *summary.comparison;
        m["comparison"] = {{"matched_rays", c.matched_rays},
                           {"rt_only_rays", c.rt_only_rays},
                           {"drt_only_rays", c.drt_only_rays},
                           {"max_pdp_error_db", c.pdp.max_error},
                           {"max_pdfp_error_db", c.pdfp.max_error},
                           {"max_ray_error_db", c.max_ray_error_db},
                           {"structural_bins", c.pdp.structural + c.pdfp.structural}};
    }
    ordered_json files = ordered_json::array();
    for (const auto &f : w.specs())
    {
        files.push_back({{"name", f.name}, {"description", f.description}, {"columns", f.columns}});
        summary.files.push_back(f.name);
    }
    files.push_back({{"name", "manifest.json"}, {"description", "this file"}, {"columns", ordered_json::array()}});
    m["files"] = files;
    summary.files.push_back("manifest.json");
    auto out = open_output(out_dir / "manifest.json");
    out << m.dump(2) << '\n';
    if (!out)
        throw OutputError("write failed: manifest.json");
    return summary;
}

} // namespace drt
