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


// Command-line front end. Talks to the engine only through the C API.

#include "drt/drt.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

namespace {

struct SceneDeleter
{
    void operator()(drt_scene *s) const { drt_scene_free(s); }
};
using ScenePtr = std::unique_ptr<drt_scene, SceneDeleter>;

struct StringDeleter
{
    void operator()(char *s) const { drt_string_free(s); }
};
using StringPtr = std::unique_ptr<char, StringDeleter>;

int exit_code(drt_status s)
{
    switch (s)
    {
    case DRT_OK:
        return 0;
    case DRT_ERR_VALIDATION:
        return 1;
    case DRT_ERR_NOT_FOUND:
        return 2;
    case DRT_ERR_PARSE:
    case DRT_ERR_SCENE:
        return 3;
    case DRT_ERR_INVALID_ARGUMENT:
        return 4;
    case DRT_ERR_GEOMETRY:
        return 5;
    case DRT_ERR_IO:
        return 6;
    default:
        return 70;
    }
}

int report_error(drt_status s)
{
    std::fprintf(stderr, "drt: %s\n", drt_last_error());
    return exit_code(s);
}

struct Settings
{
    std::string scene;
    std::string mode = "drt";
    double span = 1.0;
    double step = 0.1;
    std::string tc = "auto";
    int max_reflections = 2;
    std::string diffraction = "off";
    std::string scattering = "off";
    double doppler_bin = 0.0;
    double time_bin = 0.0;
    double delay_bin = 0.0;
    int threads = 0;
    std::uint64_t seed = 42;
    int cases = 1000;
    std::string out = "drt_out";
};

int validate(const Settings &s, bool write_file)
{
    char *raw = nullptr;
    const drt_status st = drt_validate(s.seed, s.cases, &raw);
    StringPtr report(raw);
    if (!report)
        return report_error(st);
    std::fputs(report.get(), stdout);
    if (write_file)
    {
        std::error_code ec;
        std::filesystem::create_directories(s.out, ec);
        std::ofstream f(std::filesystem::path(s.out) / "validation_report.txt", std::ios::binary);
        f << report.get();
        if (!f)
        {
            std::fprintf(stderr, "drt: cannot write %s/validation_report.txt\n", s.out.c_str());
            return exit_code(DRT_ERR_IO);
        }
    }
    if (st != DRT_OK)
        std::fprintf(stderr, "drt: %s\n", drt_last_error());
    return exit_code(st);
}

int run(const Settings &s)
{
    if (s.mode == "validate")
        return validate(s, true);
    if (s.scene.empty())
    {
        std::fprintf(stderr, "drt: --scene is required for mode %s\n", s.mode.c_str());
        return exit_code(DRT_ERR_INVALID_ARGUMENT);
    }
    drt_scene *raw = nullptr;
    if (const drt_status st = drt_scene_load(s.scene.c_str(), &raw); st != DRT_OK)
        return report_error(st);
    ScenePtr scene(raw);

    drt_run_options o;
    drt_run_options_init(&o);
    o.span = s.span;
    o.step = s.step;
    o.trace.max_reflections = s.max_reflections;
    o.trace.diffraction = s.diffraction == "on";
    o.trace.scattering = s.scattering == "on";
    o.tc = s.tc.c_str();
    o.threads = s.threads;
    if (s.doppler_bin > 0)
        o.doppler_bin = s.doppler_bin;
    if (s.time_bin > 0)
        o.time_bin = s.time_bin;
    if (s.delay_bin > 0)
        o.delay_bin = s.delay_bin;
    o.seed = s.seed;
    o.scene_label = s.scene.c_str();

    const drt_mode mode = s.mode == "rt" ? DRT_MODE_RT : s.mode == "compare" ? DRT_MODE_COMPARE : DRT_MODE_DRT;
    drt_run_summary sum{};
    if (const drt_status st = drt_run(scene.get(), mode, &o, s.out.c_str(), &sum); st != DRT_OK)
        return report_error(st);

    std::printf("mode %s: %d steps, %d traces, output in %s\n", s.mode.c_str(), sum.steps,
                mode == DRT_MODE_RT ? sum.steps : sum.traces, s.out.c_str());
    if (mode == DRT_MODE_COMPARE)
    {
        std::printf("matched rays %ld, rt-only rays %ld, drt-only rays %ld, structural bins %ld\n",
                    sum.matched_rays, sum.rt_only_rays, sum.drt_only_rays, sum.structural_bins);
        std::printf("max |dP| per ray %.6e dB\n", sum.max_ray_error_db);
        std::printf("max |dP| PDP %.6e dB, PDfP %.6e dB\n", sum.max_pdp_error_db, sum.max_pdfp_error_db);
        if (sum.drt_seconds > 0)
            std::printf("wall clock drt %.6f s, rt %.6f s, speed-up %.1fx\n", sum.drt_seconds,
                        sum.rt_seconds, sum.rt_seconds / sum.drt_seconds);
    }
    return 0;
}

void add_seed_options(CLI::App &cmd, Settings &s)
{
    cmd.add_option("--seed", s.seed, "Seed of the randomized oracle suite")->capture_default_str();
    cmd.add_option("--cases", s.cases, "Random configurations per oracle category")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--out", s.out, "Output directory")->capture_default_str();
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Dynamic ray tracing: extrapolated multipath channels for moving scenes"};
    app.require_subcommand(1);
    app.set_version_flag("--version", drt_version());
    Settings s;

    auto *run_cmd = app.add_subcommand("run", "Simulate a scene and write profiles");
    run_cmd->add_option("--scene", s.scene, "Scene file");
    run_cmd->add_option("--mode", s.mode, "drt | rt | compare | validate")
        ->check(CLI::IsMember({"drt", "rt", "compare", "validate"}))
        ->capture_default_str();
    run_cmd->add_option("--span", s.span, "Simulated time span, s")->capture_default_str();
    run_cmd->add_option("--step", s.step, "Time step, s")->capture_default_str();
    run_cmd->add_option("--tc", s.tc, "Refresh instants (comma list starting at 0) or auto")
        ->capture_default_str();
    run_cmd->add_option("--max-reflections", s.max_reflections, "Reflection order, 0..2")
        ->check(CLI::Range(0, 2))
        ->capture_default_str();
    run_cmd->add_option("--diffraction", s.diffraction, "on | off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    run_cmd->add_option("--scattering", s.scattering, "on | off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    run_cmd->add_option("--doppler-bin", s.doppler_bin, "Doppler bin width, Hz (default 14.34)")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--time-bin", s.time_bin, "Time bin width, s (default 0.2)")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--delay-bin", s.delay_bin, "Delay bin width, s (default 1e-8)")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--threads", s.threads, "Worker threads, 0 = hardware parallelism")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    add_seed_options(*run_cmd, s);

    auto *validate_cmd = app.add_subcommand("validate", "Run the seeded oracle suite");
    add_seed_options(*validate_cmd, s);
    bool write_report = false;
    validate_cmd->add_flag("--write", write_report, "Also write validation_report.txt to --out");

    CLI11_PARSE(app, argc, argv);
    if (*run_cmd)
        return run(s);
    return validate(s, write_report);
}
