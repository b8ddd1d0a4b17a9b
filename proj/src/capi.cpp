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


#include "drt/drt.h"

#include "drt/kinematics.hpp"
#include "drt/output.hpp"
#include "drt/validation.hpp"

#include <cstring>
#include <exception>
#include <filesystem>
#include <new>
#include <string>

struct drt_scene
{
    drt::Scene scene;
};

struct drt_paths
{
    const drt::Scene *scene = nullptr; // for field evaluation; the scene must outlive the handle
    std::vector<drt::RayPath> paths;
    std::vector<std::string> keys;
    std::vector<drt_path_info> info;
};

namespace {

thread_local std::string last_error;

drt_status fail(drt_status status, const std::string &message)
{
    last_error = message;
    return status;
}

// Maps exceptions escaping the core onto status codes.
template <class Fn>
drt_status guarded(Fn &&fn)
{
    try
    {
        last_error.clear();
        return fn();
    }
    catch (const drt::ParseError &e)
    {
        return fail(DRT_ERR_PARSE, e.what());
    }
    catch (const drt::SceneError &e)
    {
        return fail(DRT_ERR_SCENE, e.what());
    }
    catch (const drt::DegenerateGeometry &e)
    {
        return fail(DRT_ERR_GEOMETRY, e.what());
    }
    catch (const drt::OutputError &e)
    {
        return fail(DRT_ERR_IO, e.what());
    }
    catch (const std::invalid_argument &e)
    {
        return fail(DRT_ERR_INVALID_ARGUMENT, e.what());
    }
    catch (const std::filesystem::filesystem_error &e)
    {
        return fail(DRT_ERR_IO, e.what());
    }
    catch (const std::bad_alloc &)
    {
        return fail(DRT_ERR_INTERNAL, "out of memory");
    }
    catch (const std::exception &e)
    {
        return fail(DRT_ERR_INTERNAL, e.what());
    }
}

char *duplicate(const std::string &s)
{
    char *p = static_cast<char *>(std::malloc(s.size() + 1));
    if (!p)
        throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

drt::TraceConfig to_core(const drt_trace_config &c)
{
    if (c.max_reflections < 0 || c.max_reflections > drt::max_reflections_cap)
        throw std::invalid_argument("max_reflections must be within 0.." +
                                    std::to_string(drt::max_reflections_cap));
    drt::TraceConfig t;
    t.max_reflections = c.max_reflections;
    t.diffraction = c.diffraction != 0;
    t.scattering = c.scattering != 0;
    return t;
}

drt_vec3 to_c(const drt::Vec3 &v) { return {v.x, v.y, v.z}; }

drt_paths *make_paths(const drt::Scene &scene, std::vector<drt::RayPath> paths, double t)
{
    auto h = std::make_unique<drt_paths>();
    h->scene = &scene;
    bool tiles = false;
    for (const auto &p : paths)
        tiles = tiles || p.count(drt::InteractionKind::scatter) > 0;
    const drt::SceneSnapshot snap = drt::make_snapshot(scene, t, tiles);
    for (const auto &p : paths)
    {
        drt_path_info i{};
        i.time = p.time;
        i.length = p.length;
        i.delay = p.delay;
        i.expired = p.expired ? 1 : 0;
        i.interactions = p.interactions.size();
        i.vertices = p.vertices.size();
        if (!p.expired)
        {
            i.power = drt::path_field(p, snap).power;
            i.doppler = drt::doppler_shift(p, scene.tx.frequency).shift;
        }
        h->keys.push_back(p.key());
        h->info.push_back(i);
    }
    h->paths = std::move(paths);
    return h.release();
}

} // namespace

extern "C" {

const char *drt_version(void) { return "1.0.0"; }

const char *drt_last_error(void) { return last_error.c_str(); }

void drt_string_free(char *text) { std::free(text); }

drt_status drt_scene_parse(const char *text, drt_scene **out)
{
    return guarded([&] {
        if (!text || !out)
            return fail(DRT_ERR_INVALID_ARGUMENT, "null argument");
        auto h = std::make_unique<drt_scene>();
        h->scene = drt::parse_scene(text);
        *out = h.release();
        return DRT_OK;
    });
}

drt_status drt_scene_load(const char *path, drt_scene **out)
{
    return guarded([&] {
        if (!path || !out)
            return fail(DRT_ERR_INVALID_ARGUMENT, "null argument");
        if (!std::filesystem::is_regular_file(path))
            return fail(DRT_ERR_NOT_FOUND, std::string("scene not found: ") + path);
        auto h = std::make_unique<drt_scene>();
        h->scene = drt::load_scene_file(path);
        *out = h.release();
        return DRT_OK;
    });
}

drt_status drt_scene_serialize(const drt_scene *scene, char **out)
{
    return guarded([&] {
        if (!scene || !out)
            return fail(DRT_ERR_INVALID_ARGUMENT, "null argument");
        *out = duplicate(drt::serialize_scene(scene->scene));
        return DRT_OK;
    });
}

drt_status drt_scene_counts(const drt_scene *scene, size_t *objects, size_t *faces, size_t *edges,
                            size_t *tiles)
{
    return guarded([&] {
        if (!scene)
            return fail(DRT_ERR_INVALID_ARGUMENT, "null scene");
        size_t f = 0, e = 0, t = 0;
        for (const auto &o : scene->scene.objects)
        {
            f += o.faces.size();
            e += o.edges.size();
            t += o.tiles.size();
        }
        if (objects)
            *objects = scene->scene.objects.size();
        if (faces)
            *faces = f;
        if (edges)
            *edges = e;
        if (tiles)
            *tiles = t;
        return DRT_OK;
    });
}

void drt_scene_free(drt_scene *scene) { delete scene; }

void drt_trace_config_init(drt_trace_config *config)
{
    if (!config)
        return;
    const drt::TraceConfig d;
    config->max_reflections = d.max_reflections;
    config->diffraction = d.diffraction ? 1 : 0;
    config->scattering = d.scattering ? 1 : 0;
}

drt_status drt_trace(const drt_scene *scene, double t, const drt_trace_config *config,
                     drt_paths **out)
{
    return guarded([&] {
        if (!scene || !config || !out)
            return fail(DRT_ERR_INVALID_ARGUMENT, "null argument");
        if (!std::isfinite(t))
            return fail(DRT_ERR_INVALID_ARGUMENT, "time must be finite");
        const drt::TraceConfig cfg = to_core(*config);
        const drt::SceneSnapshot snap = drt::make_snapshot(scene->scene, t, cfg.scattering);
        auto paths = drt::trace_snapshot(snap, cfg);
        for (auto &p : paths)
            drt::fill_path_kinematics(p, scene->scene, t);
        *out = make_paths(scene->scene, std::move(paths), t);
        return DRT_OK;
    });
}

drt_status drt_extrapolate(const drt_scene *scene, const drt_paths *base, double t, drt_paths **out)
{
    return guarded([&] {
        if (!scene || !base || !out)
            return fail(DRT_ERR_INVALID_ARGUMENT, "null argument");
        if (!std::isfinite(t))
            return fail(DRT_ERR_INVALID_ARGUMENT, "time must be finite");
        bool tiles = false;
        for (const auto &p : base->paths)
            tiles = tiles || p.count(drt::InteractionKind::scatter) > 0;
        const drt::SceneSnapshot snap = drt::make_snapshot(scene->scene, t, tiles);
        *out = make_paths(scene->scene, drt::extrapolate_paths(base->paths, scene->scene, snap), t);
        return DRT_OK;
    });
}

size_t drt_paths_count(const drt_paths *paths) { return paths ? paths->paths.size() : 0; }

drt_status drt_path_info_get(const drt_paths *paths, size_t index, drt_path_info *info)
{
    if (!paths || !info)
        return fail(DRT_ERR_INVALID_ARGUMENT, "null argument");
    if (index >= paths->info.size())
        return fail(DRT_ERR_INVALID_ARGUMENT, "path index out of range");
    last_error.clear();
    *info = paths->info[index];
    return DRT_OK;
}

const char *drt_path_key(const drt_paths *paths, size_t index)
{
    if (!paths || index >= paths->keys.size())
        return nullptr;
    return paths->keys[index].c_str();
}

drt_status drt_path_vertex(const drt_paths *paths, size_t index, size_t vertex,
                           drt_kinematic_state *state)
{
    if (!paths || !state)
        return fail(DRT_ERR_INVALID_ARGUMENT, "null argument");
    if (index >= paths->paths.size() || vertex >= paths->paths[index].vertices.size())
        return fail(DRT_ERR_INVALID_ARGUMENT, "path or vertex index out of range");
    last_error.clear();
    const auto &k = paths->paths[index].vertices[vertex];
    *state = {to_c(k.position), to_c(k.velocity), to_c(k.acceleration)};
    return DRT_OK;
}

void drt_paths_free(drt_paths *paths) { delete paths; }

void drt_run_options_init(drt_run_options *options)
{
    if (!options)
        return;
    const drt::RunOptions r;
    const drt::ProfileBins b;
    *options = {};
    options->span = r.span;
    options->step = r.step;
    drt_trace_config_init(&options->trace);
    options->tc = "auto";
    options->threads = 0;
    options->time_bin = b.time;
    options->delay_bin = b.delay;
    options->doppler_bin = b.doppler;
    options->seed = 42;
    options->scene_label = nullptr;
}

drt_status drt_run(const drt_scene *scene, drt_mode mode, const drt_run_options *options,
                   const char *out_dir, drt_run_summary *summary)
{
    return guarded([&] {
        if (!scene || !options || !out_dir)
            return fail(DRT_ERR_INVALID_ARGUMENT, "null argument");
        drt::RunRequest req;
        switch (mode)
        {
        case DRT_MODE_DRT:
            req.mode = drt::RunMode::drt;
            break;
        case DRT_MODE_RT:
            req.mode = drt::RunMode::rt;
            break;
        case DRT_MODE_COMPARE:
            req.mode = drt::RunMode::compare;
            break;
        default:
            return fail(DRT_ERR_INVALID_ARGUMENT, "unknown mode");
        }
        req.scene_path = options->scene_label ? options->scene_label : "";
        req.run.span = options->span;
        req.run.step = options->step;
        req.run.trace = to_core(options->trace);
        const std::string tc = options->tc ? options->tc : "auto";
        if (tc != "auto")
            req.run.schedule = drt::TcSchedule::parse(tc);
        if (options->threads < 0)
            return fail(DRT_ERR_INVALID_ARGUMENT, "threads must be >= 0");
        req.run.threads = options->threads;
        req.bins = {options->delay_bin, options->doppler_bin, options->time_bin};
        if (!(req.bins.delay > 0) || !(req.bins.doppler > 0) || !(req.bins.time > 0))
            return fail(DRT_ERR_INVALID_ARGUMENT, "bin widths must be positive");
        req.seed = options->seed;
        const drt::RunSummary s = drt::execute_run(scene->scene, req, out_dir);
        if (summary)
        {
            *summary = {};
            summary->steps = s.steps;
            summary->traces = s.traces;
            summary->drt_seconds = s.drt_timing.total;
            summary->rt_seconds = s.rt_timing.total;
            if (s.comparison)
            {
                const auto &c = *s.comparison;
                summary->matched_rays = c.matched_rays;
                summary->rt_only_rays = c.rt_only_rays;
                summary->drt_only_rays = c.drt_only_rays;
                summary->max_ray_error_db = c.max_ray_error_db;
                summary->max_pdp_error_db = c.pdp.max_error;
                summary->max_pdfp_error_db = c.pdfp.max_error;
                summary->structural_bins = c.pdp.structural + c.pdfp.structural;
            }
        }
        return DRT_OK;
    });
}

drt_status drt_validate(uint64_t seed, int cases, char **report)
{
    return guarded([&] {
        if (!report)
            return fail(DRT_ERR_INVALID_ARGUMENT, "null argument");
        drt::ValidationOptions o;
        o.seed = seed;
        if (cases > 0)
            o.cases = cases;
        const drt::ValidationReport r = drt::run_validation(o);
        *report = duplicate(r.text);
        if (!r.passed)
            return fail(DRT_ERR_VALIDATION, "validation failed");
        return DRT_OK;
    });
}

} // extern "C"
