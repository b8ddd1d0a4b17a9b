/* SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 * ------------------------------------------------------------------------
 */

#ifndef DRT_DRT_H
#define DRT_DRT_H

/* C interface of the dynamic ray-tracing engine. All handles are opaque and
 * owned by the caller; every function that can fail returns a drt_status and
 * leaves a message retrievable with drt_last_error() on the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DRT_BUILDING_LIBRARY)
#define DRT_API __declspec(dllexport)
#else
#define DRT_API __declspec(dllimport)
#endif
#else
#define DRT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum drt_status
{
    DRT_OK = 0,
    DRT_ERR_INVALID_ARGUMENT = 1,
    DRT_ERR_NOT_FOUND = 2,     /* scene file missing */
    DRT_ERR_PARSE = 3,         /* malformed scene text */
    DRT_ERR_SCENE = 4,         /* well-formed but invalid scene */
    DRT_ERR_GEOMETRY = 5,      /* degenerate geometry */
    DRT_ERR_IO = 6,            /* output could not be written */
    DRT_ERR_VALIDATION = 7,    /* oracle suite exceeded a tolerance */
    DRT_ERR_INTERNAL = 8
} drt_status;

typedef struct drt_scene drt_scene;
typedef struct drt_paths drt_paths;

typedef struct drt_vec3
{
    double x, y, z;
} drt_vec3;

typedef struct drt_kinematic_state
{
    drt_vec3 position;
    drt_vec3 velocity;
    drt_vec3 acceleration;
} drt_kinematic_state;

typedef struct drt_trace_config
{
    int max_reflections; /* 0..2 */
    int diffraction;     /* boolean */
    int scattering;      /* boolean */
} drt_trace_config;

typedef struct drt_path_info
{
    double time;     /* s */
    double length;   /* m */
    double delay;    /* s */
    double doppler;  /* Hz */
    double power;    /* W, 0 when expired */
    int expired;     /* boolean */
    size_t interactions;
    size_t vertices; /* interactions + 2 */
} drt_path_info;

typedef enum drt_mode
{
    DRT_MODE_DRT = 0,
    DRT_MODE_RT = 1,
    DRT_MODE_COMPARE = 2
} drt_mode;

typedef struct drt_run_options
{
    double span;        /* s */
    double step;        /* s */
    drt_trace_config trace;
    const char *tc;     /* "auto" or a comma list of refresh instants starting at 0 */
    int threads;        /* 0: hardware concurrency */
    double time_bin;    /* s */
    double delay_bin;   /* s */
    double doppler_bin; /* Hz */
    uint64_t seed;
    const char *scene_label; /* recorded in the manifest, may be NULL */
} drt_run_options;

typedef struct drt_run_summary
{
    int steps;
    int traces;
    long matched_rays;        /* compare mode: rays valid in both runs */
    long rt_only_rays;        /* compare mode: paths born after the last DRT trace */
    long drt_only_rays;       /* compare mode */
    double max_ray_error_db;  /* compare mode, over matched rays */
    double max_pdp_error_db;  /* compare mode */
    double max_pdfp_error_db; /* compare mode */
    long structural_bins;     /* compare mode */
    double drt_seconds;
    double rt_seconds;
} drt_run_summary;

DRT_API const char *drt_version(void);
/* Message of the last failure on this thread; empty after success. */
DRT_API const char *drt_last_error(void);
DRT_API void drt_string_free(char *text);

DRT_API drt_status drt_scene_parse(const char *text, drt_scene **out);
DRT_API drt_status drt_scene_load(const char *path, drt_scene **out);
/* Canonical text; parse(serialize(s)) reproduces s. Free with drt_string_free. */
DRT_API drt_status drt_scene_serialize(const drt_scene *scene, char **out);
DRT_API drt_status drt_scene_counts(const drt_scene *scene, size_t *objects, size_t *faces,
                                    size_t *edges, size_t *tiles);
DRT_API void drt_scene_free(drt_scene *scene);

DRT_API void drt_trace_config_init(drt_trace_config *config);
/* Snapshot trace at absolute time t, with kinematics of every vertex. */
DRT_API drt_status drt_trace(const drt_scene *scene, double t, const drt_trace_config *config,
                             drt_paths **out);
/* Paths of `base` recomputed at absolute time t; invalid ones are flagged expired. */
DRT_API drt_status drt_extrapolate(const drt_scene *scene, const drt_paths *base, double t,
                                   drt_paths **out);
DRT_API size_t drt_paths_count(const drt_paths *paths);
DRT_API drt_status drt_path_info_get(const drt_paths *paths, size_t index, drt_path_info *info);
/* Key such as "LOS" or "R:0:2>D:1:4"; valid until the handle is freed. */
DRT_API const char *drt_path_key(const drt_paths *paths, size_t index);
DRT_API drt_status drt_path_vertex(const drt_paths *paths, size_t index, size_t vertex,
                                   drt_kinematic_state *state);
DRT_API void drt_paths_free(drt_paths *paths);

DRT_API void drt_run_options_init(drt_run_options *options);
/* Runs a simulation and writes its CSV files and manifest.json into out_dir. */
DRT_API drt_status drt_run(const drt_scene *scene, drt_mode mode, const drt_run_options *options,
                           const char *out_dir, drt_run_summary *summary);

/* Seeded oracle suite. The report is always returned (free with
 * drt_string_free); DRT_ERR_VALIDATION when a category fails. cases <= 0
 * selects the default of 1000. */
DRT_API drt_status drt_validate(uint64_t seed, int cases, char **report);

#ifdef __cplusplus
}
#endif

#endif /* DRT_DRT_H */
