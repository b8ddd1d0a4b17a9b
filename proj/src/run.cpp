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

#include "drt/run.hpp"

#include "drt/kinematics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <thread>

namespace drt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Worker
{
    double trace = 0.0, extrapolate = 0.0, field = 0.0;
    std::optional<SceneSnapshot> snapshot; // reused across steps

    const SceneSnapshot &pose(const Scene &scene, double t, bool tiles)
    {
        if (snapshot)
            repose_snapshot(*snapshot, t);
        else
            snapshot = make_snapshot(scene, t, tiles);
        return *snapshot;
    }
};

int resolve_threads(int requested)
{
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i, times) for i in [begin, end) on up to `threads` workers. Each
// index writes only its own output slot, so results do not depend on scheduling.
void parallel_steps(int begin, int end, int threads, Worker &total,
                    const std::function<void(int, Worker &)> &body)
{
    const int count = end - begin;
    if (count <= 0)
        return;
    const int workers = std::min(threads, count);
    if (workers <= 1)
    {
        for (int i = begin; i < end; ++i)
            body(i, total);
        return;
    }
    std::atomic<int> next{begin};
    std::vector<Worker> per(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try
            {
                for (int i = next++; i < end && !failed; i = next++)
                    body(i, per[static_cast<std::size_t>(w)]);
            }
            catch (...)
            {
                if (!failed.exchange(true))
                    error = std::current_exception();
            }
        });
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
    for (const auto &p : per)
    {
        total.trace += p.trace;
        total.extrapolate += p.extrapolate;
        total.field += p.field;
    }
}

std::vector<RayPath> traced_with_kinematics(const SceneSnapshot &snap, const Scene &scene,
                                            const TraceConfig &config)
{
    // Positions stay those of the image method; only the vertex velocities
    // (needed for Doppler) come from the closed-form kinematics.
    auto paths = trace_snapshot(snap, config);
    for (auto &p : paths)
    {
        const RayPath traced = p;
        if (!fill_path_kinematics(p, scene, snap.time))
        {
            p = traced;
            p.expired = false;
            continue;
        }
        for (std::size_t k = 0; k < p.vertices.size(); ++k)
            p.vertices[k].position = traced.vertices[k].position;
        p.interactions = traced.interactions;
        update_length(p);
    }
    return paths;
}

} // namespace

int step_count(const RunOptions &o)
{
    if (!(o.step > 0.0) || !std::isfinite(o.step))
        throw std::invalid_argument("step must be positive");
    if (!(o.span >= o.step) || !std::isfinite(o.span))
        throw std::invalid_argument("span must be at least one step");
    return static_cast<int>(std::llround(o.span / o.step));
}

ChannelSnapshot evaluate_snapshot(const std::vector<RayPath> &paths, const SceneSnapshot &snap)
{
    ChannelSnapshot cs;
    cs.time = snap.time;
    const double f0 = snap.scene->tx.frequency;
    for (const auto &p : paths)
    {
        if (p.expired)
        {
            cs.expired.push_back(p.key());
            cs.reasons.push_back(p.expiry_reason);
            continue;
        }
        const RayField f = path_field(p, snap);
        RaySample r;
        r.key = p.key();
        r.delay = f.delay;
        r.length = f.length;
        r.doppler = doppler_shift(p, f0).shift;
        r.power = f.power;
        r.amplitude = f.amplitude;
        cs.rays.push_back(std::move(r));
    }
    std::sort(cs.rays.begin(), cs.rays.end(), [](const RaySample &a, const RaySample &b) {
        if (a.delay != b.delay)
            return a.delay < b.delay;
        return a.key < b.key;
    });
    return cs;
}

std::vector<std::string> valid_keys(const ChannelSnapshot &snapshot)
{
    std::vector<std::string> keys;
    for (const auto &r : snapshot.rays)
        keys.push_back(r.key);
    std::sort(keys.begin(), keys.end());
    return keys;
}

RunResult run_drt(const Scene &scene, const RunOptions &options)
{
    const auto wall = Clock::now();
    const int n = step_count(options);
    const int threads = resolve_threads(options.threads);
    const bool tiles = options.trace.scattering;
    RunResult result;
    result.snapshots.resize(static_cast<std::size_t>(n));
    if (options.keep_paths)
        result.paths.resize(static_cast<std::size_t>(n));
    Worker times;

    auto time_of = [&](int i) { return scene.t0 + i * options.step; };
    auto extrapolate_step = [&](const std::vector<RayPath> &base, int i, Worker &st,
                                bool refreshed) {
        const SceneSnapshot &snap = st.pose(scene, time_of(i), tiles);
        auto t0 = Clock::now();
        auto paths = extrapolate_paths(base, scene, snap);
        st.extrapolate += seconds_since(t0);
        t0 = Clock::now();
        ChannelSnapshot cs = evaluate_snapshot(paths, snap);
        st.field += seconds_since(t0);
        cs.refreshed = refreshed;
        result.snapshots[static_cast<std::size_t>(i)] = std::move(cs);
        if (options.keep_paths)
            result.paths[static_cast<std::size_t>(i)] = std::move(paths);
    };

    if (options.schedule)
    {
        const TcSchedule &sched = *options.schedule;
        sched.check();
        result.refreshes = sched;
        for (std::size_t k = 0; k < sched.instants.size(); ++k)
        {
            const double start = sched.instants[k];
            const double stop = k + 1 < sched.instants.size() ? sched.instants[k + 1] : 1e300;
            auto index_at = [&](double rel) {
                return static_cast<int>(std::clamp(std::ceil(rel / options.step - 1e-9), 0.0,
                                                   static_cast<double>(n)));
            };
            const int first = index_at(start);
            const int last = index_at(stop);
            if (first >= last && k > 0)
                continue;
            const auto t0 = Clock::now();
            const std::vector<RayPath> base =
                trace_snapshot(make_snapshot(scene, scene.t0 + start, tiles), options.trace);
            times.trace += seconds_since(t0);
            ++result.timing.traces;
            parallel_steps(first, last, threads, times, [&](int i, Worker &st) {
                extrapolate_step(base, i, st, i == first);
            });
        }
    }
    else
    {
        result.refreshes.instants = {0.0};
        result.refreshes.causes = {RefreshCause::manual};
        auto t0 = Clock::now();
        std::vector<RayPath> base =
            trace_snapshot(make_snapshot(scene, scene.t0, tiles), options.trace);
        times.trace += seconds_since(t0);
        ++result.timing.traces;
        bool has_los = std::any_of(base.begin(), base.end(), [](const RayPath &p) { return p.is_los(); });
        for (int i = 0; i < n; ++i)
        {
            const SceneSnapshot &snap = times.pose(scene, time_of(i), tiles);
            t0 = Clock::now();
            auto paths = extrapolate_paths(base, scene, snap);
            bool expired = std::any_of(paths.begin(), paths.end(), [](const RayPath &p) { return p.expired; });
            bool los_born = !has_los && obstruction(snap, snap.tx.position, snap.rx.position, {}) < 0;
            times.extrapolate += seconds_since(t0);
            bool refreshed = i == 0;
            if (i > 0 && (expired || los_born))
            {
                t0 = Clock::now();
                base = trace_snapshot(snap, options.trace);
                paths = base;
                for (auto &p : paths)
                    fill_path_kinematics(p, scene, snap.time);
                times.trace += seconds_since(t0);
                ++result.timing.traces;
                has_los = std::any_of(base.begin(), base.end(), [](const RayPath &p) { return p.is_los(); });
                result.refreshes.instants.push_back(i * options.step);
                result.refreshes.causes.push_back(expired ? RefreshCause::expiry : RefreshCause::new_path);
                refreshed = true;
            }
            t0 = Clock::now();
            ChannelSnapshot cs = evaluate_snapshot(paths, snap);
            times.field += seconds_since(t0);
            cs.refreshed = refreshed;
            result.snapshots[static_cast<std::size_t>(i)] = std::move(cs);
            if (options.keep_paths)
                result.paths[static_cast<std::size_t>(i)] = std::move(paths);
        }
    }
    result.timing.trace = times.trace;
    result.timing.extrapolate = times.extrapolate;
    result.timing.field = times.field;
    result.timing.steps = n;
    result.timing.total = seconds_since(wall);
    return result;
}

RunResult run_rt(const Scene &scene, const RunOptions &options)
{
    const auto wall = Clock::now();
    const int n = step_count(options);
    RunResult result;
    result.snapshots.resize(static_cast<std::size_t>(n));
    if (options.keep_paths)
        result.paths.resize(static_cast<std::size_t>(n));
    Worker times;
    parallel_steps(0, n, resolve_threads(options.threads), times, [&](int i, Worker &st) {
        const double t = scene.t0 + i * options.step;
        const SceneSnapshot &snap = st.pose(scene, t, options.trace.scattering);
        auto t0 = Clock::now();
        auto paths = traced_with_kinematics(snap, scene, options.trace);
        st.trace += seconds_since(t0);
        t0 = Clock::now();
        ChannelSnapshot cs = evaluate_snapshot(paths, snap);
        st.field += seconds_since(t0);
        cs.refreshed = true;
        result.snapshots[static_cast<std::size_t>(i)] = std::move(cs);
        if (options.keep_paths)
            result.paths[static_cast<std::size_t>(i)] = std::move(paths);
    });
    for (int i = 0; i < n; ++i)
    {
        result.refreshes.instants.push_back(i * options.step);
        result.refreshes.causes.push_back(RefreshCause::manual);
    }
    result.timing.trace = times.trace;
    result.timing.field = times.field;
    result.timing.traces = n;
    result.timing.steps = n;
    result.timing.total = seconds_since(wall);
    return result;
}

RunComparison compare_runs(const RunResult &drt, const RunResult &rt, const ProfileBins &bins)
{
    if (drt.snapshots.size() != rt.snapshots.size())
        throw std::invalid_argument("runs have different step counts");
    if (drt.snapshots.empty())
        throw std::invalid_argument("runs have no steps");
    RunComparison c;
    std::vector<ChannelSnapshot> a, b;
    for (std::size_t i = 0; i < drt.snapshots.size(); ++i)
    {
        const auto &x = drt.snapshots[i];
        const auto &y = rt.snapshots[i];
        ChannelSnapshot ca{x.time, {}, {}, {}, x.refreshed};
        ChannelSnapshot cb{y.time, {}, {}, {}, y.refreshed};
        for (const auto &r : x.rays)
        {
            const auto q = std::find_if(y.rays.begin(), y.rays.end(),
                                        [&](const RaySample &s) { return s.key == r.key; });
            if (q == y.rays.end())
            {
                ++c.drt_only_rays;
                continue;
            }
            c.max_ray_error_db =
                std::max(c.max_ray_error_db, std::abs(watts_to_dbm(r.power) - watts_to_dbm(q->power)));
            ca.rays.push_back(r);
            cb.rays.push_back(*q);
            ++c.matched_rays;
        }
        c.rt_only_rays += static_cast<long>(y.rays.size() - cb.rays.size());
        a.push_back(std::move(ca));
        b.push_back(std::move(cb));
    }
    c.pdp = error_map(build_pdp(a, bins.delay, bins.time), build_pdp(b, bins.delay, bins.time));
    c.pdfp = error_map(build_pdfp(a, bins.doppler, bins.time), build_pdfp(b, bins.doppler, bins.time));
    return c;
}

} // namespace drt
