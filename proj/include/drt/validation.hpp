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

// Seeded oracle suite: analytic kinematics against finite differences, the
// closed-form chain against the snapshot image method, and the Doppler product
// against the phase derivative.

#include "drt/kinematics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace drt {

using RelativeAccelerationFn = Vec3 (*)(const Vec3 &, const FrameMotion &, const Vec3 &,
                                        const Vec3 &);

struct ValidationOptions
{
    std::uint64_t seed = 42;
    int cases = 1000; // random configurations per category
    double velocity_step = 1e-6;     // s
    double acceleration_step = 1e-4; // s
    double velocity_tolerance = 1e-6;
    double acceleration_tolerance = 1e-5;
    double position_tolerance = 1e-6; // m, closed form vs image method
    double doppler_tolerance = 1e-4;
    /// Frame transform under test; replaced by test fixtures to check that
    /// the suite catches a broken implementation.
    RelativeAccelerationFn relative_acceleration = &drt::relative_acceleration;
};

struct CategoryResult
{
    std::string name;
    std::string metric;
    int cases = 0;
    double max_error = 0.0;
    double tolerance = 0.0;
    std::string worst_case; // inputs of the worst case, for reproduction
    bool passed() const { return cases > 0 && max_error < tolerance; }
};

struct ValidationReport
{
    std::vector<CategoryResult> categories;
    bool passed = false;
    std::string text; // byte-stable rendering for a given seed
    const CategoryResult *find(const std::string &name) const;
};

/// Relative error |a - b| / max(|b|, 1).
double relative_error(const Vec3 &a, const Vec3 &b);
double relative_error(double a, double b);

ValidationReport run_validation(const ValidationOptions &options);

} // namespace drt
