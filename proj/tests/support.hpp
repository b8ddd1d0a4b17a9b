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

#include "drt/geometry.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>

namespace drt::test {

inline std::string scene_path(const std::string &name) { return std::string(DRT_SCENES_DIR) + "/" + name; }

class Random
{
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    Vec3 vec(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
    Vec3 unit()
    {
        for (;;)
        {
            const Vec3 v = vec(-1, 1);
            const double n = norm(v);
            if (n > 0.1 && n <= 1.0)
                return v / n;
        }
    }
    std::mt19937_64 &engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline ::testing::AssertionResult vec_near(const Vec3 &a, const Vec3 &b, double tol)
{
    if (norm(a - b) <= tol)
        return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "(" << a.x << ", " << a.y << ", " << a.z << ") vs (" << b.x
                                         << ", " << b.y << ", " << b.z << "), |diff| = " << norm(a - b)
                                         << " > " << tol;
}

inline double rel_error(const Vec3 &a, const Vec3 &b) { return norm(a - b) / std::max(norm(b), 1.0); }

} // namespace drt::test
