/*
 Copyright 2026 The hybridopt Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef HYBRIDOPT_COMMON_TYPES_HPP
#define HYBRIDOPT_COMMON_TYPES_HPP

#include <Eigen/Dense>

namespace hybridopt {

// State and control vectors are tiny (the benchmarks are 1-D and 2-D), and the
// grid solvers evaluate the dynamics hundreds of millions of times. Bounded
// dynamic storage keeps them off the heap.
inline constexpr int kMaxStateDim = 8;
inline constexpr int kMaxControlDim = 4;

using StateVector =
    Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxStateDim, 1>;
using ControlVector =
    Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxControlDim, 1>;
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                  Eigen::ColMajor, kMaxStateDim, kMaxStateDim>;
using InputMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                  Eigen::ColMajor, kMaxStateDim, kMaxControlDim>;
using ControlMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                    Eigen::ColMajor, kMaxControlDim, kMaxControlDim>;
using GainMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::ColMajor, kMaxControlDim, kMaxStateDim>;

inline constexpr int kMaxBoundaries = 32;
using BoundaryVector =
    Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxBoundaries, 1>;

/// 1-based mode index, as in the problem statement.
using ModeId = int;

}  // namespace hybridopt

#endif  // HYBRIDOPT_COMMON_TYPES_HPP
