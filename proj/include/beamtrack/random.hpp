// SPDX-License-Identifier: Apache-2.0
//
// beamtrack: beam-pair allocation and tracking for time-varying mmWave MIMO links
// Copyright (C) 2026 The beamtrack authors
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

#ifndef BEAMTRACK_RANDOM_HPP
#define BEAMTRACK_RANDOM_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace beamtrack
{

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds from (master, counter)
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter, std::uint64_t lane = 0)
{
    return splitmix64(splitmix64(master ^ splitmix64(counter)) + lane);
}

// CN(0, variance): independent real and imaginary parts with variance / 2 each
inline std::complex<double> complex_gaussian(Rng &rng, double variance)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5 * variance));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

// Independent streams for one simulated frame. Channel evolution and receiver noise are
// drawn from separate engines so that strategies compared on the same frame seed see the
// same channel trajectory.
struct FrameStreams
{
    Rng channel;
    Rng noise;

    explicit FrameStreams(std::uint64_t frame_seed)
        : channel(derive_seed(frame_seed, 0, 1)), noise(derive_seed(frame_seed, 0, 2)) {}
};

} // namespace beamtrack

#endif
