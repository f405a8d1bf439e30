// SPDX-License-Identifier: Apache-2.0
//
// gscm - geometry-based stochastic channel simulator
// Copyright (C) 2026 The gscm authors
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

#ifndef gscm_sosfield_H
#define gscm_sosfield_H

#include "gscm/geometry.hpp"

#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

namespace gscm
{
    // Spatially correlated Gaussian field built from a sum of sinusoids:
    //
    //     x(p) = sqrt(2/N) * sum_i cos(k_i . p + psi_i)
    //
    // The wave vectors are drawn from the 3D power spectrum of the isotropic
    // autocorrelation exp(-|d| / d_c), which is a multivariate Cauchy law with
    // scale 1/d_c: k = z / (d_c * |g|) with z ~ N(0, I3), g ~ N(0, 1). The
    // expected autocorrelation E[cos(k . d)] is then exactly exp(-|d| / d_c).
    //
    // A generator is immutable after construction; its output is a pure function
    // of (seed, position).
    class SosGenerator
    {
    public:
        SosGenerator(double correlation_distance, std::size_t num_sinusoids, std::uint64_t seed);

        double sample_normal(const Vec3 &p) const;

        // Phi(sample_normal(p)), marginally uniform on (0, 1).
        double sample_uniform(const Vec3 &p) const;

        double correlation_distance() const noexcept { return correlation_distance_; }
        std::size_t num_sinusoids() const noexcept { return phase_.size(); }
        std::uint64_t seed() const noexcept { return seed_; }

        // Wave vectors in rad/m and phases in [0, 2pi).
        Vec3 wave_vector(std::size_t i) const { return {kx_[i], ky_[i], kz_[i]}; }
        double phase(std::size_t i) const { return phase_[i]; }

        bool operator==(const SosGenerator &other) const = default;

    private:
        double correlation_distance_;
        std::uint64_t seed_;
        double amplitude_;
        std::vector<double> kx_, ky_, kz_, phase_;
    };

    // (x_a(pT) + x_b(pR)) / 2 for two independent generators, one per link end.
    double sample_pairfield(const SosGenerator &departure, const SosGenerator &arrival,
                            const Vec3 &pT, const Vec3 &pR);

    // Standard normal CDF.
    double normal_cdf(double x);

    // Stable 64-bit seed derivation (splitmix64 chaining); independent of platform and call order.
    std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

    enum class FieldKind : std::uint64_t
    {
        lsp = 1, // index selects the LSP
        azimuth_departure = 10,
        azimuth_arrival = 11,
        elevation_departure = 12,
        elevation_arrival = 13,
        delay = 14,
        virtual_delay = 15,
        ray_phase = 16, // index selects the ray
        los_phase = 17,
    };

    enum class FieldEnd : std::uint64_t
    {
        shared = 0,
        departure = 1,
        arrival = 2,
    };

    // Thread-safe cache of generators keyed by (kind, cluster, end, index, correlation
    // distance). Seeds derive from the master seed and the key only, so every link
    // querying the same key observes the same field.
    class FieldBank
    {
    public:
        FieldBank(std::uint64_t master_seed, std::size_t num_sinusoids);

        std::shared_ptr<const SosGenerator> get(FieldKind kind, double correlation_distance,
                                                std::uint64_t cluster_id = 0,
                                                FieldEnd end = FieldEnd::shared,
                                                std::uint64_t index = 0);

        std::uint64_t master_seed() const noexcept { return master_seed_; }
        std::size_t num_sinusoids() const noexcept { return num_sinusoids_; }
        std::size_t size() const;

    private:
        using key_type = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>;

        std::uint64_t master_seed_;
        std::size_t num_sinusoids_;
        mutable std::mutex mutex_;
        std::map<key_type, std::shared_ptr<const SosGenerator>> cache_;
    };
}

#endif
