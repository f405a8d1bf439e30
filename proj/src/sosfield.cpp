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

#include "gscm/sosfield.hpp"
#include "gscm/error.hpp"

#include <bit>
#include <cmath>
#include <random>

namespace gscm
{
    namespace
    {
        constexpr std::uint64_t splitmix64(std::uint64_t z)
        {
            z += 0x9e3779b97f4a7c15ULL;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            return z ^ (z >> 31);
        }
    }

    SosGenerator::SosGenerator(double correlation_distance, std::size_t num_sinusoids, std::uint64_t seed)
        : correlation_distance_(correlation_distance), seed_(seed)
    {
        if (!(correlation_distance > 0.0) || !std::isfinite(correlation_distance))
            throw config_error("SoS generator: correlation distance must be positive");
        if (num_sinusoids == 0)
            throw config_error("SoS generator: number of sinusoids must be at least 1");

        amplitude_ = std::sqrt(2.0 / double(num_sinusoids));
        kx_.resize(num_sinusoids);
        ky_.resize(num_sinusoids);
        kz_.resize(num_sinusoids);
        phase_.resize(num_sinusoids);

        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> uniform(0.0, 2.0 * pi);

        for (std::size_t i = 0; i < num_sinusoids; ++i)
        {
            double g = 0.0;
            while (g == 0.0)
                g = std::abs(normal(rng));
            double scale = 1.0 / (correlation_distance * g);
            kx_[i] = normal(rng) * scale;
            ky_[i] = normal(rng) * scale;
            kz_[i] = normal(rng) * scale;
            phase_[i] = uniform(rng);
        }
    }

    double SosGenerator::sample_normal(const Vec3 &p) const
    {
        const double x = p.x(), y = p.y(), z = p.z();
        const std::size_t n = phase_.size();
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sum += std::cos(kx_[i] * x + ky_[i] * y + kz_[i] * z + phase_[i]);
        return amplitude_ * sum;
    }

    double SosGenerator::sample_uniform(const Vec3 &p) const
    {
        return normal_cdf(sample_normal(p));
    }

    double sample_pairfield(const SosGenerator &departure, const SosGenerator &arrival,
                            const Vec3 &pT, const Vec3 &pR)
    {
        return 0.5 * (departure.sample_normal(pT) + arrival.sample_normal(pR));
    }

    double normal_cdf(double x)
    {
        return 0.5 * std::erfc(-x / std::sqrt(2.0));
    }

    std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys)
    {
        std::uint64_t h = splitmix64(master);
        for (std::uint64_t k : keys)
            h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
        return h;
    }

    FieldBank::FieldBank(std::uint64_t master_seed, std::size_t num_sinusoids)
        : master_seed_(master_seed), num_sinusoids_(num_sinusoids)
    {
        if (num_sinusoids == 0)
            throw config_error("field bank: number of sinusoids must be at least 1");
    }

    std::shared_ptr<const SosGenerator> FieldBank::get(FieldKind kind, double correlation_distance,
                                                       std::uint64_t cluster_id, FieldEnd end,
                                                       std::uint64_t index)
    {
        key_type key{static_cast<std::uint64_t>(kind), cluster_id, static_cast<std::uint64_t>(end), index,
                     std::bit_cast<std::uint64_t>(correlation_distance)};

        std::lock_guard lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end())
            return it->second;

        std::uint64_t seed = derive_seed(master_seed_, {std::get<0>(key), std::get<1>(key), std::get<2>(key),
                                                        std::get<3>(key), std::get<4>(key)});
        auto gen = std::make_shared<const SosGenerator>(correlation_distance, num_sinusoids_, seed);
        cache_.emplace(key, gen);
        return gen;
    }

    std::size_t FieldBank::size() const
    {
        std::lock_guard lock(mutex_);
        return cache_.size();
    }
}
