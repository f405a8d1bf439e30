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

#include "gscm/evolution.hpp"
#include "gscm/error.hpp"

#include <cmath>
#include <string>

namespace gscm
{
    void EvolutionParams::validate() const
    {
        std::vector<std::string> v;
        if (!(lambda_g >= 0.0))
            v.push_back("evolution.lambda_g: must be >= 0");
        if (!(lambda_r > 0.0))
            v.push_back("evolution.lambda_r: must be > 0");
        if (!(dc_a > 0.0))
            v.push_back("evolution.dc_a: must be > 0");
        if (!(p_c >= 0.0 && p_c <= 1.0))
            v.push_back("evolution.p_c: must lie in [0, 1]");
        if (!(dt > 0.0))
            v.push_back("time.dt: must be > 0");
        if (!(dt_bd > 0.0))
            v.push_back("time.dt_bd: must be > 0");
        if (dt > 0.0 && dt_bd > 0.0)
        {
            double k = dt_bd / dt;
            if (k < 1.0 - 1e-9 || std::abs(k - std::round(k)) > 1e-9 * k)
                v.push_back("time.dt_bd: " + std::to_string(dt_bd) + " s is not an integer multiple of time.dt " +
                            std::to_string(dt) + " s");
        }
        if (!v.empty())
            throw config_error(v);
    }

    std::size_t EvolutionParams::steps_per_bd() const
    {
        return static_cast<std::size_t>(std::llround(dt_bd / dt));
    }

    ClusterVelocity cluster_velocity(const Cluster &c, double t)
    {
        ClusterVelocity v;
        if (c.first_track.kind != TrajectoryKind::stationary)
            v.first = trajectory_state(c.first_track, std::max(t, c.first_track.start_time)).velocity;
        if (c.last_track.kind != TrajectoryKind::stationary)
            v.last = trajectory_state(c.last_track, std::max(t, c.last_track.start_time)).velocity;
        return v;
    }

    FluctuationState channel_fluctuation(const Vec3 &v_ms, const std::vector<Cluster> &clusters,
                                         const EvolutionParams &params, double t, double dt_bd)
    {
        if (!(dt_bd > 0.0))
            throw std::invalid_argument("channel_fluctuation: dt_bd must be positive");

        FluctuationState s;
        std::size_t n = 0;
        for (const auto &c : clusters)
        {
            if (c.status != ClusterStatus::alive)
                continue;
            auto v = cluster_velocity(c, t);
            s.mean_v_z += v.first;
            s.mean_v_a += v.last;
            ++n;
        }
        if (n > 0)
        {
            s.mean_v_z /= static_cast<double>(n);
            s.mean_v_a /= static_cast<double>(n);
        }
        s.q_r = v_ms.norm() * dt_bd;
        s.q_c = params.p_c * (s.mean_v_a.norm() + s.mean_v_z.norm()) * dt_bd;
        s.q = s.q_r + s.q_c;
        return s;
    }

    double survival_probability(double q, const EvolutionParams &params)
    {
        return std::exp(-params.lambda_r * q / params.dc_a);
    }

    double expected_new_clusters(double p_surv, const EvolutionParams &params)
    {
        return params.lambda_g / params.lambda_r * (1.0 - p_surv);
    }

    BirthDeathOutcome birth_death_step(std::vector<Cluster> &clusters, double p_surv, double expected_births,
                                       std::mt19937_64 &rng, const ClusterFactory &factory, std::uint64_t &next_id)
    {
        BirthDeathOutcome out;
        std::vector<Cluster> kept;
        kept.reserve(clusters.size());
        for (auto &c : clusters)
        {
            if (c.status == ClusterStatus::dying)
            {
                ++out.removed;
                continue;
            }
            c.status = ClusterStatus::alive;
            kept.push_back(std::move(c));
        }

        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (auto &c : kept)
        {
            if (u01(rng) < p_surv)
                ++out.survived;
            else
            {
                c.status = ClusterStatus::dying;
                ++out.died;
            }
        }

        if (expected_births > 0.0)
        {
            std::poisson_distribution<long> pois(expected_births);
            const long n = pois(rng);
            for (long i = 0; i < n; ++i)
            {
                Cluster c = factory(next_id++);
                c.status = ClusterStatus::nascent;
                kept.push_back(std::move(c));
                ++out.born;
            }
        }
        clusters = std::move(kept);
        return out;
    }

    void drift_ray_geometry(Cluster &c, const Vec3 &tx, const Vec3 &rx, const Vec3 &v_ms, double t, double dt)
    {
        const ClusterVelocity v = cluster_velocity(c, t);
        const Vec3 step_t = v.first * dt;
        const Vec3 step_r = (v.last - v_ms) * dt;

        c.d_tx += step_t;
        c.d_rx += step_r;
        constexpr double min_length = 1e-9; // m
        for (auto &r : c.rays)
        {
            r.d_tx += step_t;
            r.d_rx += step_r;
            if (r.d_tx.norm() < min_length || r.d_rx.norm() < min_length)
                throw geometry_error("drift: cluster " + std::to_string(c.id) +
                                     " collapsed onto a link end (zero-length distance vector)");
            r.d_za = ((rx + r.d_rx) - (tx + r.d_tx)).norm();
            r.departure = direction_to_angles(r.d_tx);
            r.arrival = direction_to_angles(r.d_rx);
        }
    }

    double update_delays(Cluster &c, const Vec3 &tx, const Vec3 &rx)
    {
        c.virtual_delay = sample_virtual_delay(c, tx, rx);
        c.delay = ray_average_delay(c);
        return c.delay;
    }

    TildeParams current_tilde(const Cluster &c, const Vec3 &tx, const Vec3 &rx, const SpreadScales &s)
    {
        TildeParams t = c.tilde;
        const double excess = c.delay - (rx - tx).norm() / speed_of_light;
        t.delay += (excess - c.excess_delay0) / s.ds;

        if (c.d_tx.norm() > 0.0 && c.d_rx.norm() > 0.0)
        {
            const AnglePair dep = remove_los_rotation(direction_to_angles(c.d_tx), direction_to_angles(rx - tx));
            const AnglePair arr = remove_los_rotation(direction_to_angles(c.d_rx), direction_to_angles(tx - rx));
            t.aod += wrap_azimuth(dep.azimuth - c.relative_departure0.azimuth) / s.asd;
            t.aoa += wrap_azimuth(arr.azimuth - c.relative_arrival0.azimuth) / s.asa;
            t.eod += (dep.elevation - c.relative_departure0.elevation) / s.esd;
            t.eoa += (arr.elevation - c.relative_arrival0.elevation) / s.esa;
        }
        return t;
    }

    std::vector<std::vector<double>> update_powers(std::vector<Cluster> &clusters, const FrequencyScaling &g,
                                                   const Vec3 &tx, const Vec3 &rx, const SpreadScales &scales)
    {
        std::vector<TildeParams> tilde;
        tilde.reserve(clusters.size());
        for (const auto &c : clusters)
            tilde.push_back(current_tilde(c, tx, rx, scales));

        auto p = multi_freq_powers(tilde, g);
        for (std::size_t l = 0; l < clusters.size(); ++l)
        {
            clusters[l].power.resize(p.size());
            for (std::size_t f = 0; f < p.size(); ++f)
                clusters[l].power[f] = p[f][l];
        }
        return p;
    }

    double ramp_weight(ClusterStatus status, std::size_t j, std::size_t k)
    {
        const double x = static_cast<double>(j + 1) / static_cast<double>(k);
        switch (status)
        {
        case ClusterStatus::nascent:
            return x;
        case ClusterStatus::dying:
            return 1.0 - x;
        default:
            return 1.0;
        }
    }
}
