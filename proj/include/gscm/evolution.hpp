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

#ifndef gscm_evolution_H
#define gscm_evolution_H

#include "gscm/geometry.hpp"
#include "gscm/smallscale.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace gscm
{
    struct EvolutionParams
    {
        double lambda_g = 80.0; // generation rate, 1/m
        double lambda_r = 4.0;  // recombination rate, 1/m
        double dc_a = 30.0;     // scenario-dependent correlation factor, m
        double p_c = 0.0;       // probability of cluster movement
        double dt = 0.01;       // snapshot interval, s
        double dt_bd = 0.1;     // birth-death and LSP update interval, s
        bool birth_death = true;
        bool update_lsps = true;

        // Throws config_error listing every violated constraint.
        void validate() const;

        // Number of snapshots per birth-death interval.
        std::size_t steps_per_bd() const;
    };

    struct FluctuationState
    {
        double q_r = 0.0; // m
        double q_c = 0.0; // m
        double q = 0.0;   // m
        Vec3 mean_v_a = Vec3::Zero();
        Vec3 mean_v_z = Vec3::Zero();
    };

    struct ClusterVelocity
    {
        Vec3 first = Vec3::Zero(); // v^Z
        Vec3 last = Vec3::Zero();  // v^A
    };

    ClusterVelocity cluster_velocity(const Cluster &c, double t);

    // q_r from the Rx speed and q_c from the mean velocities of the alive clusters.
    FluctuationState channel_fluctuation(const Vec3 &v_ms, const std::vector<Cluster> &clusters,
                                         const EvolutionParams &params, double t, double dt_bd);

    double survival_probability(double q, const EvolutionParams &params);

    double expected_new_clusters(double p_surv, const EvolutionParams &params);

    struct BirthDeathOutcome
    {
        std::size_t removed = 0;  // dying clusters dropped
        std::size_t survived = 0; // alive clusters kept
        std::size_t died = 0;     // alive clusters turned dying
        std::size_t born = 0;     // new nascent clusters
    };

    using ClusterFactory = std::function<Cluster(std::uint64_t id)>;

    // One birth-death event: nascent clusters become alive, dying clusters are
    // removed, every alive cluster survives with p_surv or starts dying, and a
    // Poisson number of new clusters with the given mean is appended as nascent.
    BirthDeathOutcome birth_death_step(std::vector<Cluster> &clusters, double p_surv, double expected_births,
                                       std::mt19937_64 &rng, const ClusterFactory &factory, std::uint64_t &next_id);

    // Moves the distance vectors of all rays by one snapshot and refreshes the angles.
    // t is the time after the step and rx the Rx position at t. Throws geometry_error if a vector collapses.
    void drift_ray_geometry(Cluster &c, const Vec3 &tx, const Vec3 &rx, const Vec3 &v_ms, double t, double dt);

    // Re-samples the virtual delay at the current bounce positions and returns the cluster delay.
    double update_delays(Cluster &c, const Vec3 &tx, const Vec3 &rx);

    // Tilde parameters equivalent to the drifted geometry of a cluster.
    TildeParams current_tilde(const Cluster &c, const Vec3 &tx, const Vec3 &rx, const SpreadScales &scales);

    // Re-evaluates the powers of all present clusters; writes Cluster::power and
    // returns the powers as [f][l].
    std::vector<std::vector<double>> update_powers(std::vector<Cluster> &clusters, const FrequencyScaling &g,
                                                   const Vec3 &tx, const Vec3 &rx, const SpreadScales &scales);

    // Power weight of a cluster at snapshot j (0-based) of a birth-death window of k snapshots.
    double ramp_weight(ClusterStatus status, std::size_t j, std::size_t k);
}

#endif
