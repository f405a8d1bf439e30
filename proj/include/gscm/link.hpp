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

#ifndef gscm_link_H
#define gscm_link_H

#include "gscm/antenna.hpp"
#include "gscm/cir_tensor.hpp"
#include "gscm/evolution.hpp"
#include "gscm/largescale.hpp"
#include "gscm/smallscale.hpp"
#include "gscm/sosfield.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace gscm
{
    struct SspParams
    {
        SspCorrelation correlation;
        double xpr_sigma_db = 3.0;        // per-ray XPR spread around the link value
        double virtual_delay_mean = 5e-9; // s
        double rho_min = 0.3;
        double rho_max = 0.7;
    };

    struct MotionParams
    {
        TrajectoryKind kind = TrajectoryKind::linear;
        double speed = 0.0;  // m/s
        double radius = 1.0; // m, circular motion
    };

    struct LinkConfig
    {
        Vec3 tx = Vec3::Zero();
        Trajectory rx;
        AntennaArray tx_array = AntennaArray::single();
        AntennaArray rx_array = AntennaArray::single();
        std::vector<double> frequencies_hz;
        std::size_t num_clusters = 20;
        std::size_t num_rays = 20;
        EvolutionParams evolution;
        LspDistributions lsp;
        PathLossModel path_loss;
        SspParams ssp;
        RayOffsets offsets;
        ScalingOptions scaling;
        MotionParams motion;
        std::uint64_t tx_id = 0;
        std::uint64_t link_key = 0; // seeds the per-link random stream
        bool apply_large_scale = false;

        // When non-empty, static single-bounce clusters at these points replace the
        // stochastic initial clusters and the powers stay equal.
        std::vector<Vec3> point_scatterers;
    };

    // Stable key of a link built from its geometry, so coincident links draw identically
    // and adding links leaves the others untouched.
    std::uint64_t trajectory_key(const Vec3 &tx, const Trajectory &rx);

    // Sequential state machine of one link. The constructor initializes snapshot 0;
    // advance() moves to the next snapshot, applying birth-death and LSP updates on the
    // birth-death grid.
    class LinkSimulator
    {
    public:
        LinkSimulator(LinkConfig cfg, FieldBank &bank);

        void advance();

        std::size_t snapshot() const noexcept { return p_; }
        double time() const noexcept { return static_cast<double>(p_) * cfg_.evolution.dt; }
        const LinkConfig &config() const noexcept { return cfg_; }

        Vec3 rx_position() const { return rx_.position; }
        Vec3 rx_velocity() const { return rx_.velocity; }

        const std::vector<Cluster> &clusters() const noexcept { return clusters_; }
        const std::vector<LspSet> &lsps() const noexcept { return lsps_; }
        const FrequencyScaling &g_factors() const noexcept { return g_; }
        const SpreadScales &scales() const noexcept { return scales_; }
        bool degenerate() const noexcept { return degenerate_; }
        const BirthDeathOutcome &last_event() const noexcept { return last_event_; }

        double wavelength(std::size_t f) const;
        double k_factor(std::size_t f) const { return lsps_.at(f).k_factor; }
        bool has_los() const { return cfg_.lsp.los; }

        // Snapshot index inside the current birth-death window.
        std::size_t window_index() const noexcept { return p_ % k_; }

        // Raw ray term of the channel sum without sqrt(P / M): ramp and sqrt(1 / (K + 1)) included.
        std::complex<double> ray_term(std::size_t u, std::size_t s, std::size_t f, std::size_t cluster,
                                      std::size_t ray) const;
        std::complex<double> ray_gain(std::size_t cluster, std::size_t ray) const;
        double ray_phase(std::size_t u, std::size_t s, std::size_t f, std::size_t cluster, std::size_t ray) const;
        double ray_amplitude(std::size_t f, std::size_t cluster) const;

        std::complex<double> los_term(std::size_t u, std::size_t s, std::size_t f) const;
        double los_delay() const;

    private:
        ClusterContext context() const;
        void refresh_powers();
        void birth_death_event();

        LinkConfig cfg_;
        FieldBank &bank_;
        std::mt19937_64 rng_;
        std::size_t p_ = 0;
        std::size_t k_ = 1;
        TrajectoryState rx_;
        LspTrack track_;
        std::vector<LspSet> lsps_;
        FrequencyScaling g_;
        SpreadScales scales_{1.0, 1.0, 1.0, 1.0, 1.0};
        bool degenerate_ = false;
        bool fixed_powers_ = false;
        double los_phase0_ = 0.0;
        std::vector<Cluster> clusters_;
        std::uint64_t next_id_ = 0;
        BirthDeathOutcome last_event_;
    };

    using SnapshotObserver = std::function<void(const LinkSimulator &)>;

    // Runs a link for the given number of snapshots and assembles the scaled CIR.
    // Tap slot 0 holds the LOS path in LOS scenarios; clusters follow in order of
    // first appearance.
    CirTensor simulate_link(const LinkConfig &cfg, FieldBank &bank, std::size_t num_snapshots,
                            const SnapshotObserver &observer = {});
}

#endif
