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

#ifndef gscm_smallscale_H
#define gscm_smallscale_H

#include "gscm/geometry.hpp"
#include "gscm/largescale.hpp"
#include "gscm/sosfield.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace gscm
{
    // Frequency-independent cluster parameters before scaling. The delay is a unit
    // exponential variate, the angles lie in (-pi/2, pi/2).
    struct TildeParams
    {
        double delay = 0.0;
        double aod = 0.0; // azimuth of departure
        double aoa = 0.0; // azimuth of arrival
        double eod = 0.0; // elevation of departure
        double eoa = 0.0; // elevation of arrival
    };

    // Delay and angular spreads (s, rad) in the order ds, asd, asa, esd, esa.
    struct SpreadSet
    {
        double ds = 0.0;
        double asd = 0.0;
        double asa = 0.0;
        double esd = 0.0;
        double esa = 0.0;

        static SpreadSet from_lsps(const LspSet &lsp);
        double &operator[](std::size_t i);
        double operator[](std::size_t i) const;
    };

    // Multiplicative factors mapping tilde values to physical excess delays (s) and
    // LOS-relative angles (rad).
    using SpreadScales = SpreadSet;

    struct GFactors
    {
        double ds = 0.0;  // per unit tilde delay
        double asd = 0.0; // 1/rad^2
        double asa = 0.0; // 1/rad^2
        double esd = 0.0; // 1/rad
        double esa = 0.0; // 1/rad

        double &operator[](std::size_t i);
        double operator[](std::size_t i) const;
        bool operator==(const GFactors &) const = default;
    };

    struct FrequencyScaling
    {
        std::vector<GFactors> g; // one entry per carrier
    };

    struct RayOffsets
    {
        std::vector<double> alpha; // unitless, symmetric about 0
        double c_asd = 0.0;        // deg
        double c_asa = 0.0;
        double c_esd = 0.0;
        double c_esa = 0.0;

        // The 20 offsets used by 3GPP-style models.
        static std::vector<double> default_alpha();
    };

    // Spatially correlated generators of one cluster.
    struct ClusterFields
    {
        std::shared_ptr<const SosGenerator> aod_tx, aod_rx, aoa_tx, aoa_rx;
        std::shared_ptr<const SosGenerator> eod_tx, eod_rx, eoa_tx, eoa_rx;
        std::shared_ptr<const SosGenerator> delay_tx, delay_rx;
        std::shared_ptr<const SosGenerator> virtual_tx, virtual_rx;
        std::vector<std::shared_ptr<const SosGenerator>> phase_tx, phase_rx; // one per ray
    };

    struct SspCorrelation
    {
        double cluster = 10.0;       // angles and delays, m
        double virtual_delay = 10.0; // m
        double phase = 10.0;         // initial ray phases, m
    };

    ClusterFields make_cluster_fields(FieldBank &bank, std::uint64_t cluster_id, std::size_t num_rays,
                                      const SspCorrelation &corr);

    // Initial angle from the two end normals, strictly inside (-pi/2, pi/2).
    double initial_angle(double x_departure, double x_arrival);

    // -ln(x) with x clamped to the smallest positive normal.
    double initial_delay(double x);

    // Uniform variate on (0, 1) from a pair of end fields: Phi(sqrt(2) * pairfield).
    double pair_uniform(const SosGenerator &departure, const SosGenerator &arrival, const Vec3 &pT, const Vec3 &pR);

    struct InitialAngles
    {
        std::vector<double> aod, aoa, eod, eoa;
    };

    InitialAngles draw_initial_angles(const Vec3 &pT, const Vec3 &pR, const std::vector<ClusterFields> &fields);
    std::vector<double> draw_initial_delays(const Vec3 &pT, const Vec3 &pR, const std::vector<ClusterFields> &fields);
    TildeParams draw_tilde_params(const Vec3 &pT, const Vec3 &pR, const ClusterFields &fields);

    // Unnormalized power exponent of one cluster.
    double power_exponent(const TildeParams &c, const GFactors &g);

    // Powers per carrier, [f][l], each column summing to one.
    std::vector<std::vector<double>> multi_freq_powers(const std::vector<TildeParams> &clusters, const FrequencyScaling &g);

    // Power-weighted RMS of values around their weighted mean.
    double weighted_spread(const std::vector<double> &values, const std::vector<double> &weights);

    // Spreads of the tilde values under powers computed from g (elevation clipping ignored).
    SpreadSet tilde_spreads(const std::vector<TildeParams> &clusters, const GFactors &g);

    // Per-carrier g such that the power-weighted spreads of the tilde values equal
    // the targets (given in the tilde domain). Throws numerical_error on failure.
    FrequencyScaling compute_g_factors(const std::vector<SpreadSet> &tilde_targets, const std::vector<TildeParams> &clusters,
                                       const FrequencyScaling *initial = nullptr);

    // Same, with targets taken from the LSPs and divided by the scales.
    FrequencyScaling compute_g_factors(const std::vector<LspSet> &lsps, const std::vector<TildeParams> &clusters,
                                       const SpreadScales &scales, const FrequencyScaling *initial = nullptr);

    // Least-squares fit of the log tilde spreads to the targets, with a pull of strength
    // `regularization` towards the previous g. Used to follow slowly varying targets.
    FrequencyScaling fit_g_factors(const std::vector<SpreadSet> &tilde_targets, const std::vector<TildeParams> &clusters,
                                   const FrequencyScaling &previous, double regularization);

    struct ScalingOptions
    {
        double delay_headroom = 3.0;  // preferred delay spread reduction by the powers
        double regularization = 3e-3; // pull of g towards the preferred values
        double tracking = 0.1;        // pull of g towards its previous value on LSP updates
        std::size_t max_iterations = 20;
        double tolerance = 0.01;
    };

    struct ScaledParams
    {
        SpreadScales scales;
        FrequencyScaling g;
        std::vector<std::vector<double>> powers; // [f][l]
        std::vector<SpreadSet> realized;         // per carrier
        std::size_t iterations = 0;
        bool degenerate = false; // fewer than two clusters, spreads undefined
    };

    // Excess delay (s) and LOS-relative angles (rad) of a cluster for the given scales.
    TildeParams scaled_values(const TildeParams &tilde, const SpreadScales &scales);

    // Spreads of the scaled values weighted by the given powers.
    SpreadSet realized_spreads(const std::vector<TildeParams> &clusters, const SpreadScales &scales,
                               const std::vector<double> &powers);

    // Finds scales and g so that the power-weighted spreads of the scaled values match
    // the LSP targets at every carrier. Throws numerical_error on non-convergence.
    ScaledParams scale_to_spreads(const std::vector<TildeParams> &clusters, const std::vector<LspSet> &lsps,
                                  const ScalingOptions &options = {});

    struct ClusterAngles
    {
        AnglePair departure;
        AnglePair arrival;
    };

    ClusterAngles finalize_cluster_angles(const TildeParams &scaled, const AnglePair &los_departure,
                                          const AnglePair &los_arrival);

    std::vector<AnglePair> ray_angles(const AnglePair &cluster, const std::vector<double> &alpha,
                                      double c_azimuth_deg, double c_elevation_deg);

    struct Placement
    {
        double d_tx = 0.0; // Tx to first bounce, m
        double d_rx = 0.0; // Rx to last bounce, m
        double d_za = 0.0; // first to last bounce, m
        Vec3 first_bounce = Vec3::Zero();
        Vec3 last_bounce = Vec3::Zero();
    };

    // Places both bounce points so that (d_tx + d_rx + d_za) / c + virtual_delay equals
    // total_delay. rho in [0, 1] selects the Rx-side distance as a fraction of its
    // single-bounce maximum. Throws geometry_error if the path is shorter than LOS.
    Placement place_cluster(double total_delay, double virtual_delay, const AnglePair &departure,
                            const AnglePair &arrival, const Vec3 &pT, const Vec3 &pR, double rho);

    struct Ray
    {
        AnglePair departure;
        AnglePair arrival;
        Vec3 d_tx = Vec3::Zero(); // Tx to first-bounce point of the ray
        Vec3 d_rx = Vec3::Zero(); // Rx to last-bounce point of the ray
        double d_za = 0.0;
        double xpr = 1.0;                         // linear
        std::array<double, 4> pol_phase{};        // theta-theta, theta-phi, phi-theta, phi-phi
        double initial_phase = 0.0;
    };

    enum class ClusterStatus
    {
        nascent,
        alive,
        dying
    };

    struct Cluster
    {
        std::uint64_t id = 0;
        ClusterStatus status = ClusterStatus::alive;
        double birth_time = 0.0;

        TildeParams tilde;              // at birth
        double excess_delay0 = 0.0;     // s, at birth
        AnglePair relative_departure0;  // LOS-relative angles at birth
        AnglePair relative_arrival0;

        std::vector<double> power; // per carrier
        double delay = 0.0;        // s
        double virtual_delay = 0.0;
        double virtual_beta = 0.0; // s

        Vec3 d_tx = Vec3::Zero(); // Tx to first-bounce centre
        Vec3 d_rx = Vec3::Zero(); // Rx to last-bounce centre
        Vec3 first_bounce0 = Vec3::Zero();
        Vec3 last_bounce0 = Vec3::Zero();
        Vec3 rx_anchor = Vec3::Zero(); // Rx position at birth
        Trajectory first_track;       // velocity source of the first bounce
        Trajectory last_track;

        ClusterFields fields;
        std::vector<Ray> rays;
    };

    // Per-link state needed to construct a cluster.
    struct ClusterContext
    {
        Vec3 tx = Vec3::Zero();
        Vec3 rx = Vec3::Zero();
        double time = 0.0;
        SpreadScales scales;
        RayOffsets offsets;
        double xpr_db = 0.0;       // link XPR median
        double xpr_sigma_db = 3.0; // per-ray spread around it
        double virtual_delay_mean = 5e-9;
        double rho_min = 0.3;
        double rho_max = 0.7;
        double motion_probability = 0.0;
        double motion_speed = 0.0;
        double motion_radius = 1.0;
        TrajectoryKind motion_kind = TrajectoryKind::linear;
        std::size_t num_rays = 20;
    };

    // Builds a cluster from its tilde parameters: LOS rotation, ray offsets,
    // placement, virtual delay, polarization, initial phases and motion.
    Cluster build_cluster(std::uint64_t id, const TildeParams &tilde, ClusterFields fields,
                          const ClusterContext &ctx, std::mt19937_64 &rng);

    // A cluster whose rays all bounce once at the given point.
    Cluster make_point_cluster(std::uint64_t id, const Vec3 &point, ClusterFields fields, const ClusterContext &ctx,
                               std::mt19937_64 &rng);

    // Cluster delay from the current ray geometry: ray-average path plus virtual delay.
    double ray_average_delay(const Cluster &c);

    // Virtual link delay of a cluster at its current bounce positions.
    double sample_virtual_delay(const Cluster &c, const Vec3 &tx, const Vec3 &rx);
}

#endif
