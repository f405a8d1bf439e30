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

#ifndef gscm_largescale_H
#define gscm_largescale_H

#include "gscm/geometry.hpp"
#include "gscm/sosfield.hpp"

#include <Eigen/Core>
#include <array>
#include <memory>
#include <string>
#include <vector>

namespace gscm
{
    // Order of the eight large-scale parameters in every table and vector.
    enum class Lsp : std::size_t
    {
        ds = 0, // delay spread, log10(s)
        k = 1,  // K-factor, dB
        sf = 2, // shadow fading, dB
        esd = 3,
        esa = 4,
        asd = 5,
        asa = 6, // angular spreads, log10(deg)
        xpr = 7  // cross-polarization ratio, dB
    };
    inline constexpr std::size_t num_lsps = 8;
    inline constexpr std::array<const char *, num_lsps> lsp_names = {"ds", "k", "sf", "esd", "esa", "asd", "asa", "xpr"};

    // Normal law of one LSP in its native domain (log10 or dB). Mean and standard
    // deviation may depend on the carrier through log10(1 + fc[GHz]).
    struct LspDistribution
    {
        double mu = 0.0;
        double mu_f = 0.0;
        double sigma = 0.0;
        double sigma_f = 0.0;
        double correlation_distance = 10.0; // m

        double mean(double fc_ghz) const;
        double stddev(double fc_ghz) const;
    };

    struct LspDistributions
    {
        std::array<LspDistribution, num_lsps> params{};
        Eigen::Matrix<double, num_lsps, num_lsps> correlation = Eigen::Matrix<double, num_lsps, num_lsps>::Identity();
        bool los = true; // K = 0 when false

        LspDistribution &operator[](Lsp p) { return params[static_cast<std::size_t>(p)]; }
        const LspDistribution &operator[](Lsp p) const { return params[static_cast<std::size_t>(p)]; }
    };

    struct LspSet
    {
        double ds = 0.0;       // s
        double k_factor = 0.0; // linear
        double sf = 0.0;       // dB
        double esd = 0.0;      // rad
        double esa = 0.0;
        double asd = 0.0;
        double asa = 0.0;
        double xpr = 0.0; // dB

        bool operator==(const LspSet &) const = default;
    };

    // Path loss A + B log10(d3d) + C log10(fc[GHz]).
    struct PathLossModel
    {
        std::string scenario;
        double intercept = 0.0;
        double distance_exponent = 0.0;
        double frequency_exponent = 0.0;
    };

    // Matrix M with M M^T = C, lower triangular up to a symmetric pivoting
    // permutation (a symmetric square root when C is exactly singular). Throws config_error if C is not symmetric positive semidefinite.
    Eigen::Matrix<double, num_lsps, num_lsps> lsp_mixing_matrix(const Eigen::Matrix<double, num_lsps, num_lsps> &correlation);

    // One SoS generator per LSP plus the inter-parameter mixing matrix.
    struct LspGenerators
    {
        std::array<std::shared_ptr<const SosGenerator>, num_lsps> fields;
        Eigen::Matrix<double, num_lsps, num_lsps> mixing;

        // Generators keyed by tx_id so links sharing a transmitter share the fields.
        static LspGenerators create(const LspDistributions &dists, FieldBank &bank, std::uint64_t tx_id = 0);
    };

    // Cross-correlated unit normals at the receiver position.
    Eigen::Matrix<double, num_lsps, 1> correlated_lsp_normals(const Vec3 &rx_position, const LspGenerators &gens);

    // Maps the correlated normals to physical LSP values for one carrier.
    LspSet lsps_from_normals(const Eigen::Matrix<double, num_lsps, 1> &x, const LspDistributions &dists, double fc_hz);

    LspSet init_lsps(const Vec3 &rx_position, const LspDistributions &dists, const LspGenerators &gens, double fc_hz);

    // LSP state of one link, re-evaluated at the receiver position on the birth-death grid.
    struct LspTrack
    {
        LspDistributions dists;
        LspGenerators gens;
        Trajectory rx;
        std::vector<double> frequencies_hz;
        double dt_bd = 0.0;
    };

    // Throws std::invalid_argument if t is not a multiple of dt_bd.
    std::vector<LspSet> update_lsps(const LspTrack &track, double t);

    // sqrt(10^(0.1 (PL + SF))) as a linear amplitude factor.
    double large_scale_amplitude(double pl_db, double sf_db);

    // Throws geometry_error for d3d <= 0.
    double path_loss(double d3d, double fc_ghz, const PathLossModel &model);
}

#endif
