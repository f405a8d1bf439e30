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

#include "gscm/largescale.hpp"
#include "gscm/error.hpp"

#include <Eigen/Eigenvalues>

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace gscm
{
    namespace
    {
        constexpr double deg2rad = pi / 180.0;

        // Azimuth and elevation spread ceilings (deg).
        constexpr double max_azimuth_spread = 104.0;
        constexpr double max_elevation_spread = 52.0;

        using Mat8 = Eigen::Matrix<double, num_lsps, num_lsps>;
    }

    double LspDistribution::mean(double fc_ghz) const
    {
        return mu + mu_f * std::log10(1.0 + fc_ghz);
    }

    double LspDistribution::stddev(double fc_ghz) const
    {
        return std::max(0.0, sigma + sigma_f * std::log10(1.0 + fc_ghz));
    }

    Mat8 lsp_mixing_matrix(const Mat8 &correlation)
    {
        if (!correlation.allFinite() || (correlation - correlation.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw config_error("lsp.correlation: matrix must be finite and symmetric");

        Eigen::LDLT<Mat8> ldlt(correlation);
        if (ldlt.info() != Eigen::Success)
        {
            // Exactly singular matrices.
            Eigen::SelfAdjointEigenSolver<Mat8> es(correlation);
            if (es.info() != Eigen::Success)
                throw config_error("lsp.correlation: decomposition failed");
            if (es.eigenvalues().minCoeff() < -1e-10)
                throw config_error("lsp.correlation: matrix is not positive semidefinite");
            return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        }

        const auto d = ldlt.vectorD();
        if (d.minCoeff() < -1e-10)
            throw config_error("lsp.correlation: matrix is not positive semidefinite");

        Mat8 l = ldlt.matrixL();
        Mat8 m = l * d.cwiseMax(0.0).cwiseSqrt().asDiagonal();
        m = ldlt.transpositionsP().transpose() * m;
        return m;
    }

    LspGenerators LspGenerators::create(const LspDistributions &dists, FieldBank &bank, std::uint64_t tx_id)
    {
        LspGenerators g;
        for (std::size_t i = 0; i < num_lsps; ++i)
            g.fields[i] = bank.get(FieldKind::lsp, dists.params[i].correlation_distance, tx_id, FieldEnd::arrival, i);
        g.mixing = lsp_mixing_matrix(dists.correlation);
        return g;
    }

    Eigen::Matrix<double, num_lsps, 1> correlated_lsp_normals(const Vec3 &rx_position, const LspGenerators &gens)
    {
        Eigen::Matrix<double, num_lsps, 1> x;
        for (std::size_t i = 0; i < num_lsps; ++i)
            x[i] = gens.fields[i]->sample_normal(rx_position);
        return gens.mixing * x;
    }

    LspSet lsps_from_normals(const Eigen::Matrix<double, num_lsps, 1> &x, const LspDistributions &dists, double fc_hz)
    {
        const double fc_ghz = fc_hz * 1e-9;
        auto value = [&](Lsp p)
        {
            const auto &d = dists[p];
            return d.mean(fc_ghz) + d.stddev(fc_ghz) * x[static_cast<std::size_t>(p)];
        };

        LspSet s;
        s.ds = std::pow(10.0, value(Lsp::ds));
        s.k_factor = dists.los ? std::pow(10.0, 0.1 * value(Lsp::k)) : 0.0;
        s.sf = value(Lsp::sf);
        s.esd = std::min(std::pow(10.0, value(Lsp::esd)), max_elevation_spread) * deg2rad;
        s.esa = std::min(std::pow(10.0, value(Lsp::esa)), max_elevation_spread) * deg2rad;
        s.asd = std::min(std::pow(10.0, value(Lsp::asd)), max_azimuth_spread) * deg2rad;
        s.asa = std::min(std::pow(10.0, value(Lsp::asa)), max_azimuth_spread) * deg2rad;
        s.xpr = value(Lsp::xpr);
        return s;
    }

    LspSet init_lsps(const Vec3 &rx_position, const LspDistributions &dists, const LspGenerators &gens, double fc_hz)
    {
        return lsps_from_normals(correlated_lsp_normals(rx_position, gens), dists, fc_hz);
    }

    std::vector<LspSet> update_lsps(const LspTrack &track, double t)
    {
        if (!(track.dt_bd > 0.0))
            throw std::invalid_argument("update_lsps: birth-death interval must be positive");
        double steps = t / track.dt_bd;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, std::abs(steps)))
            throw std::invalid_argument("update_lsps: t = " + std::to_string(t) +
                                        " s is not on the birth-death grid");

        Vec3 p = trajectory_state(track.rx, t).position;
        auto x = correlated_lsp_normals(p, track.gens);

        std::vector<LspSet> out;
        out.reserve(track.frequencies_hz.size());
        for (double f : track.frequencies_hz)
            out.push_back(lsps_from_normals(x, track.dists, f));
        return out;
    }

    double large_scale_amplitude(double pl_db, double sf_db)
    {
        return std::sqrt(std::pow(10.0, 0.1 * (pl_db + sf_db)));
    }

    double path_loss(double d3d, double fc_ghz, const PathLossModel &model)
    {
        if (!(d3d > 0.0))
            throw geometry_error("path_loss: distance must be positive");
        return model.intercept + model.distance_exponent * std::log10(d3d) +
               model.frequency_exponent * std::log10(fc_ghz);
    }
}
