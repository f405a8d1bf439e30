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

#include "gscm/coefficients.hpp"
#include "gscm/largescale.hpp"

#include <cmath>
#include <stdexcept>

namespace gscm
{
    double phase_from_distance(double d, double lambda)
    {
        if (!(lambda > 0.0))
            throw std::invalid_argument("phase_from_distance: wavelength must be positive");
        return 2.0 * pi * d / lambda;
    }

    double los_distance(const Vec3 &r_rx, const Vec3 &d_rx, const Vec3 &r_tx, const Vec3 &d_tx, double d11)
    {
        return r_rx.dot(d_rx) + r_tx.dot(d_tx) + d11;
    }

    double nlos_distance(const Ray &ray, const Vec3 &d_rx, const Vec3 &d_tx)
    {
        const double d11 = ray.d_tx.norm() + ray.d_rx.norm() + ray.d_za;
        return angles_to_unit_vector(ray.arrival).dot(d_rx) + angles_to_unit_vector(ray.departure).dot(d_tx) + d11;
    }

    Eigen::Matrix2cd polarization_matrix(const Ray &ray)
    {
        const double x = std::sqrt(1.0 / ray.xpr);
        Eigen::Matrix2cd m;
        m(0, 0) = std::polar(1.0, ray.pol_phase[0]);
        m(0, 1) = std::polar(x, ray.pol_phase[1]);
        m(1, 0) = std::polar(x, ray.pol_phase[2]);
        m(1, 1) = std::polar(1.0, ray.pol_phase[3]);
        return m;
    }

    std::complex<double> polarized_gain(const PatternValue &rx, const Eigen::Matrix2cd &m, const PatternValue &tx)
    {
        return rx.theta * (m(0, 0) * tx.theta + m(0, 1) * tx.phi) + rx.phi * (m(1, 0) * tx.theta + m(1, 1) * tx.phi);
    }

    std::complex<double> los_component(const PatternValue &rx, const PatternValue &tx, double k, double phase)
    {
        if (!(k > 0.0))
            return 0.0;
        const std::complex<double> g = rx.theta * tx.theta - rx.phi * tx.phi;
        return std::sqrt(k / (k + 1.0)) * g * std::polar(1.0, phase);
    }

    std::complex<double> nlos_ray_term(const PatternValue &rx, const Eigen::Matrix2cd &pol, const PatternValue &tx,
                                       double k, double phase)
    {
        return std::sqrt(1.0 / (std::max(k, 0.0) + 1.0)) * polarized_gain(rx, pol, tx) * std::polar(1.0, phase);
    }

    std::complex<double> nlos_component(const Cluster &c, std::size_t f, const AntennaArray &rx_array, std::size_t u,
                                        const AntennaArray &tx_array, std::size_t s, double k, double lambda)
    {
        const double amp = std::sqrt(c.power.at(f) / static_cast<double>(c.rays.size()));
        std::complex<double> sum = 0.0;
        for (const auto &r : c.rays)
        {
            const double d = nlos_distance(r, rx_array.positions[u], tx_array.positions[s]);
            const double phase = phase_from_distance(d, lambda) + r.initial_phase;
            sum += amp * nlos_ray_term(rx_array.pattern_at(r.arrival), polarization_matrix(r),
                                       tx_array.pattern_at(r.departure), k, phase);
        }
        return sum;
    }

    double snapshot_power_factor(double power, std::size_t num_rays, double ray_energy, double sum_energy)
    {
        if (!(sum_energy > 0.0))
            return 0.0;
        return std::sqrt(power / static_cast<double>(num_rays) * ray_energy / sum_energy);
    }

    void scale_snapshot_powers(std::vector<std::complex<double>> &sums, const std::vector<double> &ray_energies,
                               double power, std::size_t num_rays)
    {
        if (sums.size() != ray_energies.size())
            throw std::invalid_argument("scale_snapshot_powers: window lengths differ");
        double ray = 0.0, total = 0.0;
        for (std::size_t p = 0; p < sums.size(); ++p)
        {
            ray += ray_energies[p];
            total += std::norm(sums[p]);
        }
        if (!(total > 0.0))
            return;
        const double a = snapshot_power_factor(power, num_rays, ray, total);
        for (auto &h : sums)
            h *= a;
    }

    void full_channel_matrix(CirTensor &cir, double pl_db, double sf_db)
    {
        const double a = large_scale_amplitude(pl_db, sf_db);
        for (auto &c : cir.coefficients())
            c *= a;
    }
}
