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

#ifndef gscm_coefficients_H
#define gscm_coefficients_H

#include "gscm/antenna.hpp"
#include "gscm/cir_tensor.hpp"
#include "gscm/geometry.hpp"
#include "gscm/smallscale.hpp"

#include <Eigen/Core>
#include <complex>
#include <vector>

namespace gscm
{
    // 2 pi d / lambda, not reduced modulo 2 pi. Throws std::invalid_argument for lambda <= 0.
    double phase_from_distance(double d, double lambda);

    // Planar-wave path length r_rx . d_rx + r_tx . d_tx + d11 for one antenna pair.
    double los_distance(const Vec3 &r_rx, const Vec3 &d_rx, const Vec3 &r_tx, const Vec3 &d_tx, double d11);

    // Same for one ray, with d11 = |D^T| + |D^R| + D^ZA.
    double nlos_distance(const Ray &ray, const Vec3 &d_rx, const Vec3 &d_tx);

    // 2x2 ray polarization matrix; off-diagonal magnitudes are sqrt(1 / xpr).
    Eigen::Matrix2cd polarization_matrix(const Ray &ray);

    // F_rx^T * M * F_tx (transpose without conjugation).
    std::complex<double> polarized_gain(const PatternValue &rx, const Eigen::Matrix2cd &m, const PatternValue &tx);

    // sqrt(K / (K + 1)) F_rx^T diag(1, -1) F_tx exp(j phase); zero for K <= 0.
    std::complex<double> los_component(const PatternValue &rx, const PatternValue &tx, double k_factor, double phase);

    // One ray of the cluster sum without the sqrt(P / M) factor:
    // sqrt(1 / (K + 1)) F_rx^T M F_tx exp(j phase).
    std::complex<double> nlos_ray_term(const PatternValue &rx, const Eigen::Matrix2cd &pol, const PatternValue &tx,
                                       double k_factor, double phase);

    // Complete contribution of one cluster to one antenna pair.
    std::complex<double> nlos_component(const Cluster &c, std::size_t f, const AntennaArray &rx_array, std::size_t u,
                                        const AntennaArray &tx_array, std::size_t s, double k_factor, double lambda);

    // Window power rescaling factor sqrt((P / M) * ray_energy / sum_energy); zero if sum_energy is zero.
    double snapshot_power_factor(double power, std::size_t num_rays, double ray_energy, double sum_energy);

    // Applies the window power rescaling in place to the per-snapshot cluster sums of one (u, s, f, l) over
    // one window, given the per-snapshot energies sum_m |h_m|^2.
    void scale_snapshot_powers(std::vector<std::complex<double>> &cluster_sums, const std::vector<double> &ray_energies,
                               double power, std::size_t num_rays);

    // Multiplies every coefficient by large_scale_amplitude(pl_db, sf_db).
    void full_channel_matrix(CirTensor &cir, double pl_db, double sf_db);
}

#endif
