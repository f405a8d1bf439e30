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

#ifndef gscm_analysis_H
#define gscm_analysis_H

#include "gscm/cir_tensor.hpp"

#include <Eigen/Core>
#include <complex>
#include <vector>

namespace gscm
{
    struct PdpEntry
    {
        double delay = 0.0; // s
        double power = 0.0; // linear
    };

    // Per-snapshot taps sorted by delay; one entry per tap slot.
    using Pdp = std::vector<std::vector<PdpEntry>>;

    Pdp pdp(const CirTensor &cir, std::size_t u, std::size_t s, std::size_t f);

    // sum_l h_l exp(-j 2 pi nu tau_l) at baseband offset nu (Hz).
    std::complex<double> transfer_value(const CirTensor &cir, std::size_t p, std::size_t u, std::size_t s,
                                        std::size_t f, double nu);

    // H[p][k] over the offsets nu_k.
    std::vector<std::vector<std::complex<double>>> transfer_function(const CirTensor &cir, std::size_t u, std::size_t s,
                                                                     std::size_t f, const std::vector<double> &offsets);

    struct StfQuery
    {
        std::size_t t = 0;       // snapshot
        std::size_t lag = 0;     // snapshots
        std::size_t f = 0;       // carrier index
        double nu = 0.0;         // baseband offset, Hz
        double dnu = 0.0;        // frequency lag, Hz
        std::size_t u = 0, u2 = 0;
        std::size_t s = 0, s2 = 0;
        std::size_t window = 1;  // local time average over [t, t + window)
    };

    // E{H_{u,s}(t + lag, nu + dnu) H*_{u2,s2}(t, nu)} over the ensemble and the window.
    // Throws data_error for an empty ensemble or mismatched tensors.
    std::complex<double> stf_correlation(const std::vector<CirTensor> &ensemble, const StfQuery &q);

    // The same divided by sqrt(E|H_{u,s}(t + lag)|^2 E|H_{u2,s2}(t)|^2); 1 at zero lag.
    std::complex<double> stf_correlation_normalized(const std::vector<CirTensor> &ensemble, const StfQuery &q);

    // Normalized correlation for lags 0..max_lag with u = u', s = s' and zero frequency lag.
    std::vector<std::complex<double>> temporal_acf(const std::vector<CirTensor> &ensemble, std::size_t u, std::size_t s,
                                                   std::size_t f, std::size_t max_lag, std::size_t t0 = 0,
                                                   std::size_t window = 1);

    enum class ArraySide
    {
        rx,
        tx
    };

    struct CcfPoint
    {
        double spacing_lambda = 0.0;
        double ccf_abs = 0.0;
    };

    // |CCF| against element offset on one array side, averaged over the ensemble, all
    // snapshots, all element pairs with the given offset and all elements of the other
    // side. Throws std::domain_error if max_offset exceeds the array span.
    std::vector<CcfPoint> spatial_ccf(const std::vector<CirTensor> &ensemble, ArraySide side, double spacing_lambda,
                                      std::size_t max_offset, std::size_t f = 0);

    // M_R x M_T channel matrix of one snapshot at baseband offset nu.
    Eigen::MatrixXcd channel_matrix(const CirTensor &cir, std::size_t p, std::size_t f, double nu = 0.0);

    // R = sum_S H(S)^H H(S). Throws data_error on inconsistent dimensions.
    Eigen::MatrixXcd correlation_matrix(const std::vector<Eigen::MatrixXcd> &realizations);

    // Realizations taken as the snapshots of one tensor at carrier f.
    Eigen::MatrixXcd correlation_matrix(const CirTensor &cir, std::size_t f);

    // |tr(R1 R2^H)| / (||R1||_F ||R2||_F). Throws std::domain_error for a zero-norm matrix.
    double cmc(const Eigen::MatrixXcd &r1, const Eigen::MatrixXcd &r2);
}

#endif
