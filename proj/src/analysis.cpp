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

#include "gscm/analysis.hpp"
#include "gscm/error.hpp"
#include "gscm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gscm
{
    namespace
    {
        void check_ensemble(const std::vector<CirTensor> &ensemble)
        {
            if (ensemble.empty())
                throw data_error("analysis: empty ensemble");
            const auto &a = ensemble.front();
            for (const auto &b : ensemble)
                if (b.snapshots() != a.snapshots() || b.rx_elements() != a.rx_elements() ||
                    b.tx_elements() != a.tx_elements() || b.frequencies() != a.frequencies())
                    throw data_error("analysis: ensemble members have different dimensions");
        }

        void check_indices(const CirTensor &c, std::size_t u, std::size_t s, std::size_t f)
        {
            if (u >= c.rx_elements() || s >= c.tx_elements() || f >= c.frequencies())
                throw std::out_of_range("analysis: antenna or frequency index out of range");
        }

        struct Moments
        {
            std::complex<double> cross = 0.0;
            double a = 0.0;
            double b = 0.0;
            std::size_t n = 0;
        };

        Moments stf_moments(const std::vector<CirTensor> &ensemble, const StfQuery &q)
        {
            check_ensemble(ensemble);
            const auto &c0 = ensemble.front();
            check_indices(c0, q.u, q.s, q.f);
            check_indices(c0, q.u2, q.s2, q.f);
            const std::size_t window = std::max<std::size_t>(q.window, 1);
            if (q.t + window - 1 + q.lag >= c0.snapshots())
                throw std::out_of_range("stf_correlation: time window exceeds the snapshot range");

            Moments m;
            for (const auto &c : ensemble)
                for (std::size_t t = q.t; t < q.t + window; ++t)
                {
                    const auto h1 = transfer_value(c, t + q.lag, q.u, q.s, q.f, q.nu + q.dnu);
                    const auto h2 = transfer_value(c, t, q.u2, q.s2, q.f, q.nu);
                    m.cross += h1 * std::conj(h2);
                    m.a += std::norm(h1);
                    m.b += std::norm(h2);
                    ++m.n;
                }
            return m;
        }
    }

    Pdp pdp(const CirTensor &cir, std::size_t u, std::size_t s, std::size_t f)
    {
        check_indices(cir, u, s, f);
        Pdp out(cir.snapshots());
        for (std::size_t p = 0; p < cir.snapshots(); ++p)
        {
            auto &row = out[p];
            row.reserve(cir.taps());
            for (std::size_t l = 0; l < cir.taps(); ++l)
                row.push_back({cir.delay(p, l), std::norm(cir.at(p, u, s, l, f))});
            std::stable_sort(row.begin(), row.end(), [](const PdpEntry &a, const PdpEntry &b)
                             { return a.delay < b.delay; });
        }
        return out;
    }

    std::complex<double> transfer_value(const CirTensor &cir, std::size_t p, std::size_t u, std::size_t s,
                                        std::size_t f, double nu)
    {
        std::complex<double> h = 0.0;
        for (std::size_t l = 0; l < cir.taps(); ++l)
        {
            const auto &c = cir.at(p, u, s, l, f);
            if (c != 0.0)
                h += c * std::polar(1.0, -2.0 * pi * nu * cir.delay(p, l));
        }
        return h;
    }

    std::vector<std::vector<std::complex<double>>> transfer_function(const CirTensor &cir, std::size_t u, std::size_t s,
                                                                     std::size_t f, const std::vector<double> &offsets)
    {
        check_indices(cir, u, s, f);
        std::vector<std::vector<std::complex<double>>> out(cir.snapshots(),
                                                           std::vector<std::complex<double>>(offsets.size()));
        for (std::size_t p = 0; p < cir.snapshots(); ++p)
            for (std::size_t k = 0; k < offsets.size(); ++k)
                out[p][k] = transfer_value(cir, p, u, s, f, offsets[k]);
        return out;
    }

    std::complex<double> stf_correlation(const std::vector<CirTensor> &ensemble, const StfQuery &q)
    {
        const Moments m = stf_moments(ensemble, q);
        return m.cross / static_cast<double>(m.n);
    }

    std::complex<double> stf_correlation_normalized(const std::vector<CirTensor> &ensemble, const StfQuery &q)
    {
        const Moments m = stf_moments(ensemble, q);
        const double den = std::sqrt(m.a * m.b);
        if (!(den > 0.0))
            throw std::domain_error("stf_correlation: zero channel energy");
        return m.cross / den;
    }

    std::vector<std::complex<double>> temporal_acf(const std::vector<CirTensor> &ensemble, std::size_t u, std::size_t s,
                                                   std::size_t f, std::size_t max_lag, std::size_t t0, std::size_t window)
    {
        std::vector<std::complex<double>> out;
        for (std::size_t lag = 0; lag <= max_lag; ++lag)
        {
            StfQuery q;
            q.t = t0;
            q.lag = lag;
            q.f = f;
            q.u = q.u2 = u;
            q.s = q.s2 = s;
            q.window = window;
            out.push_back(stf_correlation_normalized(ensemble, q));
        }
        return out;
    }

    std::vector<CcfPoint> spatial_ccf(const std::vector<CirTensor> &ensemble, ArraySide side, double spacing_lambda,
                                      std::size_t max_offset, std::size_t f)
    {
        check_ensemble(ensemble);
        const auto &c0 = ensemble.front();
        const std::size_t n = side == ArraySide::rx ? c0.rx_elements() : c0.tx_elements();
        const std::size_t other = side == ArraySide::rx ? c0.tx_elements() : c0.rx_elements();
        if (max_offset >= n)
            throw std::domain_error("spatial_ccf: offset " + std::to_string(max_offset) + " exceeds the array span of " +
                                    std::to_string(n) + " elements");
        if (f >= c0.frequencies())
            throw std::out_of_range("spatial_ccf: frequency index out of range");

        std::vector<CcfPoint> out;
        for (std::size_t d = 0; d <= max_offset; ++d)
        {
            std::complex<double> cross = 0.0;
            double ea = 0.0, eb = 0.0;
            for (const auto &c : ensemble)
                for (std::size_t p = 0; p < c.snapshots(); ++p)
                    for (std::size_t o = 0; o < other; ++o)
                        for (std::size_t i = 0; i + d < n; ++i)
                        {
                            std::complex<double> h1, h2;
                            if (side == ArraySide::rx)
                            {
                                h1 = transfer_value(c, p, i + d, o, f, 0.0);
                                h2 = transfer_value(c, p, i, o, f, 0.0);
                            }
                            else
                            {
                                h1 = transfer_value(c, p, o, i + d, f, 0.0);
                                h2 = transfer_value(c, p, o, i, f, 0.0);
                            }
                            cross += h1 * std::conj(h2);
                            ea += std::norm(h1);
                            eb += std::norm(h2);
                        }
            const double den = std::sqrt(ea * eb);
            out.push_back({static_cast<double>(d) * spacing_lambda, den > 0.0 ? std::abs(cross) / den : 0.0});
        }
        return out;
    }

    Eigen::MatrixXcd channel_matrix(const CirTensor &cir, std::size_t p, std::size_t f, double nu)
    {
        Eigen::MatrixXcd h(cir.rx_elements(), cir.tx_elements());
        for (std::size_t u = 0; u < cir.rx_elements(); ++u)
            for (std::size_t s = 0; s < cir.tx_elements(); ++s)
                h(u, s) = transfer_value(cir, p, u, s, f, nu);
        return h;
    }

    Eigen::MatrixXcd correlation_matrix(const std::vector<Eigen::MatrixXcd> &realizations)
    {
        if (realizations.empty())
            throw std::invalid_argument("correlation_matrix: at least one realization is required");
        const auto rows = realizations.front().rows(), cols = realizations.front().cols();
        Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(cols, cols);
        for (std::size_t i = 0; i < realizations.size(); ++i)
        {
            const auto &h = realizations[i];
            if (h.rows() != rows || h.cols() != cols)
                throw data_error("correlation_matrix: realization " + std::to_string(i) + " is " +
                                 std::to_string(h.rows()) + "x" + std::to_string(h.cols()) + ", expected " +
                                 std::to_string(rows) + "x" + std::to_string(cols));
            r.noalias() += h.adjoint() * h;
        }
        return r;
    }

    Eigen::MatrixXcd correlation_matrix(const CirTensor &cir, std::size_t f)
    {
        std::vector<Eigen::MatrixXcd> hs;
        for (std::size_t p = 0; p < cir.snapshots(); ++p)
            hs.push_back(channel_matrix(cir, p, f));
        return correlation_matrix(hs);
    }

    double cmc(const Eigen::MatrixXcd &r1, const Eigen::MatrixXcd &r2)
    {
        if (r1.rows() != r2.rows() || r1.cols() != r2.cols())
            throw data_error("cmc: matrix dimensions differ");
        const double n1 = r1.norm(), n2 = r2.norm();
        if (!(n1 > 0.0) || !(n2 > 0.0))
            throw std::domain_error("cmc: undefined for a zero-norm matrix");
        const std::complex<double> tr = (r1 * r2.adjoint()).trace();
        return std::min(1.0, std::abs(tr) / (n1 * n2));
    }
}
