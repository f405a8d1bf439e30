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

#ifndef gscm_cir_tensor_H
#define gscm_cir_tensor_H

#include <complex>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace gscm
{
    // Channel coefficients h[p][u][s][l][f] with per-snapshot tap delays d[p][l].
    // Inactive tap slots carry delay 0 and coefficient 0.
    class CirTensor
    {
    public:
        CirTensor() = default;
        CirTensor(std::size_t snapshots, std::size_t rx_elements, std::size_t tx_elements, std::size_t taps,
                  std::size_t frequencies, double dt);

        std::size_t snapshots() const noexcept { return n_p_; }
        std::size_t rx_elements() const noexcept { return n_u_; }
        std::size_t tx_elements() const noexcept { return n_s_; }
        std::size_t taps() const noexcept { return n_l_; }
        std::size_t frequencies() const noexcept { return n_f_; }
        double dt() const noexcept { return dt_; }

        std::size_t index(std::size_t p, std::size_t u, std::size_t s, std::size_t l, std::size_t f) const
        {
            return (((p * n_u_ + u) * n_s_ + s) * n_l_ + l) * n_f_ + f;
        }

        std::complex<double> &at(std::size_t p, std::size_t u, std::size_t s, std::size_t l, std::size_t f)
        {
            return coeff_[index(p, u, s, l, f)];
        }
        const std::complex<double> &at(std::size_t p, std::size_t u, std::size_t s, std::size_t l, std::size_t f) const
        {
            return coeff_[index(p, u, s, l, f)];
        }

        double &delay(std::size_t p, std::size_t l) { return delays_[p * n_l_ + l]; }
        double delay(std::size_t p, std::size_t l) const { return delays_[p * n_l_ + l]; }

        std::vector<std::complex<double>> &coefficients() noexcept { return coeff_; }
        const std::vector<std::complex<double>> &coefficients() const noexcept { return coeff_; }
        const std::vector<double> &delays() const noexcept { return delays_; }

        // Sub-tensor holding a single carrier.
        CirTensor frequency_slice(std::size_t f) const;

        bool operator==(const CirTensor &) const = default;

    private:
        std::size_t n_p_ = 0, n_u_ = 0, n_s_ = 0, n_l_ = 0, n_f_ = 0;
        double dt_ = 0.0;
        std::vector<double> delays_;
        std::vector<std::complex<double>> coeff_;
    };

    // Little-endian binary layout:
    //   char[4] "GCIR" | u32 version | u64 P, M_R, M_T, L, F | f64 dt |
    //   f64 delays[P][L] | f64 (re, im) coefficients[P][M_R][M_T][L][F]
    inline constexpr std::uint32_t cir_format_version = 1;

    void write_cir(const CirTensor &cir, const std::filesystem::path &path);

    // Throws data_error naming the byte offset of the first malformed field.
    CirTensor read_cir(const std::filesystem::path &path);
}

#endif
