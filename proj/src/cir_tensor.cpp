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

#include "gscm/cir_tensor.hpp"
#include "gscm/error.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

namespace gscm
{
    namespace
    {
        constexpr std::array<char, 4> magic = {'G', 'C', 'I', 'R'};
        constexpr std::size_t header_bytes = 4 + 4 + 5 * 8 + 8;

        template <typename T>
        void put(std::vector<unsigned char> &buf, T v)
        {
            using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
            U bits = std::bit_cast<U>(v);
            for (std::size_t i = 0; i < sizeof(U); ++i)
                buf.push_back(static_cast<unsigned char>(bits >> (8 * i)));
        }

        template <typename T>
        T get(const std::vector<unsigned char> &buf, std::size_t offset)
        {
            using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
            U bits = 0;
            for (std::size_t i = 0; i < sizeof(U); ++i)
                bits |= static_cast<U>(buf[offset + i]) << (8 * i);
            return std::bit_cast<T>(bits);
        }

        [[noreturn]] void fail(const std::filesystem::path &path, std::size_t offset, const std::string &what)
        {
            throw data_error("read_cir: " + path.string() + ": byte offset " + std::to_string(offset) + ": " + what);
        }
    }

    CirTensor::CirTensor(std::size_t snapshots, std::size_t rx_elements, std::size_t tx_elements, std::size_t taps,
                         std::size_t frequencies, double dt)
        : n_p_(snapshots), n_u_(rx_elements), n_s_(tx_elements), n_l_(taps), n_f_(frequencies), dt_(dt),
          delays_(snapshots * taps, 0.0),
          coeff_(snapshots * rx_elements * tx_elements * taps * frequencies)
    {
    }

    CirTensor CirTensor::frequency_slice(std::size_t f) const
    {
        if (f >= n_f_)
            throw std::out_of_range("CirTensor::frequency_slice: index " + std::to_string(f) + " >= " +
                                    std::to_string(n_f_));
        CirTensor out(n_p_, n_u_, n_s_, n_l_, 1, dt_);
        out.delays_ = delays_;
        for (std::size_t p = 0; p < n_p_; ++p)
            for (std::size_t u = 0; u < n_u_; ++u)
                for (std::size_t s = 0; s < n_s_; ++s)
                    for (std::size_t l = 0; l < n_l_; ++l)
                        out.at(p, u, s, l, 0) = at(p, u, s, l, f);
        return out;
    }

    void write_cir(const CirTensor &cir, const std::filesystem::path &path)
    {
        std::vector<unsigned char> buf;
        buf.reserve(header_bytes + 8 * cir.delays().size() + 16 * cir.coefficients().size());
        buf.insert(buf.end(), magic.begin(), magic.end());
        put<std::uint32_t>(buf, cir_format_version);
        put<std::uint64_t>(buf, cir.snapshots());
        put<std::uint64_t>(buf, cir.rx_elements());
        put<std::uint64_t>(buf, cir.tx_elements());
        put<std::uint64_t>(buf, cir.taps());
        put<std::uint64_t>(buf, cir.frequencies());
        put<double>(buf, cir.dt());
        for (double d : cir.delays())
            put<double>(buf, d);
        for (const auto &c : cir.coefficients())
        {
            put<double>(buf, c.real());
            put<double>(buf, c.imag());
        }

        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw data_error("write_cir: cannot open " + path.string());
        out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!out)
            throw data_error("write_cir: write failed for " + path.string());
    }

    CirTensor read_cir(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw data_error("read_cir: cannot open " + path.string());
        std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

        if (buf.size() < 4)
            fail(path, buf.size(), "file truncated inside magic");
        for (std::size_t i = 0; i < 4; ++i)
            if (buf[i] != static_cast<unsigned char>(magic[i]))
                fail(path, i, "bad magic, expected \"GCIR\"");
        if (buf.size() < header_bytes)
            fail(path, buf.size(), "file truncated inside header");

        const auto version = get<std::uint32_t>(buf, 4);
        if (version != cir_format_version)
            fail(path, 4, "unsupported version " + std::to_string(version));

        std::array<std::uint64_t, 5> dims{};
        for (std::size_t i = 0; i < 5; ++i)
            dims[i] = get<std::uint64_t>(buf, 8 + 8 * i);

        const double dt = get<double>(buf, 48);
        if (!std::isfinite(dt) || dt < 0.0)
            fail(path, 48, "invalid time step");

        // Element counts, checked against overflow before allocating.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 16;
        std::uint64_t n_delay = 1, n_coeff = 1;
        for (std::size_t i = 0; i < 5; ++i)
        {
            std::uint64_t d = dims[i];
            if (d != 0 && n_coeff > limit / d)
                fail(path, 8 + 8 * i, "dimension product overflows");
            n_coeff *= d;
            if (i == 0 || i == 3)
                n_delay *= d;
        }
        const std::uint64_t expected = header_bytes + 8 * n_delay + 16 * n_coeff;
        if (buf.size() != expected)
            fail(path, std::min<std::uint64_t>(buf.size(), expected),
                 "payload size " + std::to_string(buf.size()) + " bytes does not match header (" +
                     std::to_string(expected) + " bytes)");

        CirTensor cir(dims[0], dims[1], dims[2], dims[3], dims[4], dt);
        std::size_t off = header_bytes;
        for (std::size_t p = 0; p < dims[0]; ++p)
            for (std::size_t l = 0; l < dims[3]; ++l, off += 8)
            {
                double d = get<double>(buf, off);
                if (!std::isfinite(d) || d < 0.0)
                    fail(path, off, "invalid tap delay");
                cir.delay(p, l) = d;
            }
        for (auto &c : cir.coefficients())
        {
            c = {get<double>(buf, off), get<double>(buf, off + 8)};
            off += 16;
        }
        return cir;
    }
}
