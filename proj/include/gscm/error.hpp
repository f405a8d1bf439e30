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

#ifndef gscm_error_H
#define gscm_error_H

#include <stdexcept>
#include <string>
#include <vector>

namespace gscm
{
    // Invalid scenario or parameter configuration. Carries every violation found,
    // each prefixed with the offending field path.
    class config_error : public std::invalid_argument
    {
    public:
        explicit config_error(const std::string &message)
            : std::invalid_argument(message), violations_{message} {}

        explicit config_error(std::vector<std::string> violations)
            : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

        const std::vector<std::string> &violations() const noexcept { return violations_; }

    private:
        static std::string join(const std::vector<std::string> &items)
        {
            std::string out;
            for (const auto &s : items)
                out += (out.empty() ? "" : "; ") + s;
            return out;
        }
        std::vector<std::string> violations_;
    };

    // Iterative solver did not converge, or a computation produced no usable value.
    class numerical_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Zero-length direction vectors, infeasible cluster placement and the like.
    class geometry_error : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    // Malformed input data: tensor files, inconsistent dimensions, empty ensembles.
    class data_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}

#endif
