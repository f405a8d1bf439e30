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

#include "gscm/antenna.hpp"
#include "gscm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gscm
{
    PatternKind parse_pattern_kind(std::string_view name)
    {
        if (name == "isotropic_vertical" || name == "isotropic")
            return PatternKind::isotropic_vertical;
        if (name == "isotropic_horizontal")
            return PatternKind::isotropic_horizontal;
        if (name == "directional_3gpp")
            return PatternKind::directional_3gpp;
        throw config_error("unknown antenna pattern '" + std::string(name) + "'");
    }

    std::string_view to_string(PatternKind kind)
    {
        switch (kind)
        {
        case PatternKind::isotropic_vertical:
            return "isotropic_vertical";
        case PatternKind::isotropic_horizontal:
            return "isotropic_horizontal";
        default:
            return "directional_3gpp";
        }
    }

    PatternValue antenna_pattern(PatternKind kind, const AnglePair &d)
    {
        switch (kind)
        {
        case PatternKind::isotropic_vertical:
            return {1.0, 0.0};
        case PatternKind::isotropic_horizontal:
            return {0.0, 1.0};
        default:
        {
            const double zenith_deg = 90.0 - d.elevation * 180.0 / pi;
            const double az_deg = wrap_azimuth(d.azimuth) * 180.0 / pi;
            const double av = -std::min(12.0 * std::pow((zenith_deg - 90.0) / 65.0, 2), 30.0);
            const double ah = -std::min(12.0 * std::pow(az_deg / 65.0, 2), 30.0);
            const double a_db = -std::min(-(av + ah), 30.0) + 8.0;
            return {std::sqrt(std::pow(10.0, 0.1 * a_db)), 0.0};
        }
        }
    }

    AntennaArray AntennaArray::single(PatternKind kind)
    {
        return {{Vec3::Zero()}, kind};
    }

    AntennaArray AntennaArray::ula(std::size_t n, double spacing, const Vec3 &axis, PatternKind kind)
    {
        if (n == 0)
            throw config_error("array.elements: must be >= 1");
        if (!(spacing >= 0.0))
            throw config_error("array.spacing: must be >= 0");
        if (n > 1 && !(axis.norm() > 0.0))
            throw config_error("array.axis: must be a non-zero vector");

        AntennaArray a;
        a.pattern = kind;
        const Vec3 u = n > 1 ? Vec3(axis.normalized()) : Vec3::UnitY();
        for (std::size_t i = 0; i < n; ++i)
            a.positions.push_back(static_cast<double>(i) * spacing * u);
        return a;
    }
}
