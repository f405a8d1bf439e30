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

#ifndef gscm_antenna_H
#define gscm_antenna_H

#include "gscm/geometry.hpp"

#include <complex>
#include <string_view>
#include <vector>

namespace gscm
{
    enum class PatternKind
    {
        isotropic_vertical,
        isotropic_horizontal,
        directional_3gpp // 65 deg beamwidth, 30 dB front-back ratio, 8 dBi, vertical polarization
    };

    PatternKind parse_pattern_kind(std::string_view name);
    std::string_view to_string(PatternKind kind);

    // Field components (F_theta, F_phi) of one element.
    struct PatternValue
    {
        std::complex<double> theta;
        std::complex<double> phi;
    };

    PatternValue antenna_pattern(PatternKind kind, const AnglePair &direction);

    // Element positions relative to the first element, in the global frame.
    struct AntennaArray
    {
        std::vector<Vec3> positions;
        PatternKind pattern = PatternKind::isotropic_vertical;

        std::size_t size() const noexcept { return positions.size(); }
        PatternValue pattern_at(const AnglePair &direction) const { return antenna_pattern(pattern, direction); }

        static AntennaArray single(PatternKind kind = PatternKind::isotropic_vertical);

        // n elements spaced along axis; throws config_error for n == 0 or spacing < 0.
        static AntennaArray ula(std::size_t n, double spacing, const Vec3 &axis,
                                PatternKind kind = PatternKind::isotropic_vertical);
    };
}

#endif
