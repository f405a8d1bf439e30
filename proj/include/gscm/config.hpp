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

#ifndef gscm_config_H
#define gscm_config_H

#include "gscm/antenna.hpp"
#include "gscm/evolution.hpp"
#include "gscm/largescale.hpp"
#include "gscm/link.hpp"
#include "gscm/smallscale.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gscm
{
    struct ArrayConfig
    {
        std::size_t elements = 1;
        double spacing = 0.5;          // m, or wavelengths of the first carrier
        bool spacing_in_lambda = true;
        Vec3 axis = Vec3::UnitY();
        PatternKind pattern = PatternKind::isotropic_vertical;

        AntennaArray build(double lambda) const;
    };

    struct LinkSpec
    {
        std::string name;
        Trajectory rx;
    };

    struct ScenarioConfig
    {
        std::string scenario;
        std::uint64_t seed = 1;
        std::vector<double> frequencies_ghz;
        double duration = 1.0; // s
        std::size_t num_clusters = 20;
        std::size_t num_rays = 20;
        std::size_t sinusoids = 500;
        bool apply_large_scale = true;

        Vec3 tx = Vec3::Zero();
        ArrayConfig tx_array;
        ArrayConfig rx_array;
        std::vector<LinkSpec> links;

        EvolutionParams evolution;
        MotionParams motion;
        LspDistributions lsp;
        PathLossModel path_loss;
        SspParams ssp;
        RayOffsets offsets;
        ScalingOptions scaling;

        std::size_t snapshots() const;
        std::vector<double> frequencies_hz() const;
        LinkConfig link_config(std::size_t i) const;
    };

    // Parses and validates a scenario file. Throws config_error listing every
    // violation with its field path.
    ScenarioConfig load_config(const std::filesystem::path &path);
    ScenarioConfig parse_config(const std::string &text);
}

#endif
