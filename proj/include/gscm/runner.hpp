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

#ifndef gscm_runner_H
#define gscm_runner_H

#include "gscm/analysis.hpp"
#include "gscm/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gscm
{
    inline constexpr const char *version = "1.0.0";

    struct LinkOutput
    {
        std::string name;
        std::vector<std::filesystem::path> cir_files; // one per carrier
        std::filesystem::path trajectory_file;
        std::size_t taps = 0;
    };

    struct RunManifest
    {
        std::string config_echo; // resolved configuration as JSON
        std::uint64_t seed = 0;
        std::string software_version = version;
        std::vector<LinkOutput> links;
        std::string started_utc;
        double wall_seconds = 0.0;

        std::string to_json() const;
    };

    // Resolved configuration as JSON text.
    std::string config_to_json(const ScenarioConfig &cfg);

    // Simulates every link (concurrently, sharing one field bank) and writes
    // link<i>_f<k>.gcir, link<i>_trajectory.csv and manifest.json into out_dir.
    // Errors are rethrown with the link index prepended.
    RunManifest run_scenario(const ScenarioConfig &cfg, const std::filesystem::path &out_dir);

    struct AnalyzeParams
    {
        std::string metric; // pdp, acf, ccf, cmc or tf
        std::vector<std::filesystem::path> inputs;
        std::filesystem::path out;
        std::size_t ensemble = 0; // 0: use all inputs
        std::size_t freq_index = 0;
        double rx_separation = 0.0; // echoed into cmc output
        std::size_t u = 0;
        std::size_t s = 0;
        std::size_t max_lag = 50;
        std::size_t window = 1;
        ArraySide side = ArraySide::rx;
        double spacing_lambda = 0.5;
        std::size_t max_offset = 0; // 0: full array span
        double bandwidth_hz = 100e6;
        std::size_t points = 64;
    };

    // Computes a metric over CIR files and writes a delimiter-separated table with
    // one header line. Returns the number of data rows.
    std::size_t analyze(const AnalyzeParams &params);
}

#endif
