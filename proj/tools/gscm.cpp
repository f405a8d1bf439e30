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

// Command line front end:
//   gscm simulate --config <file> [--seed <u64>] --out <dir>
//   gscm analyze --metric <pdp|acf|ccf|cmc|tf> --in <files...> --out <file> [options]
//
// Log verbosity follows GSCM_LOG_LEVEL (trace, debug, info, warn, error, off).
// Exit codes: 0 ok, 1 usage, 2 configuration, 3 numerical or geometry, 4 data.

#include "gscm/error.hpp"
#include "gscm/runner.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <spdlog/spdlog.h>

namespace
{
    int run(int argc, char **argv)
    {
        CLI::App app{"gscm - geometry-based stochastic channel simulator"};
        app.set_version_flag("--version", std::string(gscm::version));
        app.require_subcommand(1);

        std::string config_path, out_dir;
        std::uint64_t seed = 0;
        auto *sim = app.add_subcommand("simulate", "Run a scenario and write CIR tensors");
        sim->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
        auto *seed_opt = sim->add_option("--seed", seed, "Master seed (overrides the config)");
        sim->add_option("--out", out_dir, "Output directory")->required();

        gscm::AnalyzeParams ap;
        std::vector<std::string> inputs;
        std::string out_file, side = "rx";
        auto *an = app.add_subcommand("analyze", "Compute a statistic from CIR tensor files");
        an->add_option("--metric", ap.metric, "pdp, acf, ccf, cmc or tf")
            ->required()
            ->check(CLI::IsMember({"pdp", "acf", "ccf", "cmc", "tf"}));
        an->add_option("--in", inputs, "Input .gcir files")->required()->check(CLI::ExistingFile);
        an->add_option("--out", out_file, "Output table")->required();
        an->add_option("--ensemble", ap.ensemble, "Number of realizations to use (cmc: per link)");
        an->add_option("--freq-index", ap.freq_index, "Carrier index inside the tensors");
        an->add_option("--rx-separation", ap.rx_separation, "Rx separation in m, echoed into cmc output");
        an->add_option("--u", ap.u, "Rx element index");
        an->add_option("--s", ap.s, "Tx element index");
        an->add_option("--max-lag", ap.max_lag, "acf: largest lag in snapshots");
        an->add_option("--window", ap.window, "acf: local time window in snapshots");
        an->add_option("--side", side, "ccf: array side")->check(CLI::IsMember({"rx", "tx"}));
        an->add_option("--spacing-lambda", ap.spacing_lambda, "ccf: element spacing in wavelengths");
        an->add_option("--max-offset", ap.max_offset, "ccf: largest element offset (0: full span)");
        an->add_option("--bandwidth-hz", ap.bandwidth_hz, "tf: evaluated bandwidth");
        an->add_option("--points", ap.points, "tf: number of frequency points");

        CLI11_PARSE(app, argc, argv);

        if (*sim)
        {
            auto cfg = gscm::load_config(config_path);
            if (*seed_opt)
                cfg.seed = seed;
            const auto m = gscm::run_scenario(cfg, out_dir);
            spdlog::info("wrote {} link(s) to {} in {:.2f} s", m.links.size(), out_dir, m.wall_seconds);
        }
        else
        {
            for (const auto &s : inputs)
                ap.inputs.emplace_back(s);
            ap.out = out_file;
            ap.side = side == "tx" ? gscm::ArraySide::tx : gscm::ArraySide::rx;
            const auto rows = gscm::analyze(ap);
            spdlog::info("{}: {} rows written to {}", ap.metric, rows, out_file);
        }
        return 0;
    }
}

int main(int argc, char **argv)
{
    if (const char *lvl = std::getenv("GSCM_LOG_LEVEL"))
        spdlog::set_level(spdlog::level::from_str(lvl));
    else
        spdlog::set_level(spdlog::level::warn);

    try
    {
        return run(argc, argv);
    }
    catch (const gscm::config_error &e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const gscm::numerical_error &e)
    {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    }
    catch (const gscm::geometry_error &e)
    {
        std::cerr << "geometry error: " << e.what() << '\n';
        return 3;
    }
    catch (const gscm::data_error &e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return 4;
    }
    catch (const std::domain_error &e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return 4;
    }
    catch (const std::out_of_range &e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return 4;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
