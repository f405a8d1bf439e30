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

#include <gscm/config.hpp>
#include <gscm/error.hpp>
#include <gscm/runner.hpp>

#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>
#include <string>

using namespace gscm;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace
{
    const fs::path config_dir = GSCM_TEST_CONFIG_DIR;

    std::string slurp(const fs::path &p)
    {
        std::ifstream f(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(f), {}};
    }

    std::string replace(std::string text, const std::string &from, const std::string &to)
    {
        const auto at = text.find(from);
        REQUIRE(at != std::string::npos);
        return text.replace(at, from.size(), to);
    }

    // Small, fast variant of the bundled LOS scenario.
    std::string small_los()
    {
        std::string t = slurp(config_dir / "indoor_los.cfg");
        t = std::regex_replace(t, std::regex("duration: [0-9.]+"), "duration: 0.2");
        return t;
    }

    fs::path scratch(const std::string &name)
    {
        const fs::path d = fs::temp_directory_path() / ("gscm_unit_" + name);
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }
}

TEST_CASE("bundled configurations load", "[config]")
{
    const ScenarioConfig los = load_config(config_dir / "indoor_los.cfg");
    CHECK(los.num_clusters == 20);
    REQUIRE(los.links.size() == 1);
    CHECK_THAT(los.links[0].rx.speed, WithinAbs(3.0, 1e-15));
    CHECK_THAT(los.links[0].rx.speed * los.duration, WithinAbs(12.0, 1e-12));
    CHECK(los.frequencies_hz().size() == 2);
    CHECK(los.snapshots() == 400);

    const ScenarioConfig nlos = load_config(config_dir / "indoor_nlos.cfg");
    CHECK_FALSE(nlos.lsp.los);
    CHECK(nlos.links.size() == 4);

    const ScenarioConfig ccf = load_config(config_dir / "indoor_nlos_ccf.cfg");
    CHECK(ccf.tx_array.elements == 8);
    CHECK(ccf.rx_array.elements == 141);
    CHECK_THAT(ccf.frequencies_ghz.at(0), WithinAbs(5.2, 1e-15));
    CHECK_THAT(ccf.lsp[Lsp::asd].mu, WithinAbs(0.98, 1e-15));
    CHECK_THAT(ccf.lsp[Lsp::esd].mu, WithinAbs(1.0, 1e-15));
    CHECK_THAT(ccf.offsets.c_asd, WithinAbs(1.0, 1e-15));

    const LinkConfig lc = los.link_config(0);
    CHECK(lc.frequencies_hz.size() == 2);
    CHECK(lc.link_key == trajectory_key(lc.tx, lc.rx));
}

TEST_CASE("configuration validation", "[config]")
{
    const std::string base = small_los();
    CHECK_NOTHROW(parse_config(base));

    SECTION("birth-death interval off the snapshot grid names both values")
    {
        const std::string t = std::regex_replace(base, std::regex("dt_bd: [0-9.]+"), "dt_bd: 0.015");
        try
        {
            parse_config(t);
            FAIL("expected config_error");
        }
        catch (const config_error &e)
        {
            const std::string w = e.what();
            CHECK(w.find("0.015") != std::string::npos);
            CHECK(w.find("0.01") != std::string::npos);
        }
    }
    SECTION("empty frequency list")
    {
        const std::string t = std::regex_replace(base, std::regex("frequencies_ghz: \\[[^\\]]*\\]"), "frequencies_ghz: []");
        CHECK_THROWS_AS(parse_config(t), config_error);
    }
    SECTION("all violations are reported")
    {
        std::string t = std::regex_replace(base, std::regex("frequencies_ghz: \\[[^\\]]*\\]"), "frequencies_ghz: []");
        t = std::regex_replace(t, std::regex("sinusoids: [0-9]+"), "sinusoids: 0");
        try
        {
            parse_config(t);
            FAIL("expected config_error");
        }
        catch (const config_error &e)
        {
            CHECK(e.violations().size() >= 2);
        }
    }
    SECTION("unknown trajectory kind")
    {
        const std::string t = replace(base, "kind: linear, origin", "kind: zigzag, origin");
        CHECK_THROWS_AS(parse_config(t), config_error);
    }
    SECTION("not a mapping")
    {
        CHECK_THROWS_AS(parse_config("- 1\n- 2\n"), config_error);
    }
    SECTION("missing file")
    {
        CHECK_THROWS_AS(load_config(config_dir / "absent.cfg"), config_error);
    }
}

TEST_CASE("scenario runs", "[runner]")
{
    ScenarioConfig cfg = parse_config(small_los());

    SECTION("outputs and manifest")
    {
        const fs::path out = scratch("run");
        const RunManifest m = run_scenario(cfg, out);
        REQUIRE(m.links.size() == 1);
        REQUIRE(m.links[0].cir_files.size() == 2);
        const CirTensor a = read_cir(out / m.links[0].cir_files[0]);
        const CirTensor b = read_cir(out / m.links[0].cir_files[1]);
        CHECK(a.snapshots() == cfg.snapshots());
        CHECK(a.delays() == b.delays());
        CHECK(fs::exists(out / m.links[0].trajectory_file));
        CHECK(fs::exists(out / "manifest.json"));
        CHECK(slurp(out / "manifest.json").find("\"seed\"") != std::string::npos);
        fs::remove_all(out);
    }
    SECTION("coincident links write identical tensors")
    {
        cfg.links.push_back(cfg.links[0]);
        cfg.links[1].name = "copy";
        const fs::path out = scratch("copy");
        const RunManifest m = run_scenario(cfg, out);
        CHECK(slurp(out / m.links[0].cir_files[0]) == slurp(out / m.links[1].cir_files[0]));
        fs::remove_all(out);
    }
    SECTION("static LOS link is constant")
    {
        cfg.links[0].rx = Trajectory::stationary(Vec3(6, -6, 1.5));
        cfg.num_clusters = 0;
        cfg.evolution.lambda_g = 0.0;
        cfg.frequencies_ghz = {2.4};
        const fs::path out = scratch("static");
        const RunManifest m = run_scenario(cfg, out);
        const CirTensor c = read_cir(out / m.links[0].cir_files[0]);
        for (std::size_t p = 1; p < c.snapshots(); ++p)
            CHECK(std::abs(c.at(p, 0, 0, 0, 0) - c.at(0, 0, 0, 0, 0)) < 1e-9 * std::abs(c.at(0, 0, 0, 0, 0)));
        fs::remove_all(out);
    }
}

TEST_CASE("analysis outputs", "[runner]")
{
    const ScenarioConfig cfg = parse_config(small_los());
    const fs::path out = scratch("analyze");
    const RunManifest m = run_scenario(cfg, out);
    const fs::path file = out / m.links[0].cir_files[0];
    const CirTensor c = read_cir(file);

    AnalyzeParams p;
    p.inputs = {file};

    p.metric = "pdp";
    p.out = out / "pdp.csv";
    CHECK(analyze(p) == c.snapshots() * c.taps());
    CHECK(slurp(p.out).rfind("snapshot,time_s,tap,delay_s,power\n", 0) == 0);

    p.metric = "cmc";
    p.inputs = {file, file};
    p.out = out / "cmc.csv";
    CHECK(analyze(p) == 1);
    const std::string cmc_text = slurp(p.out);
    CHECK(std::stod(cmc_text.substr(cmc_text.rfind(',') + 1)) == Approx(1.0).margin(1e-12));

    p.metric = "acf";
    p.inputs = {file};
    p.max_lag = 5;
    p.out = out / "acf.csv";
    CHECK(analyze(p) == 6);

    p.metric = "bogus";
    CHECK_THROWS_AS(analyze(p), config_error);

    std::ofstream(out / "bad.gcir") << "GCIRxxxx";
    p.metric = "pdp";
    p.inputs = {out / "bad.gcir"};
    CHECK_THROWS_AS(analyze(p), data_error);
    fs::remove_all(out);
}
