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

#include <gscm/coefficients.hpp>
#include <gscm/error.hpp>
#include <gscm/link.hpp>

#include <catch2/catch.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>

using namespace gscm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using cd = std::complex<double>;

namespace
{
    const PatternValue vertical{1.0, 0.0};
    const PatternValue horizontal{0.0, 1.0};

    Ray plain_ray(double xpr = 1e300)
    {
        Ray r;
        r.xpr = xpr;
        return r;
    }
}

TEST_CASE("phase from distance", "[coefficients]")
{
    const double lambda = 0.125;
    CHECK(phase_from_distance(0.0, lambda) == 0.0);
    CHECK_THAT(phase_from_distance(lambda, lambda), WithinAbs(2 * pi, 1e-12));
    CHECK_THAT(phase_from_distance(lambda / 2, lambda), WithinAbs(pi, 1e-12));
    CHECK_THAT(phase_from_distance(1000 * lambda + 0.01, lambda), WithinAbs(2 * pi * 1000 + 2 * pi * 0.08, 1e-9));
    CHECK_THROWS_AS(phase_from_distance(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("path lengths per antenna pair", "[coefficients]")
{
    const double lambda = 0.125;
    CHECK(los_distance(Vec3(1, 0, 0), Vec3::Zero(), Vec3(0, 1, 0), Vec3::Zero(), 30.0) == 30.0);
    const double d = los_distance(Vec3(1, 0, 0), Vec3(lambda / 2, 0, 0), Vec3(0, 1, 0), Vec3::Zero(), 30.0);
    CHECK_THAT(phase_from_distance(d, lambda) - phase_from_distance(30.0, lambda), WithinAbs(pi, 1e-9));
    CHECK(los_distance(Vec3(1, 0, 0), Vec3(0, 0.3, 0), Vec3(0, 1, 0), Vec3(0.2, 0, 0), 30.0) == 30.0);

    Ray r = plain_ray();
    r.d_tx = Vec3(3, 4, 0);
    r.d_rx = Vec3(0, 0, 2);
    r.d_za = 7.0;
    r.departure = direction_to_angles(r.d_tx);
    r.arrival = direction_to_angles(r.d_rx);
    CHECK_THAT(nlos_distance(r, Vec3::Zero(), Vec3::Zero()), WithinAbs(14.0, 1e-12));
    CHECK_THAT(nlos_distance(r, Vec3(0.1, 0.2, 0), Vec3(-4, 3, 0)), WithinAbs(14.0, 1e-12));
}

TEST_CASE("Doppler phase rate of an approaching Rx", "[coefficients]")
{
    const double fc = 2.4e9, lambda = speed_of_light / fc, v = 3.0, dt = 1e-3;
    const Vec3 tx(0, 0, 3), point(100, 0, 1.5);
    Vec3 rx(5, 0, 1.5);
    auto phase = [&](const Vec3 &r)
    {
        Ray ray = plain_ray();
        ray.d_tx = point - tx;
        ray.d_rx = point - r;
        ray.departure = direction_to_angles(ray.d_tx);
        ray.arrival = direction_to_angles(ray.d_rx);
        return phase_from_distance(nlos_distance(ray, Vec3::Zero(), Vec3::Zero()), lambda);
    };
    const double rate = (phase(rx + Vec3(v * dt, 0, 0)) - phase(rx)) / dt;
    CHECK_THAT(std::abs(rate), WithinRel(2 * pi * v / lambda, 1e-6));
    CHECK_THAT(v / lambda, WithinAbs(24.0, 0.02));
}

TEST_CASE("LOS component", "[coefficients]")
{
    CHECK_THAT(std::abs(los_component(vertical, vertical, 1e15, 0.0) - cd(1.0, 0.0)), WithinAbs(0.0, 1e-7));
    CHECK(los_component(vertical, vertical, 0.0, 0.3) == cd(0.0));
    const double k = 4.0, psi = 0.7;
    const cd h = los_component(horizontal, horizontal, k, psi);
    CHECK(std::abs(h + std::polar(std::sqrt(k / (k + 1)), psi)) < 1e-15);
    CHECK(std::abs(los_component(vertical, vertical, k, psi) - std::polar(std::sqrt(k / (k + 1)), psi)) < 1e-15);
    CHECK_THAT(30.0 / speed_of_light * 1e9, WithinAbs(100.07, 5e-3));
}

TEST_CASE("polarization", "[coefficients]")
{
    Ray r = plain_ray(100.0);
    r.pol_phase = {0.1, 0.2, 0.3, 0.4};
    const auto m = polarization_matrix(r);
    CHECK_THAT(std::abs(m(0, 1)), WithinAbs(0.1, 1e-15));
    CHECK_THAT(std::abs(m(1, 0)), WithinAbs(0.1, 1e-15));
    CHECK_THAT(std::arg(m(1, 1)), WithinAbs(0.4, 1e-15));
    // F_rx^T M F_tx by hand.
    const PatternValue a{cd(0.3, 0.1), cd(-0.2, 0.5)}, b{cd(1.1, -0.4), cd(0.7, 0.2)};
    const cd want = a.theta * m(0, 0) * b.theta + a.theta * m(0, 1) * b.phi + a.phi * m(1, 0) * b.theta +
                    a.phi * m(1, 1) * b.phi;
    CHECK(std::abs(polarized_gain(a, m, b) - want) < 1e-15);

    // Infinite XPR removes the cross terms.
    CHECK(std::abs(polarization_matrix(plain_ray())(0, 1)) < 1e-100);
}

TEST_CASE("NLOS cluster component", "[coefficients]")
{
    const double lambda = 0.125;
    const auto one = AntennaArray::single();

    Cluster c;
    c.power = {0.36};
    c.rays = {plain_ray()};
    c.rays[0].d_tx = Vec3(lambda, 0, 0);
    c.rays[0].departure = {0, 0};
    c.rays[0].arrival = {pi, 0};
    CHECK(std::abs(nlos_component(c, 0, one, 0, one, 0, 0.0, lambda) - cd(0.6)) < 1e-12);

    c.rays.push_back(c.rays[0]);
    c.rays[1].initial_phase = pi;
    CHECK(std::abs(nlos_component(c, 0, one, 0, one, 0, 0.0, lambda)) < 1e-12);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ph(-pi, pi);
    c.rays.assign(20, c.rays[0]);
    double acc = 0.0;
    const int n = 10000;
    for (int t = 0; t < n; ++t)
    {
        for (auto &r : c.rays)
            r.initial_phase = ph(rng);
        acc += std::norm(nlos_component(c, 0, one, 0, one, 0, 0.0, lambda));
    }
    CHECK_THAT(acc / n, WithinRel(0.36, 0.03));
}

TEST_CASE("window power rescaling", "[coefficients]")
{
    CHECK_THAT(snapshot_power_factor(0.3, 1, 1.0, 1.0), WithinAbs(std::sqrt(0.3), 1e-15));
    CHECK(snapshot_power_factor(0.3, 4, 1.0, 0.0) == 0.0);

    std::vector<cd> h = {cd(1.0, 0.0)};
    scale_snapshot_powers(h, {1.0}, 0.4, 1);
    CHECK_THAT(std::norm(h[0]), WithinAbs(0.4, 1e-15));

    // Coefficients already at P/M times the ray energy stay put.
    std::vector<cd> fixed = {std::sqrt(0.5 / 2.0) * cd(1, 1), std::sqrt(0.5 / 2.0) * cd(0, 2)};
    const std::vector<double> e = {2.0, 4.0};
    auto copy = fixed;
    scale_snapshot_powers(copy, e, 0.5, 2);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::abs(copy[i] - fixed[i]) < 1e-15);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    for (int t = 0; t < 50; ++t)
    {
        std::vector<cd> s(10);
        std::vector<double> en(10);
        for (std::size_t i = 0; i < 10; ++i)
        {
            s[i] = cd(n01(rng), n01(rng));
            en[i] = std::abs(n01(rng)) * 5.0;
        }
        const double power = 0.05 + std::abs(n01(rng));
        scale_snapshot_powers(s, en, power, 20);
        double lhs = 0, rhs = 0;
        for (std::size_t i = 0; i < 10; ++i)
        {
            lhs += std::norm(s[i]);
            rhs += en[i];
        }
        CHECK_THAT(lhs, WithinRel(power / 20.0 * rhs, 1e-12));
    }

    std::vector<cd> zeros(3, 0.0);
    scale_snapshot_powers(zeros, {1, 1, 1}, 0.5, 2);
    CHECK(zeros[0] == cd(0.0));
    CHECK_THROWS_AS(scale_snapshot_powers(zeros, {1, 1}, 0.5, 2), std::invalid_argument);
}

TEST_CASE("large-scale scaling of a tensor", "[coefficients]")
{
    CirTensor c(3, 2, 2, 4, 1, 0.01);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    for (auto &x : c.coefficients())
        x = cd(n01(rng), n01(rng));
    const CirTensor orig = c;
    full_channel_matrix(c, 0.0, 0.0);
    CHECK(c == orig);

    full_channel_matrix(c, 20.0, 0.0);
    for (std::size_t i = 0; i < c.coefficients().size(); ++i)
        CHECK(std::abs(c.coefficients()[i] - 10.0 * orig.coefficients()[i]) < 1e-12);

    CirTensor d = orig;
    full_channel_matrix(d, 7.0, -2.5);
    double e0 = 0, e1 = 0;
    for (std::size_t i = 0; i < d.coefficients().size(); ++i)
    {
        e0 += std::norm(orig.coefficients()[i]);
        e1 += std::norm(d.coefficients()[i]);
    }
    CHECK_THAT(e1 / e0, WithinRel(std::pow(10.0, 0.45), 1e-12));
}

TEST_CASE("antenna arrays", "[antenna]")
{
    const auto a = AntennaArray::ula(4, 0.5, Vec3(0, 2, 0));
    REQUIRE(a.size() == 4);
    CHECK(a.positions[0] == Vec3::Zero());
    CHECK((a.positions[3] - Vec3(0, 1.5, 0)).norm() < 1e-15);
    CHECK_THROWS_AS(AntennaArray::ula(0, 0.5, Vec3::UnitY()), config_error);
    CHECK_THROWS_AS(AntennaArray::ula(2, -0.5, Vec3::UnitY()), config_error);

    const auto v = antenna_pattern(PatternKind::isotropic_vertical, {0.3, 0.2});
    CHECK(v.theta == cd(1.0));
    CHECK(v.phi == cd(0.0));
    const auto h = antenna_pattern(PatternKind::isotropic_horizontal, {0.3, 0.2});
    CHECK(h.theta == cd(0.0));
    CHECK(h.phi == cd(1.0));

    const double front = std::abs(antenna_pattern(PatternKind::directional_3gpp, {0.0, 0.0}).theta);
    const double back = std::abs(antenna_pattern(PatternKind::directional_3gpp, {pi, 0.0}).theta);
    CHECK_THAT(20 * std::log10(front), WithinAbs(8.0, 1e-9));
    CHECK_THAT(20 * std::log10(front / back), WithinAbs(30.0, 1e-9));
    CHECK(parse_pattern_kind("isotropic_vertical") == PatternKind::isotropic_vertical);
    CHECK_THROWS_AS(parse_pattern_kind("dipole"), config_error);
}

TEST_CASE("CIR tensor files", "[cir]")
{
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "gscm_unit_cir";
    fs::create_directories(dir);
    const fs::path file = dir / "t.gcir";

    CirTensor c(3, 2, 1, 4, 2, 0.005);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n01;
    for (auto &x : c.coefficients())
        x = cd(n01(rng), n01(rng));
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t l = 0; l < 4; ++l)
            c.delay(p, l) = 1e-8 * (l + 1) + 1e-10 * p;
    write_cir(c, file);
    CHECK(read_cir(file) == c);
    CHECK(fs::file_size(file) == 4 + 4 + 5 * 8 + 8 + 3 * 4 * 8 + 3 * 2 * 1 * 4 * 2 * 16);

    const CirTensor s = c.frequency_slice(1);
    CHECK(s.frequencies() == 1);
    CHECK(s.at(2, 1, 0, 3, 0) == c.at(2, 1, 0, 3, 1));

    SECTION("bad magic")
    {
        std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
        f.write("XXXX", 4);
        f.close();
        try
        {
            read_cir(file);
            FAIL("expected data_error");
        }
        catch (const data_error &e)
        {
            CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
        }
    }
    SECTION("truncated")
    {
        fs::resize_file(file, fs::file_size(file) - 5);
        CHECK_THROWS_AS(read_cir(file), data_error);
    }
    SECTION("missing")
    {
        CHECK_THROWS_AS(read_cir(dir / "absent.gcir"), data_error);
    }
    fs::remove_all(dir);
}

TEST_CASE("link simulation", "[link]")
{
    LinkConfig lc;
    lc.tx = Vec3(0, 0, 3);
    lc.rx = Trajectory::linear(Vec3(10, 0, 1.5), Vec3::UnitY(), 1.0);
    lc.frequencies_hz = {2.4e9, 5.2e9};
    lc.num_clusters = 8;
    lc.num_rays = 20;
    lc.offsets.alpha = RayOffsets::default_alpha();
    lc.offsets.c_asa = 11;
    lc.offsets.c_asd = 5;
    lc.offsets.c_esa = 9;
    lc.offsets.c_esd = 3;
    lc.lsp.los = true;
    lc.lsp[Lsp::ds] = {-7.7, 0.0, 0.18, 0.0, 8.0};
    lc.lsp[Lsp::k] = {7.0, 0.0, 4.0, 0.0, 4.0};
    lc.lsp[Lsp::sf] = {0.0, 0.0, 3.0, 0.0, 10.0};
    lc.lsp[Lsp::esd] = {1.0, 0.0, 0.3, 0.0, 4.0};
    lc.lsp[Lsp::esa] = {1.2, 0.0, 0.2, 0.0, 4.0};
    lc.lsp[Lsp::asd] = {1.4, 0.0, 0.2, 0.0, 7.0};
    lc.lsp[Lsp::asa] = {1.6, 0.0, 0.2, 0.0, 5.0};
    lc.lsp[Lsp::xpr] = {11.0, 0.0, 4.0, 0.0, 10.0};
    lc.evolution.dt = 0.01;
    lc.evolution.dt_bd = 0.05;
    lc.link_key = trajectory_key(lc.tx, lc.rx);

    FieldBank bank(2, 200);
    const CirTensor a = simulate_link(lc, bank, 30);
    CHECK(a.snapshots() == 30);
    CHECK(a.frequencies() == 2);
    CHECK(a.taps() >= 9);

    SECTION("deterministic")
    {
        FieldBank other(2, 200);
        CHECK(simulate_link(lc, other, 30) == a);
    }
    SECTION("carriers share delays but not powers")
    {
        bool differ = false;
        for (std::size_t p = 0; p < a.snapshots(); ++p)
            for (std::size_t l = 1; l < a.taps(); ++l)
                differ = differ || std::abs(std::abs(a.at(p, 0, 0, l, 0)) - std::abs(a.at(p, 0, 0, l, 1))) > 1e-9;
        CHECK(differ);
    }
    SECTION("LOS tap sits at the direct delay")
    {
        const double d = (trajectory_state(lc.rx, 0.0).position - lc.tx).norm();
        CHECK_THAT(a.delay(0, 0), WithinRel(d / speed_of_light, 1e-12));
    }
    SECTION("no clusters leaves a single LOS tap")
    {
        LinkConfig los_only = lc;
        los_only.num_clusters = 0;
        los_only.evolution.birth_death = false;
        FieldBank b(2, 200);
        const CirTensor c = simulate_link(los_only, b, 5);
        CHECK(c.taps() == 1);
        CHECK(std::abs(c.at(0, 0, 0, 0, 0)) > 0.0);
    }
}
