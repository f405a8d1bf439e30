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

//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if
// any criterion fails.
//
//     gscm_acceptance --config-dir <dir> [--only <n>] [--seeds <n>]

#include <gscm/analysis.hpp>
#include <gscm/config.hpp>
#include <gscm/evolution.hpp>
#include <gscm/link.hpp>
#include <gscm/runner.hpp>
#include <gscm/sosfield.hpp>

#include <spdlog/spdlog.h>
#include <unistd.h>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gscm;

namespace
{
    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    std::string fmt(const char *f, auto... args)
    {
        char buf[512];
        std::snprintf(buf, sizeof buf, f, args...);
        return buf;
    }

    double median(std::vector<double> v)
    {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    struct Options
    {
        fs::path config_dir;
        std::size_t seeds = 200;
    };

    // 1. Power normalization after initialization, every drift step and every event.
    Outcome power_normalization(const Options &o)
    {
        ScenarioConfig cfg = load_config(o.config_dir / "indoor_los.cfg");
        double worst = 0.0;
        std::size_t checks = 0, events = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed)
        {
            FieldBank bank(seed, cfg.sinusoids);
            LinkSimulator sim(cfg.link_config(0), bank);
            for (std::size_t p = 0; p < cfg.snapshots(); ++p)
            {
                if (p > 0)
                    sim.advance();
                const auto &ev = sim.last_event();
                events += (sim.window_index() == 0 && p > 0) ? ev.born + ev.died : 0;
                for (std::size_t f = 0; f < cfg.frequencies_ghz.size(); ++f)
                {
                    double sum = 0.0;
                    for (const auto &c : sim.clusters())
                        sum += c.power.at(f);
                    worst = std::max(worst, std::abs(sum - 1.0));
                    ++checks;
                }
            }
        }
        return {worst <= 1e-12, fmt("max |sum P - 1| = %.2e over %zu checks (%zu births/deaths)", worst, checks, events)};
    }

    // 2. Window power identity, recomputed from the raw ray terms of the simulator.
    Outcome window_identity(const Options &o)
    {
        ScenarioConfig cfg = load_config(o.config_dir / "indoor_los.cfg");
        cfg.apply_large_scale = false;
        cfg.tx_array.elements = 2;
        cfg.rx_array.elements = 2;
        LinkConfig lc = cfg.link_config(0);
        const std::size_t P = 200;
        const std::size_t nu = lc.rx_array.size(), ns = lc.tx_array.size(), nf = lc.frequencies_hz.size();
        const std::size_t k = lc.evolution.steps_per_bd();

        // raw[p][slot] -> per (u, s, f): sum_m |h_m|^2; power[p][slot][f]; rays[slot]
        std::vector<std::map<std::size_t, std::vector<double>>> raw(P);
        std::vector<std::map<std::size_t, std::vector<double>>> power(P);
        std::map<std::uint64_t, std::size_t> slot_of;
        std::size_t num_slots = 1; // LOS slot
        std::map<std::size_t, std::size_t> rays;

        FieldBank bank(cfg.seed, cfg.sinusoids);
        const CirTensor cir = simulate_link(lc, bank, P, [&](const LinkSimulator &sim)
        {
            const std::size_t p = sim.snapshot();
            for (std::size_t l = 0; l < sim.clusters().size(); ++l)
            {
                const Cluster &c = sim.clusters()[l];
                auto it = slot_of.find(c.id);
                if (it == slot_of.end())
                    it = slot_of.emplace(c.id, num_slots++).first;
                std::vector<double> e(nu * ns * nf, 0.0);
                for (std::size_t u = 0; u < nu; ++u)
                    for (std::size_t s = 0; s < ns; ++s)
                        for (std::size_t f = 0; f < nf; ++f)
                            for (std::size_t m = 0; m < c.rays.size(); ++m)
                                e[(u * ns + s) * nf + f] += std::norm(sim.ray_term(u, s, f, l, m));
                raw[p][it->second] = std::move(e);
                power[p][it->second] = c.power;
                rays[it->second] = c.rays.size();
            }
        });

        double worst = 0.0;
        std::size_t checks = 0;
        for (std::size_t w0 = 0; w0 < P; w0 += k)
        {
            const std::size_t w1 = std::min(P, w0 + k);
            for (const auto &[slot, e0] : raw[w0])
                for (std::size_t u = 0; u < nu; ++u)
                    for (std::size_t s = 0; s < ns; ++s)
                        for (std::size_t f = 0; f < nf; ++f)
                        {
                            const std::size_t idx = (u * ns + s) * nf + f;
                            double lhs = 0.0, rhs = 0.0;
                            for (std::size_t p = w0; p < w1; ++p)
                            {
                                lhs += std::norm(cir.at(p, u, s, slot, f));
                                rhs += raw[p].at(slot)[idx];
                            }
                            rhs *= power[w0].at(slot)[f] / static_cast<double>(rays.at(slot));
                            if (rhs == 0.0)
                                continue;
                            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
                            ++checks;
                        }
        }
        return {checks > 0 && worst <= 1e-12,
                fmt("max relative error %.2e over %zu (u, s, f, l, window) cells", worst, checks)};
    }

    // 3. Survivor fraction and birth count of the birth-death step.
    Outcome birth_death_statistics(const Options &)
    {
        EvolutionParams ep;
        ep.lambda_r = 0.04;
        ep.dc_a = 30.0;
        const double q = 3.0;
        const double ps = survival_probability(q, ep);
        const double expected_ps = std::exp(-0.004);

        std::mt19937_64 rng(20240601);
        ClusterFactory factory = [](std::uint64_t id)
        {
            Cluster c;
            c.id = id;
            return c;
        };

        bool ok = std::abs(ps - expected_ps) < 1e-15;
        std::string detail;
        for (double lambda_g : {0.04, 80.0})
        {
            ep.lambda_g = lambda_g;
            const double eb = expected_new_clusters(ps, ep);
            const double eb_oracle = (lambda_g / 0.04) * (1.0 - expected_ps);
            const std::size_t per_step = 20, steps = 500;
            std::size_t survived = 0, trials = 0, born = 0;
            std::uint64_t next_id = per_step;
            for (std::size_t i = 0; i < steps; ++i)
            {
                std::vector<Cluster> clusters(per_step);
                for (std::size_t l = 0; l < per_step; ++l)
                    clusters[l].id = l;
                const auto out = birth_death_step(clusters, ps, eb, rng, factory, next_id);
                survived += out.survived;
                trials += out.survived + out.died;
                born += out.born;
            }
            // Births: one Poisson draw per event; use 10^4 events.
            std::size_t births_extra = 0;
            const std::size_t events = 10000;
            for (std::size_t i = 0; i < events - steps; ++i)
            {
                std::vector<Cluster> clusters;
                births_extra += birth_death_step(clusters, ps, eb, rng, factory, next_id).born;
            }
            const double frac = static_cast<double>(survived) / static_cast<double>(trials);
            const double se_s = std::sqrt(expected_ps * (1.0 - expected_ps) / static_cast<double>(trials));
            const double mean_b = static_cast<double>(born + births_extra) / static_cast<double>(events);
            const double se_b = std::sqrt(eb_oracle / static_cast<double>(events));
            ok = ok && trials == 10000 && std::abs(frac - expected_ps) <= 3.0 * se_s &&
                 std::abs(mean_b - eb_oracle) <= 3.0 * se_b && std::abs(eb - eb_oracle) < 1e-12;
            detail += fmt("%slambda_G %.2g: survivors %.5f (exp %.5f +- %.5f), births %.5f (exp %.5f +- %.5f)",
                          detail.empty() ? "" : "; ", lambda_g, frac, expected_ps, 3 * se_s, mean_b, eb_oracle,
                          3 * se_b);
        }
        return {ok, detail};
    }

    // 4. SoS autocorrelation at the correlation distance and KS statistic of the uniform map.
    Outcome sos_field(const Options &)
    {
        const double dc = 10.0;
        const std::size_t n = 100000;
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> box(-5000.0, 5000.0);
        std::normal_distribution<double> n01(0.0, 1.0);

        double worst_acf = 0.0, mean_acf = 0.0;
        const int gens = 5;
        for (int g = 0; g < gens; ++g)
        {
            SosGenerator gen(dc, 500, derive_seed(99, {static_cast<std::uint64_t>(g)}));
            double sxy = 0.0, sxx = 0.0, syy = 0.0, sx = 0.0, sy = 0.0;
            for (std::size_t i = 0; i < n; ++i)
            {
                const Vec3 p(box(rng), box(rng), box(rng));
                const Vec3 dir = Vec3(n01(rng), n01(rng), n01(rng)).normalized();
                const double a = gen.sample_normal(p), b = gen.sample_normal(p + dc * dir);
                sx += a;
                sy += b;
                sxy += a * b;
                sxx += a * a;
                syy += b * b;
            }
            const double N = static_cast<double>(n);
            const double r = (sxy / N - sx * sy / (N * N)) /
                             std::sqrt((sxx / N - sx * sx / (N * N)) * (syy / N - sy * sy / (N * N)));
            worst_acf = std::max(worst_acf, std::abs(r - std::exp(-1.0)));
            mean_acf += r / gens;
        }

        SosGenerator gen(dc, 500, 12345);
        std::vector<double> u(n);
        for (auto &v : u)
            v = gen.sample_uniform(Vec3(box(rng), box(rng), box(rng)));
        std::sort(u.begin(), u.end());
        double ks = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            ks = std::max({ks, std::abs(static_cast<double>(i + 1) / n - u[i]), std::abs(u[i] - static_cast<double>(i) / n)});

        return {worst_acf <= 0.1 && ks < 0.02,
                fmt("ACF(d_c) mean %.4f (target %.4f, worst deviation %.4f over %d fields); KS %.4f", mean_acf,
                    std::exp(-1.0), worst_acf, gens, ks)};
    }

    LinkConfig point_link(const Vec3 &tx, const Trajectory &rx, double fc_hz, double dt, std::vector<Vec3> points)
    {
        LinkConfig lc;
        lc.tx = tx;
        lc.rx = rx;
        lc.frequencies_hz = {fc_hz};
        lc.num_rays = 1;
        lc.num_clusters = points.size();
        lc.offsets.alpha = {0.0};
        lc.evolution.dt = dt;
        lc.evolution.dt_bd = dt;
        lc.evolution.birth_death = false;
        lc.evolution.update_lsps = false;
        lc.lsp.los = false;
        lc.point_scatterers = std::move(points);
        lc.link_key = trajectory_key(tx, rx);
        return lc;
    }

    // 5. Doppler peak of a single static cluster ahead of the moving Rx.
    Outcome doppler(const Options &)
    {
        const double fc = 2.4e9, v = 3.0, dt = 0.005, T = 10.0;
        const std::size_t P = static_cast<std::size_t>(std::lround(T / dt));
        const Vec3 rx0(5.0, 0.0, 1.5);
        LinkConfig lc = point_link(Vec3(0.0, 0.0, 3.0), Trajectory::linear(rx0, Vec3::UnitX(), v), fc, dt,
                                   {Vec3(200.0, 0.0, 1.5)});
        FieldBank bank(3, 500);
        const CirTensor cir = simulate_link(lc, bank, P);

        const double bin = 1.0 / (static_cast<double>(P) * dt);
        double best = -1.0, f_peak = 0.0;
        for (std::size_t kk = 0; kk < P; ++kk)
        {
            const double f = (kk < P / 2 ? static_cast<double>(kk) : static_cast<double>(kk) - static_cast<double>(P)) * bin;
            std::complex<double> acc = 0.0;
            for (std::size_t p = 0; p < P; ++p)
                acc += cir.at(p, 0, 0, 0, 0) * std::polar(1.0, -2.0 * pi * f * static_cast<double>(p) * dt);
            if (std::abs(acc) > best)
            {
                best = std::abs(acc);
                f_peak = f;
            }
        }
        const double expected = v * fc / speed_of_light;
        return {std::abs(std::abs(f_peak) - expected) <= bin,
                fmt("peak at %.3f Hz, expected |f_D| = %.3f Hz, bin %.3f Hz", f_peak, expected, bin)};
    }

    // 6. Clarke ring: ensemble |ACF| against J0.
    Outcome clarke_acf(const Options &o)
    {
        const double fc = 2.4e9, lambda = speed_of_light / fc, v = 1.0, dt = 0.005;
        const std::size_t max_lag = static_cast<std::size_t>(std::floor(lambda / (v * dt)));
        const std::size_t window = 40, P = max_lag + window;
        const std::size_t seeds = std::max<std::size_t>(100, o.seeds / 2);
        const Vec3 rx0(0.0, 0.0, 1.5), tx(-3000.0, 0.0, 1.5);

        std::vector<CirTensor> ensemble;
        for (std::size_t seed = 1; seed <= seeds; ++seed)
        {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> az(-pi, pi);
            std::vector<Vec3> pts;
            for (int i = 0; i < 100; ++i)
            {
                const double a = az(rng);
                pts.emplace_back(rx0 + 1000.0 * Vec3(std::cos(a), std::sin(a), 0.0));
            }
            LinkConfig lc = point_link(tx, Trajectory::linear(rx0, Vec3::UnitX(), v), fc, dt, pts);
            FieldBank bank(seed, 500);
            ensemble.push_back(simulate_link(lc, bank, P));
        }

        // Collapse the taps into one narrowband coefficient per snapshot.
        std::vector<CirTensor> narrow;
        for (const auto &c : ensemble)
        {
            CirTensor n(c.snapshots(), 1, 1, 1, 1, c.dt());
            for (std::size_t p = 0; p < c.snapshots(); ++p)
                n.at(p, 0, 0, 0, 0) = transfer_value(c, p, 0, 0, 0, 0.0);
            narrow.push_back(std::move(n));
        }
        const auto acf = temporal_acf(narrow, 0, 0, 0, max_lag, 0, window);
        double worst = 0.0;
        for (std::size_t k = 0; k <= max_lag; ++k)
        {
            const double x = 2.0 * pi * v * static_cast<double>(k) * dt / lambda;
            worst = std::max(worst, std::abs(std::abs(acf[k]) - std::abs(std::cyl_bessel_j(0.0, x))));
        }
        return {worst <= 0.05, fmt("max ||ACF| - |J0|| = %.4f over %zu lags (v dt <= lambda), %zu seeds", worst,
                                   max_lag + 1, seeds)};
    }

    // 7. Median Rx-side |CCF| decreasing over 0..0.5 lambda.
    Outcome spatial_ccf_shape(const Options &o)
    {
        ScenarioConfig cfg = load_config(o.config_dir / "indoor_nlos_ccf.cfg");
        const double spacing = cfg.rx_array.spacing;
        const std::size_t max_offset = static_cast<std::size_t>(std::lround(0.5 / spacing));
        std::vector<std::vector<double>> curves(max_offset + 1);
        for (std::size_t seed = 1; seed <= o.seeds; ++seed)
        {
            cfg.seed = seed;
            FieldBank bank(seed, cfg.sinusoids);
            const CirTensor cir = simulate_link(cfg.link_config(0), bank, cfg.snapshots());
            const auto ccf = spatial_ccf({cir}, ArraySide::rx, spacing, max_offset, 0);
            for (std::size_t d = 0; d <= max_offset; ++d)
                curves[d].push_back(ccf[d].ccf_abs);
        }
        std::vector<double> med;
        for (auto &c : curves)
            med.push_back(median(c));
        bool mono = true;
        for (std::size_t d = 1; d < med.size(); ++d)
            mono = mono && med[d] < med[d - 1];
        std::string curve;
        for (double m : med)
            curve += fmt(" %.4f", m);
        std::fprintf(stderr, "median |CCF|:%s\n", curve.c_str());
        return {mono, fmt("median |CCF| %.4f at 0, %.4f at 0.25 lambda, %.4f at 0.5 lambda; %zu seeds", med.front(),
                          med[med.size() / 2], med.back(), o.seeds)};
    }

    // 8. Median CMC non-increasing with Rx separation; duplicated link gives 1.
    Outcome cmc_trend(const Options &o)
    {
        ScenarioConfig cfg = load_config(o.config_dir / "indoor_nlos.cfg");
        const std::size_t nl = cfg.links.size();
        std::vector<std::vector<double>> values(nl - 1);
        double worst_dup = 0.0;
        bool in_range = true;
        for (std::size_t seed = 1; seed <= o.seeds; ++seed)
        {
            cfg.seed = seed;
            FieldBank bank(seed, cfg.sinusoids);
            std::vector<Eigen::MatrixXcd> r;
            for (std::size_t i = 0; i < nl; ++i)
                r.push_back(correlation_matrix(simulate_link(cfg.link_config(i), bank, cfg.snapshots()), 0));
            const Eigen::MatrixXcd dup = correlation_matrix(simulate_link(cfg.link_config(0), bank, cfg.snapshots()), 0);
            worst_dup = std::max(worst_dup, std::abs(cmc(r[0], dup) - 1.0));
            for (std::size_t i = 1; i < nl; ++i)
            {
                const double c = cmc(r[0], r[i]);
                in_range = in_range && c >= 0.0 && c <= 1.0 + 1e-12;
                values[i - 1].push_back(c);
            }
        }
        std::vector<double> med;
        for (auto &v : values)
            med.push_back(median(v));
        bool trend = true;
        for (std::size_t i = 1; i < med.size(); ++i)
            trend = trend && med[i] <= med[i - 1];
        std::string meds;
        for (std::size_t i = 0; i < med.size(); ++i)
            meds += fmt("%s%s %.4f", i ? ", " : "", cfg.links[i + 1].name.c_str(), med[i]);
        return {trend && in_range && worst_dup <= 1e-12,
                fmt("median CMC %s; duplicate |CMC - 1| = %.1e; %zu seeds", meds.c_str(), worst_dup, o.seeds)};
    }

    // 9. Delay rate of a static cluster behind a receding Rx.
    Outcome delay_kinematics(const Options &)
    {
        const double v = 3.0, dt = 0.01;
        const Vec3 point(0.0, 20.0, 1.5), rx0(0.0, 25.0, 1.5);
        LinkConfig lc = point_link(Vec3(-10.0, 0.0, 3.0), Trajectory::linear(rx0, Vec3::UnitY(), v), 2.4e9, dt, {point});
        FieldBank bank(5, 500);
        LinkSimulator sim(lc, bank);
        const double tau0 = sim.clusters().front().delay;
        double worst = 0.0;
        double prev = tau0;
        const std::size_t steps = 200;
        for (std::size_t p = 1; p <= steps; ++p)
        {
            sim.advance();
            const double tau = sim.clusters().front().delay;
            worst = std::max(worst, std::abs((tau - prev) / dt / (v / speed_of_light) - 1.0));
            prev = tau;
        }
        const double rate = (prev - tau0) / (static_cast<double>(steps) * dt);
        return {std::abs(rate / 1.0e-8 - 1.0) <= 0.01 && worst <= 0.01,
                fmt("d tau / dt = %.6e s/s (3/c = %.6e), worst per-step deviation %.2e", rate, v / speed_of_light,
                    worst)};
    }

    bool same_bytes(const fs::path &a, const fs::path &b)
    {
        std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
        if (!fa || !fb)
            return false;
        const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
        return !sa.empty() && sa == sb;
    }

    // 10. Byte-identical outputs for identical config and seed.
    Outcome determinism(const Options &o)
    {
        const fs::path root = fs::temp_directory_path() / fmt("gscm_acceptance_%d", static_cast<int>(::getpid()));
        std::size_t files = 0;
        bool ok = true;
        for (const char *name : {"indoor_los.cfg", "indoor_nlos.cfg"})
        {
            ScenarioConfig cfg = load_config(o.config_dir / name);
            const auto m1 = run_scenario(cfg, root / "a");
            const auto m2 = run_scenario(cfg, root / "b");
            for (std::size_t i = 0; i < m1.links.size(); ++i)
            {
                for (std::size_t f = 0; f < m1.links[i].cir_files.size(); ++f, ++files)
                    ok = ok && same_bytes(root / "a" / m1.links[i].cir_files[f], root / "b" / m2.links[i].cir_files[f]);
                ok = ok && same_bytes(root / "a" / m1.links[i].trajectory_file, root / "b" / m2.links[i].trajectory_file);
            }
            fs::remove_all(root);
        }
        return {ok && files > 0, fmt("%zu CIR files compared byte by byte across two runs", files)};
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"gscm acceptance suite"};
    Options o;
    int only = 0;
    app.add_option("--config-dir", o.config_dir, "Directory with the bundled scenario files")->required();
    app.add_option("--only", only, "Run a single criterion");
    app.add_option("--seeds", o.seeds, "Ensemble size for criteria 7 and 8")->check(CLI::Range(1, 100000));
    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::warn);

    const std::vector<std::pair<const char *, std::function<Outcome(const Options &)>>> criteria = {
        {"power normalization", power_normalization},
        {"window power identity", window_identity},
        {"birth-death statistics", birth_death_statistics},
        {"SoS field ACF and KS", sos_field},
        {"Doppler peak", doppler},
        {"Clarke ACF", clarke_acf},
        {"spatial CCF shape", spatial_ccf_shape},
        {"CMC trend", cmc_trend},
        {"delay kinematics", delay_kinematics},
        {"determinism", determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        if (only && static_cast<std::size_t>(only) != i + 1)
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try
        {
            r = criteria[i].second(o);
        }
        catch (const std::exception &e)
        {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s [%zu] %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, r.detail.c_str(),
                    secs);
        std::fflush(stdout);
        failed += r.pass ? 0 : 1;
    }
    return failed ? 1 : 0;
}
