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

#include "gscm/runner.hpp"
#include "gscm/error.hpp"
#include "gscm/link.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <spdlog/spdlog.h>

namespace gscm
{
    namespace
    {
        using json = nlohmann::ordered_json;

        json vec_json(const Vec3 &v)
        {
            return json::array({v.x(), v.y(), v.z()});
        }

        json trajectory_json(const Trajectory &t)
        {
            json j;
            j["kind"] = std::string(to_string(t.kind));
            j["origin"] = vec_json(t.origin);
            j["start_time"] = t.start_time;
            if (t.kind == TrajectoryKind::linear)
            {
                j["heading"] = vec_json(t.heading);
                j["speed"] = t.speed;
            }
            if (t.kind == TrajectoryKind::circular)
            {
                j["center"] = vec_json(t.center);
                j["radius"] = t.radius;
                j["angular_rate"] = t.angular_rate;
            }
            return j;
        }

        json array_json(const ArrayConfig &a)
        {
            return {{"elements", a.elements},
                    {a.spacing_in_lambda ? "spacing_lambda" : "spacing_m", a.spacing},
                    {"axis", vec_json(a.axis)},
                    {"pattern", std::string(to_string(a.pattern))}};
        }

        std::string utc_now()
        {
            const std::time_t t = std::time(nullptr);
            std::tm tm{};
            gmtime_r(&t, &tm);
            std::ostringstream os;
            os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
            return os.str();
        }

        template <typename E>
        [[noreturn]] void rethrow_as(const std::string &context, const E &e)
        {
            throw E(context + e.what());
        }

        LinkOutput run_link(const ScenarioConfig &cfg, std::size_t i, FieldBank &bank, const std::filesystem::path &dir)
        {
            const LinkConfig lc = cfg.link_config(i);
            std::ostringstream csv;
            csv << std::setprecision(10);
            csv << "time_s,object,cluster_id,status,x,y,z\n";
            auto observer = [&](const LinkSimulator &sim)
            {
                const double t = sim.time();
                const Vec3 rx = sim.rx_position();
                csv << t << ",rx,-1,alive," << rx.x() << ',' << rx.y() << ',' << rx.z() << '\n';
                for (const auto &c : sim.clusters())
                {
                    const char *status = c.status == ClusterStatus::nascent ? "nascent"
                                         : c.status == ClusterStatus::dying ? "dying"
                                                                            : "alive";
                    const Vec3 z = lc.tx + c.d_tx, a = rx + c.d_rx;
                    csv << t << ",first_bounce," << c.id << ',' << status << ',' << z.x() << ',' << z.y() << ','
                        << z.z() << '\n';
                    csv << t << ",last_bounce," << c.id << ',' << status << ',' << a.x() << ',' << a.y() << ','
                        << a.z() << '\n';
                }
            };

            const CirTensor cir = simulate_link(lc, bank, cfg.snapshots(), observer);

            LinkOutput out;
            out.name = cfg.links[i].name;
            out.taps = cir.taps();
            for (std::size_t f = 0; f < cir.frequencies(); ++f)
            {
                const auto name = "link" + std::to_string(i) + "_f" + std::to_string(f) + ".gcir";
                write_cir(cir.frequency_slice(f), dir / name);
                out.cir_files.push_back(name);
            }
            out.trajectory_file = "link" + std::to_string(i) + "_trajectory.csv";
            std::ofstream tf(dir / out.trajectory_file);
            tf << csv.str();
            if (!tf)
                throw data_error("cannot write " + (dir / out.trajectory_file).string());
            spdlog::info("link {} ({}): {} snapshots, {} taps", i, out.name, cir.snapshots(), cir.taps());
            return out;
        }

        std::vector<CirTensor> load_inputs(const AnalyzeParams &p, std::size_t minimum)
        {
            if (p.inputs.size() < minimum)
                throw data_error("analyze " + p.metric + ": expected at least " + std::to_string(minimum) +
                                 " input file(s), got " + std::to_string(p.inputs.size()));
            std::size_t n = p.inputs.size();
            if (p.ensemble > 0)
            {
                const std::size_t need = p.metric == "cmc" ? 2 * p.ensemble : p.ensemble;
                if (n < need)
                    throw data_error("analyze " + p.metric + ": --ensemble " + std::to_string(p.ensemble) +
                                     " needs " + std::to_string(need) + " input files, got " + std::to_string(n));
                n = need;
            }
            std::vector<CirTensor> out;
            for (std::size_t i = 0; i < n; ++i)
                out.push_back(read_cir(p.inputs[i]));
            return out;
        }
    }

    std::string RunManifest::to_json() const
    {
        json j;
        j["software_version"] = software_version;
        j["seed"] = seed;
        j["started_utc"] = started_utc;
        j["wall_seconds"] = wall_seconds;
        j["config"] = json::parse(config_echo);
        j["links"] = json::array();
        for (const auto &l : links)
        {
            json e;
            e["name"] = l.name;
            e["taps"] = l.taps;
            e["cir_files"] = json::array();
            for (const auto &f : l.cir_files)
                e["cir_files"].push_back(f.string());
            e["trajectory_file"] = l.trajectory_file.string();
            j["links"].push_back(e);
        }
        return j.dump(2) + "\n";
    }

    std::string config_to_json(const ScenarioConfig &c)
    {
        json j;
        j["scenario"] = c.scenario;
        j["seed"] = c.seed;
        j["frequencies_ghz"] = c.frequencies_ghz;
        j["time"] = {{"dt", c.evolution.dt}, {"dt_bd", c.evolution.dt_bd}, {"duration", c.duration},
                     {"snapshots", c.snapshots()}};
        j["clusters"] = {{"count", c.num_clusters}, {"rays", c.num_rays}};
        j["sos"] = {{"sinusoids", c.sinusoids}};
        j["large_scale"] = {{"apply", c.apply_large_scale}};
        j["tx"] = {{"position", vec_json(c.tx)}, {"array", array_json(c.tx_array)}};
        j["rx_array"] = array_json(c.rx_array);
        j["links"] = json::array();
        for (const auto &l : c.links)
            j["links"].push_back({{"name", l.name}, {"trajectory", trajectory_json(l.rx)}});
        j["evolution"] = {{"lambda_g", c.evolution.lambda_g}, {"lambda_r", c.evolution.lambda_r},
                          {"dc_a", c.evolution.dc_a},         {"p_c", c.evolution.p_c},
                          {"birth_death", c.evolution.birth_death}, {"update_lsps", c.evolution.update_lsps}};
        j["cluster_motion"] = {{"kind", std::string(to_string(c.motion.kind))},
                               {"speed", c.motion.speed},
                               {"radius", c.motion.radius}};
        json lsp;
        lsp["los"] = c.lsp.los;
        for (std::size_t i = 0; i < num_lsps; ++i)
        {
            const auto &x = c.lsp.params[i];
            lsp[lsp_names[i]] = {{"mu", x.mu}, {"mu_f", x.mu_f}, {"sigma", x.sigma}, {"sigma_f", x.sigma_f},
                                 {"correlation_distance", x.correlation_distance}};
        }
        json corr = json::array();
        for (std::size_t i = 0; i < num_lsps; ++i)
        {
            json row = json::array();
            for (std::size_t k = 0; k < num_lsps; ++k)
                row.push_back(c.lsp.correlation(i, k));
            corr.push_back(row);
        }
        lsp["correlation"] = corr;
        j["lsp"] = lsp;
        j["path_loss"] = {{"intercept", c.path_loss.intercept},
                          {"distance_exponent", c.path_loss.distance_exponent},
                          {"frequency_exponent", c.path_loss.frequency_exponent}};
        j["ssp"] = {{"correlation_distance", c.ssp.correlation.cluster},
                    {"virtual_delay_correlation_distance", c.ssp.correlation.virtual_delay},
                    {"phase_correlation_distance", c.ssp.correlation.phase},
                    {"virtual_delay_mean_ns", c.ssp.virtual_delay_mean * 1e9},
                    {"xpr_sigma_db", c.ssp.xpr_sigma_db},
                    {"placement_fraction", {c.ssp.rho_min, c.ssp.rho_max}}};
        j["ray_offsets"] = {{"alpha", c.offsets.alpha}, {"c_asd", c.offsets.c_asd}, {"c_asa", c.offsets.c_asa},
                            {"c_esd", c.offsets.c_esd}, {"c_esa", c.offsets.c_esa}};
        j["scaling"] = {{"delay_headroom", c.scaling.delay_headroom},
                        {"regularization", c.scaling.regularization},
                        {"tracking", c.scaling.tracking},
                        {"tolerance", c.scaling.tolerance},
                        {"max_iterations", c.scaling.max_iterations}};
        return j.dump();
    }

    RunManifest run_scenario(const ScenarioConfig &cfg, const std::filesystem::path &out_dir)
    {
        const auto t0 = std::chrono::steady_clock::now();
        RunManifest m;
        m.seed = cfg.seed;
        m.started_utc = utc_now();
        m.config_echo = config_to_json(cfg);

        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
            throw data_error("cannot create output directory " + out_dir.string() + ": " + ec.message());

        FieldBank bank(cfg.seed, cfg.sinusoids);
        std::vector<std::future<LinkOutput>> jobs;
        for (std::size_t i = 0; i < cfg.links.size(); ++i)
            jobs.push_back(std::async(std::launch::async, [&, i] { return run_link(cfg, i, bank, out_dir); }));

        for (std::size_t i = 0; i < jobs.size(); ++i)
        {
            const std::string ctx = "link " + std::to_string(i) + ": ";
            try
            {
                m.links.push_back(jobs[i].get());
            }
            catch (const config_error &e)
            {
                rethrow_as(ctx, e);
            }
            catch (const numerical_error &e)
            {
                rethrow_as(ctx, e);
            }
            catch (const geometry_error &e)
            {
                rethrow_as(ctx, e);
            }
            catch (const data_error &e)
            {
                rethrow_as(ctx, e);
            }
        }

        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ofstream mf(out_dir / "manifest.json");
        mf << m.to_json();
        if (!mf)
            throw data_error("cannot write " + (out_dir / "manifest.json").string());
        return m;
    }

    std::size_t analyze(const AnalyzeParams &p)
    {
        std::ostringstream os;
        os << std::setprecision(12);
        std::size_t rows = 0;

        if (p.metric == "pdp")
        {
            const auto cirs = load_inputs(p, 1);
            const auto &c = cirs.front();
            const auto d = pdp(c, p.u, p.s, p.freq_index);
            os << "snapshot,time_s,tap,delay_s,power\n";
            for (std::size_t t = 0; t < d.size(); ++t)
                for (std::size_t l = 0; l < d[t].size(); ++l, ++rows)
                    os << t << ',' << static_cast<double>(t) * c.dt() << ',' << l << ',' << d[t][l].delay << ','
                       << d[t][l].power << '\n';
        }
        else if (p.metric == "tf")
        {
            const auto cirs = load_inputs(p, 1);
            if (p.points == 0)
                throw data_error("analyze tf: --points must be >= 1");
            std::vector<double> nu(p.points);
            for (std::size_t k = 0; k < p.points; ++k)
                nu[k] = p.points == 1 ? 0.0
                                      : -0.5 * p.bandwidth_hz + p.bandwidth_hz * static_cast<double>(k) /
                                                                    static_cast<double>(p.points - 1);
            const auto h = transfer_function(cirs.front(), p.u, p.s, p.freq_index, nu);
            os << "snapshot,offset_hz,re,im,abs\n";
            for (std::size_t t = 0; t < h.size(); ++t)
                for (std::size_t k = 0; k < nu.size(); ++k, ++rows)
                    os << t << ',' << nu[k] << ',' << h[t][k].real() << ',' << h[t][k].imag() << ','
                       << std::abs(h[t][k]) << '\n';
        }
        else if (p.metric == "acf")
        {
            const auto cirs = load_inputs(p, 1);
            const std::size_t window = std::max<std::size_t>(p.window, 1);
            const std::size_t n = cirs.front().snapshots();
            if (n < window)
                throw data_error("analyze acf: --window exceeds the number of snapshots");
            const std::size_t max_lag = std::min(p.max_lag, n - window);
            const auto acf = temporal_acf(cirs, p.u, p.s, p.freq_index, max_lag, 0, window);
            os << "lag,dt_s,re,im,abs\n";
            for (std::size_t k = 0; k < acf.size(); ++k, ++rows)
                os << k << ',' << static_cast<double>(k) * cirs.front().dt() << ',' << acf[k].real() << ','
                   << acf[k].imag() << ',' << std::abs(acf[k]) << '\n';
        }
        else if (p.metric == "ccf")
        {
            const auto cirs = load_inputs(p, 1);
            const auto &c = cirs.front();
            const std::size_t n = p.side == ArraySide::rx ? c.rx_elements() : c.tx_elements();
            const std::size_t max_offset = p.max_offset == 0 ? n - 1 : p.max_offset;
            const auto ccf = spatial_ccf(cirs, p.side, p.spacing_lambda, max_offset, p.freq_index);
            os << "spacing_lambda,ccf_abs\n";
            for (const auto &pt : ccf)
            {
                os << pt.spacing_lambda << ',' << pt.ccf_abs << '\n';
                ++rows;
            }
        }
        else if (p.metric == "cmc")
        {
            const auto cirs = load_inputs(p, 2);
            if (cirs.size() % 2 != 0)
                throw data_error("analyze cmc: expects an even number of inputs (reference files, then compared files)");
            const std::size_t half = cirs.size() / 2;
            os << "realization,rx_separation_m,cmc\n";
            for (std::size_t i = 0; i < half; ++i, ++rows)
            {
                const auto r1 = correlation_matrix(cirs[i], p.freq_index);
                const auto r2 = correlation_matrix(cirs[half + i], p.freq_index);
                os << i << ',' << p.rx_separation << ',' << cmc(r1, r2) << '\n';
            }
        }
        else
            throw config_error("analyze: unknown metric '" + p.metric + "' (expected pdp, acf, ccf, cmc or tf)");

        std::ofstream out(p.out);
        out << os.str();
        if (!out)
            throw data_error("cannot write " + p.out.string());
        return rows;
    }
}
