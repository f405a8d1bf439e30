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

#include "gscm/link.hpp"
#include "gscm/coefficients.hpp"
#include "gscm/error.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <spdlog/spdlog.h>

namespace gscm
{
    namespace
    {
        constexpr std::uint64_t link_stream_tag = 0x4c494e4bULL;

        std::uint64_t bits(double v)
        {
            return std::bit_cast<std::uint64_t>(v);
        }
    }

    std::uint64_t trajectory_key(const Vec3 &tx, const Trajectory &rx)
    {
        return derive_seed(0, {bits(tx.x()), bits(tx.y()), bits(tx.z()), static_cast<std::uint64_t>(rx.kind),
                               bits(rx.origin.x()), bits(rx.origin.y()), bits(rx.origin.z()), bits(rx.heading.x()),
                               bits(rx.heading.y()), bits(rx.heading.z()), bits(rx.speed), bits(rx.center.x()),
                               bits(rx.center.y()), bits(rx.center.z()), bits(rx.radius), bits(rx.angular_rate),
                               bits(rx.start_time)});
    }

    LinkSimulator::LinkSimulator(LinkConfig cfg, FieldBank &bank)
        : cfg_(std::move(cfg)), bank_(bank), rng_(derive_seed(bank.master_seed(), {link_stream_tag, cfg_.link_key}))
    {
        if (cfg_.frequencies_hz.empty())
            throw config_error("frequencies: at least one carrier is required");
        if (cfg_.num_rays == 0)
            throw config_error("clusters.rays: must be >= 1");
        if (cfg_.tx_array.size() == 0 || cfg_.rx_array.size() == 0)
            throw config_error("array: at least one element is required");
        cfg_.evolution.validate();
        k_ = cfg_.evolution.steps_per_bd();

        rx_ = trajectory_state(cfg_.rx, 0.0);
        if (!((rx_.position - cfg_.tx).norm() > 0.0))
            throw geometry_error("link: Tx and Rx positions coincide");

        track_.dists = cfg_.lsp;
        track_.gens = LspGenerators::create(cfg_.lsp, bank_, cfg_.tx_id);
        track_.rx = cfg_.rx;
        track_.frequencies_hz = cfg_.frequencies_hz;
        track_.dt_bd = cfg_.evolution.dt_bd;
        lsps_ = update_lsps(track_, 0.0);

        const auto los_tx = bank_.get(FieldKind::los_phase, cfg_.ssp.correlation.phase, cfg_.tx_id, FieldEnd::departure);
        const auto los_rx = bank_.get(FieldKind::los_phase, cfg_.ssp.correlation.phase, cfg_.tx_id, FieldEnd::arrival);
        los_phase0_ = pi * (2.0 * pair_uniform(*los_tx, *los_rx, cfg_.tx, rx_.position) - 1.0);

        const std::size_t nf = cfg_.frequencies_hz.size();
        if (!cfg_.point_scatterers.empty())
        {
            fixed_powers_ = true;
            g_.g.assign(nf, GFactors{});
            const ClusterContext ctx = context();
            for (const auto &pt : cfg_.point_scatterers)
            {
                auto fields = make_cluster_fields(bank_, next_id_, cfg_.num_rays, cfg_.ssp.correlation);
                clusters_.push_back(make_point_cluster(next_id_, pt, std::move(fields), ctx, rng_));
                ++next_id_;
            }
        }
        else
        {
            std::vector<ClusterFields> fields;
            std::vector<TildeParams> tilde;
            for (std::size_t l = 0; l < cfg_.num_clusters; ++l)
            {
                fields.push_back(make_cluster_fields(bank_, l, cfg_.num_rays, cfg_.ssp.correlation));
                tilde.push_back(draw_tilde_params(cfg_.tx, rx_.position, fields.back()));
            }
            const ScaledParams sp = scale_to_spreads(tilde, lsps_, cfg_.scaling);
            scales_ = sp.scales;
            g_ = sp.g;
            degenerate_ = sp.degenerate;

            const ClusterContext ctx = context();
            for (std::size_t l = 0; l < cfg_.num_clusters; ++l)
                clusters_.push_back(build_cluster(l, tilde[l], std::move(fields[l]), ctx, rng_));
            next_id_ = cfg_.num_clusters;
        }
        refresh_powers();
    }

    ClusterContext LinkSimulator::context() const
    {
        ClusterContext ctx;
        ctx.tx = cfg_.tx;
        ctx.rx = rx_.position;
        ctx.time = time();
        ctx.scales = scales_;
        ctx.offsets = cfg_.offsets;
        ctx.xpr_db = lsps_.front().xpr;
        ctx.xpr_sigma_db = cfg_.ssp.xpr_sigma_db;
        ctx.virtual_delay_mean = cfg_.ssp.virtual_delay_mean;
        ctx.rho_min = cfg_.ssp.rho_min;
        ctx.rho_max = cfg_.ssp.rho_max;
        ctx.motion_probability = cfg_.evolution.p_c;
        ctx.motion_speed = cfg_.motion.speed;
        ctx.motion_radius = cfg_.motion.radius;
        ctx.motion_kind = cfg_.motion.kind;
        ctx.num_rays = cfg_.num_rays;
        return ctx;
    }

    void LinkSimulator::refresh_powers()
    {
        update_powers(clusters_, g_, cfg_.tx, rx_.position, scales_);
    }

    void LinkSimulator::advance()
    {
        const double dt = cfg_.evolution.dt;
        ++p_;
        const double t = time();
        rx_ = trajectory_state(cfg_.rx, t);

        for (auto &c : clusters_)
        {
            drift_ray_geometry(c, cfg_.tx, rx_.position, rx_.velocity, t, dt);
            update_delays(c, cfg_.tx, rx_.position);
        }

        if (p_ % k_ == 0)
            birth_death_event();
    }

    void LinkSimulator::birth_death_event()
    {
        const double t = time();
        last_event_ = {};

        if (cfg_.evolution.birth_death && !fixed_powers_)
        {
            const auto fl = channel_fluctuation(rx_.velocity, clusters_, cfg_.evolution, t, cfg_.evolution.dt_bd);
            const double ps = survival_probability(fl.q, cfg_.evolution);
            const double expected = expected_new_clusters(ps, cfg_.evolution);
            const ClusterContext ctx = context();
            ClusterFactory factory = [&](std::uint64_t id)
            {
                auto fields = make_cluster_fields(bank_, id, cfg_.num_rays, cfg_.ssp.correlation);
                const TildeParams tilde = draw_tilde_params(cfg_.tx, rx_.position, fields);
                return build_cluster(id, tilde, std::move(fields), ctx, rng_);
            };
            last_event_ = birth_death_step(clusters_, ps, expected, rng_, factory, next_id_);
        }
        else
        {
            for (auto &c : clusters_)
                c.status = ClusterStatus::alive;
        }

        if (cfg_.evolution.update_lsps)
        {
            auto updated = update_lsps(track_, t);
            if (updated != lsps_)
            {
                lsps_ = std::move(updated);
                if (!fixed_powers_ && clusters_.size() >= 2 && !degenerate_)
                {
                    std::vector<TildeParams> tilde;
                    for (const auto &c : clusters_)
                        tilde.push_back(current_tilde(c, cfg_.tx, rx_.position, scales_));
                    std::vector<SpreadSet> targets;
                    for (const auto &l : lsps_)
                    {
                        SpreadSet t = SpreadSet::from_lsps(l);
                        for (std::size_t i = 0; i < 5; ++i)
                            t[i] /= scales_[i];
                        targets.push_back(t);
                    }
                    try
                    {
                        g_ = fit_g_factors(targets, tilde, g_, cfg_.scaling.tracking);
                    }
                    catch (const numerical_error &e)
                    {
                        spdlog::debug("link {}: keeping previous g factors at t = {} s ({})", cfg_.link_key, t, e.what());
                    }
                }
            }
        }
        refresh_powers();
    }

    double LinkSimulator::wavelength(std::size_t f) const
    {
        return speed_of_light / cfg_.frequencies_hz.at(f);
    }

    std::complex<double> LinkSimulator::ray_gain(std::size_t l, std::size_t m) const
    {
        const Ray &r = clusters_[l].rays[m];
        return polarized_gain(cfg_.rx_array.pattern_at(r.arrival), polarization_matrix(r),
                              cfg_.tx_array.pattern_at(r.departure));
    }

    double LinkSimulator::ray_phase(std::size_t u, std::size_t s, std::size_t f, std::size_t l, std::size_t m) const
    {
        const Ray &r = clusters_[l].rays[m];
        return phase_from_distance(nlos_distance(r, cfg_.rx_array.positions[u], cfg_.tx_array.positions[s]),
                                   wavelength(f)) +
               r.initial_phase;
    }

    double LinkSimulator::ray_amplitude(std::size_t f, std::size_t l) const
    {
        const double k = cfg_.lsp.los ? k_factor(f) : 0.0;
        const double w = ramp_weight(clusters_[l].status, window_index(), k_);
        return std::sqrt(1.0 / (k + 1.0)) * std::sqrt(w);
    }

    std::complex<double> LinkSimulator::ray_term(std::size_t u, std::size_t s, std::size_t f, std::size_t l,
                                                 std::size_t m) const
    {
        return ray_amplitude(f, l) * ray_gain(l, m) * std::polar(1.0, ray_phase(u, s, f, l, m));
    }

    std::complex<double> LinkSimulator::los_term(std::size_t u, std::size_t s, std::size_t f) const
    {
        if (!cfg_.lsp.los)
            return 0.0;
        const Vec3 d = rx_.position - cfg_.tx;
        const Vec3 r_tx = d.normalized();
        const Vec3 r_rx = -r_tx;
        const double dist = los_distance(r_rx, cfg_.rx_array.positions[u], r_tx, cfg_.tx_array.positions[s], d.norm());
        const double phase = phase_from_distance(dist, wavelength(f)) + los_phase0_;
        return los_component(cfg_.rx_array.pattern_at(direction_to_angles(r_rx)),
                             cfg_.tx_array.pattern_at(direction_to_angles(r_tx)), k_factor(f), phase);
    }

    double LinkSimulator::los_delay() const
    {
        return (rx_.position - cfg_.tx).norm() / speed_of_light;
    }

    CirTensor simulate_link(const LinkConfig &cfg, FieldBank &bank, std::size_t num_snapshots,
                            const SnapshotObserver &observer)
    {
        LinkSimulator sim(cfg, bank);
        const std::size_t nu = cfg.rx_array.size(), ns = cfg.tx_array.size(), nf = cfg.frequencies_hz.size();
        const std::size_t block = nu * ns * nf;
        const std::size_t k = cfg.evolution.steps_per_bd();
        const bool los = cfg.lsp.los;

        struct Tap
        {
            std::size_t slot;
            double delay;
            std::vector<std::complex<double>> h; // [u][s][f]
        };
        std::vector<std::vector<Tap>> rows(num_snapshots);
        std::vector<std::vector<double>> amplitude(num_snapshots, std::vector<double>(nf, 1.0));
        std::map<std::uint64_t, std::size_t> slot_of;
        std::size_t num_slots = los ? 1 : 0;

        for (std::size_t w0 = 0; w0 < num_snapshots; w0 += k)
        {
            const std::size_t w1 = std::min(num_snapshots, w0 + k);
            std::vector<std::vector<std::complex<double>>> sums;  // [cluster][p * block + idx]
            std::vector<std::vector<double>> energy;

            for (std::size_t p = w0; p < w1; ++p)
            {
                if (p > 0)
                    sim.advance();
                if (observer)
                    observer(sim);

                const auto &clusters = sim.clusters();
                if (p == w0)
                {
                    sums.assign(clusters.size(), std::vector<std::complex<double>>((w1 - w0) * block));
                    energy.assign(clusters.size(), std::vector<double>((w1 - w0) * block));
                }
                const std::size_t j = p - w0;

                if (los)
                {
                    Tap t{0, sim.los_delay(), std::vector<std::complex<double>>(block)};
                    for (std::size_t u = 0; u < nu; ++u)
                        for (std::size_t s = 0; s < ns; ++s)
                            for (std::size_t f = 0; f < nf; ++f)
                                t.h[(u * ns + s) * nf + f] = sim.los_term(u, s, f);
                    rows[p].push_back(std::move(t));
                }

                for (std::size_t l = 0; l < clusters.size(); ++l)
                {
                    const Cluster &c = clusters[l];
                    auto it = slot_of.find(c.id);
                    if (it == slot_of.end())
                        it = slot_of.emplace(c.id, num_slots++).first;
                    rows[p].push_back({it->second, c.delay, {}});

                    std::vector<double> amp(nf);
                    for (std::size_t f = 0; f < nf; ++f)
                        amp[f] = sim.ray_amplitude(f, l);

                    for (std::size_t m = 0; m < c.rays.size(); ++m)
                    {
                        const std::complex<double> gain = sim.ray_gain(l, m);
                        for (std::size_t u = 0; u < nu; ++u)
                            for (std::size_t s = 0; s < ns; ++s)
                                for (std::size_t f = 0; f < nf; ++f)
                                {
                                    const std::size_t idx = j * block + (u * ns + s) * nf + f;
                                    const std::complex<double> h =
                                        amp[f] * gain * std::polar(1.0, sim.ray_phase(u, s, f, l, m));
                                    sums[l][idx] += h;
                                    energy[l][idx] += std::norm(h);
                                }
                    }
                }

                if (cfg.apply_large_scale)
                {
                    const double d = (sim.rx_position() - cfg.tx).norm();
                    for (std::size_t f = 0; f < nf; ++f)
                    {
                        const double pl = path_loss(d, cfg.frequencies_hz[f] * 1e-9, cfg.path_loss);
                        amplitude[p][f] = large_scale_amplitude(-pl, sim.lsps()[f].sf);
                    }
                }
            }

            // Power rescaling over the window, per (u, s, f, cluster).
            const auto &clusters = sim.clusters();
            const std::size_t n = w1 - w0;
            for (std::size_t l = 0; l < clusters.size(); ++l)
            {
                const std::size_t row = los ? l + 1 : l;
                for (std::size_t idx = 0; idx < block; ++idx)
                {
                    const std::size_t f = idx % nf;
                    std::vector<std::complex<double>> h(n);
                    std::vector<double> e(n);
                    for (std::size_t j = 0; j < n; ++j)
                    {
                        h[j] = sums[l][j * block + idx];
                        e[j] = energy[l][j * block + idx];
                    }
                    scale_snapshot_powers(h, e, clusters[l].power[f], clusters[l].rays.size());
                    for (std::size_t j = 0; j < n; ++j)
                    {
                        auto &tap = rows[w0 + j][row];
                        if (tap.h.empty())
                            tap.h.assign(block, 0.0);
                        tap.h[idx] = h[j];
                    }
                }
            }
        }

        CirTensor cir(num_snapshots, nu, ns, num_slots, nf, cfg.evolution.dt);
        for (std::size_t p = 0; p < num_snapshots; ++p)
            for (const auto &tap : rows[p])
            {
                cir.delay(p, tap.slot) = tap.delay;
                for (std::size_t u = 0; u < nu; ++u)
                    for (std::size_t s = 0; s < ns; ++s)
                        for (std::size_t f = 0; f < nf; ++f)
                            cir.at(p, u, s, tap.slot, f) = tap.h.empty() ? 0.0 : tap.h[(u * ns + s) * nf + f] * amplitude[p][f];
            }
        return cir;
    }
}
