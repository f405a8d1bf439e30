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

#include "gscm/smallscale.hpp"
#include "gscm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace gscm
{
    namespace
    {
        constexpr std::size_t num_spreads = 5;
        constexpr std::array<const char *, num_spreads> spread_names = {"ds", "asd", "asa", "esd", "esa"};

        double clip_elevation(double el)
        {
            return std::clamp(el, -pi / 2.0, pi / 2.0);
        }

        double tilde_value(const TildeParams &c, std::size_t i)
        {
            switch (i)
            {
            case 0:
                return c.delay;
            case 1:
                return c.aod;
            case 2:
                return c.aoa;
            case 3:
                return c.eod;
            default:
                return c.eoa;
            }
        }

        // Weights exp(E_l - max E), stable for any sign and magnitude of g.
        std::vector<double> stable_weights(const std::vector<TildeParams> &clusters, const GFactors &g)
        {
            std::vector<double> e(clusters.size());
            double emax = -std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < clusters.size(); ++l)
            {
                e[l] = power_exponent(clusters[l], g);
                emax = std::max(emax, e[l]);
            }
            for (auto &v : e)
                v = std::exp(v - emax);
            return e;
        }

        double tilde_spread(const std::vector<TildeParams> &clusters, const GFactors &g, std::size_t i)
        {
            auto w = stable_weights(clusters, g);
            std::vector<double> v(clusters.size());
            for (std::size_t l = 0; l < clusters.size(); ++l)
                v[l] = tilde_value(clusters[l], i);
            return weighted_spread(v, w);
        }

        // Root of spread_i(g) = target along g_i, starting from the current value.
        bool solve_one(const std::vector<TildeParams> &clusters, GFactors &g, std::size_t i, double target)
        {
            auto h = [&](double gi)
            {
                GFactors t = g;
                t[i] = gi;
                return tilde_spread(clusters, t, i) - target;
            };

            const double tol = 1e-10 * target;
            double a = g[i];
            double ha = h(a);
            if (!std::isfinite(ha))
                return false;
            if (std::abs(ha) <= tol)
                return true;

            // Larger g concentrates power and shrinks the spread.
            const double dir = ha > 0.0 ? 1.0 : -1.0;
            double step = std::max(1.0, std::abs(a));
            double b = a + dir * step;
            double hb = h(b);
            double prev = ha;
            int expansions = 0;
            while (hb * ha > 0.0)
            {
                if (!std::isfinite(hb) || ++expansions > 80)
                    return false;
                // Past the maximum of the spread when moving to negative g.
                if (dir < 0.0 && hb < prev)
                    return false;
                prev = hb;
                a = b;
                ha = hb;
                step *= 2.0;
                b = a + dir * step;
                hb = h(b);
            }

            for (int it = 0; it < 300; ++it)
            {
                double m = 0.5 * (a + b);
                double hm = h(m);
                if (std::abs(hm) <= tol || std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(m)))
                {
                    g[i] = m;
                    return true;
                }
                if (hm * ha > 0.0)
                {
                    a = m;
                    ha = hm;
                }
                else
                    b = m;
            }
            g[i] = 0.5 * (a + b);
            return true;
        }

        GFactors solve_frequency(const SpreadSet &target, const std::vector<TildeParams> &clusters, GFactors g)
        {
            for (std::size_t i = 0; i < num_spreads; ++i)
                if (!(target[i] > 0.0) || !std::isfinite(target[i]))
                    throw numerical_error(std::string("compute_g_factors: target ") + spread_names[i] +
                                          " spread must be positive and finite");

            constexpr int max_sweeps = 500;
            for (int sweep = 0; sweep < max_sweeps; ++sweep)
            {
                for (std::size_t i = 0; i < num_spreads; ++i)
                    if (!solve_one(clusters, g, i, target[i]))
                        throw numerical_error(std::string("compute_g_factors: no root for ") + spread_names[i] +
                                              " (target " + std::to_string(target[i]) + ")");

                bool done = true;
                for (std::size_t i = 0; i < num_spreads; ++i)
                    done = done && std::abs(tilde_spread(clusters, g, i) - target[i]) <= 1e-6 * target[i];
                if (done)
                    return g;
            }

            std::string msg = "compute_g_factors: no convergence after " + std::to_string(max_sweeps) + " sweeps;";
            for (std::size_t i = 0; i < num_spreads; ++i)
                msg += std::string(" ") + spread_names[i] + " " + std::to_string(tilde_spread(clusters, g, i)) +
                       "/" + std::to_string(target[i]);
            throw numerical_error(msg);
        }
    }

    SpreadSet SpreadSet::from_lsps(const LspSet &lsp)
    {
        return {lsp.ds, lsp.asd, lsp.asa, lsp.esd, lsp.esa};
    }

    double &SpreadSet::operator[](std::size_t i)
    {
        return i == 0 ? ds : i == 1 ? asd : i == 2 ? asa : i == 3 ? esd : esa;
    }

    double SpreadSet::operator[](std::size_t i) const
    {
        return i == 0 ? ds : i == 1 ? asd : i == 2 ? asa : i == 3 ? esd : esa;
    }

    double &GFactors::operator[](std::size_t i)
    {
        return i == 0 ? ds : i == 1 ? asd : i == 2 ? asa : i == 3 ? esd : esa;
    }

    double GFactors::operator[](std::size_t i) const
    {
        return i == 0 ? ds : i == 1 ? asd : i == 2 ? asa : i == 3 ? esd : esa;
    }

    std::vector<double> RayOffsets::default_alpha()
    {
        static const double a[] = {0.0447, 0.1413, 0.2492, 0.3715, 0.5129, 0.6797, 0.8844, 1.1481, 1.5195, 2.1551};
        std::vector<double> out;
        for (double v : a)
        {
            out.push_back(v);
            out.push_back(-v);
        }
        return out;
    }

    ClusterFields make_cluster_fields(FieldBank &bank, std::uint64_t id, std::size_t num_rays, const SspCorrelation &corr)
    {
        ClusterFields f;
        auto get = [&](FieldKind k, double d, FieldEnd e, std::uint64_t idx = 0)
        { return bank.get(k, d, id, e, idx); };

        f.aod_tx = get(FieldKind::azimuth_departure, corr.cluster, FieldEnd::departure);
        f.aod_rx = get(FieldKind::azimuth_departure, corr.cluster, FieldEnd::arrival);
        f.aoa_tx = get(FieldKind::azimuth_arrival, corr.cluster, FieldEnd::departure);
        f.aoa_rx = get(FieldKind::azimuth_arrival, corr.cluster, FieldEnd::arrival);
        f.eod_tx = get(FieldKind::elevation_departure, corr.cluster, FieldEnd::departure);
        f.eod_rx = get(FieldKind::elevation_departure, corr.cluster, FieldEnd::arrival);
        f.eoa_tx = get(FieldKind::elevation_arrival, corr.cluster, FieldEnd::departure);
        f.eoa_rx = get(FieldKind::elevation_arrival, corr.cluster, FieldEnd::arrival);
        f.delay_tx = get(FieldKind::delay, corr.cluster, FieldEnd::departure);
        f.delay_rx = get(FieldKind::delay, corr.cluster, FieldEnd::arrival);
        f.virtual_tx = get(FieldKind::virtual_delay, corr.virtual_delay, FieldEnd::departure);
        f.virtual_rx = get(FieldKind::virtual_delay, corr.virtual_delay, FieldEnd::arrival);
        for (std::size_t m = 0; m < num_rays; ++m)
        {
            f.phase_tx.push_back(get(FieldKind::ray_phase, corr.phase, FieldEnd::departure, m));
            f.phase_rx.push_back(get(FieldKind::ray_phase, corr.phase, FieldEnd::arrival, m));
        }
        return f;
    }

    double initial_angle(double x_departure, double x_arrival)
    {
        double a = 0.5 * pi * std::erfc(0.5 * (x_departure + x_arrival)) - 0.5 * pi;
        // erfc saturates at 0 and 2 in double precision; keep the open interval.
        const double lim = std::nextafter(0.5 * pi, 0.0);
        return std::clamp(a, -lim, lim);
    }

    double initial_delay(double x)
    {
        return -std::log(std::max(x, std::numeric_limits<double>::min()));
    }

    double pair_uniform(const SosGenerator &departure, const SosGenerator &arrival, const Vec3 &pT, const Vec3 &pR)
    {
        return normal_cdf(std::sqrt(2.0) * sample_pairfield(departure, arrival, pT, pR));
    }

    TildeParams draw_tilde_params(const Vec3 &pT, const Vec3 &pR, const ClusterFields &f)
    {
        TildeParams t;
        t.delay = initial_delay(pair_uniform(*f.delay_tx, *f.delay_rx, pT, pR));
        t.aod = initial_angle(f.aod_tx->sample_normal(pT), f.aod_rx->sample_normal(pR));
        t.aoa = initial_angle(f.aoa_tx->sample_normal(pT), f.aoa_rx->sample_normal(pR));
        t.eod = initial_angle(f.eod_tx->sample_normal(pT), f.eod_rx->sample_normal(pR));
        t.eoa = initial_angle(f.eoa_tx->sample_normal(pT), f.eoa_rx->sample_normal(pR));
        return t;
    }

    InitialAngles draw_initial_angles(const Vec3 &pT, const Vec3 &pR, const std::vector<ClusterFields> &fields)
    {
        InitialAngles out;
        for (const auto &f : fields)
        {
            auto t = draw_tilde_params(pT, pR, f);
            out.aod.push_back(t.aod);
            out.aoa.push_back(t.aoa);
            out.eod.push_back(t.eod);
            out.eoa.push_back(t.eoa);
        }
        return out;
    }

    std::vector<double> draw_initial_delays(const Vec3 &pT, const Vec3 &pR, const std::vector<ClusterFields> &fields)
    {
        std::vector<double> out;
        for (const auto &f : fields)
            out.push_back(initial_delay(pair_uniform(*f.delay_tx, *f.delay_rx, pT, pR)));
        return out;
    }

    double power_exponent(const TildeParams &c, const GFactors &g)
    {
        return -c.delay * g.ds - c.aod * c.aod * g.asd - c.aoa * c.aoa * g.asa - std::abs(c.eod) * g.esd -
               std::abs(c.eoa) * g.esa;
    }

    std::vector<std::vector<double>> multi_freq_powers(const std::vector<TildeParams> &clusters, const FrequencyScaling &g)
    {
        // Below this every exp() underflows to zero.
        constexpr double underflow = -745.2;
        std::vector<std::vector<double>> out;
        out.reserve(g.g.size());
        for (std::size_t f = 0; f < g.g.size(); ++f)
        {
            std::vector<double> p(clusters.size());
            double emax = -std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < clusters.size(); ++l)
            {
                p[l] = power_exponent(clusters[l], g.g[f]);
                if (std::isnan(p[l]))
                    throw numerical_error("multi_freq_powers: non-finite power exponent at frequency index " +
                                          std::to_string(f));
                emax = std::max(emax, p[l]);
            }
            if (!clusters.empty() && !(emax > underflow && std::isfinite(emax)))
                throw numerical_error("multi_freq_powers: all cluster powers underflow at frequency index " +
                                      std::to_string(f));
            double sum = 0.0;
            for (auto &v : p)
            {
                v = std::exp(v - emax);
                sum += v;
            }
            for (auto &v : p)
                v /= sum;
            out.push_back(std::move(p));
        }
        return out;
    }

    double weighted_spread(const std::vector<double> &values, const std::vector<double> &weights)
    {
        double sw = 0.0, s1 = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            sw += weights[i];
            s1 += weights[i] * values[i];
        }
        if (!(sw > 0.0))
            return 0.0;
        const double mean = s1 / sw;
        double s2 = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            s2 += weights[i] * (values[i] - mean) * (values[i] - mean);
        return std::sqrt(std::max(0.0, s2 / sw));
    }

    SpreadSet tilde_spreads(const std::vector<TildeParams> &clusters, const GFactors &g)
    {
        SpreadSet s;
        for (std::size_t i = 0; i < num_spreads; ++i)
            s[i] = tilde_spread(clusters, g, i);
        return s;
    }

    FrequencyScaling compute_g_factors(const std::vector<SpreadSet> &tilde_targets, const std::vector<TildeParams> &clusters,
                                       const FrequencyScaling *initial)
    {
        if (tilde_targets.empty())
            throw std::invalid_argument("compute_g_factors: at least one frequency is required");
        if (clusters.size() < 2)
            throw numerical_error("compute_g_factors: spreads are undefined for fewer than two clusters");

        FrequencyScaling out;
        for (std::size_t f = 0; f < tilde_targets.size(); ++f)
        {
            GFactors start;
            if (initial && f < initial->g.size())
                start = initial->g[f];
            try
            {
                out.g.push_back(solve_frequency(tilde_targets[f], clusters, start));
                continue;
            }
            catch (const numerical_error &)
            {
            }
            try
            {
                // Warm start may sit past a spread maximum; retry from zero.
                out.g.push_back(solve_frequency(tilde_targets[f], clusters, GFactors{}));
                continue;
            }
            catch (const numerical_error &e)
            {
                // Coordinate-wise roots can be missing while a joint solution exists.
                const GFactors g = fit_g_factors({tilde_targets[f]}, clusters, {{start}}, 0.0).g[0];
                const SpreadSet got = tilde_spreads(clusters, g);
                for (std::size_t i = 0; i < num_spreads; ++i)
                    if (!(std::abs(got[i] - tilde_targets[f][i]) <= 1e-3 * tilde_targets[f][i]))
                        throw;
                out.g.push_back(g);
            }
        }
        return out;
    }

    FrequencyScaling compute_g_factors(const std::vector<LspSet> &lsps, const std::vector<TildeParams> &clusters,
                                       const SpreadScales &scales, const FrequencyScaling *initial)
    {
        std::vector<SpreadSet> targets;
        for (const auto &l : lsps)
        {
            SpreadSet t = SpreadSet::from_lsps(l);
            for (std::size_t i = 0; i < num_spreads; ++i)
                t[i] /= scales[i];
            targets.push_back(t);
        }
        return compute_g_factors(targets, clusters, initial);
    }

    TildeParams scaled_values(const TildeParams &t, const SpreadScales &s)
    {
        TildeParams out;
        out.delay = s.ds * t.delay;
        out.aod = s.asd * t.aod;
        out.aoa = s.asa * t.aoa;
        out.eod = clip_elevation(s.esd * t.eod);
        out.eoa = clip_elevation(s.esa * t.eoa);
        return out;
    }

    SpreadSet realized_spreads(const std::vector<TildeParams> &clusters, const SpreadScales &scales,
                               const std::vector<double> &powers)
    {
        SpreadSet out;
        std::vector<double> v(clusters.size());
        for (std::size_t i = 0; i < num_spreads; ++i)
        {
            for (std::size_t l = 0; l < clusters.size(); ++l)
                v[l] = tilde_value(scaled_values(clusters[l], scales), i);
            out[i] = weighted_spread(v, powers);
        }
        return out;
    }

    namespace
    {
        // Spread of parameter i after scaling (and elevation clipping), under weights w.
        double scaled_spread(const std::vector<TildeParams> &clusters, double scale, std::size_t i,
                             const std::vector<double> &w)
        {
            std::vector<double> v(clusters.size());
            for (std::size_t l = 0; l < clusters.size(); ++l)
            {
                v[l] = scale * tilde_value(clusters[l], i);
                if (i >= 3)
                    v[l] = clip_elevation(v[l]);
            }
            return weighted_spread(v, w);
        }

        double safe_log(double x)
        {
            return std::log(std::max(x, 1e-300));
        }

        // Unknowns: log scales (5) followed by g per carrier (5 each). Residuals: log
        // spread mismatch per carrier and spread, then weight * (g - preferred).
        struct JointFit
        {
            using Scalar = double;
            enum
            {
                InputsAtCompileTime = Eigen::Dynamic,
                ValuesAtCompileTime = Eigen::Dynamic
            };
            using InputType = Eigen::VectorXd;
            using ValueType = Eigen::VectorXd;
            using JacobianType = Eigen::MatrixXd;

            const std::vector<TildeParams> *clusters;
            std::vector<SpreadSet> targets;
            GFactors preferred;
            double weight = 0.0;

            int inputs() const { return static_cast<int>(num_spreads * (1 + targets.size())); }
            int values() const { return static_cast<int>(2 * num_spreads * targets.size()); }

            static GFactors g_at(const Eigen::VectorXd &x, std::size_t f)
            {
                GFactors g;
                for (std::size_t i = 0; i < num_spreads; ++i)
                    g[i] = x(static_cast<Eigen::Index>(num_spreads * (f + 1) + i));
                return g;
            }

            int operator()(const Eigen::VectorXd &x, Eigen::VectorXd &r) const
            {
                for (std::size_t f = 0; f < targets.size(); ++f)
                {
                    const GFactors g = g_at(x, f);
                    const auto w = stable_weights(*clusters, g);
                    for (std::size_t i = 0; i < num_spreads; ++i)
                    {
                        const auto k = static_cast<Eigen::Index>(2 * num_spreads * f + i);
                        const double sc = std::exp(x(static_cast<Eigen::Index>(i)));
                        r(k) = safe_log(scaled_spread(*clusters, sc, i, w)) - std::log(targets[f][i]);
                        r(k + static_cast<Eigen::Index>(num_spreads)) = weight * (g[i] - preferred[i]);
                    }
                }
                return 0;
            }
        };

        void run_fit(JointFit &fit, Eigen::VectorXd &x)
        {
            Eigen::NumericalDiff<JointFit> diff(fit);
            Eigen::LevenbergMarquardt<Eigen::NumericalDiff<JointFit>> lm(diff);
            lm.parameters.maxfev = 4000;
            lm.parameters.xtol = 1e-12;
            lm.parameters.ftol = 1e-14;
            lm.minimize(x);
        }

        ScaledParams unpack(const std::vector<TildeParams> &clusters, const std::vector<LspSet> &lsps,
                            const Eigen::VectorXd &x)
        {
            ScaledParams out;
            for (std::size_t i = 0; i < num_spreads; ++i)
                out.scales[i] = std::exp(x(static_cast<Eigen::Index>(i)));
            for (std::size_t f = 0; f < lsps.size(); ++f)
                out.g.g.push_back(JointFit::g_at(x, f));
            out.powers = multi_freq_powers(clusters, out.g);
            for (const auto &p : out.powers)
                out.realized.push_back(realized_spreads(clusters, out.scales, p));
            return out;
        }

        double worst_mismatch(const ScaledParams &sp, const std::vector<LspSet> &lsps)
        {
            double worst = 0.0;
            for (std::size_t f = 0; f < lsps.size(); ++f)
            {
                const SpreadSet target = SpreadSet::from_lsps(lsps[f]);
                for (std::size_t i = 0; i < num_spreads; ++i)
                    worst = std::max(worst, std::abs(sp.realized[f][i] - target[i]) / target[i]);
            }
            return worst;
        }
    }

    FrequencyScaling fit_g_factors(const std::vector<SpreadSet> &tilde_targets, const std::vector<TildeParams> &clusters,
                                   const FrequencyScaling &previous, double regularization)
    {
        if (clusters.size() < 2)
            throw numerical_error("fit_g_factors: spreads are undefined for fewer than two clusters");
        if (previous.g.size() != tilde_targets.size())
            throw std::invalid_argument("fit_g_factors: one previous g set per frequency is required");

        FrequencyScaling out;
        for (std::size_t f = 0; f < tilde_targets.size(); ++f)
        {
            // Scales pinned at one; only g moves.
            struct Pinned : JointFit
            {
                int inputs() const { return static_cast<int>(num_spreads); }
                int operator()(const Eigen::VectorXd &g, Eigen::VectorXd &r) const
                {
                    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * num_spreads));
                    x.tail(static_cast<Eigen::Index>(num_spreads)) = g;
                    return JointFit::operator()(x, r);
                }
            } pinned;
            pinned.clusters = &clusters;
            pinned.targets = {tilde_targets[f]};
            pinned.preferred = previous.g[f];
            pinned.weight = regularization;

            Eigen::VectorXd g(static_cast<Eigen::Index>(num_spreads));
            for (std::size_t i = 0; i < num_spreads; ++i)
                g(static_cast<Eigen::Index>(i)) = previous.g[f][i];
            const Eigen::VectorXd g0 = g;
            auto cost = [&](const Eigen::VectorXd &v)
            {
                Eigen::VectorXd r(pinned.values());
                pinned(v, r);
                return r.squaredNorm();
            };
            Eigen::NumericalDiff<Pinned> diff(pinned);
            Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Pinned>> lm(diff);
            lm.parameters.maxfev = 2000;
            lm.minimize(g);
            if (!g.allFinite() || !(cost(g) <= cost(g0)))
                g = g0;
            GFactors gf;
            for (std::size_t i = 0; i < num_spreads; ++i)
                gf[i] = g(static_cast<Eigen::Index>(i));
            out.g.push_back(gf);
        }
        multi_freq_powers(clusters, out); // throws if the fit left the representable range
        return out;
    }

    ScaledParams scale_to_spreads(const std::vector<TildeParams> &clusters, const std::vector<LspSet> &lsps,
                                  const ScalingOptions &opt)
    {
        if (lsps.empty())
            throw std::invalid_argument("scale_to_spreads: at least one frequency is required");

        const SpreadSet unweighted = tilde_spreads(clusters, GFactors{});
        bool flat = false;
        for (std::size_t i = 0; i < num_spreads; ++i)
            flat = flat || !(unweighted[i] > 0.0);

        if (clusters.size() < 2 || flat)
        {
            ScaledParams out;
            out.scales = {1.0, 1.0, 1.0, 1.0, 1.0};
            out.g.g.assign(lsps.size(), GFactors{});
            out.degenerate = true;
            out.powers = multi_freq_powers(clusters, out.g);
            for (const auto &p : out.powers)
                out.realized.push_back(realized_spreads(clusters, out.scales, p));
            return out;
        }

        JointFit fit;
        fit.clusters = &clusters;
        for (const auto &l : lsps)
        {
            SpreadSet t = SpreadSet::from_lsps(l);
            for (std::size_t i = 0; i < num_spreads; ++i)
                if (!(t[i] > 0.0) || !std::isfinite(t[i]))
                    throw numerical_error(std::string("scale_to_spreads: target ") + spread_names[i] +
                                          " spread must be positive and finite");
            fit.targets.push_back(t);
        }
        fit.preferred.ds = opt.delay_headroom - 1.0;
        fit.weight = opt.regularization;

        const auto n = static_cast<Eigen::Index>(fit.inputs());
        Eigen::VectorXd x(n);
        for (std::size_t i = 0; i < num_spreads; ++i)
        {
            double tmax = 0.0;
            for (const auto &t : fit.targets)
                tmax = std::max(tmax, t[i]);
            x(static_cast<Eigen::Index>(i)) = std::log(tmax / unweighted[i]);
        }
        for (std::size_t f = 0; f < lsps.size(); ++f)
            for (std::size_t i = 0; i < num_spreads; ++i)
                x(static_cast<Eigen::Index>(num_spreads * (f + 1) + i)) = fit.preferred[i];

        // A weak pull towards the preferred g picks one of the many exact solutions.
        run_fit(fit, x);
        fit.weight = 0.0;

        ScaledParams best;
        double best_err = std::numeric_limits<double>::infinity();
        for (std::size_t it = 1; it <= opt.max_iterations; ++it)
        {
            run_fit(fit, x);
            bool finite = x.allFinite();
            if (finite)
            {
                try
                {
                    ScaledParams sp = unpack(clusters, lsps, x);
                    const double err = worst_mismatch(sp, lsps);
                    sp.iterations = it;
                    if (err < best_err)
                    {
                        best_err = err;
                        best = std::move(sp);
                    }
                }
                catch (const numerical_error &)
                {
                    finite = false;
                }
            }
            if (best_err <= opt.tolerance)
                return best;
            if (!finite)
                break;
        }
        if (!std::isfinite(best_err))
            throw numerical_error("scale_to_spreads: no finite scaling found");
        std::string detail;
        for (std::size_t f = 0; f < lsps.size(); ++f)
        {
            const SpreadSet target = SpreadSet::from_lsps(lsps[f]);
            for (std::size_t i = 0; i < num_spreads; ++i)
                if (std::abs(best.realized[f][i] - target[i]) > opt.tolerance * target[i])
                    detail += std::string("; ") + spread_names[i] + " at frequency index " + std::to_string(f) +
                              ": target " + std::to_string(target[i]) + ", realized " +
                              std::to_string(best.realized[f][i]);
        }
        throw numerical_error("scale_to_spreads: worst spread mismatch " + std::to_string(100.0 * best_err) +
                              "% after " + std::to_string(opt.max_iterations) + " iterations" + detail);
    }

    ClusterAngles finalize_cluster_angles(const TildeParams &scaled, const AnglePair &los_departure,
                                          const AnglePair &los_arrival)
    {
        ClusterAngles out;
        out.departure = apply_los_rotation({wrap_azimuth(scaled.aod), clip_elevation(scaled.eod)}, los_departure);
        out.arrival = apply_los_rotation({wrap_azimuth(scaled.aoa), clip_elevation(scaled.eoa)}, los_arrival);
        return out;
    }

    std::vector<AnglePair> ray_angles(const AnglePair &cluster, const std::vector<double> &alpha, double c_az, double c_el)
    {
        std::vector<AnglePair> out;
        out.reserve(alpha.size());
        for (double a : alpha)
            out.push_back({wrap_azimuth(cluster.azimuth + pi * c_az * a / 180.0),
                           clip_elevation(cluster.elevation + pi * c_el * a / 180.0)});
        return out;
    }

    Placement place_cluster(double total_delay, double virtual_delay, const AnglePair &departure,
                            const AnglePair &arrival, const Vec3 &pT, const Vec3 &pR, double rho)
    {
        const Vec3 b = pR - pT;
        const double dlos = b.norm();
        const double length = speed_of_light * (total_delay - virtual_delay);
        if (!(length >= dlos * (1.0 - 1e-12)))
            throw geometry_error("place_cluster: path length " + std::to_string(length) +
                                 " m is shorter than the LOS distance " + std::to_string(dlos) + " m");
        const double len = std::max(length, dlos);
        const double eps = 1e-12 * std::max(1.0, len);

        const Vec3 r_rx = angles_to_unit_vector(arrival);
        const Vec3 r_tx = angles_to_unit_vector(departure);

        // Single-bounce distance on the Rx side.
        double den = 2.0 * (len + b.dot(r_rx));
        double dr_max = den > eps ? (len * len - b.squaredNorm()) / den : len;
        dr_max = std::clamp(dr_max, 0.0, len);

        Placement out;
        out.d_rx = std::clamp(rho, 0.0, 1.0) * dr_max;
        out.last_bounce = pR + out.d_rx * r_rx;

        const Vec3 a = out.last_bounce - pT;
        const double rest = len - out.d_rx;
        den = 2.0 * (rest - a.dot(r_tx));
        double dt = den > eps ? (rest * rest - a.squaredNorm()) / den : rest;
        out.d_tx = std::clamp(dt, 0.0, rest);
        out.first_bounce = pT + out.d_tx * r_tx;
        out.d_za = rest - out.d_tx;
        return out;
    }

    namespace
    {
        Trajectory draw_motion(const Vec3 &origin, const ClusterContext &ctx, std::mt19937_64 &rng)
        {
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            const double move = u01(rng);
            const double heading = (2.0 * u01(rng) - 1.0) * pi;
            const double sign = u01(rng) < 0.5 ? -1.0 : 1.0;

            if (move >= ctx.motion_probability || ctx.motion_speed <= 0.0 ||
                ctx.motion_kind == TrajectoryKind::stationary)
                return Trajectory::stationary(origin, ctx.time);

            const Vec3 dir(std::cos(heading), std::sin(heading), 0.0);
            if (ctx.motion_kind == TrajectoryKind::linear)
                return Trajectory::linear(origin, dir, ctx.motion_speed, ctx.time);
            return Trajectory::circular(origin + ctx.motion_radius * dir, origin,
                                        sign * ctx.motion_speed / ctx.motion_radius, ctx.time);
        }

        const std::vector<double> &checked_alpha(const ClusterContext &ctx)
        {
            static const std::vector<double> zero = {0.0};
            if (ctx.offsets.alpha.size() == ctx.num_rays)
                return ctx.offsets.alpha;
            if (ctx.num_rays == 1)
                return zero;
            throw config_error("ray_offsets.alpha: expected " + std::to_string(ctx.num_rays) + " values, got " +
                               std::to_string(ctx.offsets.alpha.size()));
        }

        void finish_rays(Cluster &c, const std::vector<AnglePair> &dep, const std::vector<AnglePair> &arr,
                         double dtx, double drx, const ClusterContext &ctx, std::mt19937_64 &rng)
        {
            std::normal_distribution<double> n01(0.0, 1.0);
            std::uniform_real_distribution<double> uphase(-pi, pi);

            c.rays.resize(ctx.num_rays);
            for (std::size_t m = 0; m < ctx.num_rays; ++m)
            {
                Ray &r = c.rays[m];
                r.departure = dep[m];
                r.arrival = arr[m];
                r.d_tx = dtx * angles_to_unit_vector(dep[m]);
                r.d_rx = drx * angles_to_unit_vector(arr[m]);
                r.d_za = ((ctx.rx + r.d_rx) - (ctx.tx + r.d_tx)).norm();
                r.xpr = std::pow(10.0, 0.1 * (ctx.xpr_db + ctx.xpr_sigma_db * n01(rng)));
                for (auto &ph : r.pol_phase)
                    ph = uphase(rng);
                r.initial_phase = pi * (2.0 * pair_uniform(*c.fields.phase_tx[m], *c.fields.phase_rx[m], ctx.tx, ctx.rx) - 1.0);
            }
        }

        void set_los_reference(Cluster &c, const ClusterContext &ctx)
        {
            const AnglePair los_dep = direction_to_angles(ctx.rx - ctx.tx);
            const AnglePair los_arr = direction_to_angles(ctx.tx - ctx.rx);
            c.relative_departure0 = remove_los_rotation(direction_to_angles(c.d_tx), los_dep);
            c.relative_arrival0 = remove_los_rotation(direction_to_angles(c.d_rx), los_arr);
        }
    }

    Cluster build_cluster(std::uint64_t id, const TildeParams &tilde, ClusterFields fields, const ClusterContext &ctx,
                          std::mt19937_64 &rng)
    {
        if (fields.phase_tx.size() < ctx.num_rays || fields.phase_rx.size() < ctx.num_rays)
            throw std::invalid_argument("build_cluster: missing ray phase fields");

        Cluster c;
        c.id = id;
        c.status = ClusterStatus::alive;
        c.birth_time = ctx.time;
        c.tilde = tilde;
        c.fields = std::move(fields);
        c.rx_anchor = ctx.rx;

        const TildeParams scaled = scaled_values(tilde, ctx.scales);
        const AnglePair los_dep = direction_to_angles(ctx.rx - ctx.tx);
        const AnglePair los_arr = direction_to_angles(ctx.tx - ctx.rx);
        const ClusterAngles angles = finalize_cluster_angles(scaled, los_dep, los_arr);

        const double excess = std::max(0.0, scaled.delay);
        const double total = (ctx.rx - ctx.tx).norm() / speed_of_light + excess;

        // Virtual delay: exponential field value scaled so that it never exceeds half the excess delay.
        const double x0 = initial_delay(pair_uniform(*c.fields.virtual_tx, *c.fields.virtual_rx, ctx.tx, ctx.rx));
        if (excess > 0.0)
            c.virtual_beta = x0 > 0.0 ? std::min(ctx.virtual_delay_mean, 0.5 * excess / x0) : ctx.virtual_delay_mean;
        c.virtual_delay = c.virtual_beta * x0;

        std::uniform_real_distribution<double> urho(ctx.rho_min, ctx.rho_max);
        const double rho = urho(rng);
        const Placement pl = place_cluster(total, c.virtual_delay, angles.departure, angles.arrival, ctx.tx, ctx.rx, rho);

        c.d_tx = pl.first_bounce - ctx.tx;
        c.d_rx = pl.last_bounce - ctx.rx;
        c.first_bounce0 = pl.first_bounce;
        c.last_bounce0 = pl.last_bounce;

        const auto &alpha = checked_alpha(ctx);
        const auto dep = ray_angles(angles.departure, alpha, ctx.offsets.c_asd, ctx.offsets.c_esd);
        const auto arr = ray_angles(angles.arrival, alpha, ctx.offsets.c_asa, ctx.offsets.c_esa);
        finish_rays(c, dep, arr, pl.d_tx, pl.d_rx, ctx, rng);

        c.first_track = draw_motion(pl.first_bounce, ctx, rng);
        c.last_track = draw_motion(pl.last_bounce, ctx, rng);

        // Degenerate placements may leave a zero vector; fall back to the cluster angles.
        if (c.d_tx.norm() > 0.0 && c.d_rx.norm() > 0.0)
            set_los_reference(c, ctx);
        else
        {
            c.relative_departure0 = remove_los_rotation(angles.departure, los_dep);
            c.relative_arrival0 = remove_los_rotation(angles.arrival, los_arr);
        }
        c.delay = ray_average_delay(c);
        c.excess_delay0 = c.delay - (ctx.rx - ctx.tx).norm() / speed_of_light;
        return c;
    }

    Cluster make_point_cluster(std::uint64_t id, const Vec3 &point, ClusterFields fields, const ClusterContext &ctx,
                               std::mt19937_64 &rng)
    {
        if (fields.phase_tx.size() < ctx.num_rays || fields.phase_rx.size() < ctx.num_rays)
            throw std::invalid_argument("make_point_cluster: missing ray phase fields");

        Cluster c;
        c.id = id;
        c.birth_time = ctx.time;
        c.fields = std::move(fields);
        c.rx_anchor = ctx.rx;
        c.d_tx = point - ctx.tx;
        c.d_rx = point - ctx.rx;
        c.first_bounce0 = point;
        c.last_bounce0 = point;

        const AnglePair dep = direction_to_angles(c.d_tx);
        const AnglePair arr = direction_to_angles(c.d_rx);
        finish_rays(c, std::vector<AnglePair>(ctx.num_rays, dep), std::vector<AnglePair>(ctx.num_rays, arr),
                    c.d_tx.norm(), c.d_rx.norm(), ctx, rng);
        c.first_track = Trajectory::stationary(point, ctx.time);
        c.last_track = Trajectory::stationary(point, ctx.time);

        set_los_reference(c, ctx);
        c.delay = ray_average_delay(c);
        c.excess_delay0 = c.delay - (ctx.rx - ctx.tx).norm() / speed_of_light;
        return c;
    }

    double ray_average_delay(const Cluster &c)
    {
        if (c.rays.empty())
            return c.virtual_delay;
        double sum = 0.0;
        for (const auto &r : c.rays)
            sum += r.d_tx.norm() + r.d_rx.norm() + r.d_za;
        return c.virtual_delay + sum / (speed_of_light * static_cast<double>(c.rays.size()));
    }

    double sample_virtual_delay(const Cluster &c, const Vec3 &tx, const Vec3 &rx)
    {
        if (c.virtual_beta == 0.0)
            return 0.0;
        const Vec3 pT = tx + ((tx + c.d_tx) - c.first_bounce0);
        const Vec3 pR = c.rx_anchor + ((rx + c.d_rx) - c.last_bounce0);
        return c.virtual_beta * initial_delay(pair_uniform(*c.fields.virtual_tx, *c.fields.virtual_rx, pT, pR));
    }
}
