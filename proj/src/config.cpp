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

#include "gscm/config.hpp"
#include "gscm/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <yaml-cpp/yaml.h>

namespace gscm
{
    namespace
    {
        // Collects violations instead of stopping at the first one.
        class Reader
        {
        public:
            std::vector<std::string> errors;

            void fail(const std::string &path, const std::string &what)
            {
                errors.push_back(path + ": " + what);
            }

            YAML::Node child(const YAML::Node &n, const std::string &key) const
            {
                if (!n || !n.IsMap())
                    return YAML::Node(YAML::NodeType::Undefined);
                return n[key];
            }

            template <typename T>
            T value(const YAML::Node &n, const std::string &key, const std::string &path, const T &fallback,
                    bool required = false)
            {
                const YAML::Node c = child(n, key);
                if (!c)
                {
                    if (required)
                        fail(path + key, "missing field");
                    return fallback;
                }
                try
                {
                    return c.as<T>();
                }
                catch (const YAML::Exception &)
                {
                    fail(path + key, "invalid value");
                    return fallback;
                }
            }

            Vec3 vec3(const YAML::Node &n, const std::string &key, const std::string &path, const Vec3 &fallback,
                      bool required = false)
            {
                const YAML::Node c = child(n, key);
                if (!c)
                {
                    if (required)
                        fail(path + key, "missing field");
                    return fallback;
                }
                try
                {
                    auto v = c.as<std::vector<double>>();
                    if (v.size() != 3)
                    {
                        fail(path + key, "expected 3 components");
                        return fallback;
                    }
                    return {v[0], v[1], v[2]};
                }
                catch (const YAML::Exception &)
                {
                    fail(path + key, "expected a list of 3 numbers");
                    return fallback;
                }
            }
        };

        Trajectory read_trajectory(Reader &r, const YAML::Node &n, const std::string &path)
        {
            if (!n)
            {
                r.fail(path, "missing field");
                return Trajectory::stationary(Vec3::Zero());
            }
            const std::string p = path + ".";
            const std::string kind = r.value<std::string>(n, "kind", p, "stationary");
            const double start = r.value<double>(n, "start_time", p, 0.0);
            try
            {
                switch (parse_trajectory_kind(kind))
                {
                case TrajectoryKind::stationary:
                    return Trajectory::stationary(r.vec3(n, "position", p, Vec3::Zero(), true), start);
                case TrajectoryKind::linear:
                {
                    const Vec3 origin = r.vec3(n, "origin", p, Vec3::Zero(), true);
                    const Vec3 heading = r.vec3(n, "heading", p, Vec3::UnitX(), true);
                    const double speed = r.value<double>(n, "speed", p, 0.0, true);
                    if (!(heading.norm() > 0.0))
                    {
                        r.fail(p + "heading", "must be non-zero");
                        return Trajectory::stationary(origin, start);
                    }
                    return Trajectory::linear(origin, heading, speed, start);
                }
                case TrajectoryKind::circular:
                {
                    const Vec3 center = r.vec3(n, "center", p, Vec3::Zero(), true);
                    const double radius = r.value<double>(n, "radius", p, 1.0, true);
                    const double rate = r.value<double>(n, "angular_rate", p, 0.0, true);
                    const double a0 = r.value<double>(n, "start_angle_deg", p, 0.0) * pi / 180.0;
                    if (!(radius > 0.0))
                    {
                        r.fail(p + "radius", "must be > 0");
                        return Trajectory::stationary(center, start);
                    }
                    const Vec3 origin = center + radius * Vec3(std::cos(a0), std::sin(a0), 0.0);
                    return Trajectory::circular(center, origin, rate, start);
                }
                }
            }
            catch (const config_error &e)
            {
                r.fail(path, e.what());
            }
            catch (const std::invalid_argument &e)
            {
                r.fail(path, e.what());
            }
            return Trajectory::stationary(Vec3::Zero(), start);
        }

        ArrayConfig read_array(Reader &r, const YAML::Node &n, const std::string &path)
        {
            ArrayConfig a;
            if (!n)
                return a;
            const std::string p = path + ".";
            const long elements = r.value<long>(n, "elements", p, 1);
            if (elements < 1)
                r.fail(p + "elements", "must be >= 1");
            a.elements = static_cast<std::size_t>(std::max(1L, elements));
            if (r.child(n, "spacing_m"))
            {
                a.spacing = r.value<double>(n, "spacing_m", p, 0.0);
                a.spacing_in_lambda = false;
            }
            else
                a.spacing = r.value<double>(n, "spacing_lambda", p, 0.5);
            if (!(a.spacing >= 0.0))
                r.fail(p + "spacing", "must be >= 0");
            a.axis = r.vec3(n, "axis", p, Vec3::UnitY());
            if (!(a.axis.norm() > 0.0))
                r.fail(p + "axis", "must be non-zero");
            try
            {
                a.pattern = parse_pattern_kind(r.value<std::string>(n, "pattern", p, "isotropic_vertical"));
            }
            catch (const config_error &e)
            {
                r.fail(p + "pattern", e.what());
            }
            return a;
        }

        void read_lsp(Reader &r, const YAML::Node &n, LspDistributions &d)
        {
            if (!n)
            {
                r.fail("lsp", "missing section");
                return;
            }
            d.los = r.value<bool>(n, "los", "lsp.", true, true);
            for (std::size_t i = 0; i < num_lsps; ++i)
            {
                const std::string name = lsp_names[i];
                const std::string p = "lsp." + name + ".";
                const YAML::Node c = r.child(n, name);
                if (!c)
                {
                    r.fail("lsp." + name, "missing table");
                    continue;
                }
                auto &x = d.params[i];
                x.mu = r.value<double>(c, "mu", p, 0.0, true);
                x.mu_f = r.value<double>(c, "mu_f", p, 0.0);
                x.sigma = r.value<double>(c, "sigma", p, 0.0, true);
                x.sigma_f = r.value<double>(c, "sigma_f", p, 0.0);
                x.correlation_distance = r.value<double>(c, "correlation_distance", p, 10.0, true);
                if (!(x.sigma >= 0.0))
                    r.fail(p + "sigma", "must be >= 0");
                if (!(x.correlation_distance > 0.0))
                    r.fail(p + "correlation_distance", "must be > 0");
            }

            const YAML::Node c = r.child(n, "correlation");
            if (!c)
                return; // identity
            try
            {
                auto rows = c.as<std::vector<std::vector<double>>>();
                if (rows.size() != num_lsps)
                    throw YAML::Exception(YAML::Mark::null_mark(), "rows");
                for (std::size_t i = 0; i < num_lsps; ++i)
                {
                    if (rows[i].size() != num_lsps)
                        throw YAML::Exception(YAML::Mark::null_mark(), "cols");
                    for (std::size_t j = 0; j < num_lsps; ++j)
                        d.correlation(i, j) = rows[i][j];
                }
                lsp_mixing_matrix(d.correlation);
            }
            catch (const YAML::Exception &)
            {
                r.fail("lsp.correlation", "expected an 8x8 matrix of numbers");
            }
            catch (const config_error &e)
            {
                r.fail("lsp.correlation", e.what());
            }
        }
    }

    AntennaArray ArrayConfig::build(double lambda) const
    {
        return AntennaArray::ula(elements, spacing_in_lambda ? spacing * lambda : spacing, axis, pattern);
    }

    std::size_t ScenarioConfig::snapshots() const
    {
        return static_cast<std::size_t>(std::llround(duration / evolution.dt));
    }

    std::vector<double> ScenarioConfig::frequencies_hz() const
    {
        std::vector<double> f;
        for (double g : frequencies_ghz)
            f.push_back(g * 1e9);
        return f;
    }

    LinkConfig ScenarioConfig::link_config(std::size_t i) const
    {
        LinkConfig c;
        c.tx = tx;
        c.rx = links.at(i).rx;
        c.frequencies_hz = frequencies_hz();
        const double lambda = speed_of_light / c.frequencies_hz.front();
        c.tx_array = tx_array.build(lambda);
        c.rx_array = rx_array.build(lambda);
        c.num_clusters = num_clusters;
        c.num_rays = num_rays;
        c.evolution = evolution;
        c.lsp = lsp;
        c.path_loss = path_loss;
        c.ssp = ssp;
        c.offsets = offsets;
        c.scaling = scaling;
        c.motion = motion;
        c.link_key = trajectory_key(tx, c.rx);
        c.apply_large_scale = apply_large_scale;
        return c;
    }

    ScenarioConfig parse_config(const std::string &text)
    {
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::Exception &e)
        {
            throw config_error(std::string("syntax error: ") + e.what());
        }
        if (!root.IsMap())
            throw config_error("top level must be a mapping");

        Reader r;
        ScenarioConfig c;
        c.scenario = r.value<std::string>(root, "scenario", "", "", true);
        c.seed = r.value<std::uint64_t>(root, "seed", "", 1);

        const YAML::Node freqs = root["frequencies_ghz"];
        if (!freqs)
            r.fail("frequencies_ghz", "missing field");
        else
        {
            try
            {
                c.frequencies_ghz = freqs.as<std::vector<double>>();
            }
            catch (const YAML::Exception &)
            {
                r.fail("frequencies_ghz", "expected a list of numbers");
            }
            if (freqs && c.frequencies_ghz.empty())
                r.fail("frequencies_ghz", "at least one frequency is required");
            for (std::size_t i = 0; i < c.frequencies_ghz.size(); ++i)
                if (!(c.frequencies_ghz[i] > 0.0))
                    r.fail("frequencies_ghz[" + std::to_string(i) + "]", "must be > 0");
        }

        const YAML::Node time = root["time"];
        if (!time)
            r.fail("time", "missing section");
        c.evolution.dt = r.value<double>(time, "dt", "time.", 0.01, true);
        c.evolution.dt_bd = r.value<double>(time, "dt_bd", "time.", 0.1, true);
        c.duration = r.value<double>(time, "duration", "time.", 1.0, true);
        if (!(c.duration > 0.0))
            r.fail("time.duration", "must be > 0");

        const YAML::Node clusters = root["clusters"];
        const long n = r.value<long>(clusters, "count", "clusters.", 20, true);
        const long m = r.value<long>(clusters, "rays", "clusters.", 20, true);
        if (n < 0)
            r.fail("clusters.count", "must be >= 0");
        if (m < 1)
            r.fail("clusters.rays", "must be >= 1");
        c.num_clusters = static_cast<std::size_t>(std::max(0L, n));
        c.num_rays = static_cast<std::size_t>(std::max(1L, m));

        const long sins = r.value<long>(root["sos"], "sinusoids", "sos.", 500);
        if (sins < 1)
            r.fail("sos.sinusoids", "must be >= 1");
        c.sinusoids = static_cast<std::size_t>(std::max(1L, sins));
        c.apply_large_scale = r.value<bool>(root["large_scale"], "apply", "large_scale.", true);

        const YAML::Node tx = root["tx"];
        if (!tx)
            r.fail("tx", "missing section");
        c.tx = r.vec3(tx, "position", "tx.", Vec3::Zero(), true);
        c.tx_array = read_array(r, r.child(tx, "array"), "tx.array");
        c.rx_array = read_array(r, root["rx_array"], "rx_array");

        const YAML::Node links = root["links"];
        if (!links || !links.IsSequence() || links.size() == 0)
            r.fail("links", "at least one link is required");
        else
            for (std::size_t i = 0; i < links.size(); ++i)
            {
                const std::string p = "links[" + std::to_string(i) + "]";
                LinkSpec s;
                s.name = r.value<std::string>(links[i], "name", p + ".", "link" + std::to_string(i));
                s.rx = read_trajectory(r, r.child(links[i], "trajectory"), p + ".trajectory");
                if ((trajectory_state(s.rx, s.rx.start_time).position - c.tx).norm() == 0.0)
                    r.fail(p + ".trajectory", "Rx starts at the Tx position");
                c.links.push_back(std::move(s));
            }

        const YAML::Node ev = root["evolution"];
        c.evolution.lambda_g = r.value<double>(ev, "lambda_g", "evolution.", 80.0);
        c.evolution.lambda_r = r.value<double>(ev, "lambda_r", "evolution.", 4.0);
        c.evolution.dc_a = r.value<double>(ev, "dc_a", "evolution.", 30.0);
        c.evolution.p_c = r.value<double>(ev, "p_c", "evolution.", 0.0);
        c.evolution.birth_death = r.value<bool>(ev, "birth_death", "evolution.", true);
        c.evolution.update_lsps = r.value<bool>(ev, "update_lsps", "evolution.", true);
        try
        {
            c.evolution.validate();
        }
        catch (const config_error &e)
        {
            for (const auto &v : e.violations())
                r.errors.push_back(v);
        }

        const YAML::Node mo = root["cluster_motion"];
        try
        {
            c.motion.kind = parse_trajectory_kind(r.value<std::string>(mo, "kind", "cluster_motion.", "linear"));
        }
        catch (const config_error &e)
        {
            r.fail("cluster_motion.kind", e.what());
        }
        c.motion.speed = r.value<double>(mo, "speed", "cluster_motion.", 0.0);
        c.motion.radius = r.value<double>(mo, "radius", "cluster_motion.", 1.0);
        if (!(c.motion.speed >= 0.0))
            r.fail("cluster_motion.speed", "must be >= 0");
        if (!(c.motion.radius > 0.0))
            r.fail("cluster_motion.radius", "must be > 0");

        read_lsp(r, root["lsp"], c.lsp);

        const YAML::Node pl = root["path_loss"];
        if (!pl)
            r.fail("path_loss", "missing section");
        c.path_loss.scenario = c.scenario;
        c.path_loss.intercept = r.value<double>(pl, "intercept", "path_loss.", 0.0, true);
        c.path_loss.distance_exponent = r.value<double>(pl, "distance_exponent", "path_loss.", 0.0, true);
        c.path_loss.frequency_exponent = r.value<double>(pl, "frequency_exponent", "path_loss.", 0.0, true);

        const YAML::Node ssp = root["ssp"];
        c.ssp.correlation.cluster = r.value<double>(ssp, "correlation_distance", "ssp.", 10.0);
        c.ssp.correlation.virtual_delay = r.value<double>(ssp, "virtual_delay_correlation_distance", "ssp.", 10.0);
        c.ssp.correlation.phase = r.value<double>(ssp, "phase_correlation_distance", "ssp.", 10.0);
        c.ssp.virtual_delay_mean = r.value<double>(ssp, "virtual_delay_mean_ns", "ssp.", 5.0) * 1e-9;
        c.ssp.xpr_sigma_db = r.value<double>(ssp, "xpr_sigma_db", "ssp.", 3.0);
        const auto frac = r.value<std::vector<double>>(ssp, "placement_fraction", "ssp.", {0.3, 0.7});
        if (frac.size() != 2 || !(frac[0] >= 0.0 && frac[0] <= frac[1] && frac[1] <= 1.0))
            r.fail("ssp.placement_fraction", "expected [min, max] with 0 <= min <= max <= 1");
        else
        {
            c.ssp.rho_min = frac[0];
            c.ssp.rho_max = frac[1];
        }
        for (auto [key, v] : {std::pair{"correlation_distance", c.ssp.correlation.cluster},
                              std::pair{"virtual_delay_correlation_distance", c.ssp.correlation.virtual_delay},
                              std::pair{"phase_correlation_distance", c.ssp.correlation.phase}})
            if (!(v > 0.0))
                r.fail(std::string("ssp.") + key, "must be > 0");
        if (!(c.ssp.virtual_delay_mean >= 0.0))
            r.fail("ssp.virtual_delay_mean_ns", "must be >= 0");
        if (!(c.ssp.xpr_sigma_db >= 0.0))
            r.fail("ssp.xpr_sigma_db", "must be >= 0");

        const YAML::Node ro = root["ray_offsets"];
        c.offsets.alpha = r.value<std::vector<double>>(ro, "alpha", "ray_offsets.", RayOffsets::default_alpha());
        c.offsets.c_asd = r.value<double>(ro, "c_asd", "ray_offsets.", 5.0);
        c.offsets.c_asa = r.value<double>(ro, "c_asa", "ray_offsets.", 8.0);
        c.offsets.c_esd = r.value<double>(ro, "c_esd", "ray_offsets.", 3.0);
        c.offsets.c_esa = r.value<double>(ro, "c_esa", "ray_offsets.", 9.0);
        if (c.num_rays > 1 && c.offsets.alpha.size() != c.num_rays)
            r.fail("ray_offsets.alpha", "expected " + std::to_string(c.num_rays) + " values (one per ray), got " +
                                            std::to_string(c.offsets.alpha.size()));

        const YAML::Node sc = root["scaling"];
        c.scaling.delay_headroom = r.value<double>(sc, "delay_headroom", "scaling.", c.lsp.los ? 3.6 : 3.0);
        c.scaling.regularization = r.value<double>(sc, "regularization", "scaling.", 3e-3);
        c.scaling.tracking = r.value<double>(sc, "tracking", "scaling.", 0.1);
        c.scaling.tolerance = r.value<double>(sc, "tolerance", "scaling.", 0.01);
        c.scaling.max_iterations = r.value<std::size_t>(sc, "max_iterations", "scaling.", 20);
        if (!(c.scaling.delay_headroom >= 1.0))
            r.fail("scaling.delay_headroom", "must be >= 1");
        if (!(c.scaling.tracking >= 0.0))
            r.fail("scaling.tracking", "must be >= 0");
        if (!(c.scaling.regularization >= 0.0))
            r.fail("scaling.regularization", "must be >= 0");

        if (!r.errors.empty())
            throw config_error(r.errors);
        return c;
    }

    ScenarioConfig load_config(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw config_error(path.string() + ": cannot open file");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_config(ss.str());
    }
}
