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

#include "gscm/geometry.hpp"
#include "gscm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gscm
{
    double wrap_azimuth(double angle)
    {
        double a = std::remainder(angle, 2.0 * pi); // [-pi, pi]
        if (a <= -pi)
            a += 2.0 * pi;
        return a;
    }

    TrajectoryKind parse_trajectory_kind(std::string_view name)
    {
        if (name == "static" || name == "stationary")
            return TrajectoryKind::stationary;
        if (name == "linear")
            return TrajectoryKind::linear;
        if (name == "circular")
            return TrajectoryKind::circular;
        throw config_error("unknown trajectory kind '" + std::string(name) + "'");
    }

    std::string_view to_string(TrajectoryKind kind)
    {
        switch (kind)
        {
        case TrajectoryKind::stationary:
            return "static";
        case TrajectoryKind::linear:
            return "linear";
        case TrajectoryKind::circular:
            return "circular";
        }
        return "unknown";
    }

    Trajectory Trajectory::stationary(const Vec3 &position, double start_time)
    {
        Trajectory t;
        t.kind = TrajectoryKind::stationary;
        t.origin = position;
        t.start_time = start_time;
        return t;
    }

    Trajectory Trajectory::linear(const Vec3 &origin, const Vec3 &heading, double speed, double start_time)
    {
        if (!(speed >= 0.0))
            throw config_error("linear trajectory: speed must be non-negative");
        double n = heading.norm();
        if (!(n > 0.0) && speed > 0.0)
            throw config_error("linear trajectory: heading must be non-zero");
        Trajectory t;
        t.kind = TrajectoryKind::linear;
        t.origin = origin;
        t.heading = n > 0.0 ? Vec3(heading / n) : Vec3(Vec3::UnitX());
        t.speed = speed;
        t.start_time = start_time;
        return t;
    }

    Trajectory Trajectory::circular(const Vec3 &center, const Vec3 &origin, double angular_rate, double start_time)
    {
        double r = std::hypot(origin.x() - center.x(), origin.y() - center.y());
        if (!(r > 0.0))
            throw config_error("circular trajectory: radius must be positive");
        Trajectory t;
        t.kind = TrajectoryKind::circular;
        t.origin = origin;
        t.center = Vec3(center.x(), center.y(), origin.z());
        t.radius = r;
        t.angular_rate = angular_rate;
        t.start_time = start_time;
        return t;
    }

    TrajectoryState trajectory_state(const Trajectory &trajectory, double t)
    {
        if (t < trajectory.start_time)
            throw std::invalid_argument("trajectory_state: time precedes trajectory start");
        const double dt = t - trajectory.start_time;

        switch (trajectory.kind)
        {
        case TrajectoryKind::stationary:
            return {trajectory.origin, Vec3::Zero()};

        case TrajectoryKind::linear:
        {
            Vec3 v = trajectory.heading * trajectory.speed;
            return {trajectory.origin + v * dt, v};
        }

        case TrajectoryKind::circular:
        {
            const Vec3 &c = trajectory.center;
            double phase0 = std::atan2(trajectory.origin.y() - c.y(), trajectory.origin.x() - c.x());
            double phase = phase0 + trajectory.angular_rate * dt;
            double r = trajectory.radius, w = trajectory.angular_rate;
            Vec3 pos(c.x() + r * std::cos(phase), c.y() + r * std::sin(phase), trajectory.origin.z());
            Vec3 vel(-r * w * std::sin(phase), r * w * std::cos(phase), 0.0);
            return {pos, vel};
        }
        }
        throw config_error("unknown trajectory kind");
    }

    AnglePair direction_to_angles(const Vec3 &direction)
    {
        double n = direction.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw geometry_error("direction_to_angles: zero-length or non-finite vector");

        AnglePair a;
        a.azimuth = wrap_azimuth(std::atan2(direction.y(), direction.x()));
        a.elevation = std::asin(std::clamp(direction.z() / n, -1.0, 1.0));
        return a;
    }

    Vec3 angles_to_unit_vector(const AnglePair &angles)
    {
        double ce = std::cos(angles.elevation);
        return {ce * std::cos(angles.azimuth), ce * std::sin(angles.azimuth), std::sin(angles.elevation)};
    }

    Mat3 los_rotation_matrix(const AnglePair &los)
    {
        double ca = std::cos(los.azimuth), sa = std::sin(los.azimuth);
        double ce = std::cos(los.elevation), se = std::sin(los.elevation);

        Mat3 rz, ry;
        rz << ca, -sa, 0.0,
            sa, ca, 0.0,
            0.0, 0.0, 1.0;

        // Ry(-elevation)
        ry << ce, 0.0, -se,
            0.0, 1.0, 0.0,
            se, 0.0, ce;

        return rz * ry;
    }

    AnglePair apply_los_rotation(const AnglePair &base, const AnglePair &los)
    {
        Vec3 c = los_rotation_matrix(los) * angles_to_unit_vector(base);
        return direction_to_angles(c);
    }

    AnglePair remove_los_rotation(const AnglePair &rotated, const AnglePair &los)
    {
        Vec3 c = los_rotation_matrix(los).transpose() * angles_to_unit_vector(rotated);
        return direction_to_angles(c);
    }
}
