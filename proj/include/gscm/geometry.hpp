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

#ifndef gscm_geometry_H
#define gscm_geometry_H

#include <Eigen/Core>
#include <string_view>

namespace gscm
{
    using Vec3 = Eigen::Vector3d;
    using Mat3 = Eigen::Matrix3d;

    inline constexpr double pi = 3.141592653589793238462643383279502884;
    inline constexpr double speed_of_light = 299792458.0;

    // Azimuth in (-pi, pi], elevation in [-pi/2, pi/2]; both in radians.
    struct AnglePair
    {
        double azimuth = 0.0;
        double elevation = 0.0;
    };

    // Wraps any angle into (-pi, pi]; -pi maps to +pi.
    double wrap_azimuth(double angle);

    enum class TrajectoryKind
    {
        stationary,
        linear,
        circular
    };

    // Parses "static", "linear" or "circular"; throws config_error otherwise.
    TrajectoryKind parse_trajectory_kind(std::string_view name);
    std::string_view to_string(TrajectoryKind kind);

    // Motion of an object in the global frame. Before start_time the object is
    // undefined; at start_time it is located at origin.
    //
    // Circular tracks lie in the horizontal plane through origin and turn
    // counter-clockwise about +z for positive angular_rate.
    struct Trajectory
    {
        TrajectoryKind kind = TrajectoryKind::stationary;
        Vec3 origin = Vec3::Zero();
        Vec3 heading = Vec3::UnitX(); // linear: unit direction
        double speed = 0.0;           // linear: m/s
        Vec3 center = Vec3::Zero();   // circular
        double radius = 0.0;          // circular: m, horizontal distance origin-center
        double angular_rate = 0.0;    // circular: rad/s
        double start_time = 0.0;      // s

        static Trajectory stationary(const Vec3 &position, double start_time = 0.0);
        static Trajectory linear(const Vec3 &origin, const Vec3 &heading, double speed, double start_time = 0.0);
        static Trajectory circular(const Vec3 &center, const Vec3 &origin, double angular_rate, double start_time = 0.0);
    };

    struct TrajectoryState
    {
        Vec3 position;
        Vec3 velocity;
    };

    // Position and analytic velocity at time t >= start_time.
    TrajectoryState trajectory_state(const Trajectory &trajectory, double t);

    // Azimuth = atan2(d.y, d.x); elevation = asin of the z-component of d/|d|.
    // Throws geometry_error for a zero-length vector.
    AnglePair direction_to_angles(const Vec3 &direction);

    Vec3 angles_to_unit_vector(const AnglePair &angles);

    // Rotation taking the local x-axis onto the LOS direction: Rz(los.azimuth) * Ry(-los.elevation).
    Mat3 los_rotation_matrix(const AnglePair &los);

    AnglePair apply_los_rotation(const AnglePair &base, const AnglePair &los);

    // Inverse of apply_los_rotation for the same LOS angles.
    AnglePair remove_los_rotation(const AnglePair &rotated, const AnglePair &los);
}

#endif
