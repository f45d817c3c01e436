/*
 * Copyright (C) 2025 The geosplat authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>

#include "geosplat/image.hpp"
#include "geosplat/math.hpp"

namespace geosplat {

/// Pinhole camera plus optional fitting targets.
///
/// Convention: right-handed camera space, camera looks down -z, y up.
/// Pixel (0,0) is the top-left corner; rays pass through pixel centers
/// (pixel (col,row) center sits at image coordinates (col+0.5, row+0.5)).
struct View {
    int width = 0, height = 0;
    double focal_x = 0, focal_y = 0;
    double principal_x = 0, principal_y = 0;
    Mat4 world_to_camera = Mat4::identity();

    std::optional<Image> target_image;  // H x W x 3 linear radiance
    std::optional<Image> target_mask;   // H x W x 1 in [0,1]

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    Mat4 camera_to_world() const { return rigid_inverse(world_to_camera); }
    Vec3 camera_position() const { return camera_to_world().translation(); }

    /// World-space unit direction through image coordinates (x_img, y_img).
    Vec3 ray_direction(double x_img, double y_img) const {
        Vec3 d_cam{(x_img - principal_x) / focal_x, -(y_img - principal_y) / focal_y, -1.0};
        return normalize(camera_to_world().transform_direction(d_cam));
    }
    /// Ray through the center of integer pixel (col, row).
    Vec3 pixel_ray_direction(int col, int row) const {
        return ray_direction(col + 0.5, row + 0.5);
    }

    /// Projects a world point. Returns image coordinates and positive depth
    /// (-z in camera space); depth <= 0 means behind the camera.
    struct Projection {
        double x = 0, y = 0;
        double depth = 0;
        Vec3 position_camera;
    };
    Projection project(const Vec3& world) const {
        Projection p;
        p.position_camera = world_to_camera.transform_point(world);
        p.depth = -p.position_camera.z;
        if (p.depth > 0) {
            p.x = principal_x + focal_x * p.position_camera.x / p.depth;
            p.y = principal_y - focal_y * p.position_camera.y / p.depth;
        }
        return p;
    }

    /// Depth (along -z in camera space) of a world point; positive in front.
    double depth_of(const Vec3& world) const { return -world_to_camera.transform_point(world).z; }
};

/// Camera at `eye` looking at `target` with up hint `up`.
View make_lookat_view(int width, int height, double focal, const Vec3& eye, const Vec3& target,
                      const Vec3& up = {0, 1, 0});

}  // namespace geosplat
