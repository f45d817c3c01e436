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

#include "geosplat/camera.hpp"

#include <stdexcept>

namespace geosplat {

void View::validate() const {
    if (width < 1 || height < 1) throw std::invalid_argument("view: width/height must be >= 1");
    if (!(focal_x > 0) || !(focal_y > 0)) throw std::invalid_argument("view: focal must be > 0");
    if (orthonormality_error(world_to_camera.rotation()) >= 1e-5)
        throw std::invalid_argument("view: world_to_camera rotation block is not orthonormal");
    if (target_image && (target_image->width() != width || target_image->height() != height ||
                         target_image->channels() != 3))
        throw std::invalid_argument("view: target image dimensions do not match view");
    if (target_mask && (target_mask->width() != width || target_mask->height() != height ||
                        target_mask->channels() != 1))
        throw std::invalid_argument("view: target mask dimensions do not match view");
}

View make_lookat_view(int width, int height, double focal, const Vec3& eye, const Vec3& target,
                      const Vec3& up) {
    Vec3 forward = normalize(target - eye);  // camera -z
    Vec3 right = normalize(cross(forward, up));
    Vec3 cam_up = cross(right, forward);
    // camera_to_world columns: x=right, y=up, z=-forward
    Mat3 c2w = Mat3::from_columns(right, cam_up, -forward);
    Mat4 cam_to_world = Mat4::from_rotation_translation(c2w, eye);
    View v;
    v.width = width;
    v.height = height;
    v.focal_x = v.focal_y = focal;
    v.principal_x = width * 0.5;
    v.principal_y = height * 0.5;
    v.world_to_camera = rigid_inverse(cam_to_world);
    return v;
}

}  // namespace geosplat
