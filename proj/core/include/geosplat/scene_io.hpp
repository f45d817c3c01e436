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
#include <string>
#include <vector>

#include "geosplat/camera.hpp"
#include "geosplat/config.hpp"
#include "geosplat/grid.hpp"
#include "geosplat/image_io.hpp"
#include "geosplat/lighting.hpp"
#include "geosplat/mesh.hpp"

namespace geosplat {

struct MeshLoadReport {
    size_t degenerate_faces_dropped = 0;
    size_t isolated_vertices = 0;
    bool manifold = true;
    bool had_normals = false;
};

/// Loads an OBJ mesh (v / vn / f with triangular faces). Corner normals are
/// accumulated per vertex; missing normals are computed area-weighted.
/// Throws IoError on parse failures or non-triangular faces.
Mesh load_mesh(const std::string& path, MeshLoadReport* report = nullptr);

void save_mesh_obj(const Mesh& mesh, const std::string& path);

/// Loads a Radiance HDR or PFM equirectangular map (raw radiance only; run
/// precompute_splitsum for the tables). Rejects maps that are not 2:1 or
/// contain negative/non-finite texels.
EnvironmentLight load_envmap(const std::string& path);

/// Loads a target image in linear radiance (PNG passes through inverse sRGB).
Image load_target_image(const std::string& path);
/// Loads a mask as single-channel [0,1] floats; RGB input is
/// luminance-reduced. PNG is read without the sRGB transfer.
Image load_mask(const std::string& path);

// Scene description ----------------------------------------------------------

/// JSON scene document; relative paths resolve against the document location.
struct SceneDocument {
    std::string mesh_path;   // OBJ geometry, or
    std::string grid_path;   // scalar-grid blob extracted at grid_level
    double grid_level = 0.0;
    std::string envmap_path;
    RunConfig config;
    struct ViewSpec {
        int width = 0, height = 0;
        double fx = 0, fy = 0, cx = 0, cy = 0;
        Mat4 world_to_camera = Mat4::identity();
        std::string image_path;
        std::string mask_path;
    };
    std::vector<ViewSpec> views;
};

SceneDocument load_scene_document(const std::string& path);
void save_scene_document(const SceneDocument& doc, const std::string& path);

/// Fully loaded scene: geometry, light, posed views with targets, config.
struct Scene {
    Mesh mesh;
    EnvironmentLight env;
    std::vector<View> views;
    RunConfig config;
    bool from_grid = false;
};
Scene load_scene(const std::string& path);

}  // namespace geosplat
