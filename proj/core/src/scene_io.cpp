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

#include "geosplat/scene_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace geosplat {

namespace {

// "3", "3/2", "3//4", "3/2/4" -> vertex and optional normal index (1-based,
// negative means relative to the current count)
void parse_face_corner(const std::string& token, long& v, long& vn) {
    v = 0;
    vn = 0;
    size_t first = token.find('/');
    if (first == std::string::npos) {
        v = std::stol(token);
        return;
    }
    v = std::stol(token.substr(0, first));
    size_t second = token.find('/', first + 1);
    if (second == std::string::npos) return;  // v/vt
    std::string n = token.substr(second + 1);
    if (!n.empty()) vn = std::stol(n);
}

uint32_t resolve_index(long idx, size_t count, const std::string& what, int line_no) {
    long resolved = idx > 0 ? idx - 1 : long(count) + idx;
    if (resolved < 0 || size_t(resolved) >= count)
        throw IoError("obj: " + what + " index out of range at line " + std::to_string(line_no));
    return uint32_t(resolved);
}

}  // namespace

Mesh load_mesh(const std::string& path, MeshLoadReport* report) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);

    Mesh mesh;
    std::vector<Vec3> normals;            // vn records
    std::vector<Vec3> accum_normals;      // per-vertex accumulation of corner normals
    bool any_corner_normals = false;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x >> p.y >> p.z)) throw IoError("obj: bad vertex at line " + std::to_string(line_no));
            if (!is_finite(p)) throw IoError("obj: non-finite vertex at line " + std::to_string(line_no));
            mesh.vertices.push_back(p);
        } else if (tag == "vn") {
            Vec3 n;
            if (!(ls >> n.x >> n.y >> n.z)) throw IoError("obj: bad normal at line " + std::to_string(line_no));
            normals.push_back(n);
        } else if (tag == "f") {
            std::vector<std::string> corners;
            std::string c;
            while (ls >> c) corners.push_back(c);
            if (corners.size() != 3)
                throw IoError("obj: non-triangular face (" + std::to_string(corners.size()) +
                              " corners) at line " + std::to_string(line_no));
            std::array<uint32_t, 3> tri;
            accum_normals.resize(mesh.vertices.size(), Vec3{0, 0, 0});
            for (int k = 0; k < 3; k++) {
                long vi, vni;
                try {
                    parse_face_corner(corners[size_t(k)], vi, vni);
                } catch (const std::exception&) {
                    throw IoError("obj: bad face corner at line " + std::to_string(line_no));
                }
                tri[k] = resolve_index(vi, mesh.vertices.size(), "vertex", line_no);
                if (vni != 0) {
                    uint32_t ni = resolve_index(vni, normals.size(), "normal", line_no);
                    accum_normals[tri[k]] += normals[ni];
                    any_corner_normals = true;
                }
            }
            mesh.faces.push_back(tri);
        }
        // other tags (vt, usemtl, o, g, s, mtllib) are ignored
    }

    if (any_corner_normals) {
        accum_normals.resize(mesh.vertices.size(), Vec3{0, 0, 0});
        mesh.vertex_normals = std::move(accum_normals);
        // vertices never referenced with a normal fall back in finalize()
        for (auto& n : mesh.vertex_normals)
            if (length(n) == 0) n = {0, 0, 0};
    }

    MeshLoadReport local;
    local.had_normals = any_corner_normals;
    auto fin = mesh.finalize(!any_corner_normals);
    local.degenerate_faces_dropped = fin.degenerate_faces_dropped;
    local.isolated_vertices = fin.isolated_vertices;
    local.manifold = fin.manifold;
    if (report) *report = local;
    return mesh;
}

void save_mesh_obj(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.precision(17);
    for (const auto& v : mesh.vertices) out << "v " << v.x << " " << v.y << " " << v.z << "\n";
    for (const auto& n : mesh.vertex_normals)
        out << "vn " << n.x << " " << n.y << " " << n.z << "\n";
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << "//" << f[0] + 1 << " " << f[1] + 1 << "//" << f[1] + 1 << " "
            << f[2] + 1 << "//" << f[2] + 1 << "\n";
    if (!out) throw IoError("write failed: " + path);
}

EnvironmentLight load_envmap(const std::string& path) {
    EnvironmentLight env;
    env.radiance = read_image_any(path);
    if (env.radiance.channels() == 1) {
        Image rgb(env.radiance.width(), env.radiance.height(), 3);
        for (int y = 0; y < rgb.height(); y++)
            for (int x = 0; x < rgb.width(); x++) {
                double v = env.radiance.at(y, x);
                rgb.set_pixel3(y, x, {v, v, v});
            }
        env.radiance = std::move(rgb);
    }
    try {
        env.validate_radiance();
    } catch (const std::exception& e) {
        throw IoError(std::string(e.what()) + ": " + path);
    }
    return env;
}

Image load_target_image(const std::string& path) {
    Image img = read_image_any(path);
    if (img.channels() != 3) throw IoError("target image must be RGB: " + path);
    return img;
}

Image load_mask(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = char(std::tolower(c));
    Image img = ext == "png" ? read_png_raw(path) : read_image_any(path);
    if (img.channels() != 1) img = to_luminance(img);
    for (double& v : img.raw()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

// Scene document ---------------------------------------------------------------

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return p;
    return (std::filesystem::path(base_dir) / fp).string();
}

Mat4 mat4_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 16) throw IoError("scene: world_to_camera needs 16 numbers");
    Mat4 m;
    for (int i = 0; i < 4; i++)
        for (int k = 0; k < 4; k++) m.m[i][k] = j[size_t(i * 4 + k)];
    return m;
}

nlohmann::json mat4_to_json(const Mat4& m) {
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < 4; i++)
        for (int k = 0; k < 4; k++) j.push_back(m.m[i][k]);
    return j;
}

}  // namespace

SceneDocument load_scene_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw IoError("scene: malformed JSON: " + path);

    std::string dir = std::filesystem::path(path).parent_path().string();
    SceneDocument doc;
    if (j.contains("mesh")) doc.mesh_path = resolve_path(dir, j.at("mesh"));
    if (j.contains("grid")) {
        doc.grid_path = resolve_path(dir, j.at("grid").at("path"));
        doc.grid_level = j.at("grid").value("level", 0.0);
    }
    if (doc.mesh_path.empty() && doc.grid_path.empty())
        throw IoError("scene: needs a mesh or a grid: " + path);
    if (!j.contains("envmap")) throw IoError("scene: missing envmap: " + path);
    doc.envmap_path = resolve_path(dir, j.at("envmap"));
    doc.config = j.contains("config") ? RunConfig::from_json(j.at("config")) : RunConfig{};

    if (!j.contains("views") || !j.at("views").is_array() || j.at("views").empty())
        throw IoError("scene: needs at least one view: " + path);
    for (const auto& vj : j.at("views")) {
        SceneDocument::ViewSpec v;
        v.width = vj.at("width");
        v.height = vj.at("height");
        v.fx = vj.at("fx");
        v.fy = vj.at("fy");
        v.cx = vj.value("cx", v.width * 0.5);
        v.cy = vj.value("cy", v.height * 0.5);
        v.world_to_camera = mat4_from_json(vj.at("world_to_camera"));
        if (vj.contains("image")) v.image_path = resolve_path(dir, vj.at("image"));
        if (vj.contains("mask")) v.mask_path = resolve_path(dir, vj.at("mask"));
        doc.views.push_back(v);
    }
    return doc;
}

void save_scene_document(const SceneDocument& doc, const std::string& path) {
    nlohmann::json j;
    if (!doc.mesh_path.empty()) j["mesh"] = doc.mesh_path;
    if (!doc.grid_path.empty()) j["grid"] = {{"path", doc.grid_path}, {"level", doc.grid_level}};
    j["envmap"] = doc.envmap_path;
    j["config"] = doc.config.to_json();
    nlohmann::json views = nlohmann::json::array();
    for (const auto& v : doc.views) {
        nlohmann::json vj{{"width", v.width},   {"height", v.height}, {"fx", v.fx},
                          {"fy", v.fy},         {"cx", v.cx},         {"cy", v.cy},
                          {"world_to_camera", mat4_to_json(v.world_to_camera)}};
        if (!v.image_path.empty()) vj["image"] = v.image_path;
        if (!v.mask_path.empty()) vj["mask"] = v.mask_path;
        views.push_back(vj);
    }
    j["views"] = views;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

Scene load_scene(const std::string& path) {
    SceneDocument doc = load_scene_document(path);
    Scene scene;
    scene.config = doc.config;
    if (!doc.mesh_path.empty()) {
        scene.mesh = load_mesh(doc.mesh_path);
    } else {
        ScalarGrid grid = load_grid(doc.grid_path);
        auto iso = extract_isosurface(grid, doc.grid_level);
        if (iso.empty || iso.mesh.face_count() == 0)
            throw IoError("scene: isosurface extraction produced an empty mesh: " + doc.grid_path);
        scene.mesh = std::move(iso.mesh);
        scene.from_grid = true;
    }
    scene.env = load_envmap(doc.envmap_path);
    for (const auto& spec : doc.views) {
        View v;
        v.width = spec.width;
        v.height = spec.height;
        v.focal_x = spec.fx;
        v.focal_y = spec.fy;
        v.principal_x = spec.cx;
        v.principal_y = spec.cy;
        v.world_to_camera = spec.world_to_camera;
        if (!spec.image_path.empty()) v.target_image = load_target_image(spec.image_path);
        if (!spec.mask_path.empty()) v.target_mask = load_mask(spec.mask_path);
        v.validate();
        scene.views.push_back(std::move(v));
    }
    return scene;
}

}  // namespace geosplat
