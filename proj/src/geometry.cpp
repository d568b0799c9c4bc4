/*
 * Copyright (C) 2026 The Transluce Authors
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

#include "transluce/geometry.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "transluce/errors.hpp"

namespace transluce {

bool intersect_sphere(const Sphere& s, const Ray& ray, SurfaceHit& hit) {
    Vec3 oc = ray.o - s.center;
    double b = dot(oc, ray.d);
    double c = dot(oc, oc) - s.radius * s.radius;
    double disc = b * b - c;
    if (disc < 0.0) return false;
    double sq = std::sqrt(disc);
    double t = -b - sq;
    if (t <= ray.tmin) t = -b + sq;
    if (t <= ray.tmin || t >= ray.tmax) return false;
    hit.t = t;
    hit.position = ray.at(t);
    hit.normal = (hit.position - s.center) / s.radius;
    hit.valid = true;
    return true;
}

void Aabb::grow(const Vec3& p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
}

void Aabb::grow(const Aabb& o) {
    grow(o.lo);
    grow(o.hi);
}

namespace {

bool intersect_aabb(const Aabb& b, const Ray& ray, const Vec3& inv_d, double tmax) {
    double t0 = ray.tmin, t1 = tmax;
    for (int a = 0; a < 3; ++a) {
        double lo = (b.lo[a] - ray.o[a]) * inv_d[a];
        double hi = (b.hi[a] - ray.o[a]) * inv_d[a];
        if (lo > hi) std::swap(lo, hi);
        t0 = std::max(t0, lo);
        t1 = std::min(t1, hi);
        if (t0 > t1) return false;
    }
    return true;
}

// Moller-Trumbore.
bool intersect_triangle(const Vec3& v0, const Vec3& v1, const Vec3& v2, const Ray& ray, double& t,
                        double& u, double& v) {
    Vec3 e1 = v1 - v0;
    Vec3 e2 = v2 - v0;
    Vec3 p = cross(ray.d, e2);
    double det = dot(e1, p);
    if (std::abs(det) < 1e-14) return false;
    double inv_det = 1.0 / det;
    Vec3 tv = ray.o - v0;
    u = dot(tv, p) * inv_det;
    if (u < 0.0 || u > 1.0) return false;
    Vec3 q = cross(tv, e1);
    v = dot(ray.d, q) * inv_det;
    if (v < 0.0 || u + v > 1.0) return false;
    t = dot(e2, q) * inv_det;
    return t > ray.tmin && t < ray.tmax;
}

}  // namespace

Aabb TriangleMesh::bounds() const {
    Aabb b;
    for (const Vec3& v : vertices) b.grow(v);
    return b;
}

Vec3 TriangleMesh::centroid() const {
    Vec3 c;
    for (const Vec3& v : vertices) c += v;
    return vertices.empty() ? c : c / double(vertices.size());
}

void TriangleMesh::finalize() {
    const size_t n_tris = triangle_count();
    nodes.clear();
    order.resize(n_tris);
    std::iota(order.begin(), order.end(), 0u);

    std::vector<Aabb> tri_bounds(n_tris);
    std::vector<Vec3> tri_centroids(n_tris);
    for (size_t i = 0; i < n_tris; ++i) {
        Aabb b;
        for (int k = 0; k < 3; ++k) b.grow(vertices[indices[i * 3 + k]]);
        tri_bounds[i] = b;
        tri_centroids[i] = b.centroid();
    }

    struct Task {
        uint32_t first, count;
        int32_t node;
    };
    nodes.reserve(n_tris * 2);
    nodes.emplace_back();
    std::vector<Task> stack{{0, uint32_t(n_tris), 0}};
    while (!stack.empty()) {
        Task task = stack.back();
        stack.pop_back();
        Aabb b;
        for (uint32_t i = 0; i < task.count; ++i) b.grow(tri_bounds[order[task.first + i]]);
        BvhNode& node = nodes[task.node];
        node.bounds = b;
        if (task.count <= 4) {
            node.first = task.first;
            node.count = task.count;
            continue;
        }
        Vec3 ext = b.extent();
        int axis = ext.x > ext.y ? (ext.x > ext.z ? 0 : 2) : (ext.y > ext.z ? 1 : 2);
        uint32_t mid = task.count / 2;
        std::nth_element(order.begin() + task.first, order.begin() + task.first + mid,
                         order.begin() + task.first + task.count, [&](uint32_t a, uint32_t c) {
                             return tri_centroids[a][axis] < tri_centroids[c][axis];
                         });
        int32_t left = int32_t(nodes.size());
        nodes.emplace_back();
        nodes.emplace_back();
        nodes[task.node].left = left;
        nodes[task.node].right = left + 1;
        stack.push_back({task.first, mid, left});
        stack.push_back({task.first + mid, task.count - mid, left + 1});
    }

    // Watertight: every undirected edge used exactly twice.
    std::unordered_map<uint64_t, int> edge_count;
    edge_count.reserve(n_tris * 3);
    auto edge_key = [](uint32_t a, uint32_t b) {
        if (a > b) std::swap(a, b);
        return (uint64_t(a) << 32) | b;
    };
    for (size_t i = 0; i < n_tris; ++i) {
        uint32_t a = indices[i * 3], b = indices[i * 3 + 1], c = indices[i * 3 + 2];
        ++edge_count[edge_key(a, b)];
        ++edge_count[edge_key(b, c)];
        ++edge_count[edge_key(c, a)];
    }
    watertight = !edge_count.empty();
    for (const auto& [k, cnt] : edge_count)
        if (cnt != 2) {
            watertight = false;
            break;
        }
}

bool TriangleMesh::intersect(const Ray& ray, SurfaceHit& hit) const {
    if (nodes.empty()) return false;
    Vec3 inv_d{1.0 / ray.d.x, 1.0 / ray.d.y, 1.0 / ray.d.z};
    double best_t = ray.tmax;
    int best_tri = -1;
    double best_u = 0, best_v = 0;

    int32_t stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
        const BvhNode& node = nodes[stack[--sp]];
        if (!intersect_aabb(node.bounds, ray, inv_d, best_t)) continue;
        if (node.left < 0) {
            for (uint32_t i = 0; i < node.count; ++i) {
                uint32_t tri = order[node.first + i];
                double t, u, v;
                Ray r = ray;
                r.tmax = best_t;
                if (intersect_triangle(vertices[indices[tri * 3]], vertices[indices[tri * 3 + 1]],
                                       vertices[indices[tri * 3 + 2]], r, t, u, v)) {
                    best_t = t;
                    best_tri = int(tri);
                    best_u = u;
                    best_v = v;
                }
            }
        } else {
            stack[sp++] = node.left;
            stack[sp++] = node.right;
        }
    }
    if (best_tri < 0) return false;
    hit.t = best_t;
    hit.position = ray.at(best_t);
    const Vec3& n0 = normals[indices[best_tri * 3]];
    const Vec3& n1 = normals[indices[best_tri * 3 + 1]];
    const Vec3& n2 = normals[indices[best_tri * 3 + 2]];
    Vec3 n = n0 * (1.0 - best_u - best_v) + n1 * best_u + n2 * best_v;
    double len = length(n);
    if (len < 1e-12) {
        // Fall back to the geometric normal.
        Vec3 e1 = vertices[indices[best_tri * 3 + 1]] - vertices[indices[best_tri * 3]];
        Vec3 e2 = vertices[indices[best_tri * 3 + 2]] - vertices[indices[best_tri * 3]];
        n = normalize(cross(e1, e2));
    } else {
        n = n / len;
    }
    hit.normal = n;
    hit.valid = true;
    return true;
}

bool intersect_geometry(const Geometry& g, const Ray& ray, SurfaceHit& hit) {
    if (const Sphere* s = std::get_if<Sphere>(&g)) return intersect_sphere(*s, ray, hit);
    return std::get<TriangleMesh>(g).intersect(ray, hit);
}

bool geometry_watertight(const Geometry& g) {
    if (std::holds_alternative<Sphere>(g)) return true;
    return std::get<TriangleMesh>(g).watertight;
}

Vec3 geometry_centroid(const Geometry& g) {
    if (const Sphere* s = std::get_if<Sphere>(&g)) return s->center;
    return std::get<TriangleMesh>(g).centroid();
}

namespace {

double signed_pow(double x, double e) {
    return std::copysign(std::pow(std::abs(x), e), x);
}

}  // namespace

TriangleMesh make_superquadric(const Vec3& radii, double e1, double e2, int lat_segments,
                               int lon_segments) {
    TriangleMesh mesh;
    const int rows = lat_segments;  // beta in (-pi/2, pi/2), poles welded
    const int cols = lon_segments;

    auto surface = [&](double beta, double lambda, Vec3& p, Vec3& n) {
        double cb = std::cos(beta), sb = std::sin(beta);
        double cl = std::cos(lambda), sl = std::sin(lambda);
        p = {radii.x * signed_pow(cb, e1) * signed_pow(cl, e2),
             radii.y * signed_pow(sb, e1),
             radii.z * signed_pow(cb, e1) * signed_pow(sl, e2)};
        n = normalize({signed_pow(cb, 2.0 - e1) * signed_pow(cl, 2.0 - e2) / radii.x,
                       signed_pow(sb, 2.0 - e1) / radii.y,
                       signed_pow(cb, 2.0 - e1) * signed_pow(sl, 2.0 - e2) / radii.z});
    };

    // Interior ring vertices plus two pole vertices.
    for (int i = 1; i < rows; ++i) {
        double beta = -kPi / 2.0 + kPi * i / rows;
        for (int j = 0; j < cols; ++j) {
            double lambda = -kPi + kTwoPi * j / cols;
            Vec3 p, n;
            surface(beta, lambda, p, n);
            mesh.vertices.push_back(p);
            mesh.normals.push_back(n);
        }
    }
    uint32_t south = uint32_t(mesh.vertices.size());
    mesh.vertices.push_back({0.0, -radii.y, 0.0});
    mesh.normals.push_back({0.0, -1.0, 0.0});
    uint32_t north = uint32_t(mesh.vertices.size());
    mesh.vertices.push_back({0.0, radii.y, 0.0});
    mesh.normals.push_back({0.0, 1.0, 0.0});

    auto ring = [&](int i, int j) { return uint32_t((i - 1) * cols + (j % cols)); };
    for (int j = 0; j < cols; ++j) {
        mesh.indices.insert(mesh.indices.end(), {south, ring(1, j + 1), ring(1, j)});
        mesh.indices.insert(mesh.indices.end(), {north, ring(rows - 1, j), ring(rows - 1, j + 1)});
    }
    for (int i = 1; i < rows - 1; ++i) {
        for (int j = 0; j < cols; ++j) {
            uint32_t a = ring(i, j), b = ring(i, j + 1), c = ring(i + 1, j), d = ring(i + 1, j + 1);
            mesh.indices.insert(mesh.indices.end(), {a, b, d});
            mesh.indices.insert(mesh.indices.end(), {a, d, c});
        }
    }
    mesh.finalize();
    return mesh;
}

void transform_mesh(TriangleMesh& mesh, const Vec3& axis, double angle, double scale,
                    const Vec3& translate) {
    Vec3 k = normalize(axis);
    double c = std::cos(angle), s = std::sin(angle);
    auto rotate = [&](const Vec3& v) {
        return v * c + cross(k, v) * s + k * dot(k, v) * (1.0 - c);
    };
    for (Vec3& v : mesh.vertices) v = rotate(v) * scale + translate;
    for (Vec3& n : mesh.normals) n = rotate(n);
    mesh.finalize();
}

void fit_to_cube(TriangleMesh& mesh, double edge) {
    Aabb b = mesh.bounds();
    Vec3 ext = b.extent();
    double max_ext = std::max(ext.x, std::max(ext.y, ext.z));
    if (max_ext <= 0.0) throw InvalidArgumentError("fit_to_cube: degenerate mesh");
    double s = edge / max_ext;
    Vec3 center = b.centroid();
    for (Vec3& v : mesh.vertices) v = (v - center) * s;
    mesh.finalize();
}

namespace {

void compute_vertex_normals(TriangleMesh& mesh) {
    mesh.normals.assign(mesh.vertices.size(), Vec3{});
    for (size_t i = 0; i + 2 < mesh.indices.size(); i += 3) {
        const Vec3& a = mesh.vertices[mesh.indices[i]];
        const Vec3& b = mesh.vertices[mesh.indices[i + 1]];
        const Vec3& c = mesh.vertices[mesh.indices[i + 2]];
        Vec3 n = cross(b - a, c - a);  // area weighted
        mesh.normals[mesh.indices[i]] += n;
        mesh.normals[mesh.indices[i + 1]] += n;
        mesh.normals[mesh.indices[i + 2]] += n;
    }
    for (Vec3& n : mesh.normals) n = normalize(n);
}

}  // namespace

TriangleMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open OBJ file: " + path);
    TriangleMesh mesh;
    std::vector<Vec3> file_normals;
    std::vector<int> vertex_normal_of;  // per mesh vertex, -1 if unknown
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 v;
            ss >> v.x >> v.y >> v.z;
            mesh.vertices.push_back(v);
            vertex_normal_of.push_back(-1);
        } else if (tag == "vn") {
            Vec3 n;
            ss >> n.x >> n.y >> n.z;
            file_normals.push_back(n);
        } else if (tag == "f") {
            std::vector<uint32_t> face;
            std::string tok;
            while (ss >> tok) {
                int vi = 0, ni = 0;
                size_t s1 = tok.find('/');
                if (s1 == std::string::npos) {
                    vi = std::stoi(tok);
                } else {
                    vi = std::stoi(tok.substr(0, s1));
                    size_t s2 = tok.find('/', s1 + 1);
                    if (s2 != std::string::npos && s2 + 1 < tok.size())
                        ni = std::stoi(tok.substr(s2 + 1));
                }
                if (vi < 0) vi = int(mesh.vertices.size()) + vi + 1;
                if (vi < 1 || size_t(vi) > mesh.vertices.size())
                    throw SchemaError("OBJ: vertex index out of range in " + path);
                if (ni > 0 && size_t(ni) <= file_normals.size())
                    vertex_normal_of[vi - 1] = ni - 1;
                face.push_back(uint32_t(vi - 1));
            }
            for (size_t k = 2; k < face.size(); ++k)
                mesh.indices.insert(mesh.indices.end(), {face[0], face[k - 1], face[k]});
        }
    }
    if (mesh.vertices.empty() || mesh.indices.empty())
        throw SchemaError("OBJ: no geometry in " + path);
    compute_vertex_normals(mesh);
    for (size_t i = 0; i < mesh.vertices.size(); ++i)
        if (vertex_normal_of[i] >= 0) mesh.normals[i] = normalize(file_normals[vertex_normal_of[i]]);
    mesh.finalize();
    return mesh;
}

TriangleMesh load_stl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError("cannot open STL file: " + path);
    char header[80];
    in.read(header, 80);
    uint32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in) throw SchemaError("STL: truncated header in " + path);

    TriangleMesh mesh;
    std::unordered_map<uint64_t, uint32_t> weld;
    auto add_vertex = [&](const float v[3]) {
        uint64_t key = 1469598103934665603ULL;
        for (int k = 0; k < 3; ++k) {
            uint32_t bits;
            std::memcpy(&bits, &v[k], 4);
            key = (key ^ bits) * 1099511628211ULL;
        }
        auto [it, inserted] = weld.emplace(key, uint32_t(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back({v[0], v[1], v[2]});
        return it->second;
    };
    for (uint32_t i = 0; i < count; ++i) {
        float rec[12];
        uint16_t attr;
        in.read(reinterpret_cast<char*>(rec), 48);
        in.read(reinterpret_cast<char*>(&attr), 2);
        if (!in) throw SchemaError("STL: truncated facet data in " + path);
        for (int k = 0; k < 3; ++k) mesh.indices.push_back(add_vertex(&rec[3 + 3 * k]));
    }
    if (mesh.vertices.empty()) throw SchemaError("STL: no facets in " + path);
    compute_vertex_normals(mesh);
    mesh.finalize();
    return mesh;
}

}  // namespace transluce
