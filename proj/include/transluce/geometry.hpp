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

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "transluce/common.hpp"

namespace transluce {

struct Ray {
    Vec3 o;
    Vec3 d;  // unit
    double tmin = 1e-9;
    double tmax = std::numeric_limits<double>::infinity();

    Vec3 at(double t) const { return o + d * t; }
};

struct SurfaceHit {
    double t = std::numeric_limits<double>::infinity();
    Vec3 position;
    Vec3 normal;  // outward geometric/shading normal, unit
    bool valid = false;
};

struct Sphere {
    Vec3 center;
    double radius = 0.25;
};

/// Intersects ray with sphere; nearest hit in (tmin, tmax).
bool intersect_sphere(const Sphere& s, const Ray& ray, SurfaceHit& hit);

struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    void grow(const Vec3& p);
    void grow(const Aabb& o);
    Vec3 extent() const { return hi - lo; }
    Vec3 centroid() const { return (lo + hi) * 0.5; }
};

/// Indexed triangle mesh with per-vertex shading normals and a median-split
/// BVH. Interior medium tracing requires watertight to be true.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Vec3> normals;     // per vertex, unit
    std::vector<uint32_t> indices; // 3 per triangle
    bool watertight = false;

    struct BvhNode {
        Aabb bounds;
        int32_t left = -1;    // child index, or -1 for leaf
        int32_t right = -1;
        uint32_t first = 0;   // leaf triangle range into `order`
        uint32_t count = 0;
    };
    std::vector<BvhNode> nodes;
    std::vector<uint32_t> order;

    size_t triangle_count() const { return indices.size() / 3; }
    Aabb bounds() const;
    Vec3 centroid() const;

    /// Builds the BVH and recomputes the watertight flag (every undirected
    /// edge shared by exactly two triangles).
    void finalize();

    bool intersect(const Ray& ray, SurfaceHit& hit) const;
};

using Geometry = std::variant<Sphere, TriangleMesh>;

bool intersect_geometry(const Geometry& g, const Ray& ray, SurfaceHit& hit);
bool geometry_watertight(const Geometry& g);
Vec3 geometry_centroid(const Geometry& g);

/// Superquadric (superellipsoid) mesh with welded poles and seam; exponents
/// in roughly [0.4, 1.6] stay numerically tame. e1 = e2 = 1 is a sphere.
TriangleMesh make_superquadric(const Vec3& radii, double e1, double e2, int lat_segments = 48,
                               int lon_segments = 96);

/// Rigid+scale transform applied in place (rotation as axis-angle).
void transform_mesh(TriangleMesh& mesh, const Vec3& axis, double angle, double scale,
                    const Vec3& translate);

/// Uniformly rescales and recenters so the bounding box fits a cube of the
/// given edge length centered at the origin.
void fit_to_cube(TriangleMesh& mesh, double edge);

/// Minimal OBJ subset: v / vn / f (v, v//vn, v/vt/vn). Faces are fan
/// triangulated; missing normals are area-weighted vertex normals.
TriangleMesh load_obj(const std::string& path);

/// Binary STL; vertices are welded bitwise and normals area-averaged.
TriangleMesh load_stl(const std::string& path);

}  // namespace transluce
