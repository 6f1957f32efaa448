#pragma once

#include <gpmi/mesh.hpp>

#include <cstdint>
#include <vector>

namespace gpmi::shapes {

/// Rectangle [0, width] x [0, height] in the z = 0 plane with nx x ny
/// vertices. Each cell is split along its (i, j) -> (i+1, j+1) diagonal.
TriMesh grid(int nx, int ny, double width, double height);

/// Flat disc in the z = 0 plane built from concentric rings spaced by
/// `edge_length`, centred at the origin.
TriMesh disc(double radius, double edge_length);

/// Geodesic sphere: icosahedron refined `levels` times by edge bisection.
TriMesh icosphere(double radius, int levels);

/// A spherical cap to remove: faces whose centroid direction lies within
/// `angle` radians of `direction` are dropped.
struct Hole
{
    Vec3 direction;
    double angle;
};

/// Icosphere with caps removed. Vertices whose faces form more than one fan
/// after removal are trimmed until every boundary is a simple loop.
TriMesh sphere_with_holes(double radius, int levels, const std::vector<Hole>& holes);

/// Open cylinder around the z axis with two boundary rims.
TriMesh cylinder(double radius, double height, int around, int along);

/// Grid with randomly jittered vertices and a smooth random height field.
/// Size and jitter are drawn from `seed`.
TriMesh random_patch(std::uint64_t seed);

/// Drops vertices not referenced by any face, renumbering the rest in order.
TriMesh compact(const TriMesh& mesh);

} // namespace gpmi::shapes
