#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace gpmi {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Triangle mesh with counter-clockwise faces. Lengths are in millimetres.
struct TriMesh
{
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::string units = "mm";

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_faces() const { return faces.size(); }
};

/// Minimum face area accepted by validate().
inline constexpr double kMinFaceArea = 1e-12;

/// Throws Error(Mesh) naming the offending face or edge when the mesh has an
/// out-of-range index, a repeated vertex in a face, a zero-area face, an edge
/// shared by more than two faces, or inconsistent orientation.
void validate(const TriMesh& mesh);

/// Unique undirected edges (a < b), sorted lexicographically.
std::vector<std::array<int, 2>> unique_edges(const TriMesh& mesh);

/// Stable content hash of positions and connectivity (FNV-1a, hex).
std::string mesh_hash(const TriMesh& mesh);

/// Area-weighted centroid of the surface.
Vec3 surface_centroid(const TriMesh& mesh);

double total_area(const TriMesh& mesh);
double mean_edge_length(const TriMesh& mesh);
/// Diagonal of the axis-aligned bounding box.
double bounding_diameter(const TriMesh& mesh);

/// Per-face and per-vertex geometry used by the cotangent Laplacian.
struct FaceGeometry
{
    std::vector<double> face_area;
    std::vector<Vec3> normal;
    std::vector<Vec3> centroid;
    /// cot of the interior angle at each corner, in face order.
    std::vector<std::array<double, 3>> cot;
    /// Barycentric lumped area: one third of the incident face areas.
    std::vector<double> vertex_area;
    /// Sorted one-ring neighbours.
    std::vector<std::vector<int>> one_ring;
};

FaceGeometry face_geometry(const TriMesh& mesh);

/// A closed boundary curve, ordered along the face orientation (each
/// consecutive pair (v[i], v[i+1]) is a directed edge of some face).
struct BoundaryLoop
{
    std::vector<int> vertices;
    /// Best-fit plane normal, pointing away from the surface centroid.
    Vec3 normal = Vec3::Zero();
};

/// One loop per hole. Throws Error(Mesh) on a non-manifold boundary.
std::vector<BoundaryLoop> boundary_loops(const TriMesh& mesh);

/// Result of appending tubes of triangles to every boundary loop. Original
/// vertices and faces keep their indices and come first.
struct ExtendedMesh
{
    TriMesh mesh;
    std::size_t original_vertices = 0;
    std::size_t original_faces = 0;

    bool is_original_vertex(int v) const { return static_cast<std::size_t>(v) < original_vertices; }
};

/// Appends `layers` rings of saw-tooth and connecting triangles to each hole.
/// Every layer adds B vertices and 2B faces per loop of length B. The plane
/// normal of each loop is refitted before every layer.
ExtendedMesh extend_boundaries(const TriMesh& mesh, int layers);

/// Mesh where each triangle is split into nine by two points on every edge
/// and one at the centroid.
struct SubdividedMesh
{
    TriMesh fine;
    /// coarse vertex -> fine vertex (identity on the first V indices).
    std::vector<int> vertex_map;
    /// coarse face -> fine vertex at its centroid.
    std::vector<int> centroid_map;
    /// The ten fine vertices lying in each coarse face, ordered by the
    /// barycentric lattice (a, b) with a + b <= 3, see lattice_node().
    std::vector<std::array<int, 10>> face_nodes;
};

/// Position index of lattice node (a, b) inside face_nodes, where the node
/// sits at v0 + a/3 (v1 - v0) + b/3 (v2 - v0).
int lattice_node(int a, int b);

SubdividedMesh subdivide9(const TriMesh& mesh);

/// Index of the vertex closest to `point` in Euclidean distance (lowest index
/// on ties).
int nearest_vertex(const TriMesh& mesh, const Vec3& point);

} // namespace gpmi
