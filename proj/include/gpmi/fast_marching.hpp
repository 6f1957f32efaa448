#pragma once

#include <gpmi/mesh.hpp>

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace gpmi {

/// Per-vertex update stencils for fast marching on a triangle mesh. Each
/// stencil is a pair of vertices seen from the updated vertex at the origin of
/// a local 2D frame. Obtuse corners are split by unfolding neighbouring faces
/// until a vertex inside the corner's angle is found.
class MarchingStencils
{
public:
    explicit MarchingStencils(const TriMesh& mesh);

    struct Stencil
    {
        int a;
        int b;
        Eigen::Vector2d pa;
        Eigen::Vector2d pb;
    };
    struct Edge
    {
        int to;
        double length;
    };

    std::size_t num_vertices() const { return m_stencils.size(); }
    const std::vector<Stencil>& stencils(int v) const { return m_stencils[v]; }
    const std::vector<Edge>& edges(int v) const { return m_edges[v]; }
    /// Vertices whose stencils or edges reference v.
    const std::vector<int>& dependents(int v) const { return m_dependents[v]; }

private:
    std::vector<std::vector<Stencil>> m_stencils;
    std::vector<std::vector<Edge>> m_edges;
    std::vector<std::vector<int>> m_dependents;
};

enum class MarchingMode {
    /// First-arrival times of |grad T| = slowness, plane-wave triangle updates.
    Eikonal,
    /// Surface distance with point-source triangle updates.
    Distance,
};

/// Reusable fast-marching workspace over a fixed set of stencils.
class FastMarcher
{
public:
    explicit FastMarcher(const MarchingStencils& stencils);

    struct Source
    {
        int vertex;
        double value;
    };

    /// Marches from the sources. `slowness` (per vertex) is used in Eikonal
    /// mode and ignored in Distance mode. Marching stops early once `stop`
    /// returns true for an accepted vertex.
    void run(const std::vector<Source>& sources, MarchingMode mode, const std::vector<double>* slowness = nullptr,
             const std::function<bool(int)>& stop = {});

    /// Value of v from the last run, +inf if not accepted.
    double value(int v) const;
    /// Vertices in acceptance order.
    const std::vector<int>& order() const { return m_order; }

private:
    const MarchingStencils* m_st;
    std::vector<double> m_value;
    std::vector<unsigned> m_seen;
    std::vector<unsigned> m_done;
    unsigned m_epoch = 0;
    std::vector<int> m_order;
    std::vector<std::pair<double, int>> m_heap;

    double update(int c, MarchingMode mode, double slowness) const;
    bool accepted(int v) const { return m_done[v] == m_epoch; }
};

/// Eikonal first-arrival times (ms) for per-vertex speed (mm/ms): the minimum
/// over sources of single-source fast-marching solutions. Vertices within
/// `exact_radius` mm of a source along the surface are initialized to
/// distance / speed at the source. `order` receives the vertices sorted by
/// arrival time (ties by index). Throws Error(Mesh) listing unreached vertices.
std::vector<double> eikonal_times(const TriMesh& mesh, const std::vector<double>& speed,
                                  const std::vector<int>& sources, double exact_radius = 0.0,
                                  std::vector<int>* order = nullptr);

/// Surface distances from a set of source vertices.
std::vector<double> surface_distances(const TriMesh& mesh, const std::vector<int>& sources);

} // namespace gpmi
