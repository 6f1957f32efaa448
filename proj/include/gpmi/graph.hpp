#pragma once

#include <gpmi/mesh.hpp>

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

namespace gpmi {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Undirected weighted graph in compressed adjacency form.
class WeightedGraph
{
public:
    WeightedGraph() = default;

    /// Mesh vertices joined by their edges, weighted by Euclidean length.
    static WeightedGraph from_mesh(const TriMesh& mesh);
    /// Face centroids joined across shared edges, weighted by centroid distance.
    static WeightedGraph dual_of(const TriMesh& mesh);

    std::size_t num_nodes() const { return m_offsets.empty() ? 0 : m_offsets.size() - 1; }

    struct Arc
    {
        int target;
        double weight;
    };

    const Arc* begin(int node) const { return m_arcs.data() + m_offsets[node]; }
    const Arc* end(int node) const { return m_arcs.data() + m_offsets[node + 1]; }

private:
    std::vector<std::size_t> m_offsets;
    std::vector<Arc> m_arcs;

    static WeightedGraph from_edges(std::size_t nodes, const std::vector<std::pair<int, int>>& edges,
                                    const std::vector<double>& weights);
};

/// A starting node with an initial distance.
struct Seed
{
    int node;
    double distance;
};

/// Reusable Dijkstra workspace. Distances of nodes not reached are +inf.
class Dijkstra
{
public:
    explicit Dijkstra(const WeightedGraph& graph);

    /// Runs from the seeds, settling nodes in order of distance until the
    /// queue is empty, the next distance exceeds `radius`, or `stop` (if set)
    /// returns true for a settled node. Returns settled nodes in order.
    template <typename Stop>
    const std::vector<int>& run(const std::vector<Seed>& seeds, double radius, Stop&& stop);

    const std::vector<int>& run(const std::vector<Seed>& seeds, double radius = kInfinity)
    {
        return run(seeds, radius, [](int) { return false; });
    }

    double distance(int node) const { return m_stamp[node] == m_epoch ? m_dist[node] : kInfinity; }
    const std::vector<int>& settled() const { return m_settled; }

private:
    const WeightedGraph* m_graph;
    std::vector<double> m_dist;
    std::vector<unsigned> m_stamp;
    std::vector<unsigned> m_done;
    unsigned m_epoch = 0;
    std::vector<int> m_settled;
    std::vector<std::pair<double, int>> m_heap;

    void reset();
    void relax(int node, double d);
};

/// Shortest path lengths along mesh edges from `source` to every vertex.
std::vector<double> graph_geodesics(const TriMesh& mesh, int source);

/// The k vertices nearest to `point` along mesh edges, sorted by distance
/// (ties by lower index). The walk is seeded from the vertices of the faces
/// around the Euclidean-nearest vertex, at their straight-line distance.
std::vector<int> k_nearest(const TriMesh& mesh, const Vec3& point, int k);

/// As k_nearest, seeded from the three corners of `face` at their distance to
/// its centroid.
std::vector<int> k_nearest_to_face(const TriMesh& mesh, const WeightedGraph& graph, int face, int k);
/// As above, reusing a workspace built over the mesh's vertex graph.
std::vector<int> k_nearest_to_face(const TriMesh& mesh, Dijkstra& dijkstra, int face, int k);

// ---------------------------------------------------------------------------

template <typename Stop>
const std::vector<int>& Dijkstra::run(const std::vector<Seed>& seeds, double radius, Stop&& stop)
{
    reset();
    for (const auto& s : seeds) relax(s.node, s.distance);
    auto cmp = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
        return a.first > b.first || (a.first == b.first && a.second > b.second);
    };
    while (!m_heap.empty()) {
        std::pop_heap(m_heap.begin(), m_heap.end(), cmp);
        auto [d, u] = m_heap.back();
        m_heap.pop_back();
        if (m_done[u] == m_epoch || d > m_dist[u]) continue;
        if (d > radius) break;
        m_done[u] = m_epoch;
        m_settled.push_back(u);
        if (stop(u)) break;
        for (const WeightedGraph::Arc* a = m_graph->begin(u); a != m_graph->end(u); ++a) {
            if (m_done[a->target] != m_epoch) relax(a->target, d + a->weight);
        }
    }
    return m_settled;
}

} // namespace gpmi
