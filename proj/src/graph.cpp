#include <gpmi/error.hpp>
#include <gpmi/graph.hpp>

#include <algorithm>
#include <unordered_map>

namespace gpmi {

WeightedGraph WeightedGraph::from_edges(std::size_t nodes, const std::vector<std::pair<int, int>>& edges,
                                        const std::vector<double>& weights)
{
    WeightedGraph g;
    g.m_offsets.assign(nodes + 1, 0);
    for (const auto& [a, b] : edges) {
        g.m_offsets[a + 1]++;
        g.m_offsets[b + 1]++;
    }
    for (std::size_t i = 0; i < nodes; ++i) g.m_offsets[i + 1] += g.m_offsets[i];
    g.m_arcs.resize(g.m_offsets.back());
    std::vector<std::size_t> fill(g.m_offsets.begin(), g.m_offsets.end() - 1);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [a, b] = edges[e];
        g.m_arcs[fill[a]++] = {b, weights[e]};
        g.m_arcs[fill[b]++] = {a, weights[e]};
    }
    // Deterministic neighbour order.
    for (std::size_t i = 0; i < nodes; ++i) {
        std::sort(g.m_arcs.begin() + static_cast<long>(g.m_offsets[i]),
                  g.m_arcs.begin() + static_cast<long>(g.m_offsets[i + 1]),
                  [](const Arc& x, const Arc& y) { return x.target < y.target; });
    }
    return g;
}

WeightedGraph WeightedGraph::from_mesh(const TriMesh& mesh)
{
    const auto edges = unique_edges(mesh);
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> weights;
    pairs.reserve(edges.size());
    weights.reserve(edges.size());
    for (const auto& e : edges) {
        pairs.emplace_back(e[0], e[1]);
        weights.push_back((mesh.vertices[e[0]] - mesh.vertices[e[1]]).norm());
    }
    return from_edges(mesh.vertices.size(), pairs, weights);
}

WeightedGraph WeightedGraph::dual_of(const TriMesh& mesh)
{
    std::unordered_map<std::uint64_t, int> owner;
    owner.reserve(mesh.faces.size() * 3);
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> weights;
    std::vector<Vec3> centroid(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        centroid[f] = (mesh.vertices[face[0]] + mesh.vertices[face[1]] + mesh.vertices[face[2]]) / 3.0;
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            int a = face[c];
            int b = face[(c + 1) % 3];
            if (a > b) std::swap(a, b);
            const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
            auto [it, inserted] = owner.emplace(key, static_cast<int>(f));
            if (!inserted) {
                pairs.emplace_back(it->second, static_cast<int>(f));
                weights.push_back((centroid[it->second] - centroid[f]).norm());
            }
        }
    }
    return from_edges(mesh.faces.size(), pairs, weights);
}

Dijkstra::Dijkstra(const WeightedGraph& graph)
    : m_graph(&graph)
    , m_dist(graph.num_nodes(), kInfinity)
    , m_stamp(graph.num_nodes(), 0)
    , m_done(graph.num_nodes(), 0)
{}

void Dijkstra::reset()
{
    ++m_epoch;
    if (m_epoch == 0) {
        std::fill(m_stamp.begin(), m_stamp.end(), 0u);
        std::fill(m_done.begin(), m_done.end(), 0u);
        m_epoch = 1;
    }
    m_settled.clear();
    m_heap.clear();
}

void Dijkstra::relax(int node, double d)
{
    if (m_stamp[node] != m_epoch) {
        m_stamp[node] = m_epoch;
        m_dist[node] = kInfinity;
    }
    if (d < m_dist[node]) {
        m_dist[node] = d;
        m_heap.emplace_back(d, node);
        std::push_heap(m_heap.begin(), m_heap.end(), [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
            return a.first > b.first || (a.first == b.first && a.second > b.second);
        });
    }
}

std::vector<double> graph_geodesics(const TriMesh& mesh, int source)
{
    require(source >= 0 && static_cast<std::size_t>(source) < mesh.vertices.size(), ErrorCode::InvalidArgument,
            "source vertex out of range");
    const auto graph = WeightedGraph::from_mesh(mesh);
    Dijkstra dijkstra(graph);
    dijkstra.run({{source, 0.0}});
    std::vector<double> out(mesh.vertices.size());
    for (std::size_t v = 0; v < out.size(); ++v) out[v] = dijkstra.distance(static_cast<int>(v));
    return out;
}

namespace {

std::vector<int> nearest_from_seeds(Dijkstra& dijkstra, std::size_t nodes, const std::vector<Seed>& seeds, int k)
{
    require(k >= 1 && static_cast<std::size_t>(k) <= nodes, ErrorCode::InvalidArgument,
            "k must be between 1 and the vertex count");
    // Settle past the k-th node until its distance is exceeded so that ties
    // at the cut-off are all seen before ordering by index.
    double cutoff = kInfinity;
    int count = 0;
    dijkstra.run(seeds, kInfinity, [&](int u) {
        ++count;
        if (count == k) cutoff = dijkstra.distance(u);
        return count > k && dijkstra.distance(u) > cutoff;
    });
    std::vector<int> settled = dijkstra.settled();
    require(settled.size() >= static_cast<std::size_t>(k), ErrorCode::InvalidArgument,
            "fewer than k vertices reachable");
    std::stable_sort(settled.begin(), settled.end(), [&](int a, int b) {
        const double da = dijkstra.distance(a), db = dijkstra.distance(b);
        return da < db || (da == db && a < b);
    });
    settled.resize(k);
    return settled;
}

} // namespace

std::vector<int> k_nearest(const TriMesh& mesh, const Vec3& point, int k)
{
    const int v0 = nearest_vertex(mesh, point);
    require(v0 >= 0, ErrorCode::InvalidArgument, "empty mesh");
    std::vector<Seed> seeds;
    std::vector<char> seen(mesh.vertices.size(), 0);
    for (const Face& f : mesh.faces) {
        if (f[0] != v0 && f[1] != v0 && f[2] != v0) continue;
        for (int v : f) {
            if (!seen[v]) {
                seen[v] = 1;
                seeds.push_back({v, (mesh.vertices[v] - point).norm()});
            }
        }
    }
    if (seeds.empty()) seeds.push_back({v0, (mesh.vertices[v0] - point).norm()});
    const auto graph = WeightedGraph::from_mesh(mesh);
    Dijkstra dijkstra(graph);
    return nearest_from_seeds(dijkstra, graph.num_nodes(), seeds, k);
}

std::vector<int> k_nearest_to_face(const TriMesh& mesh, const WeightedGraph& graph, int face, int k)
{
    Dijkstra dijkstra(graph);
    return k_nearest_to_face(mesh, dijkstra, face, k);
}

std::vector<int> k_nearest_to_face(const TriMesh& mesh, Dijkstra& dijkstra, int face, int k)
{
    require(face >= 0 && static_cast<std::size_t>(face) < mesh.faces.size(), ErrorCode::InvalidArgument,
            "face " + std::to_string(face) + " is outside the mesh");
    const Face& f = mesh.faces[face];
    const Vec3 c = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
    std::vector<Seed> seeds;
    for (int v : f) seeds.push_back({v, (mesh.vertices[v] - c).norm()});
    return nearest_from_seeds(dijkstra, mesh.vertices.size(), seeds, k);
}

} // namespace gpmi
