#include <gpmi/error.hpp>
#include <gpmi/mesh.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace gpmi {

namespace {

std::uint64_t edge_key(int a, int b)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

double face_area_of(const TriMesh& mesh, const Face& f)
{
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    return 0.5 * (b - a).cross(c - a).norm();
}

std::string edge_name(int a, int b)
{
    std::ostringstream os;
    os << "(" << a << "," << b << ")";
    return os.str();
}

} // namespace

void validate(const TriMesh& mesh)
{
    const auto nv = static_cast<long long>(mesh.vertices.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            if (face[c] < 0 || face[c] >= nv) {
                fail(ErrorCode::Mesh, "face " + std::to_string(f) + ": vertex index out of range (" +
                                          std::to_string(face[c]) + ")");
            }
        }
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
            fail(ErrorCode::Mesh, "face " + std::to_string(f) + ": degenerate (repeated vertex)");
        }
        if (!(face_area_of(mesh, face) > kMinFaceArea)) {
            fail(ErrorCode::Mesh, "face " + std::to_string(f) + ": zero area");
        }
    }
    for (const auto& v : mesh.vertices) {
        if (!v.allFinite()) fail(ErrorCode::Mesh, "non-finite vertex coordinate");
    }

    // Each directed edge may occur once; an interior edge must appear in
    // exactly two faces with opposite directions.
    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(mesh.faces.size() * 3);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            const int a = face[c];
            const int b = face[(c + 1) % 3];
            auto [it, inserted] = directed.emplace(edge_key(a, b), static_cast<int>(f));
            if (!inserted) {
                fail(ErrorCode::Mesh, "face " + std::to_string(f) + ": edge " + edge_name(a, b) +
                                          " repeated with the same direction (non-orientable or non-manifold)");
            }
        }
    }
}

std::vector<std::array<int, 2>> unique_edges(const TriMesh& mesh)
{
    std::vector<std::array<int, 2>> edges;
    edges.reserve(mesh.faces.size() * 3);
    for (const Face& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            int a = f[c];
            int b = f[(c + 1) % 3];
            if (a > b) std::swap(a, b);
            edges.push_back({a, b});
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

std::string mesh_hash(const TriMesh& mesh)
{
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    const std::uint64_t nv = mesh.vertices.size();
    const std::uint64_t nf = mesh.faces.size();
    feed(&nv, sizeof nv);
    feed(&nf, sizeof nf);
    for (const auto& v : mesh.vertices) {
        for (int k = 0; k < 3; ++k) {
            const double x = v[k];
            feed(&x, sizeof x);
        }
    }
    for (const auto& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            const std::int32_t i = f[k];
            feed(&i, sizeof i);
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Vec3 surface_centroid(const TriMesh& mesh)
{
    Vec3 sum = Vec3::Zero();
    double area = 0.0;
    for (const Face& f : mesh.faces) {
        const double a = face_area_of(mesh, f);
        sum += a * (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
        area += a;
    }
    return area > 0 ? Vec3(sum / area) : Vec3::Zero();
}

double total_area(const TriMesh& mesh)
{
    double area = 0.0;
    for (const Face& f : mesh.faces) area += face_area_of(mesh, f);
    return area;
}

double mean_edge_length(const TriMesh& mesh)
{
    const auto edges = unique_edges(mesh);
    if (edges.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& e : edges) sum += (mesh.vertices[e[0]] - mesh.vertices[e[1]]).norm();
    return sum / static_cast<double>(edges.size());
}

double bounding_diameter(const TriMesh& mesh)
{
    if (mesh.vertices.empty()) return 0.0;
    Vec3 lo = mesh.vertices.front();
    Vec3 hi = lo;
    for (const auto& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return (hi - lo).norm();
}

FaceGeometry face_geometry(const TriMesh& mesh)
{
    FaceGeometry g;
    const std::size_t nf = mesh.faces.size();
    g.face_area.resize(nf);
    g.normal.resize(nf);
    g.centroid.resize(nf);
    g.cot.resize(nf);
    g.vertex_area.assign(mesh.vertices.size(), 0.0);
    g.one_ring.assign(mesh.vertices.size(), {});

    for (std::size_t f = 0; f < nf; ++f) {
        const Face& face = mesh.faces[f];
        const Vec3& p0 = mesh.vertices[face[0]];
        const Vec3& p1 = mesh.vertices[face[1]];
        const Vec3& p2 = mesh.vertices[face[2]];
        const Vec3 n = (p1 - p0).cross(p2 - p0);
        const double twice_area = n.norm();
        g.face_area[f] = 0.5 * twice_area;
        g.normal[f] = n / twice_area;
        g.centroid[f] = (p0 + p1 + p2) / 3.0;
        for (int c = 0; c < 3; ++c) {
            const Vec3& o = mesh.vertices[face[c]];
            const Vec3 u = mesh.vertices[face[(c + 1) % 3]] - o;
            const Vec3 v = mesh.vertices[face[(c + 2) % 3]] - o;
            g.cot[f][c] = u.dot(v) / twice_area;
        }
        for (int c = 0; c < 3; ++c) {
            g.vertex_area[face[c]] += g.face_area[f] / 3.0;
            g.one_ring[face[c]].push_back(face[(c + 1) % 3]);
            g.one_ring[face[c]].push_back(face[(c + 2) % 3]);
        }
    }
    for (auto& ring : g.one_ring) {
        std::sort(ring.begin(), ring.end());
        ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    }
    return g;
}

namespace {

/// Least-squares plane normal through the points, oriented so that it points
/// from `reference` towards the points. Falls back to `tiebreak` for the sign
/// when the points are level with the reference.
Vec3 fitted_normal(const TriMesh& mesh, const std::vector<int>& loop, const Vec3& reference,
                   const Vec3& tiebreak)
{
    Vec3 c = Vec3::Zero();
    for (int v : loop) c += mesh.vertices[v];
    c /= static_cast<double>(loop.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    double spread = 0.0;
    for (int v : loop) {
        const Vec3 d = mesh.vertices[v] - c;
        cov += d * d.transpose();
        spread = std::max(spread, d.norm());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Vec3 n = eig.eigenvectors().col(0).normalized();
    const double side = n.dot(c - reference);
    if (std::abs(side) > 1e-6 * std::max(spread, 1e-300)) {
        if (side < 0) n = -n;
    } else if (n.dot(tiebreak) < 0) {
        n = -n;
    }
    return n;
}

struct BoundaryWalk
{
    std::vector<std::vector<int>> loops;
};

BoundaryWalk walk_boundary(const TriMesh& mesh)
{
    std::unordered_map<std::uint64_t, int> directed;
    directed.reserve(mesh.faces.size() * 3);
    for (const Face& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) directed[edge_key(f[c], f[(c + 1) % 3])]++;
    }
    // next[i] = j for each boundary edge i->j (no face contains j->i).
    std::map<int, std::vector<int>> next;
    for (const Face& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            const int a = f[c];
            const int b = f[(c + 1) % 3];
            if (!directed.count(edge_key(b, a))) next[a].push_back(b);
        }
    }
    for (const auto& [v, outs] : next) {
        if (outs.size() != 1) {
            fail(ErrorCode::Mesh, "non-manifold boundary at vertex " + std::to_string(v) + " (edge " +
                                      edge_name(v, outs[0]) + " starts one of " + std::to_string(outs.size()) +
                                      " boundary chains)");
        }
    }

    BoundaryWalk walk;
    std::map<int, bool> used;
    for (const auto& [start, outs] : next) {
        if (used[start]) continue;
        std::vector<int> loop;
        int v = start;
        while (!used[v]) {
            used[v] = true;
            loop.push_back(v);
            auto it = next.find(v);
            if (it == next.end()) {
                fail(ErrorCode::Mesh, "open boundary chain ending at edge " +
                                          edge_name(loop.size() > 1 ? loop[loop.size() - 2] : v, v));
            }
            v = it->second[0];
        }
        if (v != start) {
            fail(ErrorCode::Mesh, "boundary chain does not close at edge " + edge_name(loop.back(), v));
        }
        walk.loops.push_back(std::move(loop));
    }
    return walk;
}

Vec3 adjacent_normal_sum(const TriMesh& mesh, const std::vector<int>& loop)
{
    std::vector<char> on_loop(mesh.vertices.size(), 0);
    for (int v : loop) on_loop[v] = 1;
    Vec3 sum = Vec3::Zero();
    for (const Face& f : mesh.faces) {
        if (on_loop[f[0]] || on_loop[f[1]] || on_loop[f[2]]) {
            const Vec3& p0 = mesh.vertices[f[0]];
            sum += (mesh.vertices[f[1]] - p0).cross(mesh.vertices[f[2]] - p0);
        }
    }
    return sum;
}

} // namespace

std::vector<BoundaryLoop> boundary_loops(const TriMesh& mesh)
{
    auto walk = walk_boundary(mesh);
    const Vec3 centre = surface_centroid(mesh);
    std::vector<BoundaryLoop> loops;
    for (auto& vs : walk.loops) {
        BoundaryLoop loop;
        loop.normal = fitted_normal(mesh, vs, centre, adjacent_normal_sum(mesh, vs));
        loop.vertices = std::move(vs);
        loops.push_back(std::move(loop));
    }
    return loops;
}

ExtendedMesh extend_boundaries(const TriMesh& mesh, int layers)
{
    require(layers >= 0, ErrorCode::InvalidArgument, "extension layers must be >= 0");
    ExtendedMesh out;
    out.mesh = mesh;
    out.original_vertices = mesh.vertices.size();
    out.original_faces = mesh.faces.size();
    if (layers == 0) return out;

    const Vec3 centre = surface_centroid(mesh);
    const double tan60_half = std::tan(M_PI / 3.0) / 2.0;
    auto loops = walk_boundary(mesh).loops;
    for (auto& loop : loops) {
        if (loop.size() < 3) {
            fail(ErrorCode::Mesh, "boundary loop with " + std::to_string(loop.size()) + " vertices cannot be extended");
        }
        const Vec3 tiebreak = adjacent_normal_sum(mesh, loop);
        std::vector<int> current = loop;
        for (int layer = 0; layer < layers; ++layer) {
            TriMesh& m = out.mesh;
            const Vec3 n = fitted_normal(m, current, centre, tiebreak);
            const std::size_t b = current.size();
            std::vector<int> apex(b);
            // Saw teeth: one apex over each boundary edge i->j, face (j, i, apex).
            for (std::size_t a = 0; a < b; ++a) {
                const int i = current[a];
                const int j = current[(a + 1) % b];
                const Vec3 xi = m.vertices[i];
                const Vec3 xj = m.vertices[j];
                const Vec3 xn = 0.5 * (xi + xj) + n * ((xj - xi).norm() * tan60_half);
                apex[a] = static_cast<int>(m.vertices.size());
                m.vertices.push_back(xn);
                m.faces.push_back({j, i, apex[a]});
            }
            // Fill the gaps between neighbouring teeth at their shared vertex.
            for (std::size_t a = 0; a < b; ++a) {
                const int j = current[(a + 1) % b];
                m.faces.push_back({j, apex[a], apex[(a + 1) % b]});
            }
            current = std::move(apex);
        }
    }
    return out;
}

int lattice_node(int a, int b)
{
    // Row-major over b, then a: b = 0 holds 4 nodes, b = 1 holds 3, ...
    static constexpr int row_start[4] = {0, 4, 7, 9};
    return row_start[b] + a;
}

SubdividedMesh subdivide9(const TriMesh& mesh)
{
    SubdividedMesh sub;
    const auto edges = unique_edges(mesh);
    const std::size_t nv = mesh.vertices.size();
    const std::size_t ne = edges.size();
    const std::size_t nf = mesh.faces.size();

    TriMesh& fine = sub.fine;
    fine.units = mesh.units;
    fine.vertices.reserve(nv + 2 * ne + nf);
    fine.vertices = mesh.vertices;
    sub.vertex_map.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) sub.vertex_map[v] = static_cast<int>(v);

    // Two interior points per edge; slot 0 is one third from the lower index.
    std::unordered_map<std::uint64_t, int> edge_index;
    edge_index.reserve(ne * 2);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto [a, b] = edges[e];
        edge_index.emplace(edge_key(a, b), static_cast<int>(e));
        const Vec3& pa = mesh.vertices[a];
        const Vec3& pb = mesh.vertices[b];
        fine.vertices.push_back((2.0 * pa + pb) / 3.0);
        fine.vertices.push_back((pa + 2.0 * pb) / 3.0);
    }
    // Fine vertex one third of the way from `from` to `to`.
    auto third = [&](int from, int to) {
        const int lo = std::min(from, to);
        const int hi = std::max(from, to);
        const int e = edge_index.at(edge_key(lo, hi));
        const int base = static_cast<int>(nv) + 2 * e;
        return from == lo ? base : base + 1;
    };

    sub.centroid_map.resize(nf);
    sub.face_nodes.resize(nf);
    fine.faces.reserve(9 * nf);
    for (std::size_t f = 0; f < nf; ++f) {
        const Face& face = mesh.faces[f];
        const int v0 = face[0], v1 = face[1], v2 = face[2];
        const int c = static_cast<int>(fine.vertices.size());
        fine.vertices.push_back((mesh.vertices[v0] + mesh.vertices[v1] + mesh.vertices[v2]) / 3.0);
        sub.centroid_map[f] = c;

        auto& nodes = sub.face_nodes[f];
        nodes[lattice_node(0, 0)] = v0;
        nodes[lattice_node(3, 0)] = v1;
        nodes[lattice_node(0, 3)] = v2;
        nodes[lattice_node(1, 0)] = third(v0, v1);
        nodes[lattice_node(2, 0)] = third(v1, v0);
        nodes[lattice_node(0, 1)] = third(v0, v2);
        nodes[lattice_node(0, 2)] = third(v2, v0);
        nodes[lattice_node(2, 1)] = third(v1, v2);
        nodes[lattice_node(1, 2)] = third(v2, v1);
        nodes[lattice_node(1, 1)] = c;

        auto node = [&](int a, int b) { return nodes[lattice_node(a, b)]; };
        for (int b = 0; b < 3; ++b) {
            for (int a = 0; a + b < 3; ++a) {
                fine.faces.push_back({node(a, b), node(a + 1, b), node(a, b + 1)});
                if (a + b < 2) fine.faces.push_back({node(a + 1, b), node(a + 1, b + 1), node(a, b + 1)});
            }
        }
    }
    return sub;
}

int nearest_vertex(const TriMesh& mesh, const Vec3& point)
{
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        const double d = (mesh.vertices[v] - point).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(v);
        }
    }
    return best;
}

} // namespace gpmi
