#include <gpmi/error.hpp>
#include <gpmi/fast_marching.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace gpmi {

namespace {

using Eigen::Vector2d;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxUnfold = 10;

double cross2(const Vector2d& a, const Vector2d& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

std::uint64_t directed_key(int a, int b)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

/// Point at distances rp from p and rq from q, on the opposite side of line pq
/// from `away`.
bool place(const Vector2d& p, const Vector2d& q, double rp, double rq, const Vector2d& away, Vector2d& out)
{
    const Vector2d e = q - p;
    const double len = e.norm();
    if (!(len > 0)) return false;
    const Vector2d u = e / len;
    const Vector2d n(-u.y(), u.x());
    const double x = (rp * rp - rq * rq + len * len) / (2.0 * len);
    const double h2 = rp * rp - x * x;
    if (h2 < 0) return false;
    const double h = std::sqrt(h2);
    const double side = n.dot(away - p);
    out = p + x * u + (side > 0 ? -h : h) * n;
    return true;
}

/// Arrival time at the origin of a plane wave through A and B with the given
/// slowness, or +inf when the wave does not reach the origin from inside the
/// triangle.
double plane_wave(const Vector2d& pa, const Vector2d& pb, double ta, double tb, double slowness)
{
    Eigen::Matrix2d rows;
    rows.row(0) = pa;
    rows.row(1) = pb;
    if (!(std::abs(rows.determinant()) > 0)) return kInf;
    const Eigen::Matrix2d inv = rows.inverse();
    const Vector2d p = inv * Vector2d(1.0, 1.0);
    const Vector2d q = inv * Vector2d(ta, tb);
    const double qa = p.squaredNorm();
    const double qb = -2.0 * p.dot(q);
    const double qc = q.squaredNorm() - slowness * slowness;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0) return kInf;
    const double t = (-qb + std::sqrt(disc)) / (2.0 * qa);
    if (t < std::max(ta, tb)) return kInf;
    // The characteristic must arrive from inside the triangle: -grad T is a
    // non-negative combination of pa and pb.
    const Vector2d g = q - t * p;
    Eigen::Matrix2d cols;
    cols.col(0) = pa;
    cols.col(1) = pb;
    const Vector2d w = cols.inverse() * (-g);
    const double eps = -1e-12 * (std::abs(w.x()) + std::abs(w.y()));
    if (w.x() < eps || w.y() < eps) return kInf;
    return t;
}

} // namespace

MarchingStencils::MarchingStencils(const TriMesh& mesh)
    : m_stencils(mesh.num_vertices())
    , m_edges(mesh.num_vertices())
    , m_dependents(mesh.num_vertices())
{
    std::unordered_map<std::uint64_t, int> face_of;
    face_of.reserve(mesh.num_faces() * 3);
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        const Face& face = mesh.faces[f];
        for (int c = 0; c < 3; ++c) face_of[directed_key(face[c], face[(c + 1) % 3])] = static_cast<int>(f);
    }
    auto add_edge = [&](int from, int to, double length) {
        for (auto& e : m_edges[from]) {
            if (e.to == to) {
                e.length = std::min(e.length, length);
                return;
            }
        }
        m_edges[from].push_back({to, length});
    };
    auto dist = [&](int a, int b) { return (mesh.vertices[a] - mesh.vertices[b]).norm(); };

    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        const Face& face = mesh.faces[f];
        for (int corner = 0; corner < 3; ++corner) {
            const int c = face[corner];
            const int a = face[(corner + 1) % 3];
            const int b = face[(corner + 2) % 3];
            add_edge(c, a, dist(c, a));
            add_edge(c, b, dist(c, b));
            const Vec3 ua = mesh.vertices[a] - mesh.vertices[c];
            const Vec3 ub = mesh.vertices[b] - mesh.vertices[c];
            const double la = ua.norm();
            const double lb = ub.norm();
            const double cos_t = std::clamp(ua.dot(ub) / (la * lb), -1.0, 1.0);
            const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
            const Vector2d pa(la, 0.0);
            const Vector2d pb(lb * cos_t, lb * sin_t);
            if (cos_t >= 0.0) {
                m_stencils[c].push_back({a, b, pa, pb});
                continue;
            }
            // Obtuse corner: unfold across the opposite edge until a vertex
            // lands strictly inside the corner's angle.
            int p = a, q = b;
            Vector2d pp = pa, pq = pb, prev = Vector2d::Zero();
            bool split = false;
            for (int step = 0; step < kMaxUnfold; ++step) {
                auto it = face_of.find(directed_key(q, p));
                if (it == face_of.end()) break;
                const Face& g = mesh.faces[it->second];
                int r = -1;
                for (int k = 0; k < 3; ++k) {
                    if (g[k] != p && g[k] != q) r = g[k];
                }
                Vector2d pr;
                if (r < 0 || r == c || !place(pp, pq, dist(p, r), dist(q, r), prev, pr)) break;
                if (cross2(pa, pr) > 0 && cross2(pr, pb) > 0) {
                    m_stencils[c].push_back({a, r, pa, pr});
                    m_stencils[c].push_back({r, b, pr, pb});
                    add_edge(c, r, pr.norm());
                    split = true;
                    break;
                }
                if (cross2(pa, pr) <= 0) {
                    prev = pp;
                    p = r;
                    pp = pr;
                } else {
                    prev = pq;
                    q = r;
                    pq = pr;
                }
            }
            if (!split) m_stencils[c].push_back({a, b, pa, pb});
        }
    }

    for (std::size_t c = 0; c < m_stencils.size(); ++c) {
        for (const auto& s : m_stencils[c]) {
            m_dependents[s.a].push_back(static_cast<int>(c));
            m_dependents[s.b].push_back(static_cast<int>(c));
        }
        for (const auto& e : m_edges[c]) m_dependents[e.to].push_back(static_cast<int>(c));
    }
    for (auto& d : m_dependents) {
        std::sort(d.begin(), d.end());
        d.erase(std::unique(d.begin(), d.end()), d.end());
    }
}

FastMarcher::FastMarcher(const MarchingStencils& stencils)
    : m_st(&stencils)
    , m_value(stencils.num_vertices(), kInf)
    , m_seen(stencils.num_vertices(), 0)
    , m_done(stencils.num_vertices(), 0)
{}

double FastMarcher::value(int v) const
{
    return m_seen[v] == m_epoch ? m_value[v] : kInf;
}

double FastMarcher::update(int c, MarchingMode mode, double slowness) const
{
    double best = kInf;
    for (const auto& e : m_st->edges(c)) {
        if (accepted(e.to)) best = std::min(best, m_value[e.to] + e.length * slowness);
    }
    for (const auto& s : m_st->stencils(c)) {
        if (!accepted(s.a) || !accepted(s.b)) continue;
        const double ta = m_value[s.a];
        const double tb = m_value[s.b];
        // Point-source update: place a virtual source consistent with the
        // arrival times at A and B and measure straight to the origin.
        Vector2d src;
        if (place(s.pa, s.pb, ta / slowness, tb / slowness, Vector2d::Zero(), src) && cross2(src, s.pa) <= 0 &&
            cross2(src, s.pb) >= 0) {
            best = std::min(best, std::max(src.norm() * slowness, std::max(ta, tb)));
            continue;
        }
        if (mode == MarchingMode::Distance) continue;
        best = std::min(best, plane_wave(s.pa, s.pb, ta, tb, slowness));
    }
    return best;
}

void FastMarcher::run(const std::vector<Source>& sources, MarchingMode mode, const std::vector<double>* slowness,
                      const std::function<bool(int)>& stop)
{
    require(mode == MarchingMode::Distance || (slowness && slowness->size() == m_st->num_vertices()),
            ErrorCode::InvalidArgument, "eikonal marching needs one slowness value per vertex");
    ++m_epoch;
    if (m_epoch == 0) {
        std::fill(m_seen.begin(), m_seen.end(), 0);
        std::fill(m_done.begin(), m_done.end(), 0);
        m_epoch = 1;
    }
    m_order.clear();
    m_heap.clear();
    auto cmp = [](const std::pair<double, int>& x, const std::pair<double, int>& y) {
        return x.first > y.first || (x.first == y.first && x.second > y.second);
    };
    auto offer = [&](int v, double t) {
        if (m_seen[v] != m_epoch || t < m_value[v]) {
            m_seen[v] = m_epoch;
            m_value[v] = t;
            m_heap.emplace_back(t, v);
            std::push_heap(m_heap.begin(), m_heap.end(), cmp);
        }
    };
    for (const auto& s : sources) {
        require(s.vertex >= 0 && static_cast<std::size_t>(s.vertex) < m_st->num_vertices(),
                ErrorCode::InvalidArgument, "source vertex " + std::to_string(s.vertex) + " is outside the mesh");
        offer(s.vertex, s.value);
    }
    while (!m_heap.empty()) {
        std::pop_heap(m_heap.begin(), m_heap.end(), cmp);
        const auto [t, v] = m_heap.back();
        m_heap.pop_back();
        if (accepted(v) || t > m_value[v]) continue;
        m_done[v] = m_epoch;
        m_order.push_back(v);
        if (stop && stop(v)) break;
        for (int c : m_st->dependents(v)) {
            if (accepted(c)) continue;
            const double f = mode == MarchingMode::Eikonal ? (*slowness)[c] : 1.0;
            const double tc = update(c, mode, f);
            if (tc < kInf) offer(c, tc);
        }
    }
}

std::vector<double> eikonal_times(const TriMesh& mesh, const std::vector<double>& speed,
                                  const std::vector<int>& sources, double exact_radius, std::vector<int>* order)
{
    require(!sources.empty(), ErrorCode::InvalidArgument, "eikonal solve needs at least one source");
    require(speed.size() == mesh.num_vertices(), ErrorCode::InvalidArgument, "speed must have one value per vertex");
    std::vector<double> slowness(speed.size());
    for (std::size_t v = 0; v < speed.size(); ++v) {
        require(speed[v] > 0 && std::isfinite(speed[v]), ErrorCode::InvalidArgument,
                "speed must be positive and finite (vertex " + std::to_string(v) + ")");
        slowness[v] = 1.0 / speed[v];
    }
    for (int s : sources) {
        require(s >= 0 && static_cast<std::size_t>(s) < mesh.num_vertices(), ErrorCode::InvalidArgument,
                "source vertex " + std::to_string(s) + " is outside the mesh");
    }
    std::vector<int> unique_sources = sources;
    std::sort(unique_sources.begin(), unique_sources.end());
    unique_sources.erase(std::unique(unique_sources.begin(), unique_sources.end()), unique_sources.end());

    const MarchingStencils stencils(mesh);
    FastMarcher marcher(stencils);
    // First arrival from several sources is the minimum over single-source
    // arrivals; marching them together would mix fronts in shared triangles.
    std::vector<double> best(mesh.num_vertices(), kInf);
    for (int s : unique_sources) {
        std::vector<FastMarcher::Source> seeds{{s, 0.0}};
        if (exact_radius > 0) {
            seeds.clear();
            marcher.run({{s, 0.0}}, MarchingMode::Distance, nullptr,
                        [&](int v) { return marcher.value(v) > exact_radius; });
            for (int v : marcher.order()) {
                const double d = marcher.value(v);
                if (d <= exact_radius) seeds.push_back({v, d * slowness[s]});
            }
        }
        marcher.run(seeds, MarchingMode::Eikonal, &slowness);
        for (std::size_t v = 0; v < best.size(); ++v) best[v] = std::min(best[v], marcher.value(static_cast<int>(v)));
    }

    std::vector<double> t(mesh.num_vertices());
    std::vector<int> unreached;
    for (std::size_t v = 0; v < t.size(); ++v) {
        t[v] = best[v];
        if (!std::isfinite(t[v])) unreached.push_back(static_cast<int>(v));
    }
    if (!unreached.empty()) {
        std::string list;
        for (std::size_t i = 0; i < std::min<std::size_t>(unreached.size(), 10); ++i) {
            list += (i ? "," : "") + std::to_string(unreached[i]);
        }
        if (unreached.size() > 10) list += ",...";
        fail(ErrorCode::Mesh, std::to_string(unreached.size()) + " vertices unreachable from the sources: " + list);
    }
    if (order) {
        order->resize(t.size());
        std::iota(order->begin(), order->end(), 0);
        std::sort(order->begin(), order->end(), [&](int a, int b) { return t[a] < t[b] || (t[a] == t[b] && a < b); });
    }
    return t;
}

std::vector<double> surface_distances(const TriMesh& mesh, const std::vector<int>& sources)
{
    const MarchingStencils stencils(mesh);
    FastMarcher marcher(stencils);
    std::vector<FastMarcher::Source> seeds;
    for (int s : sources) seeds.push_back({s, 0.0});
    marcher.run(seeds, MarchingMode::Distance);
    std::vector<double> d(mesh.num_vertices());
    for (std::size_t v = 0; v < d.size(); ++v) d[v] = marcher.value(static_cast<int>(v));
    return d;
}

} // namespace gpmi
