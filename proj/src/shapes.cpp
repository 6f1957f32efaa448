#include <gpmi/error.hpp>
#include <gpmi/shapes.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

namespace gpmi::shapes {

TriMesh grid(int nx, int ny, double width, double height)
{
    require(nx >= 2 && ny >= 2, ErrorCode::InvalidArgument, "grid needs at least 2 x 2 vertices");
    TriMesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            mesh.vertices.emplace_back(width * i / (nx - 1), height * j / (ny - 1), 0.0);
        }
    }
    auto id = [nx](int i, int j) { return j * nx + i; };
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            mesh.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            mesh.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return mesh;
}

TriMesh disc(double radius, double edge_length)
{
    require(radius > 0 && edge_length > 0 && edge_length < radius, ErrorCode::InvalidArgument,
            "disc needs 0 < edge length < radius");
    const int rings = std::max(1, static_cast<int>(std::lround(radius / edge_length)));
    TriMesh mesh;
    mesh.vertices.emplace_back(0.0, 0.0, 0.0);
    std::vector<int> prev{0};
    double prev_phase = 0.0;
    for (int r = 1; r <= rings; ++r) {
        const double rho = radius * r / rings;
        const int count = std::max(6, static_cast<int>(std::lround(2.0 * M_PI * rho / edge_length)));
        // Alternate the ring phase so neighbouring rings interleave.
        const double phase = (r % 2 == 0) ? M_PI / count : 0.0;
        std::vector<int> ring(count);
        for (int k = 0; k < count; ++k) {
            const double a = phase + 2.0 * M_PI * k / count;
            ring[k] = static_cast<int>(mesh.vertices.size());
            mesh.vertices.emplace_back(rho * std::cos(a), rho * std::sin(a), 0.0);
        }
        const int np = static_cast<int>(prev.size());
        if (np == 1) {
            for (int k = 0; k < count; ++k) mesh.faces.push_back({0, ring[k], ring[(k + 1) % count]});
        } else {
            // Zip the rings, advancing whichever has the smaller next angle.
            int i = 0, k = 0;
            while (i < np || k < count) {
                const double next_inner = prev_phase + 2.0 * M_PI * (i + 1) / np;
                const double next_outer = phase + 2.0 * M_PI * (k + 1) / count;
                if (i == np || (k < count && next_outer <= next_inner)) {
                    mesh.faces.push_back({prev[i % np], ring[k], ring[(k + 1) % count]});
                    ++k;
                } else {
                    mesh.faces.push_back({prev[i], ring[k % count], prev[(i + 1) % np]});
                    ++i;
                }
            }
        }
        prev = std::move(ring);
        prev_phase = phase;
    }
    return mesh;
}

namespace {

std::uint64_t key(int a, int b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

} // namespace

TriMesh icosphere(double radius, int levels)
{
    require(radius > 0 && levels >= 0, ErrorCode::InvalidArgument, "icosphere needs radius > 0, levels >= 0");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriMesh mesh;
    mesh.vertices = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                     {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                  {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (auto& v : mesh.vertices) v.normalize();
    for (int level = 0; level < levels; ++level) {
        std::unordered_map<std::uint64_t, int> mid;
        auto midpoint = [&](int a, int b) {
            auto [it, inserted] = mid.emplace(key(a, b), static_cast<int>(mesh.vertices.size()));
            if (inserted) mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
            return it->second;
        };
        std::vector<Face> faces;
        faces.reserve(mesh.faces.size() * 4);
        for (const Face& f : mesh.faces) {
            const int a = midpoint(f[0], f[1]);
            const int b = midpoint(f[1], f[2]);
            const int c = midpoint(f[2], f[0]);
            faces.push_back({f[0], a, c});
            faces.push_back({f[1], b, a});
            faces.push_back({f[2], c, b});
            faces.push_back({a, b, c});
        }
        mesh.faces = std::move(faces);
    }
    for (auto& v : mesh.vertices) v *= radius;
    return mesh;
}

TriMesh compact(const TriMesh& mesh)
{
    std::vector<int> remap(mesh.vertices.size(), -1);
    for (const Face& f : mesh.faces) {
        for (int v : f) remap[v] = 0;
    }
    TriMesh out;
    out.units = mesh.units;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (remap[v] == 0) {
            remap[v] = static_cast<int>(out.vertices.size());
            out.vertices.push_back(mesh.vertices[v]);
        }
    }
    out.faces.reserve(mesh.faces.size());
    for (const Face& f : mesh.faces) out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
    return out;
}

namespace {

/// Vertices with more than one outgoing boundary edge (fans meeting at a point).
std::vector<int> pinched_vertices(const TriMesh& mesh)
{
    std::unordered_map<std::uint64_t, char> directed;
    for (const Face& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            const int a = f[c], b = f[(c + 1) % 3];
            directed[(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b)] = 1;
        }
    }
    std::vector<int> outgoing(mesh.vertices.size(), 0);
    for (const Face& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            const int a = f[c], b = f[(c + 1) % 3];
            if (!directed.count((static_cast<std::uint64_t>(b) << 32) | static_cast<std::uint32_t>(a))) ++outgoing[a];
        }
    }
    std::vector<int> out;
    for (std::size_t v = 0; v < outgoing.size(); ++v) {
        if (outgoing[v] > 1) out.push_back(static_cast<int>(v));
    }
    return out;
}

} // namespace

TriMesh sphere_with_holes(double radius, int levels, const std::vector<Hole>& holes)
{
    TriMesh mesh = icosphere(radius, levels);
    std::vector<Face> kept;
    for (const Face& f : mesh.faces) {
        const Vec3 c = (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]).normalized();
        bool inside = false;
        for (const auto& h : holes) {
            if (std::acos(std::clamp(c.dot(h.direction.normalized()), -1.0, 1.0)) < h.angle) inside = true;
        }
        if (!inside) kept.push_back(f);
    }
    mesh.faces = std::move(kept);
    for (;;) {
        const auto pinched = pinched_vertices(mesh);
        if (pinched.empty()) break;
        std::vector<char> drop(mesh.vertices.size(), 0);
        for (int v : pinched) drop[v] = 1;
        std::vector<Face> faces;
        for (const Face& f : mesh.faces) {
            if (!drop[f[0]] && !drop[f[1]] && !drop[f[2]]) faces.push_back(f);
        }
        mesh.faces = std::move(faces);
    }
    return compact(mesh);
}

TriMesh cylinder(double radius, double height, int around, int along)
{
    require(around >= 3 && along >= 2, ErrorCode::InvalidArgument, "cylinder needs around >= 3, along >= 2");
    TriMesh mesh;
    for (int j = 0; j < along; ++j) {
        const double z = height * j / (along - 1);
        const double shift = (j % 2) * M_PI / around;
        for (int i = 0; i < around; ++i) {
            const double a = 2.0 * M_PI * i / around + shift;
            mesh.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
        }
    }
    auto id = [around](int i, int j) { return j * around + ((i % around) + around) % around; };
    for (int j = 0; j + 1 < along; ++j) {
        for (int i = 0; i < around; ++i) {
            if (j % 2 == 0) {
                mesh.faces.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                mesh.faces.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                mesh.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                mesh.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    }
    return mesh;
}

TriMesh random_patch(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> size(4, 14);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int nx = size(rng);
    const int ny = size(rng);
    const double h = 1.0 + 0.5 * (unit(rng) + 1.0);
    TriMesh mesh = grid(nx, ny, h * (nx - 1), h * (ny - 1));
    const double ax = 0.3 * unit(rng), ay = 0.3 * unit(rng), bump = 2.0 * unit(rng);
    for (auto& v : mesh.vertices) {
        v.x() += 0.25 * h * unit(rng);
        v.y() += 0.25 * h * unit(rng);
        v.z() = bump * std::sin(ax * v.x()) * std::cos(ay * v.y());
    }
    // Flip a random subset of cell diagonals for irregular connectivity.
    for (std::size_t f = 0; f + 1 < mesh.faces.size(); f += 2) {
        if (unit(rng) < 0.0) continue;
        const Face a = mesh.faces[f];
        const Face b = mesh.faces[f + 1];
        // a = (p, q, r), b = (p, r, s) -> (p, q, s), (q, r, s)
        mesh.faces[f] = {a[0], a[1], b[2]};
        mesh.faces[f + 1] = {a[1], a[2], b[2]};
    }
    return mesh;
}

} // namespace gpmi::shapes
