#include "support.hpp"

#include <gpmi/error.hpp>
#include <gpmi/graph.hpp>
#include <gpmi/io.hpp>
#include <gpmi/mesh.hpp>
#include <gpmi/mesh_io.hpp>
#include <gpmi/shapes.hpp>

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

using namespace gpmi;

namespace {

TriMesh single_triangle(const Vec3& a, const Vec3& b, const Vec3& c)
{
    TriMesh m;
    m.vertices = {a, b, c};
    m.faces = {{0, 1, 2}};
    return m;
}

TriMesh two_triangles()
{
    TriMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
    m.faces = {{0, 1, 2}, {0, 2, 3}};
    return m;
}

double plane_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 n = (b - a).cross(c - a).normalized();
    return std::abs(n.dot(p - a));
}

std::string error_message(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("single-triangle OFF loads with V=3, F=1, E=3")
{
    const TriMesh m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
    CHECK(m.num_vertices() == 3);
    CHECK(m.num_faces() == 1);
    CHECK(unique_edges(m).size() == 3);
}

TEST_CASE("face index equal to V is rejected as out of range")
{
    const std::string msg = error_message([] { parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n"); });
    CHECK(msg.find("out of range") != std::string::npos);
    CHECK(msg.find("face 0") != std::string::npos);
}

TEST_CASE("malformed OFF header is a parse error")
{
    CHECK_GPMI_ERROR(parse_off("OFF\n3 x 0\n"), ErrorCode::Parse);
    CHECK_GPMI_ERROR(parse_off("PLY\n"), ErrorCode::Parse);
    CHECK_GPMI_ERROR(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n"), ErrorCode::Parse);
}

TEST_CASE("validation rejects degenerate and inconsistently oriented faces")
{
    TriMesh repeated = two_triangles();
    repeated.faces[1] = {0, 2, 2};
    CHECK_GPMI_ERROR(validate(repeated), ErrorCode::Mesh);

    TriMesh flat = single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0));
    CHECK_GPMI_ERROR(validate(flat), ErrorCode::Mesh);

    TriMesh flipped = two_triangles();
    flipped.faces[1] = {0, 3, 2};
    const std::string msg = error_message([&] { validate(flipped); });
    CHECK(msg.find("edge") != std::string::npos);

    TriMesh fan = two_triangles();
    fan.vertices.push_back(Vec3(0.5, 0.5, 1.0));
    fan.faces.push_back({2, 0, 4});
    CHECK_GPMI_ERROR(validate(fan), ErrorCode::Mesh);
}

TEST_CASE("every interior edge of a valid mesh is shared by two opposite half-edges")
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const TriMesh m = shapes::random_patch(seed);
        REQUIRE_NOTHROW(validate(m));
        std::map<std::pair<int, int>, int> directed;
        for (const Face& f : m.faces) {
            for (int k = 0; k < 3; ++k) ++directed[{f[k], f[(k + 1) % 3]}];
        }
        for (const auto& [e, count] : directed) {
            CHECK(count == 1);
        }
    }
}

TEST_CASE("65x65 unit-square grid has 4225 vertices and 8192 faces")
{
    const TriMesh m = shapes::grid(65, 65, 1.0, 1.0);
    CHECK(m.num_vertices() == 4225);
    CHECK(m.num_faces() == 2 * 64 * 64);
}

TEST_CASE("face geometry of right isoceles and equilateral triangles")
{
    const FaceGeometry right = face_geometry(single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)));
    CHECK(right.face_area[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(right.cot[0][0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(right.cot[0][1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(right.cot[0][2] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(right.normal[0].isApprox(Vec3(0, 0, 1)));

    const FaceGeometry eq =
        face_geometry(single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, std::sqrt(3.0) / 2, 0)));
    for (double c : eq.cot[0]) CHECK(c == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("lumped vertex areas partition the unit square")
{
    const FaceGeometry g = face_geometry(shapes::grid(17, 17, 1.0, 1.0));
    double sum = 0.0;
    for (double a : g.vertex_area) sum += a;
    CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("boundary loops of sphere, disc and cylinder")
{
    CHECK(boundary_loops(shapes::icosphere(10.0, 2)).empty());

    const double radius = 20.0;
    const TriMesh disc = shapes::disc(radius, 2.0);
    const auto loops = boundary_loops(disc);
    REQUIRE(loops.size() == 1);
    std::set<int> rim;
    for (std::size_t v = 0; v < disc.num_vertices(); ++v) {
        if (disc.vertices[v].norm() > radius - 1e-9) rim.insert(static_cast<int>(v));
    }
    CHECK(std::set<int>(loops[0].vertices.begin(), loops[0].vertices.end()) == rim);

    const TriMesh tube = shapes::cylinder(5.0, 10.0, 16, 6);
    const auto rims = boundary_loops(tube);
    REQUIRE(rims.size() == 2);
    std::set<int> a(rims[0].vertices.begin(), rims[0].vertices.end());
    for (int v : rims[1].vertices) CHECK(a.count(v) == 0);
    // Rim normals point away from the surface centroid.
    const Vec3 c = surface_centroid(tube);
    for (const auto& loop : rims) {
        Vec3 mid = Vec3::Zero();
        for (int v : loop.vertices) mid += tube.vertices[v];
        mid /= static_cast<double>(loop.vertices.size());
        CHECK(loop.normal.dot(mid - c) > 0.0);
    }
}

TEST_CASE("boundary loops follow the face orientation")
{
    const TriMesh m = shapes::random_patch(3);
    std::set<std::pair<int, int>> half_edges;
    for (const Face& f : m.faces) {
        for (int k = 0; k < 3; ++k) half_edges.insert({f[k], f[(k + 1) % 3]});
    }
    for (const auto& loop : boundary_loops(m)) {
        const auto& v = loop.vertices;
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(half_edges.count({v[i], v[(i + 1) % v.size()]}) == 1);
    }
}

TEST_CASE("extension adds B vertices and 2B faces per loop per layer")
{
    const TriMesh ring = shapes::disc(3.0, 1.0);
    const auto loops = boundary_loops(ring);
    REQUIRE(loops.size() == 1);
    const std::size_t b = loops[0].vertices.size();

    const ExtendedMesh one = extend_boundaries(ring, 1);
    CHECK(one.mesh.num_vertices() == ring.num_vertices() + b);
    CHECK(one.mesh.num_faces() == ring.num_faces() + 2 * b);

    const ExtendedMesh zero = extend_boundaries(ring, 0);
    CHECK(zero.mesh.vertices == ring.vertices);
    CHECK(zero.mesh.faces == ring.faces);

    CHECK_GPMI_ERROR(extend_boundaries(ring, -1), ErrorCode::InvalidArgument);
}

TEST_CASE("loop of 12 vertices grows by 12 vertices and 24 faces")
{
    TriMesh fan;
    fan.vertices.push_back(Vec3::Zero());
    for (int i = 0; i < 12; ++i) {
        const double t = 2.0 * M_PI * i / 12.0;
        fan.vertices.push_back(Vec3(std::cos(t), std::sin(t), 0.0));
    }
    for (int i = 0; i < 12; ++i) fan.faces.push_back({0, 1 + i, 1 + (i + 1) % 12});
    const ExtendedMesh ext = extend_boundaries(fan, 1);
    CHECK(ext.mesh.num_vertices() == 13 + 12);
    CHECK(ext.mesh.num_faces() == 12 + 24);
    CHECK_NOTHROW(validate(ext.mesh));
}

TEST_CASE("extension leaves original vertices, faces, loops and geodesics untouched")
{
    const TriMesh disc = shapes::disc(10.0, 1.5);
    const ExtendedMesh ext = extend_boundaries(disc, 5);
    CHECK(ext.original_vertices == disc.num_vertices());
    CHECK(ext.original_faces == disc.num_faces());
    for (std::size_t v = 0; v < disc.num_vertices(); ++v) CHECK(ext.mesh.vertices[v] == disc.vertices[v]);
    for (std::size_t f = 0; f < disc.num_faces(); ++f) CHECK(ext.mesh.faces[f] == disc.faces[f]);
    CHECK(boundary_loops(ext.mesh).size() == 1);
    CHECK(ext.is_original_vertex(0));
    CHECK_FALSE(ext.is_original_vertex(static_cast<int>(disc.num_vertices())));

    for (int source : {0, 7, static_cast<int>(disc.num_vertices()) - 1}) {
        const auto before = graph_geodesics(disc, source);
        const auto after = graph_geodesics(ext.mesh, source);
        double worst = 0.0;
        for (std::size_t v = 0; v < disc.num_vertices(); ++v) worst = std::max(worst, std::abs(after[v] - before[v]));
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("subdividing two triangles gives 16 vertices and 18 faces")
{
    const SubdividedMesh sub = subdivide9(two_triangles());
    CHECK(sub.fine.num_vertices() == 16);
    CHECK(sub.fine.num_faces() == 18);

    const SubdividedMesh one = subdivide9(single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)));
    CHECK(one.fine.num_vertices() == 10);
    CHECK(one.fine.num_faces() == 9);
}

TEST_CASE("subdivision keeps face nodes in their face plane and preserves area")
{
    const TriMesh m = shapes::icosphere(5.0, 1);
    const SubdividedMesh sub = subdivide9(m);
    CHECK(std::abs(total_area(sub.fine) - total_area(m)) <= 1e-9 * total_area(m));
    CHECK_NOTHROW(validate(sub.fine));
    for (std::size_t f = 0; f < m.num_faces(); ++f) {
        const Vec3& a = m.vertices[m.faces[f][0]];
        const Vec3& b = m.vertices[m.faces[f][1]];
        const Vec3& c = m.vertices[m.faces[f][2]];
        for (int a3 = 0; a3 <= 3; ++a3) {
            for (int b3 = 0; a3 + b3 <= 3; ++b3) {
                const Vec3& p = sub.fine.vertices[sub.face_nodes[f][lattice_node(a3, b3)]];
                CHECK(plane_distance(p, a, b, c) < 1e-9);
                CHECK((p - (a + a3 / 3.0 * (b - a) + b3 / 3.0 * (c - a))).norm() < 1e-12);
            }
        }
        CHECK(sub.fine.vertices[sub.centroid_map[f]].isApprox((a + b + c) / 3.0));
    }
    for (std::size_t v = 0; v < m.num_vertices(); ++v) CHECK(sub.vertex_map[v] == static_cast<int>(v));
}

TEST_CASE("graph geodesics along a straight chain and on a grid")
{
    const TriMesh strip = shapes::grid(8, 2, 7.0, 1.0);
    const auto d = graph_geodesics(strip, 0);
    CHECK(d[0] == 0.0);
    for (int m = 0; m < 8; ++m) CHECK(d[m] == doctest::Approx(static_cast<double>(m)).epsilon(1e-14));

    const TriMesh g = shapes::grid(12, 12, 1.0, 1.0);
    for (int s : {0, 17, 143}) {
        const auto ds = graph_geodesics(g, s);
        for (std::size_t v = 0; v < g.num_vertices(); ++v) {
            CHECK(ds[v] >= (g.vertices[v] - g.vertices[s]).norm() - 1e-12);
        }
    }
}

TEST_CASE("disconnected vertices are at infinite distance")
{
    TriMesh m = single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
    m.vertices.push_back(Vec3(5, 0, 0));
    m.vertices.push_back(Vec3(6, 0, 0));
    m.vertices.push_back(Vec3(5, 1, 0));
    m.faces.push_back({3, 4, 5});
    const auto d = graph_geodesics(m, 0);
    CHECK(std::isinf(d[4]));
}

TEST_CASE("k nearest vertices match a sorted Dijkstra oracle")
{
    const TriMesh m = shapes::random_patch(11);
    for (int v : {0, 5, 20}) {
        const auto d = graph_geodesics(m, v);
        std::vector<int> order(m.num_vertices());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
        order.resize(15);
        CHECK(k_nearest(m, m.vertices[v], 15) == order);
    }
}

TEST_CASE("nearest vertex picks the lowest index on ties")
{
    const TriMesh g = shapes::grid(3, 3, 2.0, 2.0);
    CHECK(nearest_vertex(g, Vec3(0.1, 0.1, 0.0)) == 0);
    CHECK(nearest_vertex(g, Vec3(0.5, 0.5, 0.0)) == 0);
    CHECK(nearest_vertex(g, Vec3(2.0, 2.0, 3.0)) == 8);
}

TEST_CASE("OFF and PLY round trips are exact")
{
    testing::TempDir dir("mesh_io");
    const TriMesh m = shapes::random_patch(7);
    for (const std::string name : {"m.off", "m.ply"}) {
        save_mesh(m, dir.file(name));
        const TriMesh back = load_mesh(dir.file(name));
        CHECK(back.vertices == m.vertices);
        CHECK(back.faces == m.faces);
        CHECK(mesh_hash(back) == mesh_hash(m));
    }
    CHECK(parse_ply(format_ply(m)).vertices == m.vertices);
    CHECK_GPMI_ERROR(load_mesh(dir.file("missing.off")), ErrorCode::Io);
}

TEST_CASE("mesh hash changes with geometry")
{
    TriMesh m = shapes::grid(4, 4, 1.0, 1.0);
    const std::string h = mesh_hash(m);
    CHECK(h == mesh_hash(shapes::grid(4, 4, 1.0, 1.0)));
    m.vertices[3].z() += 1e-12;
    CHECK(h != mesh_hash(m));
}

TEST_CASE("shortest round-trip double formatting")
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double x = std::ldexp(testing::uniform(rng, -1.0, 1.0), testing::uniform_int(rng, -60, 60));
        CHECK(io::parse_double(io::format_double(x), "x") == x);
    }
    CHECK(io::format_double(0.1) == "0.1");
}

TEST_CASE("random patches satisfy the subdivision and extension counts")
{
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const TriMesh m = shapes::random_patch(seed);
        const std::size_t e = unique_edges(m).size();
        const SubdividedMesh sub = subdivide9(m);
        CHECK(sub.fine.num_faces() == 9 * m.num_faces());
        CHECK(sub.fine.num_vertices() == m.num_vertices() + 2 * e + m.num_faces());

        const auto loops = boundary_loops(m);
        std::size_t b = 0;
        for (const auto& l : loops) b += l.vertices.size();
        const int layers = 1 + static_cast<int>(seed % 3);
        const ExtendedMesh ext = extend_boundaries(m, layers);
        CHECK(ext.mesh.num_vertices() == m.num_vertices() + layers * b);
        CHECK(ext.mesh.num_faces() == m.num_faces() + 2 * layers * b);
        CHECK(boundary_loops(ext.mesh).size() == loops.size());
    }
}
