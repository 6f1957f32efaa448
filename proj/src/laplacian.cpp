#include <gpmi/error.hpp>
#include <gpmi/laplacian.hpp>

#include <vector>

namespace gpmi {

LaplacianSystem assemble_laplacian(const TriMesh& mesh)
{
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.faces.size() * 12);
    LaplacianSystem sys;
    sys.mass = Eigen::VectorXd::Zero(n);

    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        const Vec3 cross = (mesh.vertices[face[1]] - mesh.vertices[face[0]])
                               .cross(mesh.vertices[face[2]] - mesh.vertices[face[0]]);
        const double twice_area = cross.norm();
        if (!(0.5 * twice_area > kMinFaceArea)) {
            fail(ErrorCode::Mesh, "face " + std::to_string(f) + ": zero area in Laplacian assembly");
        }
        for (int c = 0; c < 3; ++c) {
            const int o = face[c];
            const int i = face[(c + 1) % 3];
            const int j = face[(c + 2) % 3];
            const Vec3 u = mesh.vertices[i] - mesh.vertices[o];
            const Vec3 v = mesh.vertices[j] - mesh.vertices[o];
            // Half the cotangent of the angle opposite edge (i, j).
            const double w = 0.5 * u.dot(v) / twice_area;
            triplets.emplace_back(i, j, -w);
            triplets.emplace_back(j, i, -w);
            triplets.emplace_back(i, i, w);
            triplets.emplace_back(j, j, w);
            sys.mass[o] += twice_area / 6.0;
        }
    }
    sys.L.resize(n, n);
    sys.L.setFromTriplets(triplets.begin(), triplets.end());
    sys.L.makeCompressed();
    for (Eigen::Index v = 0; v < n; ++v) {
        if (!(sys.mass[v] > 0)) fail(ErrorCode::Mesh, "vertex " + std::to_string(v) + " is not used by any face");
    }
    return sys;
}

} // namespace gpmi
