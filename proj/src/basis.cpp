#include <gpmi/basis.hpp>
#include <gpmi/error.hpp>
#include <gpmi/laplacian.hpp>
#include <gpmi/parallel.hpp>

#include <Eigen/Dense>

namespace gpmi {

GradientOperator cubic_gradient_operator(const std::array<Vec3, 10>& points, const Vec3& p0, const Vec3& p1,
                                         const Vec3& normal, const Vec3& centre, double area)
{
    const Vec3 e1 = (p1 - p0).normalized();
    const Vec3 e2 = normal.cross(e1).normalized();
    const double scale = std::sqrt(area);

    Eigen::Matrix<double, 10, 10> v;
    for (int i = 0; i < 10; ++i) {
        const Vec3 d = points[i] - centre;
        const double x = d.dot(e1) / scale;
        const double y = d.dot(e2) / scale;
        v.row(i) << 1, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y;
    }
    Eigen::Matrix<double, 10, 10> gram = v.transpose() * v;
    // Ridge on the cubic coefficients only, so quadratics are reproduced exactly.
    const double ridge = 1e-10 * gram.trace() / 10.0;
    gram.diagonal().tail<4>().array() += ridge;
    Eigen::LLT<Eigen::Matrix<double, 10, 10>> llt(gram);
    if (llt.info() != Eigen::Success) fail(ErrorCode::Numeric, "cubic fit is rank deficient");
    const Eigen::Matrix<double, 10, 10> fit = llt.solve(v.transpose());
    // Linear coefficients give the gradient at the origin of the local frame.
    return (e1 * fit.row(1) + e2 * fit.row(2)) / scale;
}

std::array<Eigen::MatrixXd, 3> centroid_gradients(const SubdividedMesh& sub, std::size_t faces,
                                                  const Eigen::MatrixXd& fine_values)
{
    const Eigen::Index m = fine_values.cols();
    std::array<Eigen::MatrixXd, 3> grad;
    for (auto& g : grad) g.resize(static_cast<Eigen::Index>(faces), m);
    const TriMesh& fine = sub.fine;

    parallel_for(faces, [&](std::size_t begin, std::size_t end) {
        Eigen::Matrix<double, 10, Eigen::Dynamic> values(10, m);
        for (std::size_t f = begin; f < end; ++f) {
            const auto& nodes = sub.face_nodes[f];
            std::array<Vec3, 10> pts;
            for (int i = 0; i < 10; ++i) pts[i] = fine.vertices[nodes[i]];
            const Vec3& p0 = pts[lattice_node(0, 0)];
            const Vec3& p1 = pts[lattice_node(3, 0)];
            const Vec3& p2 = pts[lattice_node(0, 3)];
            const Vec3 cross = (p1 - p0).cross(p2 - p0);
            const double area = 0.5 * cross.norm();
            GradientOperator op;
            try {
                op = cubic_gradient_operator(pts, p0, p1, cross.normalized(), fine.vertices[sub.centroid_map[f]], area);
            } catch (const Error& e) {
                fail(e.code(), "face " + std::to_string(f) + ": " + e.what());
            }
            for (int i = 0; i < 10; ++i) values.row(i) = fine_values.row(nodes[i]);
            const Eigen::Matrix<double, 3, Eigen::Dynamic> g = op * values;
            for (int c = 0; c < 3; ++c) grad[c].row(static_cast<Eigen::Index>(f)) = g.row(c);
        }
    });
    return grad;
}

EigenBasis compute_basis(const TriMesh& mesh, const BasisOptions& options)
{
    validate(mesh);
    require(options.num_basis >= 1, ErrorCode::InvalidArgument, "number of basis functions must be >= 1");
    require(options.extend_layers >= 0, ErrorCode::InvalidArgument, "extension layers must be >= 0");

    const bool open = !boundary_loops(mesh).empty();
    ExtendedMesh ext = extend_boundaries(mesh, open ? options.extend_layers : 0);
    SubdividedMesh sub = subdivide9(ext.mesh);
    LaplacianSystem sys = assemble_laplacian(sub.fine);
    EigenPairs pairs = smallest_eigenpairs(sys, options.num_basis, options.eigen);

    EigenBasis basis;
    basis.mesh = mesh;
    basis.mesh_hash = mesh_hash(mesh);
    basis.extend_layers = open ? options.extend_layers : 0;
    basis.max_residual = pairs.max_residual;
    basis.lambdas = pairs.values;

    const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
    const auto nf = static_cast<Eigen::Index>(mesh.num_faces());
    basis.phi_v.resize(nv, options.num_basis);
    for (Eigen::Index v = 0; v < nv; ++v) basis.phi_v.row(v) = pairs.vectors.row(sub.vertex_map[v]);
    basis.phi_c.resize(nf, options.num_basis);
    for (Eigen::Index f = 0; f < nf; ++f) basis.phi_c.row(f) = pairs.vectors.row(sub.centroid_map[f]);
    basis.grad_c = centroid_gradients(sub, mesh.num_faces(), pairs.vectors);

    if (options.keep_fine) {
        basis.fine = FineBasis{std::move(ext), std::move(sub), std::move(sys.mass), std::move(pairs.vectors)};
    }
    return basis;
}

EigenBasis truncate(const EigenBasis& basis, int m)
{
    require(m >= 1 && m <= basis.size(), ErrorCode::InvalidArgument,
            "cannot truncate a basis of " + std::to_string(basis.size()) + " functions to " + std::to_string(m));
    EigenBasis out;
    out.mesh = basis.mesh;
    out.mesh_hash = basis.mesh_hash;
    out.extend_layers = basis.extend_layers;
    out.max_residual = basis.max_residual;
    out.lambdas = basis.lambdas.head(m);
    out.phi_v = basis.phi_v.leftCols(m);
    out.phi_c = basis.phi_c.leftCols(m);
    for (int c = 0; c < 3; ++c) out.grad_c[c] = basis.grad_c[c].leftCols(m);
    return out;
}

} // namespace gpmi
