#pragma once

#include <gpmi/eigensolver.hpp>
#include <gpmi/mesh.hpp>

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>

namespace gpmi {

struct BasisOptions
{
    int num_basis = 256;
    int extend_layers = 15;
    /// Keep the subdivided extended mesh and its eigenvectors in the result.
    bool keep_fine = false;
    EigenOptions eigen;
};

/// Fine-mesh data retained on request for diagnostics.
struct FineBasis
{
    ExtendedMesh extended;
    SubdividedMesh sub;
    Eigen::VectorXd mass;
    Eigen::MatrixXd vectors;
};

/// Laplacian eigenpairs restricted to the vertices and face centroids of the
/// original mesh.
struct EigenBasis
{
    TriMesh mesh;
    std::string mesh_hash;
    int extend_layers = 0;
    double max_residual = 0.0;

    Eigen::VectorXd lambdas;
    /// [vertices x M]
    Eigen::MatrixXd phi_v;
    /// [faces x M]
    Eigen::MatrixXd phi_c;
    /// Gradient components at face centroids, each [faces x M].
    std::array<Eigen::MatrixXd, 3> grad_c;

    std::optional<FineBasis> fine;

    int size() const { return static_cast<int>(lambdas.size()); }
};

EigenBasis compute_basis(const TriMesh& mesh, const BasisOptions& options = {});

/// The first m basis functions of `basis`.
EigenBasis truncate(const EigenBasis& basis, int m);

/// Maps ten values at the points of a face to the gradient at `centre` of the
/// least-squares bivariate cubic through them. Points are expressed in the
/// frame e1 = (p1 - p0) / |p1 - p0|, e2 = n x e1.
using GradientOperator = Eigen::Matrix<double, 3, 10>;
GradientOperator cubic_gradient_operator(const std::array<Vec3, 10>& points, const Vec3& p0, const Vec3& p1,
                                         const Vec3& normal, const Vec3& centre, double area);

/// Gradients at original face centroids of fine-mesh fields, one per column.
/// Only the first `faces` coarse faces of `sub` are evaluated.
std::array<Eigen::MatrixXd, 3> centroid_gradients(const SubdividedMesh& sub, std::size_t faces,
                                                  const Eigen::MatrixXd& fine_values);

} // namespace gpmi
