#pragma once

#include <gpmi/mesh.hpp>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace gpmi {

/// Cotangent stiffness matrix and lumped mass of a triangle mesh.
/// L[i][j] = -(cot a_ij + cot b_ij) / 2 for neighbours, L[i][i] = -sum_j L[i][j],
/// so L is positive semi-definite with constants in its null space.
struct LaplacianSystem
{
    Eigen::SparseMatrix<double> L;
    Eigen::VectorXd mass;
};

LaplacianSystem assemble_laplacian(const TriMesh& mesh);

} // namespace gpmi
