#pragma once

#include <gpmi/basis.hpp>

#include <string>

namespace gpmi {

/// Writes manifest.json, phi_v.bin, phi_c.bin, grad_phi_c.bin and mesh.ply
/// into `dir`. Matrices are stored column-major as little-endian float64.
void save_basis(const EigenBasis& basis, const std::string& dir);

/// Reads a basis directory written by save_basis. Throws Error(StaleCache)
/// when the stored mesh does not match its recorded hash.
EigenBasis load_basis(const std::string& dir);

/// Returns the basis cached in `dir` when it was built from the same mesh
/// with the same size and extension; otherwise computes and stores it.
/// `reused` reports which happened.
EigenBasis cached_basis(const TriMesh& mesh, const BasisOptions& options, const std::string& dir, bool* reused = nullptr);

} // namespace gpmi
