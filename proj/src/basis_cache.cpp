#include <gpmi/basis_cache.hpp>
#include <gpmi/error.hpp>
#include <gpmi/io.hpp>
#include <gpmi/mesh_io.hpp>

#include <json.hpp>

#include <bit>
#include <cstring>
#include <filesystem>

namespace gpmi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "gpmi-basis-1";

static_assert(std::endian::native == std::endian::little, "basis cache assumes a little-endian host");

std::string matrix_bytes(const Eigen::MatrixXd& m)
{
    std::string out(static_cast<std::size_t>(m.size()) * sizeof(double), '\0');
    std::memcpy(out.data(), m.data(), out.size());
    return out;
}

Eigen::MatrixXd read_matrix(const std::string& bytes, std::size_t offset, Eigen::Index rows, Eigen::Index cols,
                            const std::string& path)
{
    const std::size_t size = static_cast<std::size_t>(rows * cols) * sizeof(double);
    if (bytes.size() < offset + size) fail(ErrorCode::Parse, path + ": file too short for a " +
                                                               std::to_string(rows) + "x" + std::to_string(cols) +
                                                               " block");
    Eigen::MatrixXd m(rows, cols);
    std::memcpy(m.data(), bytes.data() + offset, size);
    return m;
}

std::string path_in(const std::string& dir, const char* name)
{
    return (fs::path(dir) / name).string();
}

} // namespace

void save_basis(const EigenBasis& basis, const std::string& dir)
{
    fs::create_directories(dir);
    save_mesh(basis.mesh, path_in(dir, "mesh.ply"), MeshFormat::PlyAscii);
    io::write_file_atomic(path_in(dir, "phi_v.bin"), matrix_bytes(basis.phi_v));
    io::write_file_atomic(path_in(dir, "phi_c.bin"), matrix_bytes(basis.phi_c));
    io::write_file_atomic(path_in(dir, "grad_phi_c.bin"),
                          matrix_bytes(basis.grad_c[0]) + matrix_bytes(basis.grad_c[1]) + matrix_bytes(basis.grad_c[2]));

    json manifest;
    manifest["format"] = kFormat;
    manifest["layout"] = "column-major little-endian float64";
    manifest["mesh_hash"] = basis.mesh_hash;
    manifest["num_basis"] = basis.size();
    manifest["extend_layers"] = basis.extend_layers;
    manifest["num_vertices"] = basis.mesh.num_vertices();
    manifest["num_faces"] = basis.mesh.num_faces();
    manifest["max_residual"] = basis.max_residual;
    manifest["lambdas"] = std::vector<double>(basis.lambdas.data(), basis.lambdas.data() + basis.lambdas.size());
    manifest["files"] = {{"phi_v", "phi_v.bin"}, {"phi_c", "phi_c.bin"}, {"grad_phi_c", "grad_phi_c.bin"},
                         {"mesh", "mesh.ply"}};
    io::write_file_atomic(path_in(dir, "manifest.json"), manifest.dump(2) + "\n");
}

EigenBasis load_basis(const std::string& dir)
{
    const std::string manifest_path = path_in(dir, "manifest.json");
    json manifest;
    try {
        manifest = json::parse(io::read_file(manifest_path));
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, manifest_path + ": " + e.what());
    }
    try {
        if (manifest.at("format").get<std::string>() != kFormat) {
            fail(ErrorCode::Parse, manifest_path + ": unsupported basis format");
        }
        EigenBasis basis;
        basis.mesh = load_mesh(path_in(dir, "mesh.ply"), MeshFormat::PlyAscii);
        basis.mesh_hash = manifest.at("mesh_hash").get<std::string>();
        if (mesh_hash(basis.mesh) != basis.mesh_hash) {
            fail(ErrorCode::StaleCache, dir + ": mesh does not match the cached basis hash");
        }
        const int m = manifest.at("num_basis").get<int>();
        basis.extend_layers = manifest.at("extend_layers").get<int>();
        basis.max_residual = manifest.value("max_residual", 0.0);
        const auto lambdas = manifest.at("lambdas").get<std::vector<double>>();
        if (static_cast<int>(lambdas.size()) != m) fail(ErrorCode::Parse, manifest_path + ": lambda count mismatch");
        basis.lambdas = Eigen::Map<const Eigen::VectorXd>(lambdas.data(), m);

        const auto nv = static_cast<Eigen::Index>(basis.mesh.num_vertices());
        const auto nf = static_cast<Eigen::Index>(basis.mesh.num_faces());
        if (manifest.at("num_vertices").get<Eigen::Index>() != nv || manifest.at("num_faces").get<Eigen::Index>() != nf) {
            fail(ErrorCode::StaleCache, dir + ": mesh size does not match the manifest");
        }
        const std::string pv = path_in(dir, "phi_v.bin");
        const std::string pc = path_in(dir, "phi_c.bin");
        const std::string pg = path_in(dir, "grad_phi_c.bin");
        basis.phi_v = read_matrix(io::read_file(pv), 0, nv, m, pv);
        basis.phi_c = read_matrix(io::read_file(pc), 0, nf, m, pc);
        const std::string grad = io::read_file(pg);
        const std::size_t block = static_cast<std::size_t>(nf * m) * sizeof(double);
        for (int c = 0; c < 3; ++c) basis.grad_c[c] = read_matrix(grad, c * block, nf, m, pg);
        return basis;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, manifest_path + ": " + e.what());
    }
}

EigenBasis cached_basis(const TriMesh& mesh, const BasisOptions& options, const std::string& dir, bool* reused)
{
    if (reused) *reused = false;
    const std::string manifest_path = path_in(dir, "manifest.json");
    if (fs::exists(manifest_path)) {
        try {
            const json manifest = json::parse(io::read_file(manifest_path));
            const bool open = !boundary_loops(mesh).empty();
            if (manifest.value("mesh_hash", "") == mesh_hash(mesh) &&
                manifest.value("num_basis", -1) == options.num_basis &&
                manifest.value("extend_layers", -1) == (open ? options.extend_layers : 0)) {
                EigenBasis basis = load_basis(dir);
                if (reused) *reused = true;
                return basis;
            }
        } catch (const json::exception&) {
            // Unreadable manifest: rebuild below.
        } catch (const Error& e) {
            if (e.code() != ErrorCode::StaleCache && e.code() != ErrorCode::Parse) throw;
        }
    }
    EigenBasis basis = compute_basis(mesh, options);
    save_basis(basis, dir);
    return basis;
}

} // namespace gpmi
