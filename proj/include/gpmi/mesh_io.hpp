#pragma once

#include <gpmi/mesh.hpp>

#include <string>
#include <vector>

namespace gpmi {

enum class MeshFormat { Auto, Off, PlyAscii };

/// Reads and validates a mesh. Auto picks the format from the extension.
TriMesh load_mesh(const std::string& path, MeshFormat format = MeshFormat::Auto);

TriMesh parse_off(const std::string& text);
TriMesh parse_ply(const std::string& text);

std::string format_off(const TriMesh& mesh);
std::string format_ply(const TriMesh& mesh);

void save_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format = MeshFormat::Auto);

/// Legacy ASCII VTK PolyData with optional point and cell attributes.
class VtkWriter
{
public:
    explicit VtkWriter(const TriMesh& mesh) : m_mesh(mesh) {}

    void point_scalars(std::string name, std::vector<double> values);
    void cell_scalars(std::string name, std::vector<double> values);
    void cell_vectors(std::string name, std::vector<Vec3> values);

    std::string str() const;
    void save(const std::string& path) const;

private:
    struct Scalars
    {
        std::string name;
        std::vector<double> values;
    };
    struct Vectors
    {
        std::string name;
        std::vector<Vec3> values;
    };

    const TriMesh& m_mesh;
    std::vector<Scalars> m_point_scalars;
    std::vector<Scalars> m_cell_scalars;
    std::vector<Vectors> m_cell_vectors;
};

} // namespace gpmi
