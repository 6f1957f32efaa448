#include <gpmi/error.hpp>
#include <gpmi/io.hpp>
#include <gpmi/mesh_io.hpp>

#include <filesystem>
#include <sstream>

namespace gpmi {

namespace {

/// Whitespace tokenizer that skips '#' comments and tracks line numbers.
class Tokens
{
public:
    explicit Tokens(const std::string& text) : m_text(text) {}

    bool next(std::string& out)
    {
        skip();
        if (m_pos >= m_text.size()) return false;
        const std::size_t start = m_pos;
        while (m_pos < m_text.size() && !std::isspace(static_cast<unsigned char>(m_text[m_pos]))) ++m_pos;
        out.assign(m_text, start, m_pos - start);
        return true;
    }

    std::string expect(const char* what)
    {
        std::string tok;
        if (!next(tok)) fail(ErrorCode::Parse, std::string("unexpected end of file, expected ") + what);
        return tok;
    }

    double number(const char* what) { return io::parse_double(expect(what), std::string("line ") + std::to_string(m_line)); }

    long long integer(const char* what)
    {
        return io::parse_int(expect(what), std::string("line ") + std::to_string(m_line));
    }

    /// Rest of the current line, without the newline.
    std::string line()
    {
        const std::size_t start = m_pos;
        while (m_pos < m_text.size() && m_text[m_pos] != '\n') ++m_pos;
        std::string out = m_text.substr(start, m_pos - start);
        if (!out.empty() && out.back() == '\r') out.pop_back();
        if (m_pos < m_text.size()) {
            ++m_pos;
            ++m_line;
        }
        return out;
    }

    std::size_t line_number() const { return m_line; }

private:
    const std::string& m_text;
    std::size_t m_pos = 0;
    std::size_t m_line = 1;

    void skip()
    {
        while (m_pos < m_text.size()) {
            const char c = m_text[m_pos];
            if (c == '\n') {
                ++m_line;
                ++m_pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++m_pos;
            } else if (c == '#') {
                while (m_pos < m_text.size() && m_text[m_pos] != '\n') ++m_pos;
            } else {
                break;
            }
        }
    }
};

Face read_face(Tokens& tok, std::size_t index)
{
    const long long k = tok.integer("face vertex count");
    if (k != 3) {
        fail(ErrorCode::Parse, "face " + std::to_string(index) + ": only triangles are supported (got " +
                                   std::to_string(k) + " vertices)");
    }
    Face f{};
    for (auto& v : f) {
        const long long idx = tok.integer("face index");
        if (idx < 0 || idx > INT32_MAX) {
            fail(ErrorCode::Mesh, "face " + std::to_string(index) + ": vertex index out of range (" +
                                      std::to_string(idx) + ")");
        }
        v = static_cast<int>(idx);
    }
    return f;
}

MeshFormat resolve(const std::string& path, MeshFormat format)
{
    if (format != MeshFormat::Auto) return format;
    auto ext = std::filesystem::path(path).extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".off") return MeshFormat::Off;
    if (ext == ".ply") return MeshFormat::PlyAscii;
    fail(ErrorCode::InvalidArgument, "cannot infer mesh format from '" + path + "' (use .off or .ply)");
}

} // namespace

TriMesh parse_off(const std::string& text)
{
    Tokens tok(text);
    std::string magic = tok.expect("OFF header");
    if (magic != "OFF") fail(ErrorCode::Parse, "missing OFF header");
    const long long nv = tok.integer("vertex count");
    const long long nf = tok.integer("face count");
    tok.integer("edge count");
    if (nv < 0 || nf < 0) fail(ErrorCode::Parse, "negative element count");

    TriMesh mesh;
    mesh.vertices.resize(static_cast<std::size_t>(nv));
    for (auto& v : mesh.vertices) {
        for (int c = 0; c < 3; ++c) v[c] = tok.number("vertex coordinate");
    }
    mesh.faces.resize(static_cast<std::size_t>(nf));
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) mesh.faces[f] = read_face(tok, f);
    validate(mesh);
    return mesh;
}

TriMesh parse_ply(const std::string& text)
{
    Tokens tok(text);
    if (tok.line() != "ply") fail(ErrorCode::Parse, "missing ply magic");

    struct Element
    {
        std::string name;
        long long count = 0;
        std::vector<std::string> properties;
        bool has_list = false;
    };
    std::vector<Element> elements;
    bool ascii = false;
    for (;;) {
        const std::size_t lineno = tok.line_number();
        std::istringstream line(tok.line());
        std::string key;
        if (!(line >> key)) continue;
        if (key == "end_header") break;
        if (key == "format") {
            std::string fmt;
            line >> fmt;
            if (fmt != "ascii") fail(ErrorCode::Parse, "only ASCII PLY is supported (format " + fmt + ")");
            ascii = true;
        } else if (key == "element") {
            Element e;
            if (!(line >> e.name >> e.count) || e.count < 0) {
                fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": malformed element declaration");
            }
            elements.push_back(e);
        } else if (key == "property") {
            if (elements.empty()) fail(ErrorCode::Parse, "property before element");
            std::string type;
            line >> type;
            if (type == "list") {
                std::string count_type, item_type, name;
                line >> count_type >> item_type >> name;
                elements.back().has_list = true;
                elements.back().properties.push_back(name);
            } else {
                std::string name;
                line >> name;
                elements.back().properties.push_back(name);
            }
        } else if (key == "comment" || key == "obj_info") {
            continue;
        } else {
            fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": unknown header keyword '" + key + "'");
        }
        if (tok.line_number() == lineno) fail(ErrorCode::Parse, "unexpected end of PLY header");
    }
    if (!ascii) fail(ErrorCode::Parse, "missing PLY format line");

    TriMesh mesh;
    bool have_vertices = false, have_faces = false;
    for (const auto& e : elements) {
        if (e.name == "vertex") {
            int xyz[3] = {-1, -1, -1};
            for (std::size_t p = 0; p < e.properties.size(); ++p) {
                if (e.properties[p] == "x") xyz[0] = static_cast<int>(p);
                if (e.properties[p] == "y") xyz[1] = static_cast<int>(p);
                if (e.properties[p] == "z") xyz[2] = static_cast<int>(p);
            }
            if (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0 || e.has_list) {
                fail(ErrorCode::Parse, "vertex element must have scalar x, y, z properties");
            }
            mesh.vertices.resize(static_cast<std::size_t>(e.count));
            std::vector<double> row(e.properties.size());
            for (auto& v : mesh.vertices) {
                for (auto& r : row) r = tok.number("vertex property");
                v = Vec3(row[xyz[0]], row[xyz[1]], row[xyz[2]]);
            }
            have_vertices = true;
        } else if (e.name == "face") {
            if (e.properties.size() != 1 || !e.has_list) {
                fail(ErrorCode::Parse, "face element must have a single vertex index list");
            }
            mesh.faces.resize(static_cast<std::size_t>(e.count));
            for (std::size_t f = 0; f < mesh.faces.size(); ++f) mesh.faces[f] = read_face(tok, f);
            have_faces = true;
        } else {
            for (long long i = 0; i < e.count; ++i) tok.line();
        }
    }
    if (!have_vertices || !have_faces) fail(ErrorCode::Parse, "PLY file needs vertex and face elements");
    validate(mesh);
    return mesh;
}

TriMesh load_mesh(const std::string& path, MeshFormat format)
{
    const std::string text = io::read_file(path);
    try {
        return resolve(path, format) == MeshFormat::Off ? parse_off(text) : parse_ply(text);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

std::string format_off(const TriMesh& mesh)
{
    std::string out = "OFF\n";
    out += std::to_string(mesh.vertices.size()) + " " + std::to_string(mesh.faces.size()) + " 0\n";
    for (const auto& v : mesh.vertices) {
        out += io::format_double(v[0]) + " " + io::format_double(v[1]) + " " + io::format_double(v[2]) + "\n";
    }
    for (const auto& f : mesh.faces) {
        out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
    }
    return out;
}

std::string format_ply(const TriMesh& mesh)
{
    std::string out = "ply\nformat ascii 1.0\n";
    out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
    out += "property double x\nproperty double y\nproperty double z\n";
    out += "element face " + std::to_string(mesh.faces.size()) + "\n";
    out += "property list uchar int vertex_indices\nend_header\n";
    for (const auto& v : mesh.vertices) {
        out += io::format_double(v[0]) + " " + io::format_double(v[1]) + " " + io::format_double(v[2]) + "\n";
    }
    for (const auto& f : mesh.faces) {
        out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
    }
    return out;
}

void save_mesh(const TriMesh& mesh, const std::string& path, MeshFormat format)
{
    const auto fmt = resolve(path, format);
    io::write_file_atomic(path, fmt == MeshFormat::Off ? format_off(mesh) : format_ply(mesh));
}

void VtkWriter::point_scalars(std::string name, std::vector<double> values)
{
    require(values.size() == m_mesh.num_vertices(), ErrorCode::InvalidArgument, "point data size mismatch for " + name);
    m_point_scalars.push_back({std::move(name), std::move(values)});
}

void VtkWriter::cell_scalars(std::string name, std::vector<double> values)
{
    require(values.size() == m_mesh.num_faces(), ErrorCode::InvalidArgument, "cell data size mismatch for " + name);
    m_cell_scalars.push_back({std::move(name), std::move(values)});
}

void VtkWriter::cell_vectors(std::string name, std::vector<Vec3> values)
{
    require(values.size() == m_mesh.num_faces(), ErrorCode::InvalidArgument, "cell data size mismatch for " + name);
    m_cell_vectors.push_back({std::move(name), std::move(values)});
}

std::string VtkWriter::str() const
{
    using io::format_double;
    std::string out = "# vtk DataFile Version 3.0\ngpmi\nASCII\nDATASET POLYDATA\n";
    out += "POINTS " + std::to_string(m_mesh.num_vertices()) + " double\n";
    for (const auto& v : m_mesh.vertices) {
        out += format_double(v[0]) + " " + format_double(v[1]) + " " + format_double(v[2]) + "\n";
    }
    out += "POLYGONS " + std::to_string(m_mesh.num_faces()) + " " + std::to_string(4 * m_mesh.num_faces()) + "\n";
    for (const auto& f : m_mesh.faces) {
        out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
    }
    if (!m_point_scalars.empty()) {
        out += "POINT_DATA " + std::to_string(m_mesh.num_vertices()) + "\n";
        for (const auto& s : m_point_scalars) {
            out += "SCALARS " + s.name + " double 1\nLOOKUP_TABLE default\n";
            for (double x : s.values) out += format_double(x) + "\n";
        }
    }
    if (!m_cell_scalars.empty() || !m_cell_vectors.empty()) {
        out += "CELL_DATA " + std::to_string(m_mesh.num_faces()) + "\n";
        for (const auto& s : m_cell_scalars) {
            out += "SCALARS " + s.name + " double 1\nLOOKUP_TABLE default\n";
            for (double x : s.values) out += format_double(x) + "\n";
        }
        for (const auto& s : m_cell_vectors) {
            out += "VECTORS " + s.name + " double\n";
            for (const auto& v : s.values) {
                out += format_double(v[0]) + " " + format_double(v[1]) + " " + format_double(v[2]) + "\n";
            }
        }
    }
    return out;
}

void VtkWriter::save(const std::string& path) const
{
    io::write_file_atomic(path, str());
}

} // namespace gpmi
