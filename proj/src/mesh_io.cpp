#include "freeshell/mesh_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "freeshell/error.hpp"

namespace freeshell
{

namespace fs = std::filesystem;

namespace
{

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double parse_number(const std::string& token, const fs::path& path, int line)
{
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && token.front() == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ParseError(path.string() + ":" + std::to_string(line) + ": bad number '" + token + "'");
    }
    return value;
}

TriangleSoup parse_obj(const std::string& text, const fs::path& path)
{
    TriangleSoup soup;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag.front() == '#') {
            continue;
        }
        if (tag == "v") {
            std::array<std::string, 3> tok;
            if (!(ls >> tok[0] >> tok[1] >> tok[2])) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) + ": vertex needs 3 coordinates");
            }
            soup.vertices.emplace_back(parse_number(tok[0], path, line_no), parse_number(tok[1], path, line_no),
                                       parse_number(tok[2], path, line_no));
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string tok;
            while (ls >> tok) {
                const std::string head = tok.substr(0, tok.find('/'));
                int idx = 0;
                auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
                if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0) {
                    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad face index '" + tok + "'");
                }
                const int resolved = idx > 0 ? idx - 1 : static_cast<int>(soup.vertices.size()) + idx;
                if (resolved < 0 || resolved >= static_cast<int>(soup.vertices.size())) {
                    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": face index out of range");
                }
                poly.push_back(resolved);
            }
            if (poly.size() < 3) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) + ": face needs at least 3 vertices");
            }
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
                soup.triangles.push_back({poly[0], poly[k], poly[k + 1]});
            }
        }
    }
    return soup;
}

class VertexWelder
{
public:
    explicit VertexWelder(double tol) : tol_(tol) {}

    int insert(const Vec3& p, std::vector<Vec3>& out)
    {
        const auto cell = key(p);
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = grid_.find({std::get<0>(cell) + dx, std::get<1>(cell) + dy, std::get<2>(cell) + dz});
                    if (it == grid_.end()) {
                        continue;
                    }
                    for (int idx : it->second) {
                        if ((out[idx] - p).norm() <= tol_) {
                            return idx;
                        }
                    }
                }
            }
        }
        const int idx = static_cast<int>(out.size());
        out.push_back(p);
        grid_[cell].push_back(idx);
        return idx;
    }

private:
    using Key = std::tuple<long long, long long, long long>;
    Key key(const Vec3& p) const
    {
        return {static_cast<long long>(std::floor(p.x() / tol_)), static_cast<long long>(std::floor(p.y() / tol_)),
                static_cast<long long>(std::floor(p.z() / tol_))};
    }
    double tol_;
    std::map<Key, std::vector<int>> grid_;
};

TriangleSoup parse_stl(const std::string& data, const fs::path& path)
{
    TriangleSoup soup;
    VertexWelder welder(kStlMergeTolerance);
    auto add_facet = [&](const std::array<Vec3, 3>& corners) {
        Tri tri;
        for (int c = 0; c < 3; ++c) {
            tri[c] = welder.insert(corners[c], soup.vertices);
        }
        soup.triangles.push_back(tri);
    };

    const bool sized_binary = data.size() >= 84 && [&] {
        std::uint32_t n = 0;
        std::memcpy(&n, data.data() + 80, 4);
        return data.size() == 84 + 50ull * n;
    }();
    if (sized_binary) {
        std::uint32_t n = 0;
        std::memcpy(&n, data.data() + 80, 4);
        for (std::uint32_t f = 0; f < n; ++f) {
            const char* rec = data.data() + 84 + 50ull * f;
            std::array<Vec3, 3> corners;
            for (int c = 0; c < 3; ++c) {
                float xyz[3];
                std::memcpy(xyz, rec + 12 + 12 * c, 12);
                corners[c] = Vec3(xyz[0], xyz[1], xyz[2]);
            }
            add_facet(corners);
        }
        return soup;
    }
    if (data.rfind("solid", 0) != 0) {
        throw ParseError(path.string() + ": not a binary or ASCII STL");
    }
    std::istringstream in(data);
    std::string tok;
    std::array<Vec3, 3> corners;
    int corner = 0;
    while (in >> tok) {
        if (tok == "vertex") {
            std::array<std::string, 3> xyz;
            if (!(in >> xyz[0] >> xyz[1] >> xyz[2]) || corner > 2) {
                throw ParseError(path.string() + ": malformed ASCII STL vertex");
            }
            corners[corner++] = Vec3(parse_number(xyz[0], path, 0), parse_number(xyz[1], path, 0),
                                     parse_number(xyz[2], path, 0));
        } else if (tok == "endfacet") {
            if (corner != 3) {
                throw ParseError(path.string() + ": ASCII STL facet without 3 vertices");
            }
            add_facet(corners);
            corner = 0;
        }
    }
    return soup;
}

}  // namespace

std::string format_double(double value)
{
    if (value == 0.0) {
        return "0";
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

MeshFormat format_from_path(const fs::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj") {
        return MeshFormat::OBJ;
    }
    if (ext == ".stl") {
        return MeshFormat::STL;
    }
    throw ParseError(path.string() + ": unsupported mesh extension '" + ext + "'");
}

TriangleSoup read_soup(const fs::path& path)
{
    const MeshFormat format = format_from_path(path);
    const std::string data = read_file(path);
    return format == MeshFormat::OBJ ? parse_obj(data, path) : parse_stl(data, path);
}

TargetMesh load_mesh(const fs::path& path)
{
    TriangleSoup soup = read_soup(path);
    return make_target_mesh(std::move(soup.vertices), std::move(soup.triangles));
}

void write_text_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

void append_stl_facet(std::string& buffer, const Vec3& a, const Vec3& b, const Vec3& c)
{
    Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    float rec[12];
    for (int k = 0; k < 3; ++k) {
        rec[k] = static_cast<float>(n[k]);
        rec[3 + k] = static_cast<float>(a[k]);
        rec[6 + k] = static_cast<float>(b[k]);
        rec[9 + k] = static_cast<float>(c[k]);
    }
    const std::uint16_t attr = 0;
    buffer.append(reinterpret_cast<const char*>(rec), sizeof(rec));
    buffer.append(reinterpret_cast<const char*>(&attr), sizeof(attr));
}

void write_stl_file(const fs::path& path, const std::string& facets, std::uint32_t count)
{
    std::string out(80, '\0');
    const char header[] = "freeshell binary STL";
    std::memcpy(out.data(), header, sizeof(header) - 1);
    out.append(reinterpret_cast<const char*>(&count), 4);
    out += facets;
    write_text_file(path, out);
}

void save_mesh(const TriangleSoup& soup, const fs::path& path, MeshFormat format)
{
    if (format == MeshFormat::OBJ) {
        std::string text;
        text.reserve(soup.vertices.size() * 40 + soup.triangles.size() * 20);
        for (const Vec3& v : soup.vertices) {
            text += "v " + format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z()) + "\n";
        }
        for (const Tri& t : soup.triangles) {
            text += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " +
                    std::to_string(t[2] + 1) + "\n";
        }
        write_text_file(path, text);
        return;
    }
    std::string facets;
    facets.reserve(soup.triangles.size() * 50);
    for (const Tri& t : soup.triangles) {
        append_stl_facet(facets, soup.vertices[t[0]], soup.vertices[t[1]], soup.vertices[t[2]]);
    }
    write_stl_file(path, facets, static_cast<std::uint32_t>(soup.triangles.size()));
}

void save_mesh(const TargetMesh& mesh, const fs::path& path, MeshFormat format)
{
    save_mesh(TriangleSoup{mesh.vertices, mesh.triangles}, path, format);
}

}  // namespace freeshell
