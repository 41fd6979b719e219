#include "freeshell/layout_io.hpp"

#include <fstream>
#include <sstream>

#include "freeshell/error.hpp"
#include "freeshell/mesh_io.hpp"

namespace freeshell
{

namespace
{

const char* state_name(LinkageState s)
{
    switch (s) {
    case LinkageState::retained:
        return "retained";
    case LinkageState::welded:
        return "welded";
    case LinkageState::cut:
        return "cut";
    }
    return "?";
}

}  // namespace

std::string layout_obj_text(const Layout& layout)
{
    std::string text;
    for (const Vec2& p : layout.corners) {
        text += "v " + format_double(p.x()) + " " + format_double(p.y()) + " 0\n";
    }
    for (int t = 0; t < layout.triangle_count(); ++t) {
        text += "f " + std::to_string(3 * t + 1) + " " + std::to_string(3 * t + 2) + " " + std::to_string(3 * t + 3) +
                "\n";
    }
    return text;
}

std::string linkage_text(const Layout& layout)
{
    std::string text = "# id tri_a tri_b state gap\n";
    for (std::size_t n = 0; n < layout.linkages.size(); ++n) {
        const Linkage& l = layout.linkages[n];
        text += std::to_string(n) + " " + std::to_string(l.tri_a) + " " + std::to_string(l.tri_b) + " " +
                state_name(l.state) + " " + format_double(gap_value(layout, l)) + "\n";
    }
    return text;
}

std::string coarse_record_line(const CoarseRecord& rec)
{
    return "iter=" + std::to_string(rec.iter) + " energy=" + format_double(rec.energy.total) +
           " rigid=" + format_double(rec.energy.rigid) + " gap=" + format_double(rec.energy.gap) +
           " fair=" + format_double(rec.energy.fair) + " a_max=" + format_double(rec.a_max) +
           " cut_count=" + std::to_string(rec.cut_count) + " solver_iterations=" +
           std::to_string(rec.solver_iterations) + "\n";
}

std::string flatten_stats_text(const FlattenStats& s, const Layout& layout)
{
    std::string text;
    auto kv = [&](const std::string& k, const std::string& v) { text += k + " = " + v + "\n"; };
    kv("triangles", std::to_string(layout.triangle_count()));
    kv("linkages", std::to_string(layout.linkages.size()));
    kv("avg_edge", format_double(s.avg_edge));
    kv("d_target", format_double(s.d_target));
    kv("d_coarse", format_double(s.d_coarse));
    kv("amplification", format_double(s.amplification));
    kv("align_iterations", std::to_string(s.align.iterations));
    kv("align_cuts", std::to_string(s.align.cut_count));
    kv("coarse_iterations", std::to_string(s.coarse.iterations));
    kv("coarse_a_max", format_double(s.coarse.final_a_max));
    kv("refine_steps", std::to_string(s.refine.steps));
    kv("refine_learn_rate", format_double(s.refine.learn_rate));
    kv("final_avg_gap", format_double(s.refine.final_avg_gap));
    kv("cut_count", std::to_string(s.cut_count));
    for (const CoarseRecord& rec : s.coarse.history) {
        text += "coarse " + coarse_record_line(rec);
    }
    return text;
}

void save_layout(const Layout& layout, const std::filesystem::path& obj_path, const std::filesystem::path& linkage_path)
{
    write_text_file(obj_path, layout_obj_text(layout));
    write_text_file(linkage_path, linkage_text(layout));
}

Layout load_layout(const TargetMesh& mesh, const std::filesystem::path& obj_path,
                   const std::filesystem::path& linkage_path)
{
    const TriangleSoup soup = read_soup(obj_path);
    if (soup.vertices.size() != 3 * mesh.triangle_count()) {
        throw ParseError(obj_path.string() + ": expected " + std::to_string(3 * mesh.triangle_count()) +
                         " layout corners, found " + std::to_string(soup.vertices.size()));
    }
    Param2D init;
    init.uv.assign(mesh.vertex_count(), Vec2::Zero());
    Layout layout = explode_mesh(mesh, init);
    for (std::size_t s = 0; s < soup.vertices.size(); ++s) {
        layout.corners[s] = soup.vertices[s].head<2>();
    }

    std::ifstream in(linkage_path);
    if (!in) {
        throw IoError("cannot open " + linkage_path.string());
    }
    std::string line;
    int line_no = 0;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::size_t id = 0;
        int ta = 0;
        int tb = 0;
        std::string state;
        if (!(ls >> id >> ta >> tb >> state) || id >= layout.linkages.size() || layout.linkages[id].tri_a != ta ||
            layout.linkages[id].tri_b != tb) {
            throw ParseError(linkage_path.string() + ":" + std::to_string(line_no) + ": linkage does not match the mesh");
        }
        Linkage& l = layout.linkages[id];
        if (state == "retained") {
            l.state = LinkageState::retained;
        } else if (state == "welded") {
            l.state = LinkageState::welded;
        } else if (state == "cut") {
            l.state = LinkageState::cut;
        } else {
            throw ParseError(linkage_path.string() + ":" + std::to_string(line_no) + ": unknown state '" + state + "'");
        }
        ++seen;
    }
    if (seen != layout.linkages.size()) {
        throw ParseError(linkage_path.string() + ": expected " + std::to_string(layout.linkages.size()) +
                         " linkages, found " + std::to_string(seen));
    }
    return layout;
}

}  // namespace freeshell
