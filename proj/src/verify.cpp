#include "freeshell/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include "freeshell/error.hpp"
#include "freeshell/geometry.hpp"
#include "freeshell/mesh_io.hpp"

namespace freeshell
{

namespace
{

std::array<Vec2, 3> layout_triangle(const Layout& layout, int t)
{
    return {layout.corners[3 * t], layout.corners[3 * t + 1], layout.corners[3 * t + 2]};
}

}  // namespace

std::vector<double> linkage_quad_angles(const Layout& layout, const Linkage& l)
{
    const std::array<Vec2, 4> q{layout.corners[l.i], layout.corners[l.j], layout.corners[l.k], layout.corners[l.m]};
    std::vector<double> angles;
    for (int c = 0; c < 4; ++c) {
        const Vec2 u = q[(c + 1) % 4] - q[c];
        const Vec2 v = q[(c + 3) % 4] - q[c];
        if (u.norm() == 0.0 || v.norm() == 0.0) {
            return {};
        }
        const double cross = u.x() * v.y() - u.y() * v.x();
        angles.push_back(std::atan2(std::abs(cross), u.dot(v)) * 180.0 / std::numbers::pi);
    }
    return angles;
}

int count_overlap_pairs(const Layout& layout)
{
    const int nt = layout.triangle_count();
    if (nt < 2) {
        return 0;
    }
    double cell = layout.avg_edge;
    if (!(cell > 0.0)) {
        cell = 1.0;
    }
    std::unordered_map<std::int64_t, std::vector<int>> grid;
    auto cell_of = [&](double v) { return static_cast<std::int64_t>(std::floor(v / cell)); };
    for (int t = 0; t < nt; ++t) {
        Eigen::AlignedBox2d box;
        for (const Vec2& p : layout_triangle(layout, t)) {
            box.extend(p);
        }
        for (std::int64_t x = cell_of(box.min().x()); x <= cell_of(box.max().x()); ++x) {
            for (std::int64_t y = cell_of(box.min().y()); y <= cell_of(box.max().y()); ++y) {
                grid[(x << 32) ^ (y & 0xffffffff)].push_back(t);
            }
        }
    }
    std::vector<std::pair<int, int>> candidates;
    for (const auto& [key, tris] : grid) {
        for (std::size_t a = 0; a < tris.size(); ++a) {
            for (std::size_t b = a + 1; b < tris.size(); ++b) {
                candidates.emplace_back(std::min(tris[a], tris[b]), std::max(tris[a], tris[b]));
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    int count = 0;
    const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for reduction(+ : count) schedule(static)
    for (std::int64_t c = 0; c < n; ++c) {
        const auto [a, b] = candidates[c];
        count += triangles_overlap_2d(layout_triangle(layout, a), layout_triangle(layout, b)) ? 1 : 0;
    }
    return count;
}

LayoutReport layout_metrics(const Layout& layout, const EnergyParams& /*p*/)
{
    LayoutReport r;
    double sum = 0.0;
    std::vector<double> gaps;
    for (const Linkage& l : layout.linkages) {
        if (l.state == LinkageState::cut) {
            ++r.cut_count;
            continue;
        }
        const double g = gap_value(layout, l);
        r.max_gap = std::max(r.max_gap, g);
        if (l.state != LinkageState::retained) {
            continue;
        }
        gaps.push_back(g);
        sum += g;
        const std::vector<double> angles = linkage_quad_angles(layout, l);
        for (double a : angles) {
            r.max_shear_deg = std::max(r.max_shear_deg, std::abs(a - 90.0));
        }
    }
    r.retained_count = static_cast<int>(gaps.size());
    r.avg_gap = gaps.empty() ? 0.0 : sum / static_cast<double>(gaps.size());
    for (double g : gaps) {
        int bin = r.max_gap > 0.0 ? static_cast<int>(g / r.max_gap * kGapHistogramBins) : 0;
        bin = std::clamp(bin, 0, kGapHistogramBins - 1);
        ++r.gap_histogram[bin];
    }
    for (int t = 0; t < layout.triangle_count(); ++t) {
        for (int c = 0; c < 3; ++c) {
            const double len = (layout.corners[3 * t + (c + 1) % 3] - layout.corners[3 * t + c]).norm();
            const double rest = layout.rest_edges[t][c];
            r.max_edge_distortion = std::max(r.max_edge_distortion, std::abs(len - rest) / rest);
        }
    }
    r.overlap_pairs = count_overlap_pairs(layout);
    r.connected = graph_connected(layout);
    return r;
}

DistanceResult point_to_mesh_distance(const std::vector<Vec3>& points, const TargetMesh& mesh)
{
    DistanceResult out;
    out.per_point.resize(points.size());
    const TriangleBvh bvh(mesh.vertices, mesh.triangles);
    const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        out.per_point[i] = std::sqrt(bvh.nearest(points[i]).sq_dist);
    }
    double sum = 0.0;
    for (double d : out.per_point) {
        sum += d;
        out.max = std::max(out.max, d);
    }
    out.avg = points.empty() ? 0.0 : sum / static_cast<double>(points.size());
    return out;
}

std::vector<Vec3> synthetic_scan(const FlatPlate& plate, const TargetMesh& mesh, int points_per_tile, double sigma,
                                 std::uint64_t seed)
{
    if (points_per_tile < 1 || !(sigma >= 0.0)) {
        throw DomainError("synthetic_scan: need points_per_tile >= 1 and sigma >= 0");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, sigma > 0.0 ? sigma : 1.0);
    std::vector<Vec3> points;
    points.reserve(plate.tiles.size() * points_per_tile);
    for (const TileSolid& tile : plate.tiles) {
        const Tri& tri = mesh.triangles[tile.triangle];
        std::array<Vec3, 3> mid;
        for (int k = 0; k < 3; ++k) {
            const Vec3 p = tile.placement.to_plate(mesh.vertices[tri[k]]);
            mid[k] = Vec3(p.x(), p.y(), 0.0);
        }
        const Vec3 normal = tile.placement.frame.row(2).transpose();
        for (int s = 0; s < points_per_tile; ++s) {
            double a = unit(rng);
            double b = unit(rng);
            if (a + b > 1.0) {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            const Vec3 local = mid[0] + a * (mid[1] - mid[0]) + b * (mid[2] - mid[0]);
            Vec3 world = tile.placement.to_world(local);
            if (sigma > 0.0) {
                world += jitter(rng) * normal;
            }
            points.push_back(world);
        }
    }
    return points;
}

std::vector<Vec3> read_xyz(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<Vec3> points;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream ls(line);
        double x = 0;
        double y = 0;
        double z = 0;
        if (!(ls >> x >> y >> z) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected three numbers");
        }
        points.emplace_back(x, y, z);
    }
    return points;
}

void write_xyz(const std::vector<Vec3>& points, const std::filesystem::path& path)
{
    std::string text;
    for (const Vec3& p : points) {
        text += format_double(p.x()) + " " + format_double(p.y()) + " " + format_double(p.z()) + "\n";
    }
    write_text_file(path, text);
}

std::string report_text(const LayoutReport& r)
{
    std::string text;
    auto kv = [&](const std::string& k, const std::string& v) { text += k + " = " + v + "\n"; };
    kv("max_gap", format_double(r.max_gap));
    kv("avg_gap", format_double(r.avg_gap));
    std::string hist;
    for (int c : r.gap_histogram) {
        hist += (hist.empty() ? "" : " ") + std::to_string(c);
    }
    kv("gap_histogram", hist);
    kv("max_edge_distortion", format_double(r.max_edge_distortion));
    kv("max_shear_deg", format_double(r.max_shear_deg));
    kv("overlap_pairs", std::to_string(r.overlap_pairs));
    kv("cut_count", std::to_string(r.cut_count));
    kv("retained_count", std::to_string(r.retained_count));
    kv("connected", r.connected ? "true" : "false");
    return text;
}

std::string report_text(const DistanceResult& d)
{
    std::string text;
    text += "points = " + std::to_string(d.per_point.size()) + "\n";
    text += "avg_mm = " + format_double(d.avg) + "\n";
    text += "max_mm = " + format_double(d.max) + "\n";
    return text;
}

void write_report(const LayoutReport& report, const std::filesystem::path& path)
{
    write_text_file(path, report_text(report));
}

void write_report(const DistanceResult& result, const std::filesystem::path& path)
{
    write_text_file(path, report_text(result));
}

}  // namespace freeshell
