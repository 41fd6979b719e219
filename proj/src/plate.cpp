#include "freeshell/plate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <string>

#include "freeshell/error.hpp"
#include "freeshell/geometry.hpp"

namespace freeshell
{

namespace
{

constexpr int kLevels = 4;  // s = 0, s_lo, s_hi, 1

struct Line {
    Vec2 normal;
    double offset;
    [[nodiscard]] double eval(const Vec2& y) const { return normal.dot(y) - offset; }
};

struct Notch {
    Vec2 center;
    Vec2 axis;
    Vec2 perp;
    double half_width;
    [[nodiscard]] bool contains(const Vec2& y) const
    {
        const Vec2 r = y - center;
        return r.dot(axis) > 0.0 && std::abs(r.dot(perp)) < half_width;
    }
};

using Polygon = std::vector<Vec2>;

bool lex_less(const Vec2& a, const Vec2& b)
{
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

/// Split a convex polygon by a line; on-line vertices go to both sides.
std::vector<Polygon> split_polygon(const Polygon& poly, const Line& line, double eps)
{
    const std::size_t n = poly.size();
    std::vector<double> d(n);
    std::vector<int> sign(n);
    bool pos = false;
    bool neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = line.eval(poly[i]);
        sign[i] = d[i] > eps ? 1 : (d[i] < -eps ? -1 : 0);
        pos |= sign[i] > 0;
        neg |= sign[i] < 0;
    }
    if (!pos || !neg) {
        return {poly};
    }
    Polygon a;
    Polygon b;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        if (sign[i] >= 0) {
            a.push_back(poly[i]);
        }
        if (sign[i] <= 0) {
            b.push_back(poly[i]);
        }
        if (sign[i] * sign[j] < 0) {
            // Canonical endpoint order so a shared edge splits identically in both cells.
            std::size_t p = i;
            std::size_t q = j;
            if (lex_less(poly[q], poly[p])) {
                std::swap(p, q);
            }
            const double t = d[p] / (d[p] - d[q]);
            const Vec2 x = poly[p] + t * (poly[q] - poly[p]);
            a.push_back(x);
            b.push_back(x);
        }
    }
    return {a, b};
}

double polygon_area(const Polygon& p)
{
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2& u = p[i];
        const Vec2& v = p[(i + 1) % p.size()];
        a += u.x() * v.y() - u.y() * v.x();
    }
    return 0.5 * a;
}

Vec2 vertex_mean(const Polygon& p)
{
    Vec2 c = Vec2::Zero();
    for (const Vec2& v : p) {
        c += v;
    }
    return c / static_cast<double>(p.size());
}

struct PointKey {
    std::uint64_t x;
    std::uint64_t y;
    auto operator<=>(const PointKey&) const = default;
};

PointKey key_of(const Vec2& p)
{
    PointKey k{};
    // +0.0 and -0.0 must agree.
    const double x = p.x() == 0.0 ? 0.0 : p.x();
    const double y = p.y() == 0.0 ? 0.0 : p.y();
    std::memcpy(&k.x, &x, sizeof(double));
    std::memcpy(&k.y, &y, sizeof(double));
    return k;
}

Eigen::Matrix2d rotation_from_cov(const Eigen::Matrix2d& s)
{
    const double angle = std::atan2(s(1, 0) - s(0, 1), s(0, 0) + s(1, 1));
    Eigen::Matrix2d r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
}

/// Everything about one tile needed before its solid is assembled.
struct TileFrame {
    TilePlacement placement;
    std::array<int, 3> gid;
    std::array<int, 3> mesh_edge;
    /// Ruling line end points in plate coordinates: bottom (s = 0) and top (s = 1).
    std::array<Vec3, 3> bottom;
    std::array<Vec3, 3> top;
    std::array<Vec2, 3> mid;
    std::vector<Notch> notches;
    std::vector<Line> lines;
    double shift{0};
};

Vec3 ruling_point(const TileFrame& f, int k, double s)
{
    return (1.0 - s) * f.bottom[k] + s * f.top[k];
}

/// Barycentric coordinates of y in the mid triangle.
std::array<double, 3> barycentric(const TileFrame& f, const Vec2& y)
{
    const double area = signed_area_2d(f.mid[0], f.mid[1], f.mid[2]);
    const double b0 = signed_area_2d(y, f.mid[1], f.mid[2]) / area;
    const double b1 = signed_area_2d(f.mid[0], y, f.mid[2]) / area;
    return {b0, b1, 1.0 - b0 - b1};
}

// Triangle / axis-aligned box overlap by separating axes (box centered at origin).
bool tri_box_overlap(const std::array<Vec3, 3>& tri, const Vec3& half)
{
    const std::array<Vec3, 3> e{tri[1] - tri[0], tri[2] - tri[1], tri[0] - tri[2]};
    auto separated = [&](const Vec3& axis) {
        if (axis.squaredNorm() < 1e-30) {
            return false;
        }
        const double p0 = axis.dot(tri[0]);
        const double p1 = axis.dot(tri[1]);
        const double p2 = axis.dot(tri[2]);
        const double r = half.x() * std::abs(axis.x()) + half.y() * std::abs(axis.y()) + half.z() * std::abs(axis.z());
        return std::min({p0, p1, p2}) >= r || std::max({p0, p1, p2}) <= -r;
    };
    for (int a = 0; a < 3; ++a) {
        if (separated(Vec3::Unit(a))) {
            return false;
        }
    }
    if (separated(e[0].cross(e[1]))) {
        return false;
    }
    for (int a = 0; a < 3; ++a) {
        for (const Vec3& edge : e) {
            if (separated(Vec3::Unit(a).cross(edge))) {
                return false;
            }
        }
    }
    return true;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    if (std::strcmp(buf, "-0.0000") == 0) {
        return "0.0000";
    }
    return buf;
}

}  // namespace

Vec3 TilePlacement::to_plate(const Vec3& world) const
{
    const Vec3 local = frame * (world - origin3);
    const Vec2 xy = rotation * local.head<2>() + origin2;
    return {xy.x(), xy.y(), local.z()};
}

Vec3 TilePlacement::to_world(const Vec3& plate) const
{
    const Vec2 xy = rotation.transpose() * (plate.head<2>() - origin2);
    return origin3 + frame.transpose() * Vec3(xy.x(), xy.y(), plate.z());
}

PlateParams resolve_plate_params(const PlateParams& pp, double avg_edge)
{
    PlateParams out = pp;
    if (out.connector_width <= 0.0) {
        out.connector_width = 0.3 * avg_edge;
    }
    if (!(out.tile_thickness > out.connector_thickness && out.connector_thickness > 0.0)) {
        throw DomainError("plate: need tile_thickness > connector_thickness > 0");
    }
    if (!(out.clearance >= 0.0)) {
        throw DomainError("plate: clearance must be non-negative");
    }
    if (!(out.gap_rate_bound > 0.0 && out.gap_rate_bound < 1.0)) {
        throw DomainError("plate: gap_rate_bound must lie in (0, 1)");
    }
    const PrintRecipe& r = out.recipe;
    if (!(r.connector_layer_h > 0 && r.tile_layer_h > 0 && r.connector_speed > 0 && r.tile_speed > 0)) {
        throw DomainError("plate: print recipe values must be positive");
    }
    return out;
}

std::vector<TileSolid> generate_tiles(const Layout& layout, const TargetMesh& mesh, const PlateParams& pp_in,
                                      double* s_lo_out, double* s_hi_out)
{
    const PlateParams pp = resolve_plate_params(pp_in, layout.avg_edge);
    const int nt = layout.triangle_count();
    const double thick = pp.tile_thickness;
    const double half_notch = 0.5 * pp.connector_thickness + pp.clearance;
    const EdgeAdjacency adj = build_edge_adjacency(mesh.triangles, mesh.vertex_count());

    // Global notch band so every wall is cut at the same ruling parameters.
    double min_dot = 1.0;
    for (int t = 0; t < nt; ++t) {
        const int src = layout.source_map[t];
        const Vec3 n = face_normal(mesh, src);
        for (int v : mesh.triangles[src]) {
            min_dot = std::min(min_dot, n.dot(mesh.vertex_normals[v]));
        }
    }
    if (!(min_dot > 0.0)) {
        throw GeometryError("plate: a vertex normal is perpendicular to or opposite an incident face");
    }
    const double s_hi = 0.5 + half_notch / (thick * min_dot);
    const double s_lo = 1.0 - s_hi;
    if (!(s_hi < 1.0)) {
        throw GeometryError("plate: tile_thickness " + format_double(thick) + " leaves no material around a " +
                            format_double(2.0 * half_notch) + " mm notch");
    }
    if (s_lo_out) {
        *s_lo_out = s_lo;
    }
    if (s_hi_out) {
        *s_hi_out = s_hi;
    }
    const std::array<double, kLevels> levels{0.0, s_lo, s_hi, 1.0};
    const double eps = 1e-9 * layout.avg_edge;

    // Placement, ruling lines and notch lines per tile.
    std::vector<TileFrame> frames(nt);
    for (int t = 0; t < nt; ++t) {
        TileFrame& f = frames[t];
        const int src = layout.source_map[t];
        const Tri& tri = mesh.triangles[src];
        std::array<Vec3, 3> p{mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
        const Vec3 n = face_normal(mesh, src);
        const Vec3 e1 = (p[1] - p[0]).normalized();
        const Vec3 e2 = n.cross(e1);
        f.placement.origin3 = (p[0] + p[1] + p[2]) / 3.0;
        f.placement.frame.row(0) = e1.transpose();
        f.placement.frame.row(1) = e2.transpose();
        f.placement.frame.row(2) = n.transpose();
        std::array<Vec2, 3> x{layout.corners[3 * t], layout.corners[3 * t + 1], layout.corners[3 * t + 2]};
        if (!(signed_area_2d(x[0], x[1], x[2]) > 0.0)) {
            throw GeometryError("plate: layout triangle " + std::to_string(t) + " is inverted or degenerate");
        }
        const Vec2 cx = (x[0] + x[1] + x[2]) / 3.0;
        Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
        for (int k = 0; k < 3; ++k) {
            const Vec2 q = (f.placement.frame * (p[k] - f.placement.origin3)).head<2>();
            cov += (x[k] - cx) * q.transpose();
        }
        f.placement.rotation = rotation_from_cov(cov);
        f.placement.origin2 = cx;
        for (int k = 0; k < 3; ++k) {
            const Vec3 nk = mesh.vertex_normals[tri[k]];
            f.gid[k] = tri[k];
            f.mesh_edge[k] = adj.tri_edges[src][k];
            f.bottom[k] = f.placement.to_plate(p[k] - 0.5 * thick * nk);
            f.top[k] = f.placement.to_plate(p[k] + 0.5 * thick * nk);
            f.mid[k] = f.placement.to_plate(p[k]).head<2>();
            const Vec3 tangential = nk - nk.dot(n) * n;
            f.shift = std::max(f.shift, (s_hi - 0.5) * thick * tangential.norm());
        }
        for (double s : {0.0, 1.0}) {
            const Vec3 a = ruling_point(f, 0, s);
            const Vec3 b = ruling_point(f, 1, s);
            const Vec3 c = ruling_point(f, 2, s);
            if (!(signed_area_2d(a.head<2>(), b.head<2>(), c.head<2>()) > 0.0)) {
                throw GeometryError("plate: tile " + std::to_string(t) +
                                    " self-intersects; tile_thickness exceeds the local feature size");
            }
        }
    }
    for (int n = 0; n < static_cast<int>(layout.linkages.size()); ++n) {
        const Linkage& l = layout.linkages[n];
        if (l.state == LinkageState::cut) {
            continue;
        }
        for (const auto& [self, other] : {std::pair{l.tri_a, l.tri_b}, std::pair{l.tri_b, l.tri_a}}) {
            TileFrame& f = frames[self];
            const Vec2 c = f.placement.origin2;
            const Vec2 d = frames[other].placement.origin2 - c;
            if (!(d.norm() > 0.0)) {
                throw GeometryError("plate: tiles " + std::to_string(self) + " and " + std::to_string(other) +
                                    " have coincident centroids");
            }
            Notch notch;
            notch.center = c;
            notch.axis = d.normalized();
            notch.perp = Vec2(-notch.axis.y(), notch.axis.x());
            notch.half_width = 0.5 * pp.connector_width + pp.clearance + f.shift;
            f.notches.push_back(notch);
            f.lines.push_back({notch.perp, notch.perp.dot(c) + notch.half_width});
            f.lines.push_back({notch.perp, notch.perp.dot(c) - notch.half_width});
            f.lines.push_back({notch.axis, notch.axis.dot(c)});
        }
    }

    // Breakpoints along every mesh edge: own line crossings of both incident tiles.
    std::vector<std::vector<double>> breaks(adj.edges.size(), std::vector<double>{0.0, 1.0});
    auto edge_ends = [&](const TileFrame& f, int k) {
        // Parameter u runs from the lower global vertex id.
        const int a = k;
        const int b = (k + 1) % 3;
        return f.gid[a] < f.gid[b] ? std::pair{a, b} : std::pair{b, a};
    };
    for (int t = 0; t < nt; ++t) {
        const TileFrame& f = frames[t];
        for (int k = 0; k < 3; ++k) {
            const auto [lo, hi] = edge_ends(f, k);
            const Vec2 a = f.mid[lo];
            const Vec2 b = f.mid[hi];
            for (const Line& line : f.lines) {
                const double denom = line.normal.dot(b - a);
                if (std::abs(denom) < 1e-12) {
                    continue;
                }
                const double u = -line.eval(a) / denom;
                if (u > 1e-9 && u < 1.0 - 1e-9) {
                    breaks[f.mesh_edge[k]].push_back(u);
                }
            }
        }
    }
    for (auto& b : breaks) {
        std::sort(b.begin(), b.end());
        std::vector<double> merged;
        for (double u : b) {
            if (merged.empty() || u - merged.back() > 1e-9) {
                merged.push_back(u);
            }
        }
        b = std::move(merged);
    }

    std::vector<TileSolid> tiles(nt);
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < nt; ++t) {
        const TileFrame& f = frames[t];
        TileSolid& tile = tiles[t];
        tile.triangle = t;
        tile.placement = f.placement;
        tile.solid.name = "tile_" + std::to_string(t);

        // Boundary polygon with every breakpoint; remember (edge, breakpoint index) per point.
        struct BoundaryInfo {
            int edge;
            int index;
            double u;
        };
        Polygon boundary;
        std::map<PointKey, std::vector<BoundaryInfo>> binfo;
        for (int k = 0; k < 3; ++k) {
            const auto [lo, hi] = edge_ends(f, k);
            const std::vector<double>& br = breaks[f.mesh_edge[k]];
            const int nb = static_cast<int>(br.size());
            auto point_at = [&](int idx) {
                const double u = br[idx];
                return idx == 0 ? f.mid[lo] : (idx == nb - 1 ? f.mid[hi] : Vec2(f.mid[lo] + u * (f.mid[hi] - f.mid[lo])));
            };
            const bool forward = lo == k;
            for (int s = 0; s < nb - 1; ++s) {
                const int idx = forward ? s : nb - 1 - s;
                const Vec2 pt = point_at(idx);
                boundary.push_back(pt);
                binfo[key_of(pt)].push_back({k, idx, br[idx]});
            }
            const int last = forward ? nb - 1 : 0;
            binfo[key_of(point_at(last))].push_back({k, last, br[last]});
        }

        std::vector<Polygon> cells{boundary};
        for (const Line& line : f.lines) {
            std::vector<Polygon> next;
            for (const Polygon& cell : cells) {
                for (Polygon& piece : split_polygon(cell, line, eps)) {
                    next.push_back(std::move(piece));
                }
            }
            cells = std::move(next);
        }
        std::vector<char> is_notch(cells.size(), 0);
        std::map<std::pair<PointKey, PointKey>, int> edge_cell;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const Vec2 centroid = vertex_mean(cells[c]);
            for (const Notch& n : f.notches) {
                if (n.contains(centroid)) {
                    is_notch[c] = 1;
                }
            }
            for (std::size_t i = 0; i < cells[c].size(); ++i) {
                edge_cell[{key_of(cells[c][i]), key_of(cells[c][(i + 1) % cells[c].size()])}] = static_cast<int>(c);
            }
        }

        Solid& solid = tile.solid;
        std::map<std::pair<PointKey, int>, int> vindex;
        auto vertex = [&](const Vec2& y, int level) {
            const auto key = std::pair{key_of(y), level};
            auto it = vindex.find(key);
            if (it != vindex.end()) {
                return it->second;
            }
            const double s = levels[level];
            Vec3 pos;
            auto bi = binfo.find(key_of(y));
            if (bi != binfo.end()) {
                const BoundaryInfo& info = bi->second.front();
                const auto [lo, hi] = edge_ends(f, info.edge);
                const std::vector<double>& br = breaks[f.mesh_edge[info.edge]];
                if (info.index == 0) {
                    pos = ruling_point(f, lo, s);
                } else if (info.index == static_cast<int>(br.size()) - 1) {
                    pos = ruling_point(f, hi, s);
                } else {
                    pos = (1.0 - info.u) * ruling_point(f, lo, s) + info.u * ruling_point(f, hi, s);
                }
            } else {
                const auto b = barycentric(f, y);
                pos = b[0] * ruling_point(f, 0, s) + b[1] * ruling_point(f, 1, s) + b[2] * ruling_point(f, 2, s);
            }
            const int id = static_cast<int>(solid.vertices.size());
            solid.vertices.push_back(pos);
            vindex.emplace(key, id);
            return id;
        };
        auto add_fan = [&](const Polygon& cell, int level, bool up) {
            const Vec2 c = vertex_mean(cell);
            const int ci = vertex(c, level);
            for (std::size_t i = 0; i < cell.size(); ++i) {
                const int a = vertex(cell[i], level);
                const int b = vertex(cell[(i + 1) % cell.size()], level);
                solid.triangles.push_back(up ? Tri{ci, a, b} : Tri{ci, b, a});
            }
        };
        for (std::size_t c = 0; c < cells.size(); ++c) {
            add_fan(cells[c], 0, false);
            add_fan(cells[c], 3, true);
            if (is_notch[c]) {
                add_fan(cells[c], 1, true);
                add_fan(cells[c], 2, false);
            }
        }

        // Outer walls, split into the three bands.
        const std::size_t nbnd = boundary.size();
        for (std::size_t i = 0; i < nbnd; ++i) {
            const Vec2& p = boundary[i];
            const Vec2& q = boundary[(i + 1) % nbnd];
            // The edge this segment lies on is the one both end points share.
            const BoundaryInfo* ip = nullptr;
            const BoundaryInfo* iq = nullptr;
            for (const BoundaryInfo& a : binfo[key_of(p)]) {
                for (const BoundaryInfo& b : binfo[key_of(q)]) {
                    if (a.edge == b.edge) {
                        ip = &a;
                        iq = &b;
                    }
                }
            }
            const auto owner = edge_cell.find({key_of(p), key_of(q)});
            const bool notch_segment = owner != edge_cell.end() && is_notch[owner->second];
            const bool u_increases = iq->index > ip->index;
            for (int band = 0; band < 3; ++band) {
                if (band == 1 && notch_segment) {
                    continue;
                }
                const int l1 = band;
                const int l2 = band + 1;
                const int p1 = vertex(p, l1);
                const int q1 = vertex(q, l1);
                const int q2 = vertex(q, l2);
                const int p2 = vertex(p, l2);
                const std::pair kp1{ip->index, l1};
                const std::pair kq1{iq->index, l1};
                const std::pair kq2{iq->index, l2};
                const std::pair kp2{ip->index, l2};
                const int edge = f.mesh_edge[ip->edge];
                if (u_increases) {
                    solid.triangles.push_back({p1, q1, q2});
                    tile.walls.push_back({edge, {kp1, kq1, kq2}, {p1, q1, q2}});
                    solid.triangles.push_back({p1, q2, p2});
                    tile.walls.push_back({edge, {kp1, kq2, kp2}, {p1, q2, p2}});
                } else {
                    solid.triangles.push_back({p1, q1, p2});
                    tile.walls.push_back({edge, {kp1, kq1, kp2}, {p1, q1, p2}});
                    solid.triangles.push_back({q1, q2, p2});
                    tile.walls.push_back({edge, {kq1, kq2, kp2}, {q1, q2, p2}});
                }
            }
        }

        // Notch side walls between material and notch cells.
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (is_notch[c]) {
                continue;
            }
            const Polygon& cell = cells[c];
            for (std::size_t i = 0; i < cell.size(); ++i) {
                const Vec2& p = cell[i];
                const Vec2& q = cell[(i + 1) % cell.size()];
                const auto other = edge_cell.find({key_of(q), key_of(p)});
                if (other == edge_cell.end() || !is_notch[other->second]) {
                    continue;
                }
                const int p1 = vertex(p, 1);
                const int q1 = vertex(q, 1);
                const int q2 = vertex(q, 2);
                const int p2 = vertex(p, 2);
                solid.triangles.push_back({p1, q1, q2});
                solid.triangles.push_back({p1, q2, p2});
            }
        }
        tile.notch_margin = f.shift;
        tile.notch_count = static_cast<int>(f.notches.size());
    }
    return tiles;
}

std::vector<ConnectorSolid> generate_connectors(const Layout& layout, const PlateParams& pp_in)
{
    const PlateParams pp = resolve_plate_params(pp_in, layout.avg_edge);
    std::vector<ConnectorSolid> out;
    const double hw = 0.5 * pp.connector_width;
    const double hz = 0.5 * pp.connector_thickness;
    for (int n = 0; n < static_cast<int>(layout.linkages.size()); ++n) {
        const Linkage& l = layout.linkages[n];
        if (l.state == LinkageState::cut) {
            continue;
        }
        ConnectorSolid c;
        c.linkage = n;
        c.start = triangle_centroid(layout, l.tri_a);
        c.end = triangle_centroid(layout, l.tri_b);
        const Vec2 d = c.end - c.start;
        c.length = d.norm();
        c.width = pp.connector_width;
        if (!(c.length > 0.0)) {
            throw GeometryError("plate: linkage " + std::to_string(n) + " joins coincident centroids");
        }
        const Vec2 a = d / c.length;
        const Vec2 p(-a.y(), a.x());
        c.solid.name = "connector_" + std::to_string(n);
        for (const Vec2& end : {c.start, c.end}) {
            for (double sp : {-1.0, 1.0}) {
                for (double sz : {-1.0, 1.0}) {
                    const Vec2 xy = end + sp * hw * p;
                    c.solid.vertices.emplace_back(xy.x(), xy.y(), sz * hz);
                }
            }
        }
        // Vertex index = 4 * end + 2 * side + top.
        c.solid.triangles = {{0, 1, 3}, {0, 3, 2}, {4, 6, 7}, {4, 7, 5}, {0, 4, 5}, {0, 5, 1},
                             {2, 3, 7}, {2, 7, 6}, {0, 2, 6}, {0, 6, 4}, {1, 5, 7}, {1, 7, 3}};
        out.push_back(std::move(c));
    }
    return out;
}

PrintRecipe print_recipe(const PlateParams& pp)
{
    return pp.recipe;
}

std::string format_recipe(const PrintRecipe& r)
{
    std::string s;
    s += "connector_layer_h = " + format_double(r.connector_layer_h) + "\n";
    s += "connector_speed = " + format_double(r.connector_speed) + "\n";
    s += "connector_fill = " + r.connector_fill + "\n";
    s += "tile_layer_h = " + format_double(r.tile_layer_h) + "\n";
    s += "tile_speed = " + format_double(r.tile_speed) + "\n";
    s += "tile_speed_note = tiles stop shrinking at print speeds >= 80 mm/s\n";
    s += "activation = " + r.activation + "\n";
    return s;
}

FlatPlate generate_plate(const Layout& layout, const TargetMesh& mesh, const PlateParams& pp_in)
{
    const PlateParams pp = resolve_plate_params(pp_in, layout.avg_edge);
    FlatPlate plate;
    plate.tiles = generate_tiles(layout, mesh, pp, &plate.s_lo, &plate.s_hi);
    plate.connectors = generate_connectors(layout, pp);
    plate.recipe = print_recipe(pp);
    for (int n = 0; n < static_cast<int>(layout.linkages.size()); ++n) {
        const Linkage& l = layout.linkages[n];
        if (l.state == LinkageState::cut) {
            const auto& x = layout.corners;
            plate.interlocks.push_back({n, (x[l.i] + x[l.j] + x[l.k] + x[l.m]) / 4.0});
            continue;
        }
        const double b = (triangle_centroid(layout, l.tri_a) - triangle_centroid(layout, l.tri_b)).norm();
        const double rate = gap_value(layout, l) / b;
        if (rate > pp.gap_rate_bound) {
            plate.gap_rate_violations.push_back(n);
        }
    }
    if (!plate.gap_rate_violations.empty()) {
        std::string msg = "gap rate above " + format_double(pp.gap_rate_bound) + " on linkages";
        for (int n : plate.gap_rate_violations) {
            msg += " " + std::to_string(n);
        }
        plate.warnings.push_back(msg);
    }
    return plate;
}

std::vector<ClearanceViolation> check_clearance(const FlatPlate& plate, const Layout& layout, const PlateParams& pp_in)
{
    const PlateParams pp = resolve_plate_params(pp_in, layout.avg_edge);
    const double tol = 1e-9 * layout.avg_edge;
    std::vector<ClearanceViolation> out;
    for (const ConnectorSolid& c : plate.connectors) {
        const Linkage& l = layout.linkages[c.linkage];
        const Vec2 a = (c.end - c.start) / c.length;
        const Vec2 p(-a.y(), a.x());
        for (int t : {l.tri_a, l.tri_b}) {
            const TileSolid& tile = plate.tiles[t];
            const double margin = tile.notch_margin + tol;
            const double lo = margin;
            const double hi = c.length - margin;
            if (!(hi > lo)) {
                continue;
            }
            // Clearance box in connector coordinates, centered at the origin.
            const Vec3 half(0.5 * (hi - lo), 0.5 * pp.connector_width + pp.clearance - tol,
                            0.5 * pp.connector_thickness + pp.clearance - tol);
            const double mid_u = 0.5 * (lo + hi);
            auto local = [&](const Vec3& v) {
                const Vec2 r = v.head<2>() - c.start;
                return Vec3(r.dot(a) - mid_u, r.dot(p), v.z());
            };
            for (const Tri& tri : tile.solid.triangles) {
                const std::array<Vec3, 3> q{local(tile.solid.vertices[tri[0]]), local(tile.solid.vertices[tri[1]]),
                                            local(tile.solid.vertices[tri[2]])};
                if (tri_box_overlap(q, half)) {
                    const Vec3 centroid = (q[0] + q[1] + q[2]) / 3.0;
                    out.push_back({c.linkage, t, std::abs(centroid.y()), std::abs(centroid.z())});
                    break;
                }
            }
        }
    }
    return out;
}

SolidCheck check_solid(const Solid& solid)
{
    SolidCheck out;
    std::map<std::pair<int, int>, int> directed;
    for (const Tri& t : solid.triangles) {
        for (int c = 0; c < 3; ++c) {
            ++directed[{t[c], t[(c + 1) % 3]}];
        }
    }
    out.closed = true;
    out.oriented = true;
    std::size_t undirected = 0;
    for (const auto& [e, count] : directed) {
        const auto rev = directed.find({e.second, e.first});
        const int back = rev == directed.end() ? 0 : rev->second;
        if (count != 1 || back != 1) {
            out.oriented = false;
        }
        if (count + back != 2) {
            out.closed = false;
        }
        if (e.first < e.second || rev == directed.end()) {
            ++undirected;
        }
    }
    out.euler = static_cast<int>(solid.vertices.size()) - static_cast<int>(undirected) +
                static_cast<int>(solid.triangles.size());
    for (const Tri& t : solid.triangles) {
        out.volume += solid.vertices[t[0]].dot(solid.vertices[t[1]].cross(solid.vertices[t[2]])) / 6.0;
    }
    return out;
}

FoldingReport folding_check(const FlatPlate& plate, const Layout& layout)
{
    FoldingReport report;
    using Key = std::array<std::pair<int, int>, 3>;
    auto sorted_keys = [](Key k) {
        std::sort(k.begin(), k.end());
        return k;
    };
    for (const Linkage& l : layout.linkages) {
        if (l.state == LinkageState::cut) {
            continue;
        }
        const TileSolid& ta = plate.tiles[l.tri_a];
        const TileSolid& tb = plate.tiles[l.tri_b];
        std::map<Key, const WallFace*> faces_b;
        for (const WallFace& w : tb.walls) {
            if (w.mesh_edge == l.mesh_edge) {
                faces_b[sorted_keys(w.keys)] = &w;
            }
        }
        for (const WallFace& w : ta.walls) {
            if (w.mesh_edge != l.mesh_edge) {
                continue;
            }
            const bool middle = std::all_of(w.keys.begin(), w.keys.end(),
                                            [](const auto& k) { return k.second == 1 || k.second == 2; });
            const auto it = faces_b.find(sorted_keys(w.keys));
            if (it == faces_b.end()) {
                if (!middle) {
                    ++report.unmatched_faces;
                }
                continue;
            }
            ++report.matched_faces;
            for (int c = 0; c < 3; ++c) {
                const Vec3 pa = ta.placement.to_world(ta.solid.vertices[w.vertices[c]]);
                for (int d = 0; d < 3; ++d) {
                    if (it->second->keys[d] == w.keys[c]) {
                        const Vec3 pb = tb.placement.to_world(tb.solid.vertices[it->second->vertices[d]]);
                        report.max_mismatch = std::max(report.max_mismatch, (pa - pb).norm());
                    }
                }
            }
        }
    }
    return report;
}

std::string plate_obj_text(const FlatPlate& plate)
{
    std::string text;
    int base = 1;
    auto emit = [&](const Solid& s) {
        text += "g " + s.name + "\n";
        for (const Vec3& v : s.vertices) {
            text += "v " + format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z()) + "\n";
        }
        for (const Tri& t : s.triangles) {
            text += "f " + std::to_string(t[0] + base) + " " + std::to_string(t[1] + base) + " " +
                    std::to_string(t[2] + base) + "\n";
        }
        base += static_cast<int>(s.vertices.size());
    };
    for (const TileSolid& t : plate.tiles) {
        emit(t.solid);
    }
    for (const ConnectorSolid& c : plate.connectors) {
        emit(c.solid);
    }
    return text;
}

void export_plate_mesh(const FlatPlate& plate, const std::filesystem::path& path, MeshFormat format)
{
    if (format == MeshFormat::OBJ) {
        write_text_file(path, plate_obj_text(plate));
        return;
    }
    std::string facets;
    std::uint32_t count = 0;
    auto emit = [&](const Solid& s) {
        for (const Tri& t : s.triangles) {
            append_stl_facet(facets, s.vertices[t[0]], s.vertices[t[1]], s.vertices[t[2]]);
            ++count;
        }
    };
    for (const TileSolid& t : plate.tiles) {
        emit(t.solid);
    }
    for (const ConnectorSolid& c : plate.connectors) {
        emit(c.solid);
    }
    write_stl_file(path, facets, count);
}

std::string layout_svg_text(const Layout& layout, const FlatPlate& plate)
{
    constexpr double kMargin = 5.0;
    constexpr double kBar = 10.0;
    Eigen::AlignedBox2d box;
    for (const Vec2& p : layout.corners) {
        box.extend(p);
    }
    if (box.isEmpty()) {
        box.extend(Vec2::Zero());
    }
    const double min_x = box.min().x() - kMargin;
    const double max_y = box.max().y() + kMargin;
    const double width = box.sizes().x() + 2.0 * kMargin;
    const double height = box.sizes().y() + 2.0 * kMargin + kBar;
    auto sx = [&](double x) { return fmt(x - min_x); };
    auto sy = [&](double y) { return fmt(max_y - y); };

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(width) + "mm\" height=\"" +
         fmt(height) + "mm\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
    s += "<g id=\"tiles\" fill=\"#d9d9d9\" stroke=\"#000000\" stroke-width=\"0.1\">\n";
    for (int t = 0; t < layout.triangle_count(); ++t) {
        const Vec2& a = layout.corners[3 * t];
        const Vec2& b = layout.corners[3 * t + 1];
        const Vec2& c = layout.corners[3 * t + 2];
        s += "<path id=\"tile_" + std::to_string(t) + "\" d=\"M " + sx(a.x()) + " " + sy(a.y()) + " L " + sx(b.x()) +
             " " + sy(b.y()) + " L " + sx(c.x()) + " " + sy(c.y()) + " Z\"/>\n";
    }
    s += "</g>\n<g id=\"connectors\" fill=\"#4a90d9\" stroke=\"none\">\n";
    for (const ConnectorSolid& c : plate.connectors) {
        const Vec2 d = c.end - c.start;
        const double angle = -std::atan2(d.y(), d.x()) * 180.0 / 3.14159265358979323846;
        s += "<rect id=\"connector_" + std::to_string(c.linkage) + "\" x=\"0\" y=\"" + fmt(-0.5 * c.width) +
             "\" width=\"" + fmt(c.length) + "\" height=\"" + fmt(c.width) + "\" transform=\"translate(" +
             sx(c.start.x()) + " " + sy(c.start.y()) + ") rotate(" + fmt(angle) + ")\"/>\n";
    }
    s += "</g>\n<g id=\"seams\" stroke=\"#d0021b\" stroke-width=\"0.2\" stroke-dasharray=\"1 0.5\" fill=\"none\">\n";
    for (const InterlockAnnotation& a : plate.interlocks) {
        const Linkage& l = layout.linkages[a.linkage];
        for (const auto& [p, q] : {std::pair{l.i, l.j}, std::pair{l.k, l.m}}) {
            const Vec2& u = layout.corners[p];
            const Vec2& v = layout.corners[q];
            s += "<line x1=\"" + sx(u.x()) + "\" y1=\"" + sy(u.y()) + "\" x2=\"" + sx(v.x()) + "\" y2=\"" +
                 sy(v.y()) + "\"/>\n";
        }
        s += "<circle id=\"interlock_" + std::to_string(a.linkage) + "\" cx=\"" + sx(a.midpoint.x()) + "\" cy=\"" +
             sy(a.midpoint.y()) + "\" r=\"0.8\" stroke-dasharray=\"none\"/>\n";
    }
    s += "</g>\n";
    const double bar_y = height - 0.5 * kBar;
    s += "<g id=\"scale\" stroke=\"#000000\" stroke-width=\"0.3\">\n";
    s += "<line x1=\"" + fmt(kMargin) + "\" y1=\"" + fmt(bar_y) + "\" x2=\"" + fmt(kMargin + kBar) + "\" y2=\"" +
         fmt(bar_y) + "\"/>\n";
    s += "<text x=\"" + fmt(kMargin + kBar + 1.0) + "\" y=\"" + fmt(bar_y + 1.0) +
         "\" font-size=\"3\" stroke=\"none\">10 mm</text>\n";
    s += "</g>\n</svg>\n";
    return s;
}

void export_layout_svg(const Layout& layout, const FlatPlate& plate, const std::filesystem::path& path)
{
    write_text_file(path, layout_svg_text(layout, plate));
}

}  // namespace freeshell
