#include "freeshell/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

#include "freeshell/error.hpp"
#include "freeshell/geometry.hpp"

namespace freeshell
{

namespace
{

/// Mutable triangle mesh with per-vertex face lists, used only while remeshing.
class WorkMesh
{
public:
    explicit WorkMesh(const TargetMesh& mesh)
        : pos(mesh.vertices), boundary(mesh.boundary_flags), faces(mesh.triangles),
          vdel(mesh.vertex_count(), false), fdel(mesh.triangle_count(), false), vfaces(mesh.vertex_count())
    {
        for (std::size_t f = 0; f < faces.size(); ++f) {
            for (int v : faces[f]) {
                vfaces[v].push_back(static_cast<int>(f));
            }
        }
    }

    std::vector<Vec3> pos;
    std::vector<bool> boundary;
    std::vector<Tri> faces;
    std::vector<bool> vdel;
    std::vector<bool> fdel;
    std::vector<std::vector<int>> vfaces;

    /// Unique edges (a < b) in order of first appearance.
    [[nodiscard]] std::vector<std::pair<int, int>> edges() const
    {
        std::vector<std::pair<int, int>> out;
        std::unordered_map<std::uint64_t, bool> seen;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (fdel[f]) {
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                int a = faces[f][c];
                int b = faces[f][(c + 1) % 3];
                if (a > b) {
                    std::swap(a, b);
                }
                if (seen.emplace(key(a, b), true).second) {
                    out.emplace_back(a, b);
                }
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<int> edge_faces(int a, int b) const
    {
        std::vector<int> out;
        for (int f : vfaces[a]) {
            const Tri& t = faces[f];
            if (t[0] == b || t[1] == b || t[2] == b) {
                out.push_back(f);
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<int> neighbors(int v) const
    {
        std::vector<int> out;
        for (int f : vfaces[v]) {
            for (int w : faces[f]) {
                if (w != v && std::find(out.begin(), out.end(), w) == out.end()) {
                    out.push_back(w);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    [[nodiscard]] Vec3 face_normal_raw(const Tri& t) const
    {
        return (pos[t[1]] - pos[t[0]]).cross(pos[t[2]] - pos[t[0]]);
    }

    [[nodiscard]] Vec3 vertex_normal(int v) const
    {
        Vec3 n = Vec3::Zero();
        for (int f : vfaces[v]) {
            n += face_normal_raw(faces[f]);
        }
        const double len = n.norm();
        return len > 0 ? Vec3(n / len) : Vec3::Zero();
    }

    void split(int a, int b)
    {
        const int m = static_cast<int>(pos.size());
        const std::vector<int> ef = edge_faces(a, b);
        pos.push_back(0.5 * (pos[a] + pos[b]));
        boundary.push_back(ef.size() == 1);
        vdel.push_back(false);
        vfaces.emplace_back();
        for (int f : ef) {
            Tri t = faces[f];
            // Rotate so the edge is (t[0], t[1]) in face order.
            while (!((t[0] == a && t[1] == b) || (t[0] == b && t[1] == a))) {
                t = {t[1], t[2], t[0]};
            }
            const int p = t[0];
            const int q = t[1];
            const int c = t[2];
            faces[f] = {p, m, c};
            const int nf = static_cast<int>(faces.size());
            faces.push_back({m, q, c});
            fdel.push_back(false);
            std::erase(vfaces[q], f);
            vfaces[q].push_back(nf);
            vfaces[c].push_back(nf);
            vfaces[m].push_back(f);
            vfaces[m].push_back(nf);
        }
    }

    /// Move u onto v (placed at target), removing the faces of edge (u, v).
    void collapse(int u, int v, const Vec3& target)
    {
        const std::vector<int> ef = edge_faces(u, v);
        for (int f : ef) {
            fdel[f] = true;
            for (int w : faces[f]) {
                std::erase(vfaces[w], f);
            }
        }
        for (int f : vfaces[u]) {
            for (int& w : faces[f]) {
                if (w == u) {
                    w = v;
                }
            }
            vfaces[v].push_back(f);
        }
        vfaces[u].clear();
        vdel[u] = true;
        pos[v] = target;
    }

    void flip(int a, int b)
    {
        const std::vector<int> ef = edge_faces(a, b);
        Tri t0 = faces[ef[0]];
        while (!(t0[0] == a && t0[1] == b) && !(t0[0] == b && t0[1] == a)) {
            t0 = {t0[1], t0[2], t0[0]};
        }
        const int p = t0[0];
        const int q = t0[1];
        const int c = t0[2];
        const int d = opposite(ef[1], p, q);
        // (p, q, c) and (q, p, d) become (c, p, d) and (d, q, c).
        faces[ef[0]] = {c, p, d};
        faces[ef[1]] = {d, q, c};
        std::erase(vfaces[q], ef[0]);
        std::erase(vfaces[p], ef[1]);
        vfaces[d].push_back(ef[0]);
        vfaces[c].push_back(ef[1]);
    }

    [[nodiscard]] int opposite(int f, int a, int b) const
    {
        for (int w : faces[f]) {
            if (w != a && w != b) {
                return w;
            }
        }
        return -1;
    }

    [[nodiscard]] int valence(int v) const { return static_cast<int>(neighbors(v).size()); }

    [[nodiscard]] TargetMesh compact() const
    {
        std::vector<int> remap(pos.size(), -1);
        std::vector<Vec3> verts;
        for (std::size_t v = 0; v < pos.size(); ++v) {
            if (!vdel[v] && !vfaces[v].empty()) {
                remap[v] = static_cast<int>(verts.size());
                verts.push_back(pos[v]);
            }
        }
        std::vector<Tri> tris;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (!fdel[f]) {
                tris.push_back({remap[faces[f][0]], remap[faces[f][1]], remap[faces[f][2]]});
            }
        }
        return make_target_mesh(std::move(verts), std::move(tris));
    }

private:
    static std::uint64_t key(int a, int b)
    {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
    }
};

double point_line_distance(const Vec3& p, const Vec3& a, const Vec3& b)
{
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) {
        return (p - a).norm();
    }
    return (p - a - ab * (ab.dot(p - a) / len2)).norm();
}

void split_long_edges(WorkMesh& wm, double high)
{
    const double high2 = high * high;
    for (const auto& [a, b] : wm.edges()) {
        if ((wm.pos[a] - wm.pos[b]).squaredNorm() > high2) {
            wm.split(a, b);
        }
    }
}

bool try_collapse(WorkMesh& wm, int u, int v, double high)
{
    if (wm.vdel[u] || wm.vdel[v]) {
        return false;
    }
    const std::vector<int> ef = wm.edge_faces(u, v);
    if (ef.empty()) {
        return false;
    }
    if (wm.boundary[u] && !wm.boundary[v]) {
        std::swap(u, v);
    }
    if (wm.boundary[u]) {
        // Both on the boundary: only along a boundary edge, and only when u
        // sits on a straight run so the boundary polyline is unchanged.
        if (ef.size() != 1) {
            return false;
        }
        int w = -1;
        for (int n : wm.neighbors(u)) {
            if (n != v && wm.boundary[n] && wm.edge_faces(u, n).size() == 1) {
                w = n;
            }
        }
        if (w < 0 || point_line_distance(wm.pos[u], wm.pos[w], wm.pos[v]) > 1e-9 * high) {
            return false;
        }
    }
    // Link condition.
    const std::vector<int> nu = wm.neighbors(u);
    const std::vector<int> nv = wm.neighbors(v);
    std::vector<int> common;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));
    if (common.size() != ef.size()) {
        return false;
    }
    for (int f : ef) {
        const int c = wm.opposite(f, u, v);
        if (wm.vfaces[c].size() <= 1) {
            return false;
        }
    }
    if (nu.size() + nv.size() <= 4 + ef.size()) {
        return false;  // would collapse a tiny closed patch
    }
    const Vec3 target = wm.boundary[v] ? wm.pos[v] : Vec3(0.5 * (wm.pos[u] + wm.pos[v]));
    const double high2 = high * high;
    for (int n : nu) {
        if (n != v && (wm.pos[n] - target).squaredNorm() > high2) {
            return false;
        }
    }
    for (int n : nv) {
        if (n != u && (wm.pos[n] - target).squaredNorm() > high2) {
            return false;
        }
    }
    // Surviving faces must keep their orientation.
    for (int x : {u, v}) {
        for (int f : wm.vfaces[x]) {
            if (std::find(ef.begin(), ef.end(), f) != ef.end()) {
                continue;
            }
            Tri t = wm.faces[f];
            const Vec3 before = wm.face_normal_raw(t);
            std::array<Vec3, 3> p;
            for (int c = 0; c < 3; ++c) {
                p[c] = (t[c] == u || t[c] == v) ? target : wm.pos[t[c]];
            }
            const Vec3 after = (p[1] - p[0]).cross(p[2] - p[0]);
            if (after.dot(before) <= 0.2 * before.norm() * after.norm() || after.norm() <= 1e-12 * high2) {
                return false;
            }
        }
    }
    wm.collapse(u, v, target);
    return true;
}

void collapse_short_edges(WorkMesh& wm, double low, double high)
{
    const double low2 = low * low;
    for (const auto& [a, b] : wm.edges()) {
        if (wm.vdel[a] || wm.vdel[b]) {
            continue;
        }
        if (wm.edge_faces(a, b).empty()) {
            continue;
        }
        if ((wm.pos[a] - wm.pos[b]).squaredNorm() < low2) {
            try_collapse(wm, a, b, high);
        }
    }
}

void flip_for_valence(WorkMesh& wm)
{
    auto target = [&](int v) { return wm.boundary[v] ? 4 : 6; };
    for (const auto& [a, b] : wm.edges()) {
        const std::vector<int> ef = wm.edge_faces(a, b);
        if (ef.size() != 2) {
            continue;
        }
        const int c = wm.opposite(ef[0], a, b);
        const int d = wm.opposite(ef[1], a, b);
        if (c == d || !wm.edge_faces(c, d).empty()) {
            continue;
        }
        const int va = wm.valence(a);
        const int vb = wm.valence(b);
        const int vc = wm.valence(c);
        const int vd = wm.valence(d);
        if (va <= 3 || vb <= 3) {
            continue;
        }
        auto sq = [](int x) { return x * x; };
        const int before =
            sq(va - target(a)) + sq(vb - target(b)) + sq(vc - target(c)) + sq(vd - target(d));
        const int after = sq(va - 1 - target(a)) + sq(vb - 1 - target(b)) + sq(vc + 1 - target(c)) +
                          sq(vd + 1 - target(d));
        if (after >= before) {
            continue;
        }
        // Geometric validity: both new faces agree with the old surface normal.
        const Vec3 n_old = wm.face_normal_raw(wm.faces[ef[0]]).normalized() +
                           wm.face_normal_raw(wm.faces[ef[1]]).normalized();
        Tri t0 = wm.faces[ef[0]];
        while (!(t0[0] == a && t0[1] == b) && !(t0[0] == b && t0[1] == a)) {
            t0 = {t0[1], t0[2], t0[0]};
        }
        const Tri n0{c, t0[0], d};
        const Tri n1{d, t0[1], c};
        const Vec3 f0 = wm.face_normal_raw(n0);
        const Vec3 f1 = wm.face_normal_raw(n1);
        if (f0.dot(n_old) <= 0.2 * f0.norm() * n_old.norm() || f1.dot(n_old) <= 0.2 * f1.norm() * n_old.norm()) {
            continue;
        }
        wm.flip(a, b);
    }
}

void tangential_relax(WorkMesh& wm, const TriangleBvh& surface)
{
    std::vector<Vec3> updated = wm.pos;
    for (std::size_t v = 0; v < wm.pos.size(); ++v) {
        if (wm.vdel[v] || wm.boundary[v] || wm.vfaces[v].empty()) {
            continue;
        }
        const std::vector<int> nbrs = wm.neighbors(static_cast<int>(v));
        Vec3 q = Vec3::Zero();
        for (int n : nbrs) {
            q += wm.pos[n];
        }
        q /= static_cast<double>(nbrs.size());
        const Vec3 n = wm.vertex_normal(static_cast<int>(v));
        const Vec3 delta = q - wm.pos[v];
        const Vec3 moved = wm.pos[v] + delta - n * n.dot(delta);
        updated[v] = surface.nearest(moved).point;
    }
    // Reject moves that would fold a face.
    for (std::size_t v = 0; v < wm.pos.size(); ++v) {
        if (updated[v] == wm.pos[v]) {
            continue;
        }
        bool ok = true;
        for (int f : wm.vfaces[v]) {
            const Tri& t = wm.faces[f];
            const Vec3 before = wm.face_normal_raw(t);
            std::array<Vec3, 3> p;
            for (int c = 0; c < 3; ++c) {
                p[c] = t[c] == static_cast<int>(v) ? updated[v] : wm.pos[t[c]];
            }
            const Vec3 after = (p[1] - p[0]).cross(p[2] - p[0]);
            if (after.dot(before) <= 0.0) {
                ok = false;
                break;
            }
        }
        if (ok) {
            wm.pos[v] = updated[v];
        }
    }
}

}  // namespace

TargetMesh isotropic_remesh(const TargetMesh& mesh, double target_len, int iters)
{
    if (!(target_len > 0.0)) {
        throw DomainError("isotropic_remesh: target_len must be positive");
    }
    const TriangleBvh surface(mesh.vertices, mesh.triangles);
    const double high = 4.0 / 3.0 * target_len;
    const double low = 4.0 / 5.0 * target_len;
    TargetMesh current = mesh;
    for (int it = 0; it < iters; ++it) {
        WorkMesh wm(current);
        split_long_edges(wm, high);
        collapse_short_edges(wm, low, high);
        flip_for_valence(wm);
        tangential_relax(wm, surface);
        try {
            current = wm.compact();
        } catch (const TopologyError& e) {
            throw RemeshError("iteration " + std::to_string(it) + " produced an invalid mesh: " + e.what());
        }
    }
    return current;
}

double min_triangle_angle_deg(const TargetMesh& mesh)
{
    double min_angle = 180.0;
    for (const Tri& t : mesh.triangles) {
        for (int c = 0; c < 3; ++c) {
            const Vec3 e1 = mesh.vertices[t[(c + 1) % 3]] - mesh.vertices[t[c]];
            const Vec3 e2 = mesh.vertices[t[(c + 2) % 3]] - mesh.vertices[t[c]];
            const double angle = std::atan2(e1.cross(e2).norm(), e1.dot(e2)) * 180.0 / std::numbers::pi;
            min_angle = std::min(min_angle, angle);
        }
    }
    return min_angle;
}

}  // namespace freeshell
