#include "freeshell/layout.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "freeshell/error.hpp"

namespace freeshell
{

namespace
{

int corner_of(const Tri& tri, int v)
{
    for (int c = 0; c < 3; ++c) {
        if (tri[c] == v) {
            return c;
        }
    }
    return -1;
}

}  // namespace

Layout explode_mesh(const TargetMesh& mesh, const Param2D& init)
{
    if (init.uv.size() != mesh.vertex_count()) {
        throw TopologyError("explode_mesh: parameterization has " + std::to_string(init.uv.size()) +
                            " vertices, mesh has " + std::to_string(mesh.vertex_count()));
    }
    const int nt = static_cast<int>(mesh.triangle_count());
    Layout layout;
    layout.corners.resize(3 * nt);
    layout.rest_edges.resize(nt);
    layout.source_map.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const Tri& tri = mesh.triangles[t];
        for (int c = 0; c < 3; ++c) {
            layout.corners[3 * t + c] = init.uv[tri[c]];
            layout.rest_edges[t][c] = (mesh.vertices[tri[(c + 1) % 3]] - mesh.vertices[tri[c]]).norm();
        }
        layout.source_map[t] = t;
    }
    const EdgeAdjacency adj = build_edge_adjacency(mesh.triangles, mesh.vertex_count());
    for (int e : adj.interior_edges) {
        const MeshEdge& edge = adj.edges[e];
        const int ta = edge.tris[0];
        const int tb = edge.tris[1];
        const Tri& a = mesh.triangles[ta];
        const Tri& b = mesh.triangles[tb];
        // Orient the edge as traversed by tri_a: u -> v.
        int u = edge.v0;
        int v = edge.v1;
        if (a[(corner_of(a, u) + 1) % 3] != v) {
            std::swap(u, v);
        }
        Linkage l;
        l.tri_a = ta;
        l.tri_b = tb;
        l.i = 3 * ta + corner_of(a, u);
        l.j = 3 * ta + corner_of(a, v);
        l.m = 3 * tb + corner_of(b, u);
        l.k = 3 * tb + corner_of(b, v);
        l.rest_len = (mesh.vertices[v] - mesh.vertices[u]).norm();
        l.mesh_edge = e;
        layout.linkages.push_back(l);
    }
    layout.avg_edge = edge_statistics(mesh).avg_edge_len;
    return layout;
}

double gap_value(const Layout& layout, const Linkage& l)
{
    const auto& p = layout.corners;
    return 0.5 * ((p[l.i] - p[l.m]).norm() + (p[l.j] - p[l.k]).norm());
}

bool graph_connected(const Layout& layout)
{
    const int nt = layout.triangle_count();
    if (nt == 0) {
        return true;
    }
    std::vector<std::vector<int>> nbrs(nt);
    for (const Linkage& l : layout.linkages) {
        if (l.state != LinkageState::cut) {
            nbrs[l.tri_a].push_back(l.tri_b);
            nbrs[l.tri_b].push_back(l.tri_a);
        }
    }
    std::vector<char> seen(nt, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int visited = 1;
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        for (int n : nbrs[t]) {
            if (!seen[n]) {
                seen[n] = 1;
                ++visited;
                stack.push_back(n);
            }
        }
    }
    return visited == nt;
}

double max_gap(const Layout& layout)
{
    double a_max = 0.0;
    for (const Linkage& l : layout.linkages) {
        if (l.state != LinkageState::cut) {
            a_max = std::max(a_max, gap_value(layout, l));
        }
    }
    return a_max;
}

double mean_gap(const Layout& layout)
{
    double sum = 0.0;
    int n = 0;
    for (const Linkage& l : layout.linkages) {
        if (l.state == LinkageState::retained) {
            sum += gap_value(layout, l);
            ++n;
        }
    }
    return n > 0 ? sum / n : 0.0;
}

int count_state(const Layout& layout, LinkageState state)
{
    return static_cast<int>(std::count_if(layout.linkages.begin(), layout.linkages.end(),
                                          [&](const Linkage& l) { return l.state == state; }));
}

Vec2 triangle_centroid(const Layout& layout, int t)
{
    return (layout.corners[3 * t] + layout.corners[3 * t + 1] + layout.corners[3 * t + 2]) / 3.0;
}

VariableMap make_variable_map(const Layout& layout)
{
    const int ns = static_cast<int>(layout.corners.size());
    std::vector<int> parent(ns);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    };
    for (const Linkage& l : layout.linkages) {
        if (l.state == LinkageState::welded) {
            unite(l.i, l.m);
            unite(l.j, l.k);
        }
    }
    VariableMap vars;
    vars.slot_to_var.assign(ns, -1);
    std::vector<int> root_var(ns, -1);
    for (int s = 0; s < ns; ++s) {
        const int r = find(s);
        if (root_var[r] < 0) {
            root_var[r] = vars.var_count++;
        }
        vars.slot_to_var[s] = root_var[r];
    }
    return vars;
}

std::vector<double> gather_variables(const Layout& layout, const VariableMap& vars)
{
    std::vector<double> x(2 * vars.var_count, 0.0);
    std::vector<int> count(vars.var_count, 0);
    for (std::size_t s = 0; s < layout.corners.size(); ++s) {
        const int v = vars.slot_to_var[s];
        x[2 * v] += layout.corners[s].x();
        x[2 * v + 1] += layout.corners[s].y();
        ++count[v];
    }
    for (int v = 0; v < vars.var_count; ++v) {
        x[2 * v] /= count[v];
        x[2 * v + 1] /= count[v];
    }
    return x;
}

void scatter_variables(std::span<const double> x, const VariableMap& vars, std::span<double> corner_xy)
{
    for (std::size_t s = 0; s < vars.slot_to_var.size(); ++s) {
        const int v = vars.slot_to_var[s];
        corner_xy[2 * s] = x[2 * v];
        corner_xy[2 * s + 1] = x[2 * v + 1];
    }
}

std::vector<double> corner_coordinates(const Layout& layout)
{
    std::vector<double> xy(2 * layout.corners.size());
    for (std::size_t s = 0; s < layout.corners.size(); ++s) {
        xy[2 * s] = layout.corners[s].x();
        xy[2 * s + 1] = layout.corners[s].y();
    }
    return xy;
}

void set_corner_coordinates(Layout& layout, std::span<const double> xy)
{
    for (std::size_t s = 0; s < layout.corners.size(); ++s) {
        layout.corners[s] = Vec2(xy[2 * s], xy[2 * s + 1]);
    }
}

}  // namespace freeshell
