#include "freeshell/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "freeshell/error.hpp"

namespace freeshell
{

namespace
{

std::uint64_t edge_key(int a, int b)
{
    if (a > b) {
        std::swap(a, b);
    }
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }
};

std::string edge_name(int a, int b)
{
    return "(" + std::to_string(std::min(a, b)) + "," + std::to_string(std::max(a, b)) + ")";
}

}  // namespace

void rethrow_with_label(const std::string& label)
{
    try {
        throw;
    } catch (const ParseError& e) {
        throw ParseError(label + ": " + e.what());
    } catch (const TopologyError& e) {
        throw TopologyError(label + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(label + ": " + e.what());
    } catch (const RemeshError& e) {
        throw RemeshError(label + ": " + e.what());
    } catch (const SolveError& e) {
        throw SolveError(label + ": " + e.what());
    } catch (const NonFiniteError& e) {
        throw NonFiniteError(label + ": " + e.what());
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(label + ": " + e.what());
    } catch (const DivergenceError& e) {
        throw DivergenceError(label + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(label + ": " + e.what());
    } catch (const GeometryError& e) {
        throw GeometryError(label + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(label + ": " + e.what());
    } catch (const Error& e) {
        throw Error(label + ": " + e.what());
    }
}

EdgeAdjacency build_edge_adjacency(const std::vector<Tri>& triangles, std::size_t vertex_count)
{
    EdgeAdjacency adj;
    adj.tri_edges.resize(triangles.size());
    std::unordered_map<std::uint64_t, int> lookup;
    lookup.reserve(triangles.size() * 2);
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        for (int c = 0; c < 3; ++c) {
            const int a = triangles[t][c];
            const int b = triangles[t][(c + 1) % 3];
            if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= vertex_count ||
                static_cast<std::size_t>(b) >= vertex_count) {
                throw TopologyError("triangle " + std::to_string(t) + " has an out-of-range index");
            }
            auto [it, inserted] = lookup.try_emplace(edge_key(a, b), static_cast<int>(adj.edges.size()));
            if (inserted) {
                MeshEdge e;
                e.v0 = std::min(a, b);
                e.v1 = std::max(a, b);
                adj.edges.push_back(e);
            }
            MeshEdge& e = adj.edges[it->second];
            if (e.tri_count == 2) {
                throw TopologyError("non-manifold edge " + edge_name(a, b));
            }
            e.tris[e.tri_count++] = static_cast<int>(t);
            adj.tri_edges[t][c] = it->second;
        }
    }
    for (std::size_t e = 0; e < adj.edges.size(); ++e) {
        if (adj.edges[e].interior()) {
            adj.interior_edges.push_back(static_cast<int>(e));
        }
    }
    return adj;
}

TargetMesh make_target_mesh(std::vector<Vec3> vertices, std::vector<Tri> triangles)
{
    if (triangles.empty()) {
        throw TopologyError("mesh has no triangles");
    }
    const std::size_t nv = vertices.size();
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const Tri& tri = triangles[t];
        for (int c = 0; c < 3; ++c) {
            if (tri[c] < 0 || static_cast<std::size_t>(tri[c]) >= nv) {
                throw TopologyError("triangle " + std::to_string(t) + " has an out-of-range index");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            throw TopologyError("triangle " + std::to_string(t) + " repeats a vertex");
        }
    }
    for (const Vec3& v : vertices) {
        if (!v.allFinite()) {
            throw TopologyError("non-finite vertex coordinate");
        }
    }

    const EdgeAdjacency adj = build_edge_adjacency(triangles, nv);

    // Orientation: the two triangles of an interior edge traverse it in
    // opposite directions.
    for (const MeshEdge& e : adj.edges) {
        if (!e.interior()) {
            continue;
        }
        int forward = 0;
        for (int s = 0; s < 2; ++s) {
            const Tri& tri = triangles[e.tris[s]];
            for (int c = 0; c < 3; ++c) {
                if (tri[c] == e.v0 && tri[(c + 1) % 3] == e.v1) {
                    ++forward;
                }
            }
        }
        if (forward != 1) {
            throw TopologyError("inconsistent orientation at edge " + edge_name(e.v0, e.v1));
        }
    }

    // Vertex manifoldness: incident triangles form a single fan.
    std::vector<std::vector<int>> vertex_tris(nv);
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        for (int v : triangles[t]) {
            vertex_tris[v].push_back(static_cast<int>(t));
        }
    }
    DisjointSet fans(triangles.size());
    for (const MeshEdge& e : adj.edges) {
        if (e.interior()) {
            fans.unite(e.tris[0], e.tris[1]);
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (vertex_tris[v].empty()) {
            throw TopologyError("unreferenced vertex " + std::to_string(v));
        }
        // Union only across edges incident to v.
        std::unordered_map<int, int> local;
        for (std::size_t i = 0; i < vertex_tris[v].size(); ++i) {
            local[vertex_tris[v][i]] = static_cast<int>(i);
        }
        DisjointSet ring(vertex_tris[v].size());
        for (int t : vertex_tris[v]) {
            for (int c = 0; c < 3; ++c) {
                const MeshEdge& e = adj.edges[adj.tri_edges[t][c]];
                if (e.interior() && (e.v0 == static_cast<int>(v) || e.v1 == static_cast<int>(v))) {
                    ring.unite(local.at(e.tris[0]), local.at(e.tris[1]));
                }
            }
        }
        for (std::size_t i = 1; i < vertex_tris[v].size(); ++i) {
            if (ring.find(static_cast<int>(i)) != ring.find(0)) {
                throw TopologyError("non-manifold vertex " + std::to_string(v));
            }
        }
    }

    // Every component needs a boundary.
    std::vector<bool> comp_has_boundary(triangles.size(), false);
    std::vector<bool> boundary(nv, false);
    for (const MeshEdge& e : adj.edges) {
        if (!e.interior()) {
            boundary[e.v0] = true;
            boundary[e.v1] = true;
            comp_has_boundary[fans.find(e.tris[0])] = true;
        }
    }
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const int root = fans.find(static_cast<int>(t));
        if (root == static_cast<int>(t) && !comp_has_boundary[root]) {
            throw TopologyError("closed surface (component containing triangle " + std::to_string(t) + ")");
        }
    }

    std::vector<Vec3> normals(nv, Vec3::Zero());
    for (const Tri& tri : triangles) {
        const Vec3 n = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
        for (int v : tri) {
            normals[v] += n;
        }
    }
    for (std::size_t v = 0; v < nv; ++v) {
        const double len = normals[v].norm();
        if (!(len > 0.0) || !std::isfinite(len)) {
            throw TopologyError("degenerate normal at vertex " + std::to_string(v));
        }
        normals[v] /= len;
    }

    TargetMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);
    mesh.vertex_normals = std::move(normals);
    mesh.boundary_flags = std::move(boundary);
    return mesh;
}

EdgeStatistics edge_statistics(const TargetMesh& mesh)
{
    const EdgeAdjacency adj = build_edge_adjacency(mesh.triangles, mesh.vertex_count());
    EdgeStatistics stats;
    if (adj.edges.empty()) {
        return stats;
    }
    // Sum in a canonical (sorted) order so the result does not depend on
    // vertex or face numbering.
    std::vector<double> lengths;
    lengths.reserve(adj.edges.size());
    for (const MeshEdge& e : adj.edges) {
        lengths.push_back((mesh.vertices[e.v0] - mesh.vertices[e.v1]).norm());
    }
    std::sort(lengths.begin(), lengths.end());
    double sum = 0.0;
    for (double l : lengths) {
        sum += l;
    }
    stats.avg_edge_len = sum / static_cast<double>(lengths.size());
    stats.min = lengths.front();
    stats.max = lengths.back();
    return stats;
}

std::vector<std::vector<int>> boundary_loops(const TargetMesh& mesh)
{
    const EdgeAdjacency adj = build_edge_adjacency(mesh.triangles, mesh.vertex_count());
    // Boundary half-edges keep the triangle's orientation.
    std::unordered_map<int, int> next;
    std::vector<int> starts;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (int c = 0; c < 3; ++c) {
            if (!adj.edges[adj.tri_edges[t][c]].interior()) {
                const int a = mesh.triangles[t][c];
                const int b = mesh.triangles[t][(c + 1) % 3];
                next[a] = b;
                starts.push_back(a);
            }
        }
    }
    std::vector<std::vector<int>> loops;
    std::unordered_map<int, bool> used;
    for (int s : starts) {
        if (used[s]) {
            continue;
        }
        std::vector<int> loop;
        int v = s;
        while (!used[v]) {
            used[v] = true;
            loop.push_back(v);
            v = next.at(v);
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

int connected_components(const TargetMesh& mesh)
{
    const EdgeAdjacency adj = build_edge_adjacency(mesh.triangles, mesh.vertex_count());
    DisjointSet ds(mesh.triangle_count());
    for (int e : adj.interior_edges) {
        ds.unite(adj.edges[e].tris[0], adj.edges[e].tris[1]);
    }
    int count = 0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        if (ds.find(static_cast<int>(t)) == static_cast<int>(t)) {
            ++count;
        }
    }
    return count;
}

double triangle_area(const TargetMesh& mesh, int t)
{
    const Tri& tri = mesh.triangles[t];
    return 0.5 * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
                     .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]])
                     .norm();
}

Vec3 face_normal(const TargetMesh& mesh, int t)
{
    const Tri& tri = mesh.triangles[t];
    return (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
        .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]])
        .normalized();
}

}  // namespace freeshell
