#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "freeshell/error.hpp"
#include "freeshell/geometry.hpp"
#include "freeshell/remesh.hpp"

using namespace freeshell;

namespace
{

double fraction_in_band(const TargetMesh& m, double target)
{
    const EdgeAdjacency adj = build_edge_adjacency(m.triangles, m.vertex_count());
    int ok = 0;
    for (const MeshEdge& e : adj.edges) {
        const double len = (m.vertices[e.v0] - m.vertices[e.v1]).norm();
        ok += (len >= 0.5 * target && len <= 1.5 * target) ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(adj.edges.size());
}

// Largest distance from an input boundary vertex to the output boundary polyline.
double boundary_deviation(const TargetMesh& in, const TargetMesh& out)
{
    std::vector<std::pair<Vec3, Vec3>> segs;
    for (const auto& loop : boundary_loops(out)) {
        for (std::size_t k = 0; k < loop.size(); ++k) {
            segs.emplace_back(out.vertices[loop[k]], out.vertices[loop[(k + 1) % loop.size()]]);
        }
    }
    double worst = 0.0;
    for (std::size_t v = 0; v < in.vertex_count(); ++v) {
        if (!in.boundary_flags[v]) {
            continue;
        }
        double best = 1e300;
        for (const auto& [a, b] : segs) {
            best = std::min(best, closest_point_on_triangle(in.vertices[v], a, b, b).sq_dist);
        }
        worst = std::max(worst, std::sqrt(best));
    }
    return worst;
}

}  // namespace

TEST(Remesh, UniformGridIsNearlyFixed)
{
    const TargetMesh grid = fixtures::equilateral_grid(8, 8, 2.0);
    const TargetMesh out = isotropic_remesh(grid, 2.0, 5);
    const double change = std::abs(static_cast<double>(out.triangle_count()) - grid.triangle_count()) /
                          static_cast<double>(grid.triangle_count());
    EXPECT_LT(change, 0.05);
    EXPECT_GE(fraction_in_band(out, 2.0), 0.95);
}

TEST(Remesh, HalvingTargetQuadruplesFaces)
{
    const TargetMesh square = fixtures::square_grid(5, 5, 2.0);
    const TargetMesh coarse = isotropic_remesh(square, 2.0, 10);
    const TargetMesh fine = isotropic_remesh(square, 1.0, 10);
    const double ratio = static_cast<double>(fine.triangle_count()) / coarse.triangle_count();
    EXPECT_GE(ratio, 3.2);
    EXPECT_LE(ratio, 4.8);
    EXPECT_GE(fraction_in_band(fine, 1.0), 0.95);
    EXPECT_LT(boundary_deviation(square, fine), 0.1 * 1.0);
}

TEST(Remesh, SliverIsRemoved)
{
    TargetMesh grid = fixtures::square_grid(4, 4, 2.5);
    // Push interior vertex (2, 2) toward the far edge of its first triangle
    // until that triangle has aspect ratio 100.
    const int v = 2 * 5 + 2;
    const auto it = std::find_if(grid.triangles.begin(), grid.triangles.end(), [&](const Tri& t) {
        return std::find(t.begin(), t.end(), v) != t.end();
    });
    ASSERT_NE(it, grid.triangles.end());
    const int c = static_cast<int>(std::find(it->begin(), it->end(), v) - it->begin());
    const Vec3 a = grid.vertices[(*it)[(c + 1) % 3]];
    const Vec3 b = grid.vertices[(*it)[(c + 2) % 3]];
    const Vec3 mid = 0.5 * (a + b);
    const Vec3 dir = (grid.vertices[v] - mid).normalized();
    std::vector<Vec3> verts = grid.vertices;
    verts[v] = mid + dir * ((b - a).norm() / 100.0);
    const TargetMesh sliver = make_target_mesh(verts, grid.triangles);
    ASSERT_LT(min_triangle_angle_deg(sliver), 2.0);

    const TargetMesh out = isotropic_remesh(sliver, 2.5, 10);
    EXPECT_GT(min_triangle_angle_deg(out), 15.0);
}

TEST(Remesh, HemisphereStaysValidAndOnSurface)
{
    const TargetMesh hemi = fixtures::hemisphere();
    const double target = 8.0;
    const TargetMesh out = isotropic_remesh(hemi, target, 10);
    EXPECT_EQ(boundary_loops(out).size(), 1u);
    EXPECT_GE(fraction_in_band(out, target), 0.95);
    EXPECT_LT(boundary_deviation(hemi, out), 0.1 * target);
    const TriangleBvh bvh(hemi.vertices, hemi.triangles);
    for (const Vec3& p : out.vertices) {
        EXPECT_LT(std::sqrt(bvh.nearest(p).sq_dist), 1e-9);
    }
}

TEST(Remesh, Deterministic)
{
    const TargetMesh hemi = fixtures::hemisphere();
    const TargetMesh a = isotropic_remesh(hemi, 6.0, 5);
    const TargetMesh b = isotropic_remesh(hemi, 6.0, 5);
    EXPECT_EQ(a.triangles, b.triangles);
    EXPECT_EQ(a.vertices, b.vertices);
}

TEST(Remesh, RejectsBadTarget)
{
    EXPECT_THROW(isotropic_remesh(fixtures::flat_square(), 0.0), DomainError);
    EXPECT_THROW(isotropic_remesh(fixtures::flat_square(), -1.0), DomainError);
}
