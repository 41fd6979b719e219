#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "freeshell/error.hpp"
#include "freeshell/flatten.hpp"
#include "freeshell/verify.hpp"

using namespace freeshell;

namespace
{

// Triangles collapsed to single points, so a linkage's gap is the distance
// between its two points. Edges are (tri_a, tri_b) pairs.
Layout point_layout(const std::vector<Vec2>& points, const std::vector<std::pair<int, int>>& edges)
{
    Layout layout;
    for (const Vec2& p : points) {
        for (int c = 0; c < 3; ++c) {
            layout.corners.push_back(p);
        }
        layout.rest_edges.push_back({1.0, 1.0, 1.0});
        layout.source_map.push_back(static_cast<int>(layout.source_map.size()));
    }
    for (const auto& [a, b] : edges) {
        Linkage l;
        l.tri_a = a;
        l.tri_b = b;
        l.i = 3 * a;
        l.j = 3 * a + 1;
        l.k = 3 * b + 1;
        l.m = 3 * b;
        l.rest_len = 1.0;
        layout.linkages.push_back(l);
    }
    layout.avg_edge = 1.0;
    return layout;
}

std::set<int> cut_set(const Layout& layout)
{
    std::set<int> s;
    for (std::size_t n = 0; n < layout.linkages.size(); ++n) {
        if (layout.linkages[n].state == LinkageState::cut) {
            s.insert(static_cast<int>(n));
        }
    }
    return s;
}

}  // namespace

TEST(Explode, TwoTriangleSquare)
{
    const Layout layout = fixtures::planar_layout(fixtures::flat_square());
    EXPECT_EQ(layout.corners.size(), 6u);
    ASSERT_EQ(layout.linkages.size(), 1u);
    EXPECT_EQ(gap_value(layout, layout.linkages[0]), 0.0);
    EXPECT_NEAR(layout.linkages[0].rest_len, std::sqrt(200.0), 1e-12);
}

TEST(Explode, SingleTriangle)
{
    const TargetMesh m = make_target_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    const Layout layout = fixtures::planar_layout(m);
    EXPECT_EQ(layout.corners.size(), 3u);
    EXPECT_TRUE(layout.linkages.empty());
}

TEST(Explode, HemisphereCorrespondence)
{
    const TargetMesh m = fixtures::hemisphere();
    const Layout layout = fixtures::planar_layout(m);
    EXPECT_EQ(layout.corners.size(), 429u);
    const EdgeAdjacency adj = build_edge_adjacency(m.triangles, m.vertex_count());
    EXPECT_EQ(layout.linkages.size(), adj.interior_edges.size());
    EXPECT_NEAR(layout.avg_edge, edge_statistics(m).avg_edge_len, 1e-12);
    auto vertex = [&](int slot) { return m.triangles[slot / 3][slot % 3]; };
    for (const Linkage& l : layout.linkages) {
        EXPECT_EQ(l.i / 3, l.tri_a);
        EXPECT_EQ(l.j / 3, l.tri_a);
        EXPECT_EQ(l.k / 3, l.tri_b);
        EXPECT_EQ(l.m / 3, l.tri_b);
        EXPECT_EQ(vertex(l.i), vertex(l.m));
        EXPECT_EQ(vertex(l.j), vertex(l.k));
        // Opposite traversal: (i, j) runs along tri_a's orientation.
        EXPECT_EQ((l.j % 3), (l.i % 3 + 1) % 3);
        EXPECT_EQ((l.m % 3), (l.k % 3 + 1) % 3);
        const double rest = (m.vertices[vertex(l.i)] - m.vertices[vertex(l.j)]).norm();
        EXPECT_NEAR(l.rest_len, rest, 1e-9);
        EXPECT_NEAR(layout.rest_edges[l.tri_a][l.i % 3], rest, 1e-9);
        EXPECT_NEAR(layout.rest_edges[l.tri_b][l.k % 3], rest, 1e-9);
        EXPECT_EQ(l.state, LinkageState::retained);
    }
}

TEST(GapValue, Examples)
{
    Layout layout = point_layout({Vec2(0, 0), Vec2(0, 0)}, {{0, 1}});
    Linkage& l = layout.linkages[0];
    EXPECT_EQ(gap_value(layout, l), 0.0);
    layout.corners[l.m] = Vec2(0.2, 0);
    layout.corners[l.k] = layout.corners[l.j] + Vec2(0, 0.4);
    EXPECT_NEAR(gap_value(layout, l), 0.3, 1e-15);
    for (Vec2& c : layout.corners) {
        c *= 2.0;
    }
    EXPECT_NEAR(gap_value(layout, l), 0.6, 1e-15);
}

TEST(Formulas, CutThreshold)
{
    EnergyParams p;
    p.eps_tor = 0.1;
    p.d = 1.0;
    p.cut_rate = 0.1;
    EXPECT_NEAR(cut_threshold(p, 2.0), 1.8, 1e-12);
    p.cut_rate = 1.0;
    EXPECT_NEAR(cut_threshold(p, 50.0), 1.1, 1e-12);
    p.cut_rate = 0.1;
    EXPECT_NEAR(cut_threshold(p, 1.05), 1.1, 1e-12);
}

TEST(Formulas, AmplificationFactor)
{
    EXPECT_EQ(amplification_factor(0.0, 10.0), 1.0);
    EXPECT_NEAR(amplification_factor(1.0, std::sqrt(3.0)), 2.0, 1e-12);
    EXPECT_NEAR(amplification_factor(0.94, 10.0), 1.0 + std::sqrt(3.0) * 0.094, 1e-12);
    EXPECT_NEAR(amplification_factor(0.94, 10.0), 1.1628, 1e-4);
}

TEST(Formulas, TargetGapFromRate)
{
    EXPECT_EQ(target_gap_from_rate(10.0, 0.0), 0.0);
    EXPECT_NEAR(target_gap_from_rate(std::sqrt(3.0), 0.5), 1.0, 1e-12);
    EXPECT_NEAR(target_gap_from_rate(10.0, 0.14), 1.4 / (std::sqrt(3.0) * 0.86), 1e-12);
    EXPECT_NEAR(target_gap_from_rate(10.0, 0.14), 0.9399, 1e-4);
    EXPECT_THROW(target_gap_from_rate(10.0, 1.0), DomainError);
    EXPECT_THROW(target_gap_from_rate(10.0, -0.1), DomainError);
}

TEST(Formulas, RefinementScaleFactor)
{
    EXPECT_EQ(refinement_scale_factor(0.0, 3.0), 1.0);
    EXPECT_NEAR(refinement_scale_factor(0.5, 1.0), 1.25, 1e-15);
    EXPECT_NEAR(refinement_scale_factor(-0.5, 1.0), 0.75, 1e-15);
}

TEST(Formulas, WeightSchedule)
{
    EnergyParams p;
    EXPECT_EQ(scheduled_weights(p, 0).w_gap, 10.0);
    EXPECT_EQ(scheduled_weights(p, 0).w_fair, 10.0);
    EXPECT_EQ(scheduled_weights(p, 4).w_gap, 50.0);
    EXPECT_EQ(scheduled_weights(p, 9).w_gap, 100.0);
    EXPECT_EQ(scheduled_weights(p, 30).w_fair, 100.0);
    EXPECT_EQ(scheduled_weights(p, 30).w_rigid, 100.0);
}

TEST(TwoStepScale, HandExample)
{
    Layout layout;
    layout.corners = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    layout.rest_edges = {{1.0, std::sqrt(2.0), 1.0}};
    layout.source_map = {0};
    layout.avg_edge = 1.0;
    two_step_scale(layout, 2.0);
    EXPECT_NEAR(layout.corners[0].x(), -1.0 / 6.0, 1e-15);
    EXPECT_NEAR(layout.corners[0].y(), -1.0 / 6.0, 1e-15);
    EXPECT_NEAR(layout.corners[1].x(), 5.0 / 6.0, 1e-15);
    EXPECT_NEAR(layout.corners[1].y(), -1.0 / 6.0, 1e-15);
    EXPECT_NEAR(layout.corners[2].x(), -1.0 / 6.0, 1e-15);
    EXPECT_NEAR(layout.corners[2].y(), 5.0 / 6.0, 1e-15);
    EXPECT_NEAR((layout.corners[1] - layout.corners[0]).norm(), 1.0, 1e-15);
}

TEST(TwoStepScale, IdentityAtOne)
{
    Layout layout = fixtures::planar_layout(fixtures::hemisphere());
    const auto before = layout.corners;
    two_step_scale(layout, 1.0);
    EXPECT_EQ(layout.corners, before);
}

TEST(TwoStepScale, CentroidDistancesScaleByInverse)
{
    Layout layout = fixtures::planar_layout(fixtures::square_grid(3, 3, 4.0));
    const double lambda = 1.07;
    const Vec2 c0 = triangle_centroid(layout, 0);
    const Vec2 c5 = triangle_centroid(layout, 5);
    two_step_scale(layout, lambda);
    EXPECT_NEAR((triangle_centroid(layout, 0) - triangle_centroid(layout, 5)).norm(), (c0 - c5).norm() / lambda,
                1e-12);
}

TEST(GraphConnected, Examples)
{
    Layout two = point_layout({Vec2(0, 0), Vec2(1, 0)}, {{0, 1}});
    EXPECT_TRUE(graph_connected(two));
    two.linkages[0].state = LinkageState::welded;
    EXPECT_TRUE(graph_connected(two));
    two.linkages[0].state = LinkageState::cut;
    EXPECT_FALSE(graph_connected(two));

    std::vector<Vec2> pts(10, Vec2::Zero());
    std::vector<std::pair<int, int>> path;
    for (int t = 0; t + 1 < 10; ++t) {
        path.emplace_back(t, t + 1);
    }
    Layout chain = point_layout(pts, path);
    EXPECT_TRUE(graph_connected(chain));
    chain.linkages[4].state = LinkageState::cut;
    EXPECT_FALSE(graph_connected(chain));
}

TEST(AutoCut, OnlyLargestGapAboveThreshold)
{
    // Cycle 0-1-2-3-0 with gaps 2.0, 1.05, 0.9, 0.5.
    const Vec2 p0(0, 0);
    const Vec2 p1(2, 0);
    const Vec2 p3(0.3, 0.4);
    // p2 at distance 1.05 from p1 and 0.9 from p3.
    const double d13 = (p3 - p1).norm();
    const double a = (1.05 * 1.05 - 0.9 * 0.9 + d13 * d13) / (2.0 * d13);
    const double h = std::sqrt(1.05 * 1.05 - a * a);
    const Vec2 u = (p3 - p1) / d13;
    const Vec2 p2 = p1 + a * u + h * Vec2(-u.y(), u.x());
    Layout layout = point_layout({p0, p1, p2, p3}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    ASSERT_NEAR(gap_value(layout, layout.linkages[0]), 2.0, 1e-12);
    ASSERT_NEAR(gap_value(layout, layout.linkages[1]), 1.05, 1e-12);
    ASSERT_NEAR(gap_value(layout, layout.linkages[2]), 0.9, 1e-12);
    EnergyParams p;
    p.eps_tor = 0.1;
    p.d = 1.0;
    p.cut_rate = 0.5;
    const AutoCutResult r = auto_cut(layout, p);
    EXPECT_NEAR(r.threshold, 1.1, 1e-12);
    EXPECT_EQ(r.cut_count, 1);
    EXPECT_EQ(layout.linkages[0].state, LinkageState::cut);
    EXPECT_EQ(layout.linkages[1].state, LinkageState::retained);
    EXPECT_TRUE(graph_connected(layout));
}

TEST(AutoCut, BridgeIsRetained)
{
    Layout layout = point_layout({Vec2(0, 0), Vec2(5, 0)}, {{0, 1}});
    EnergyParams p;
    p.d = 1.0;
    const AutoCutResult r = auto_cut(layout, p);
    EXPECT_EQ(r.cut_count, 0);
    EXPECT_EQ(layout.linkages[0].state, LinkageState::retained);
}

TEST(AutoCut, NothingBelowThreshold)
{
    Layout layout = point_layout({Vec2(0, 0), Vec2(0.5, 0), Vec2(0.5, 0.5)}, {{0, 1}, {1, 2}, {2, 0}});
    EnergyParams p;
    p.d = 1.0;
    EXPECT_EQ(auto_cut(layout, p).cut_count, 0);
}

TEST(AutoCut, TiesBrokenByLinkageId)
{
    // Square cycle with equal gaps: the lowest id is cut first, then every
    // remaining linkage is a bridge.
    Layout layout = point_layout({Vec2(0, 0), Vec2(3, 0), Vec2(3, 3), Vec2(0, 3)}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    EnergyParams p;
    p.d = 1.0;
    EXPECT_EQ(auto_cut(layout, p).cut_count, 1);
    EXPECT_EQ(cut_set(layout), std::set<int>{0});
}

TEST(Alignment, FlatSquareWeldsWithoutCuts)
{
    const TargetMesh mesh = fixtures::flat_square();
    Layout layout = explode_mesh(mesh, tutte_embed(mesh));
    EnergyParams p;
    p.d = target_gap_from_rate(layout.avg_edge, 0.14);
    const AlignStats s = alignment_phase(layout, p, {});
    EXPECT_EQ(s.iterations, 1);
    EXPECT_EQ(s.cut_count, 0);
    EXPECT_EQ(count_state(layout, LinkageState::welded), 1);
}

TEST(Alignment, ConeCapStaysConnected)
{
    const TargetMesh mesh = fixtures::cone_cap();
    Layout layout = explode_mesh(mesh, tutte_embed(mesh));
    EnergyParams p;
    p.d = target_gap_from_rate(layout.avg_edge, 0.14);
    bool always_connected = true;
    alignment_phase(layout, p, {}, {}, [&](const Layout& l, const std::string&) {
        always_connected = always_connected && graph_connected(l);
    });
    EXPECT_TRUE(always_connected);
    EXPECT_TRUE(graph_connected(layout));
    EXPECT_EQ(count_state(layout, LinkageState::retained), 0);
}

TEST(Coarse, FlatSquareReachesTarget)
{
    const TargetMesh mesh = fixtures::flat_square();
    Layout layout = explode_mesh(mesh, tutte_embed(mesh));
    EnergyParams p;
    p.d = 0.05 * layout.avg_edge;
    alignment_phase(layout, p, {});
    unweld_all(layout);
    const CoarseStats s = coarse_optimize(layout, p, {});
    EXPECT_LE(s.final_a_max, (1.0 + p.eps_tor) * p.d);
    EXPECT_NEAR(gap_value(layout, layout.linkages[0]), p.d, 0.1 * p.d);
    EXPECT_EQ(count_state(layout, LinkageState::cut), 0);
}

TEST(Refinement, PreservesTrianglesAndHitsTarget)
{
    const TargetMesh mesh = fixtures::hemisphere();
    Layout layout = fixtures::planar_layout(fixtures::square_grid(4, 4, 10.0));
    // Spread the tiles apart so every gap is positive.
    for (int t = 0; t < layout.triangle_count(); ++t) {
        const Vec2 c = triangle_centroid(layout, t);
        for (int k = 0; k < 3; ++k) {
            layout.corners[3 * t + k] += 0.15 * c;
        }
    }
    const double d_t = 0.8;
    RefineParams rp;
    rp.d_target = d_t;
    // Step by step, so edge preservation is checked after every step.
    Layout stepped = layout;
    RefineParams one = rp;
    one.max_steps = 1;
    for (int step = 0; step < 50; ++step) {
        const auto before = stepped.corners;
        const RefineResult r = local_refinement(stepped, one);
        for (int t = 0; t < stepped.triangle_count(); ++t) {
            for (int c = 0; c < 3; ++c) {
                const double l0 = (before[3 * t + (c + 1) % 3] - before[3 * t + c]).norm();
                const double l1 = (stepped.corners[3 * t + (c + 1) % 3] - stepped.corners[3 * t + c]).norm();
                EXPECT_LE(std::abs(l1 - l0), 1e-9 * l0);
            }
        }
        if (r.steps == 0) {
            break;
        }
    }
    const RefineResult r = local_refinement(layout, rp);
    EXPECT_LE(std::abs(r.final_avg_gap - d_t), 1e-3 * layout.avg_edge);
    EXPECT_NEAR(mean_gap(layout), r.final_avg_gap, 1e-12);
    (void)mesh;
}

TEST(Refinement, FixedPointAtTarget)
{
    Layout layout = point_layout({Vec2(0, 0), Vec2(1, 0)}, {{0, 1}});
    const auto before = layout.corners;
    RefineParams rp;
    rp.d_target = 1.0;
    const RefineResult r = local_refinement(layout, rp);
    EXPECT_EQ(r.steps, 0);
    EXPECT_EQ(layout.corners, before);
}

TEST(Refinement, OvershootDiverges)
{
    Layout layout = fixtures::planar_layout(fixtures::square_grid(2, 2, 10.0));
    for (int t = 0; t < layout.triangle_count(); ++t) {
        const Vec2 c = triangle_centroid(layout, t);
        for (int k = 0; k < 3; ++k) {
            layout.corners[3 * t + k] += 0.2 * c;
        }
    }
    // Gaps are below target, so a huge rate drives the scale factor negative.
    RefineParams rp;
    rp.d_target = 5.0;
    rp.learn_rate = 1e6;
    EXPECT_THROW(local_refinement(layout, rp), DivergenceError);
}

TEST(DiscreteFlattening, FlatSquare)
{
    const FlattenResult r = run_discrete_flattening(fixtures::flat_square(), {});
    EXPECT_EQ(r.stats.cut_count, 0);
    EXPECT_LE(std::abs(r.stats.refine.final_avg_gap - r.stats.d_target), 1e-3 * r.layout.avg_edge);
    EXPECT_NEAR(r.stats.d_coarse, 1.2 * r.stats.d_target, 1e-12);
    const LayoutReport rep = layout_metrics(r.layout, {});
    EXPECT_LT(rep.max_edge_distortion, 1e-6);
    EXPECT_EQ(rep.overlap_pairs, 0);
}

TEST(DiscreteFlattening, CutsOnlyGrowAndGraphStaysConnected)
{
    std::set<int> prev;
    bool monotone = true;
    bool connected = true;
    const FlattenResult r = run_discrete_flattening(fixtures::hemisphere(), {}, [&](const Layout& l, const std::string&) {
        const std::set<int> now = cut_set(l);
        monotone = monotone && std::includes(now.begin(), now.end(), prev.begin(), prev.end());
        connected = connected && graph_connected(l);
        prev = now;
    });
    EXPECT_TRUE(monotone);
    EXPECT_TRUE(connected);
    EXPECT_EQ(cut_set(r.layout), prev);
    for (const Linkage& l : r.layout.linkages) {
        EXPECT_NE(l.state, LinkageState::welded);
    }
}

TEST(DiscreteFlattening, StageLabelOnError)
{
    FlattenConfig cfg;
    cfg.shrink_rate = 1.5;
    try {
        run_discrete_flattening(fixtures::flat_square(), cfg);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find(':'), std::string::npos);
    }
}
