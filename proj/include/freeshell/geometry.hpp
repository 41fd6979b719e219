#pragma once

#include <array>
#include <span>
#include <vector>

#include "freeshell/mesh.hpp"

namespace freeshell
{

struct ClosestPoint {
    Vec3 point;
    double sq_dist{0};
};

/// Exact Voronoi-region case analysis (vertex, edge, or face region).
ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct NearestHit {
    double sq_dist{0};
    int triangle{-1};
    Vec3 point{Vec3::Zero()};
};

/**
 * Bounding volume hierarchy over a triangle set for nearest-point queries.
 *
 * Subtrees are pruned only when their box is strictly farther than the
 * best hit so far, so the returned squared distance is bit-identical to
 * a brute-force minimum over closest_point_on_triangle().
 */
class TriangleBvh
{
public:
    TriangleBvh() = default;
    TriangleBvh(std::span<const Vec3> vertices, std::span<const Tri> triangles);

    [[nodiscard]] NearestHit nearest(const Vec3& p) const;
    [[nodiscard]] bool empty() const { return nodes_.empty(); }

private:
    struct Node {
        Eigen::AlignedBox3d box;
        int left{-1};
        int right{-1};
        int first{0};
        int count{0};
    };

    int build(int first, int count, int depth);

    std::vector<Vec3> vertices_;
    std::vector<Tri> triangles_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
};

/**
 * Sign of the orientation determinant of (a, b, c): +1 counter-clockwise,
 * -1 clockwise, 0 collinear. Evaluated exactly with floating-point
 * expansions, never subject to rounding.
 */
int orient2d_exact(const Vec2& a, const Vec2& b, const Vec2& c);

/**
 * True when two triangles intersect in a region of positive area.
 * Touching along edges or at points is not an overlap; degenerate
 * triangles never overlap.
 */
bool triangles_overlap_2d(const std::array<Vec2, 3>& t0, const std::array<Vec2, 3>& t1);

double signed_area_2d(const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace freeshell
