#include "freeshell/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace freeshell
{

ClosestPoint closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    auto result = [&](const Vec3& q) { return ClosestPoint{q, (p - q).squaredNorm()}; };
    if (d1 <= 0.0 && d2 <= 0.0) {
        return result(a);
    }
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) {
        return result(b);
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return result(a + v * ab);
    }
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) {
        return result(c);
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return result(a + w * ac);
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return result(b + w * (c - b));
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return result(a + ab * v + ac * w);
}

TriangleBvh::TriangleBvh(std::span<const Vec3> vertices, std::span<const Tri> triangles)
    : vertices_(vertices.begin(), vertices.end()), triangles_(triangles.begin(), triangles.end())
{
    if (triangles_.empty()) {
        return;
    }
    order_.resize(triangles_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * triangles_.size());
    build(0, static_cast<int>(triangles_.size()), 0);
}

int TriangleBvh::build(int first, int count, int depth)
{
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Eigen::AlignedBox3d box;
    Eigen::AlignedBox3d centroids;
    for (int k = first; k < first + count; ++k) {
        const Tri& t = triangles_[order_[k]];
        for (int v : t) {
            box.extend(vertices_[v]);
        }
        centroids.extend((vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0);
    }
    nodes_[index].box = box;
    if (count <= 4 || depth > 40) {
        nodes_[index].first = first;
        nodes_[index].count = count;
        return index;
    }
    int axis = 0;
    centroids.sizes().maxCoeff(&axis);
    const int mid = first + count / 2;
    auto centroid_of = [&](int t) {
        const Tri& tri = triangles_[t];
        return vertices_[tri[0]][axis] + vertices_[tri[1]][axis] + vertices_[tri[2]][axis];
    };
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](int a, int b) {
                         const double ca = centroid_of(a);
                         const double cb = centroid_of(b);
                         return ca < cb || (ca == cb && a < b);
                     });
    const int left = build(first, mid - first, depth + 1);
    const int right = build(mid, first + count - mid, depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

NearestHit TriangleBvh::nearest(const Vec3& p) const
{
    NearestHit best;
    best.sq_dist = std::numeric_limits<double>::infinity();
    if (nodes_.empty()) {
        return best;
    }
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        if (node.box.squaredExteriorDistance(p) > best.sq_dist) {
            continue;
        }
        if (node.left < 0) {
            for (int k = node.first; k < node.first + node.count; ++k) {
                const int t = order_[k];
                const Tri& tri = triangles_[t];
                const ClosestPoint cp = closest_point_on_triangle(p, vertices_[tri[0]], vertices_[tri[1]],
                                                                  vertices_[tri[2]]);
                if (cp.sq_dist < best.sq_dist || (cp.sq_dist == best.sq_dist && t < best.triangle)) {
                    best.sq_dist = cp.sq_dist;
                    best.triangle = t;
                    best.point = cp.point;
                }
            }
            continue;
        }
        const double dl = nodes_[node.left].box.squaredExteriorDistance(p);
        const double dr = nodes_[node.right].box.squaredExteriorDistance(p);
        // Visit the nearer child first.
        if (dl <= dr) {
            stack.push_back(node.right);
            stack.push_back(node.left);
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }
    return best;
}

namespace
{

// Floating-point expansion arithmetic (Shewchuk). An expansion is a sum of
// non-overlapping doubles ordered by increasing magnitude.

inline void two_sum(double a, double b, double& x, double& y)
{
    x = a + b;
    const double bv = x - a;
    const double av = x - bv;
    y = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& x, double& y)
{
    x = a * b;
    y = std::fma(a, b, -x);
}

// h = e + b, zero components dropped.
int grow_expansion(int elen, const double* e, double b, double* h)
{
    double q = b;
    int hlen = 0;
    for (int i = 0; i < elen; ++i) {
        double sum = 0.0;
        double err = 0.0;
        two_sum(q, e[i], sum, err);
        q = sum;
        if (err != 0.0) {
            h[hlen++] = err;
        }
    }
    if (q != 0.0 || hlen == 0) {
        h[hlen++] = q;
    }
    return hlen;
}

}  // namespace

int orient2d_exact(const Vec2& a, const Vec2& b, const Vec2& c)
{
    // Fast path with a conservative error bound.
    const double detleft = (a.x() - c.x()) * (b.y() - c.y());
    const double detright = (a.y() - c.y()) * (b.x() - c.x());
    const double det = detleft - detright;
    const double bound = (3.3306690738754716e-16 + 1e-30) * (std::abs(detleft) + std::abs(detright));
    if (det > bound) {
        return 1;
    }
    if (-det > bound) {
        return -1;
    }
    // det = ax*by - ax*cy - cx*by - ay*bx + ay*cx + cy*bx, each product exact.
    const double terms[6][2] = {{a.x(), b.y()},  {-a.x(), c.y()}, {-c.x(), b.y()},
                                {-a.y(), b.x()}, {a.y(), c.x()},  {c.y(), b.x()}};
    double expansion[32];
    double scratch[32];
    int len = 0;
    for (const auto& t : terms) {
        double hi = 0.0;
        double lo = 0.0;
        two_product(t[0], t[1], hi, lo);
        len = grow_expansion(len, expansion, lo, scratch);
        std::copy(scratch, scratch + len, expansion);
        len = grow_expansion(len, expansion, hi, scratch);
        std::copy(scratch, scratch + len, expansion);
    }
    // The largest-magnitude component carries the sign.
    for (int i = len - 1; i >= 0; --i) {
        if (expansion[i] > 0.0) {
            return 1;
        }
        if (expansion[i] < 0.0) {
            return -1;
        }
    }
    return 0;
}

double signed_area_2d(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

bool triangles_overlap_2d(const std::array<Vec2, 3>& t0_in, const std::array<Vec2, 3>& t1_in)
{
    std::array<Vec2, 3> tris[2] = {t0_in, t1_in};
    for (auto& t : tris) {
        const int o = orient2d_exact(t[0], t[1], t[2]);
        if (o == 0) {
            return false;
        }
        if (o < 0) {
            std::swap(t[1], t[2]);
        }
    }
    // Interiors are disjoint iff some edge line of either triangle has the
    // whole other triangle on its closed outer side.
    for (int s = 0; s < 2; ++s) {
        const auto& a = tris[s];
        const auto& b = tris[1 - s];
        for (int e = 0; e < 3; ++e) {
            const Vec2& p = a[e];
            const Vec2& q = a[(e + 1) % 3];
            bool separated = true;
            for (const Vec2& v : b) {
                if (orient2d_exact(p, q, v) > 0) {
                    separated = false;
                    break;
                }
            }
            if (separated) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace freeshell
