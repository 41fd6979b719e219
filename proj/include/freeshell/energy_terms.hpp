#pragma once

#include <array>
#include <cmath>

#include "freeshell/energy.hpp"

namespace freeshell::detail
{

/**
 * One residual (|a - b| - target)^2 using the regularized length
 * sqrt(e.e + reg). grad_a receives coef * d/da of it; d/db is -grad_a.
 */
inline double length_term(const Vec2& a, const Vec2& b, double target, double reg, double coef, Vec2& grad_a)
{
    const Vec2 e = a - b;
    const double len = std::sqrt(e.squaredNorm() + reg);
    const double r = len - target;
    grad_a = (coef * 2.0 * r / len) * e;
    return r * r;
}

inline Vec2 corner(std::span<const double> xy, int slot)
{
    return Vec2(xy[2 * slot], xy[2 * slot + 1]);
}

/// Rigidity of triangle t; grad[c] is the weighted gradient at corner c.
inline double triangle_kernel(const Layout& layout, std::span<const double> xy, const EnergyParams& p, int t,
                              double inv_e2, double reg, std::array<Vec2, 3>& grad)
{
    const std::array<Vec2, 3> x{corner(xy, 3 * t), corner(xy, 3 * t + 1), corner(xy, 3 * t + 2)};
    const double coef = p.w_rigid * inv_e2;
    std::array<Vec2, 3> ge;
    double e = 0.0;
    for (int c = 0; c < 3; ++c) {
        e += length_term(x[c], x[(c + 1) % 3], layout.rest_edges[t][c] * p.edge_scale, reg, coef, ge[c]);
    }
    for (int c = 0; c < 3; ++c) {
        grad[c] = ge[c] - ge[(c + 2) % 3];
    }
    return e * inv_e2;
}

/// Gap terms of a linkage; grad is ordered (i, m, j, k).
inline double gap_kernel(const Linkage& l, std::span<const double> xy, const EnergyParams& p, double inv_e2,
                         double reg, std::array<Vec2, 4>& grad)
{
    const double target = p.d * p.gap_scale;
    const double coef = p.w_gap * inv_e2;
    Vec2 g0;
    Vec2 g1;
    const double e = length_term(corner(xy, l.i), corner(xy, l.m), target, reg, coef, g0) +
                     length_term(corner(xy, l.j), corner(xy, l.k), target, reg, coef, g1);
    grad = {g0, Vec2(-g0), g1, Vec2(-g1)};
    return e * inv_e2;
}

/// Fairness terms of a linkage; grad is ordered (i, k, j, m).
inline double fair_kernel(const Linkage& l, std::span<const double> xy, const EnergyParams& p, double inv_e2,
                          double reg, std::array<Vec2, 4>& grad)
{
    const double target = diagonal_target(l, p);
    const double coef = p.w_fair * inv_e2;
    Vec2 g0;
    Vec2 g1;
    const double e = length_term(corner(xy, l.i), corner(xy, l.k), target, reg, coef, g0) +
                     length_term(corner(xy, l.j), corner(xy, l.m), target, reg, coef, g1);
    grad = {g0, Vec2(-g0), g1, Vec2(-g1)};
    return e * inv_e2;
}

}  // namespace freeshell::detail
