#include "freeshell/reference/energy_serial.hpp"

#include "freeshell/energy_terms.hpp"

namespace freeshell::reference
{

EnergyBreakdown energy_serial(const Layout& layout, std::span<const double> xy, const EnergyParams& p,
                              std::span<double> grad)
{
    const double e2 = layout.avg_edge * layout.avg_edge;
    const double inv_e2 = 1.0 / e2;
    const double reg = kLengthRegularizer * e2;
    const bool want_grad = !grad.empty();
    auto add = [&](int slot, const Vec2& g) {
        grad[2 * slot] += g.x();
        grad[2 * slot + 1] += g.y();
    };

    EnergyBreakdown out;
    for (int t = 0; t < layout.triangle_count(); ++t) {
        std::array<Vec2, 3> g;
        out.rigid += detail::triangle_kernel(layout, xy, p, t, inv_e2, reg, g);
        if (want_grad) {
            for (int c = 0; c < 3; ++c) {
                grad[2 * (3 * t + c)] = g[c].x();
                grad[2 * (3 * t + c) + 1] = g[c].y();
            }
        }
    }
    for (const Linkage& l : layout.linkages) {
        if (l.state != LinkageState::retained) {
            continue;
        }
        std::array<Vec2, 4> g;
        out.gap += detail::gap_kernel(l, xy, p, inv_e2, reg, g);
        if (want_grad) {
            add(l.i, g[0]);
            add(l.m, g[1]);
            add(l.j, g[2]);
            add(l.k, g[3]);
        }
    }
    for (const Linkage& l : layout.linkages) {
        if (l.state != LinkageState::retained) {
            continue;
        }
        std::array<Vec2, 4> g;
        out.fair += detail::fair_kernel(l, xy, p, inv_e2, reg, g);
        if (want_grad) {
            add(l.i, g[0]);
            add(l.k, g[1]);
            add(l.j, g[2]);
            add(l.m, g[3]);
        }
    }
    out.total = p.w_rigid * out.rigid + p.w_gap * out.gap + p.w_fair * out.fair;
    return out;
}

}  // namespace freeshell::reference
