#include "freeshell/energy.hpp"

#include <cmath>

#include "freeshell/energy_terms.hpp"

namespace freeshell
{

double diagonal_target(const Linkage& l, const EnergyParams& p)
{
    const double g = p.d * p.gap_scale;
    return std::sqrt(l.rest_len * l.rest_len + g * g);
}

EnergyEvaluator::EnergyEvaluator(const Layout& layout, const EnergyParams& params)
    : layout_(layout), params_(params), slot_links_(layout.corners.size())
{
    for (std::size_t n = 0; n < layout.linkages.size(); ++n) {
        if (layout.linkages[n].state == LinkageState::retained) {
            active_.push_back(static_cast<int>(n));
        }
    }
    for (std::size_t a = 0; a < active_.size(); ++a) {
        const Linkage& l = layout.linkages[active_[a]];
        const int idx = static_cast<int>(a);
        slot_links_[l.i].push_back({idx, 0, 0});
        slot_links_[l.m].push_back({idx, 1, 3});
        slot_links_[l.j].push_back({idx, 2, 2});
        slot_links_[l.k].push_back({idx, 3, 1});
    }
    tri_energy_.resize(layout.triangle_count());
    tri_grad_.resize(layout.triangle_count());
    link_gap_.resize(active_.size());
    link_fair_.resize(active_.size());
    gap_grad_.resize(active_.size());
    fair_grad_.resize(active_.size());
}

EnergyBreakdown EnergyEvaluator::operator()(std::span<const double> xy, std::span<double> grad) const
{
    const double e2 = layout_.avg_edge * layout_.avg_edge;
    const double inv_e2 = 1.0 / e2;
    const double reg = kLengthRegularizer * e2;
    const int nt = layout_.triangle_count();
    const int nl = static_cast<int>(active_.size());
    const auto& p = params_;

#pragma omp parallel
    {
#pragma omp for schedule(static) nowait
        for (int t = 0; t < nt; ++t) {
            tri_energy_[t] = detail::triangle_kernel(layout_, xy, p, t, inv_e2, reg, tri_grad_[t]);
        }
#pragma omp for schedule(static)
        for (int a = 0; a < nl; ++a) {
            const Linkage& l = layout_.linkages[active_[a]];
            link_gap_[a] = detail::gap_kernel(l, xy, p, inv_e2, reg, gap_grad_[a]);
            link_fair_[a] = detail::fair_kernel(l, xy, p, inv_e2, reg, fair_grad_[a]);
        }
        if (!grad.empty()) {
            const int ns = 3 * nt;
#pragma omp for schedule(static)
            for (int s = 0; s < ns; ++s) {
                Vec2 g = tri_grad_[s / 3][s % 3];
                for (const Incidence& inc : slot_links_[s]) {
                    g += gap_grad_[inc.linkage][inc.gap_pos];
                }
                for (const Incidence& inc : slot_links_[s]) {
                    g += fair_grad_[inc.linkage][inc.fair_pos];
                }
                grad[2 * s] = g.x();
                grad[2 * s + 1] = g.y();
            }
        }
    }

    EnergyBreakdown out;
    for (double e : tri_energy_) {
        out.rigid += e;
    }
    for (double e : link_gap_) {
        out.gap += e;
    }
    for (double e : link_fair_) {
        out.fair += e;
    }
    out.total = p.w_rigid * out.rigid + p.w_gap * out.gap + p.w_fair * out.fair;
    return out;
}

EnergyBreakdown energy_and_gradient(const Layout& layout, const EnergyParams& p, std::vector<double>* grad)
{
    const std::vector<double> xy = corner_coordinates(layout);
    EnergyEvaluator eval(layout, p);
    if (grad) {
        grad->assign(xy.size(), 0.0);
        return eval(xy, *grad);
    }
    return eval(xy, {});
}

}  // namespace freeshell
