#include "freeshell/flatten.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "freeshell/error.hpp"
#include "freeshell/mesh_io.hpp"

namespace freeshell
{

double amplification_factor(double d, double avg_edge)
{
    if (!(avg_edge > 0.0) || d < 0.0) {
        throw DomainError("amplification_factor: need avg_edge > 0 and d >= 0");
    }
    return 1.0 + std::sqrt(3.0) * d / avg_edge;
}

double target_gap_from_rate(double avg_edge, double r)
{
    if (!(r >= 0.0 && r < 1.0)) {
        throw DomainError("target_gap_from_rate: rate " + format_double(r) + " outside [0, 1)");
    }
    return avg_edge * r / (std::sqrt(3.0) * (1.0 - r));
}

double cut_threshold(const EnergyParams& p, double a_max)
{
    return std::max((1.0 + p.eps_tor) * p.d, (1.0 - p.cut_rate) * a_max);
}

double refinement_scale_factor(double eps_loss, double learn_rate)
{
    return eps_loss * std::abs(eps_loss) * learn_rate + 1.0;
}

void two_step_scale(Layout& layout, double lambda)
{
    if (lambda == 1.0) {
        return;
    }
    for (int t = 0; t < layout.triangle_count(); ++t) {
        const Vec2 c = triangle_centroid(layout, t);
        for (int k = 0; k < 3; ++k) {
            Vec2& x = layout.corners[3 * t + k];
            x = c + lambda * (x - c);
        }
    }
    const double inv = 1.0 / lambda;
    for (Vec2& x : layout.corners) {
        x *= inv;
    }
}

AutoCutResult auto_cut(Layout& layout, const EnergyParams& p)
{
    AutoCutResult result;
    std::vector<std::pair<double, int>> gaps;
    for (std::size_t n = 0; n < layout.linkages.size(); ++n) {
        if (layout.linkages[n].state == LinkageState::retained) {
            const double g = gap_value(layout, layout.linkages[n]);
            gaps.emplace_back(g, static_cast<int>(n));
            result.a_max = std::max(result.a_max, g);
        }
    }
    result.threshold = cut_threshold(p, result.a_max);
    std::sort(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (const auto& [g, n] : gaps) {
        if (!(g > result.threshold)) {
            break;
        }
        Linkage& l = layout.linkages[n];
        l.state = LinkageState::cut;
        if (graph_connected(layout)) {
            ++result.cut_count;
        } else {
            l.state = LinkageState::retained;
        }
    }
    return result;
}

SolveStats solve_layout(Layout& layout, const EnergyParams& p, const MinimizeOptions& opts)
{
    const VariableMap vars = make_variable_map(layout);
    const EnergyEvaluator eval(layout, p);
    std::vector<double> xy(2 * layout.corners.size());
    std::vector<double> slot_grad(xy.size());
    Objective obj;
    obj.dim = 2 * vars.var_count;
    obj.eval = [&](std::span<const double> x, std::span<double> g) {
        scatter_variables(x, vars, xy);
        const EnergyBreakdown e = eval(xy, slot_grad);
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t s = 0; s < vars.slot_to_var.size(); ++s) {
            const int v = vars.slot_to_var[s];
            g[2 * v] += slot_grad[2 * s];
            g[2 * v + 1] += slot_grad[2 * s + 1];
        }
        return e.total;
    };
    MinimizeResult result;
    try {
        result = minimize(obj, gather_variables(layout, vars), opts);
    } catch (const LineSearchError& e) {
        result.x = e.last_x;
        result.stats = e.last_stats;
    }
    scatter_variables(result.x, vars, xy);
    set_corner_coordinates(layout, xy);
    return result.stats;
}

EnergyParams scheduled_weights(EnergyParams p, int iter)
{
    p.w_rigid = 100.0;
    p.w_gap = std::min(100.0, 10.0 + 10.0 * iter);
    p.w_fair = p.w_gap;
    return p;
}

namespace
{

bool weights_saturated(int iter)
{
    return 10.0 + 10.0 * iter >= 100.0;
}

int weld_small_gaps(Layout& layout, double tol)
{
    int welded = 0;
    for (Linkage& l : layout.linkages) {
        if (l.state == LinkageState::retained && gap_value(layout, l) < tol) {
            l.state = LinkageState::welded;
            ++welded;
        }
    }
    return welded;
}

}  // namespace

AlignStats alignment_phase(Layout& layout, const EnergyParams& p, const MinimizeOptions& solver,
                           const AlignOptions& opts, const CutObserver& observer)
{
    AlignStats stats;
    const double m = amplification_factor(p.d, layout.avg_edge);
    const double stop = p.eps_tor * p.d;
    const double weld_tol = opts.weld_tol_rel * layout.avg_edge;
    bool done = false;
    for (int iter = 0; iter < opts.max_iters && !done; ++iter) {
        EnergyParams ap = scheduled_weights(p, iter);
        ap.edge_scale = m;
        ap.gap_scale = 0.0;
        ap.w_fair = 0.0;
        const SolveStats solve = solve_layout(layout, ap, solver);
        ++stats.iterations;
        const AutoCutResult cut = auto_cut(layout, ap);
        if (observer) {
            observer(layout, "align");
        }
        stats.cut_count += cut.cut_count;
        const int welded = weld_small_gaps(layout, weld_tol);
        stats.welded_count += welded;
        stats.final_a_max = cut.a_max;
        if (cut.a_max <= stop) {
            done = true;
        } else if (cut.cut_count == 0 && welded == 0 && weights_saturated(iter) && solve.converged) {
            // Nothing left to change: further iterations repeat this one.
            done = true;
        }
    }
    if (!done) {
        throw ConvergenceError("alignment did not settle after " + std::to_string(opts.max_iters) +
                               " iterations (a_max = " + format_double(stats.final_a_max) + ")");
    }
    for (Linkage& l : layout.linkages) {
        if (l.state == LinkageState::retained) {
            l.state = LinkageState::welded;
            ++stats.welded_count;
        }
    }
    EnergyParams ap = scheduled_weights(p, stats.iterations);
    ap.edge_scale = m;
    ap.gap_scale = 0.0;
    ap.w_fair = 0.0;
    solve_layout(layout, ap, solver);
    return stats;
}

void unweld_all(Layout& layout)
{
    for (Linkage& l : layout.linkages) {
        if (l.state == LinkageState::welded) {
            l.state = LinkageState::retained;
        }
    }
}

CoarseStats coarse_optimize(Layout& layout, const EnergyParams& p, const MinimizeOptions& solver,
                            const CoarseOptions& opts, const CutObserver& observer, const IterationObserver& on_iter)
{
    CoarseStats stats;
    const double bound = (1.0 + p.eps_tor) * p.d;
    for (int iter = 0; iter < opts.outer_max_iters; ++iter) {
        EnergyParams cp = scheduled_weights(p, iter);
        cp.edge_scale = 1.0;
        cp.gap_scale = 1.0;
        stats.last_solve = solve_layout(layout, cp, solver);
        stats.iterations = iter + 1;

        CoarseRecord rec;
        rec.iter = iter;
        rec.energy = energy_and_gradient(layout, cp);
        rec.solver_iterations = stats.last_solve.iterations;
        double a_max = 0.0;
        for (const Linkage& l : layout.linkages) {
            if (l.state == LinkageState::retained) {
                a_max = std::max(a_max, gap_value(layout, l));
            }
        }
        rec.a_max = a_max;
        stats.final_a_max = a_max;
        if (a_max <= bound) {
            stats.history.push_back(rec);
            if (on_iter) {
                on_iter(layout, rec);
            }
            return stats;
        }
        const AutoCutResult cut = auto_cut(layout, cp);
        if (observer) {
            observer(layout, "coarse");
        }
        rec.cut_count = cut.cut_count;
        stats.history.push_back(rec);
        if (on_iter) {
            on_iter(layout, rec);
        }
        if (cut.cut_count == 0 && weights_saturated(iter) && stats.last_solve.converged) {
            throw ConvergenceError("coarse loop stalled at iteration " + std::to_string(iter) + " with a_max = " +
                                   format_double(a_max) + " > " + format_double(bound) +
                                   " and no linkage left to cut");
        }
    }
    throw ConvergenceError("coarse loop did not converge in " + std::to_string(opts.outer_max_iters) +
                           " iterations (a_max = " + format_double(stats.final_a_max) + ", bound " +
                           format_double(bound) + ")");
}

RefineResult local_refinement(Layout& layout, const RefineParams& rp)
{
    RefineResult result;
    const double tol = rp.loss_tol > 0.0 ? rp.loss_tol : 1e-3 * layout.avg_edge;
    double eps = mean_gap(layout) - rp.d_target;
    result.learn_rate = rp.learn_rate;
    if (result.learn_rate <= 0.0) {
        double sum = 0.0;
        int n = 0;
        for (const Linkage& l : layout.linkages) {
            if (l.state == LinkageState::retained) {
                sum += (triangle_centroid(layout, l.tri_a) - triangle_centroid(layout, l.tri_b)).norm();
                ++n;
            }
        }
        const double spacing = n > 0 ? sum / n : layout.avg_edge;
        result.learn_rate = std::abs(eps) > 0.0 ? 1.0 / (std::abs(eps) * spacing) : 1.0 / (layout.avg_edge * layout.avg_edge);
    }
    int growing = 0;
    while (std::abs(eps) > tol && result.steps < rp.max_steps) {
        const double lambda = refinement_scale_factor(eps, result.learn_rate);
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw DivergenceError("local_refinement: scale factor " + format_double(lambda) + " at step " +
                                  std::to_string(result.steps));
        }
        two_step_scale(layout, lambda);
        ++result.steps;
        const double next = mean_gap(layout) - rp.d_target;
        growing = std::abs(next) > std::abs(eps) ? growing + 1 : 0;
        eps = next;
        if (growing >= 10) {
            throw DivergenceError("local_refinement: |eps| grew for 10 consecutive steps (eps = " +
                                  format_double(eps) + ")");
        }
    }
    result.final_avg_gap = mean_gap(layout);
    return result;
}

FlattenResult run_discrete_flattening(const TargetMesh& mesh, const FlattenConfig& cfg, const CutObserver& observer,
                                      const IterationObserver& on_iter)
{
    FlattenResult out;
    FlattenStats& stats = out.stats;
    Param2D param;
    try {
        param = arap_parameterize(mesh, tutte_embed(mesh), cfg.arap);
    } catch (...) {
        rethrow_with_label("parameterization");
    }
    try {
        out.layout = explode_mesh(mesh, param);
    } catch (...) {
        rethrow_with_label("explode");
    }
    Layout& layout = out.layout;
    stats.avg_edge = layout.avg_edge;
    try {
        stats.d_target = target_gap_from_rate(layout.avg_edge, cfg.shrink_rate);
    } catch (...) {
        rethrow_with_label("flatten");
    }
    stats.d_coarse = cfg.kappa * stats.d_target;
    stats.amplification = amplification_factor(stats.d_coarse, layout.avg_edge);

    EnergyParams p;
    p.d = stats.d_coarse;
    p.eps_tor = cfg.eps_tor;
    p.cut_rate = cfg.cut_rate;
    try {
        stats.align = alignment_phase(layout, p, cfg.solver, cfg.align, observer);
    } catch (...) {
        rethrow_with_label("alignment");
    }
    unweld_all(layout);
    try {
        stats.coarse = coarse_optimize(layout, p, cfg.solver, cfg.coarse, observer, on_iter);
    } catch (...) {
        rethrow_with_label("coarse optimization");
    }
    RefineParams rp;
    rp.d_target = stats.d_target;
    rp.learn_rate = cfg.learn_rate;
    rp.max_steps = cfg.refine_max_steps;
    rp.loss_tol = cfg.loss_tol_rel * layout.avg_edge;
    try {
        stats.refine = local_refinement(layout, rp);
    } catch (...) {
        rethrow_with_label("local refinement");
    }
    stats.cut_count = count_state(layout, LinkageState::cut);
    return out;
}

}  // namespace freeshell
