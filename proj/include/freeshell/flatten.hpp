#pragma once

#include <functional>
#include <string>
#include <vector>

#include "freeshell/energy.hpp"
#include "freeshell/layout.hpp"
#include "freeshell/optimizer.hpp"
#include "freeshell/param.hpp"

namespace freeshell
{

/// m = 1 + sqrt(3) * d / avg_edge.
double amplification_factor(double d, double avg_edge);

/// a = avg_edge * r / (sqrt(3) * (1 - r)); DomainError unless 0 <= r < 1.
double target_gap_from_rate(double avg_edge, double r);

/// max((1 + eps_tor) * d, (1 - c) * a_max).
double cut_threshold(const EnergyParams& p, double a_max);

/// lambda = eps * |eps| * learn_rate + 1.
double refinement_scale_factor(double eps_loss, double learn_rate);

/// Scale each triangle by lambda about its centroid, then everything by 1/lambda about the origin.
void two_step_scale(Layout& layout, double lambda);

struct AutoCutResult {
    int cut_count{0};
    double threshold{0};
    double a_max{0};
};

/**
 * Cut retained linkages whose gap exceeds cut_threshold(), largest gap
 * first (ties by id). A cut that would disconnect the triangle graph is
 * skipped, so the graph stays connected.
 */
AutoCutResult auto_cut(Layout& layout, const EnergyParams& p);

/// Called after every auto_cut with the stage name ("align" or "coarse").
using CutObserver = std::function<void(const Layout&, const std::string& stage)>;

/**
 * Minimize the energy over the layout's free variables (welded corners are
 * shared). A line-search failure keeps the last accepted iterate.
 */
SolveStats solve_layout(Layout& layout, const EnergyParams& p, const MinimizeOptions& opts);

struct AlignOptions {
    int max_iters{20};
    /// Weld threshold relative to avg_edge.
    double weld_tol_rel{1e-4};
};

struct AlignStats {
    int iterations{0};
    int cut_count{0};
    int welded_count{0};
    double final_a_max{0};
};

/**
 * Magnify-and-weld: solve with edge_scale = m and gap_scale = 0 (no
 * fairness), auto-cut, weld near-zero gaps; repeat until a_max <= eps_tor * d
 * or the linkage states stop changing. Every non-cut linkage is welded on
 * exit. Throws ConvergenceError after max_iters.
 */
AlignStats alignment_phase(Layout& layout, const EnergyParams& p, const MinimizeOptions& solver,
                           const AlignOptions& opts = {}, const CutObserver& observer = {});

/// Return welded linkages to retained; copies keep their shared coordinates.
void unweld_all(Layout& layout);

/// Weight schedule: w_rigid = 100, w_gap = w_fair = min(100, 10 + 10 * iter).
EnergyParams scheduled_weights(EnergyParams p, int iter);

struct CoarseRecord {
    int iter{0};
    EnergyBreakdown energy;
    double a_max{0};
    int cut_count{0};
    int solver_iterations{0};
};

struct CoarseStats {
    SolveStats last_solve;
    int iterations{0};
    double final_a_max{0};
    std::vector<CoarseRecord> history;
};

struct CoarseOptions {
    int outer_max_iters{50};
};

using IterationObserver = std::function<void(const Layout&, const CoarseRecord&)>;

/**
 * Outer loop: scheduled weights, solve with edge_scale = gap_scale = 1,
 * stop once every retained gap is <= (1 + eps_tor) * d, else auto-cut.
 * p.d is the coarse target gap. Throws ConvergenceError with the final
 * a_max when the bound is not reached.
 */
CoarseStats coarse_optimize(Layout& layout, const EnergyParams& p, const MinimizeOptions& solver,
                            const CoarseOptions& opts = {}, const CutObserver& observer = {},
                            const IterationObserver& on_iter = {});

struct RefineParams {
    double d_target{0};
    /// 1/mm^2; <= 0 selects 1 / (|eps_0| * mean centroid distance).
    double learn_rate{0};
    int max_steps{200};
    /// mm; <= 0 selects 1e-3 * avg_edge.
    double loss_tol{0};
};

struct RefineResult {
    double final_avg_gap{0};
    int steps{0};
    double learn_rate{0};
};

/// Two-step scaling until |mean gap - d_target| <= loss_tol. DivergenceError if |eps| grows 10 steps in a row.
RefineResult local_refinement(Layout& layout, const RefineParams& rp);

struct FlattenConfig {
    double shrink_rate{0.14};
    double kappa{1.2};
    double cut_rate{0.1};
    double eps_tor{0.1};
    AlignOptions align;
    CoarseOptions coarse;
    MinimizeOptions solver;
    ArapOptions arap;
    double learn_rate{0};
    int refine_max_steps{200};
    double loss_tol_rel{1e-3};
};

struct FlattenStats {
    double avg_edge{0};
    double d_target{0};
    double d_coarse{0};
    double amplification{0};
    AlignStats align;
    CoarseStats coarse;
    RefineResult refine;
    int cut_count{0};
};

struct FlattenResult {
    Layout layout;
    FlattenStats stats;
};

/// Tutte + ARAP, explode, align, coarse loop, refinement. Errors carry the stage name.
FlattenResult run_discrete_flattening(const TargetMesh& mesh, const FlattenConfig& cfg,
                                      const CutObserver& observer = {}, const IterationObserver& on_iter = {});

}  // namespace freeshell
