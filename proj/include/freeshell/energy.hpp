#pragma once

#include <span>
#include <vector>

#include "freeshell/layout.hpp"

namespace freeshell
{

struct EnergyParams {
    double w_rigid{100};
    double w_gap{10};
    double w_fair{10};
    /// Multiplier on rest edge lengths in the rigidity term.
    double edge_scale{1};
    /// Multiplier on d in the gap and fairness targets.
    double gap_scale{1};
    double d{0};
    double eps_tor{0.1};
    double cut_rate{0.1};
};

/// Unweighted terms and the weighted total.
struct EnergyBreakdown {
    double total{0};
    double rigid{0};
    double gap{0};
    double fair{0};
};

/// Squared regularizer added to e.e in every length, relative to avg_edge^2.
inline constexpr double kLengthRegularizer = 1e-18;

/**
 * Energy and gradient over flattened corner coordinates, parallel over
 * triangles and linkages. Each corner's gradient is gathered from its
 * triangle, then its linkages' gap terms in id order, then their fairness
 * terms, so results do not depend on the thread count and match
 * reference::energy_serial bit for bit.
 *
 * Linkage states are read at construction; rebuild after cutting or welding.
 * Not safe to call concurrently on one instance.
 */
class EnergyEvaluator
{
public:
    EnergyEvaluator(const Layout& layout, const EnergyParams& params);

    /// grad may be empty to skip the gradient.
    EnergyBreakdown operator()(std::span<const double> xy, std::span<double> grad) const;

private:
    struct Incidence {
        int linkage;
        int gap_pos;
        int fair_pos;
    };

    const Layout& layout_;
    EnergyParams params_;
    std::vector<int> active_;
    std::vector<std::vector<Incidence>> slot_links_;
    mutable std::vector<double> tri_energy_;
    mutable std::vector<double> link_gap_;
    mutable std::vector<double> link_fair_;
    mutable std::vector<std::array<Vec2, 3>> tri_grad_;
    mutable std::vector<std::array<Vec2, 4>> gap_grad_;
    mutable std::vector<std::array<Vec2, 4>> fair_grad_;
};

/// Convenience: evaluate at the layout's own corners.
EnergyBreakdown energy_and_gradient(const Layout& layout, const EnergyParams& p, std::vector<double>* grad = nullptr);

/// Fairness target length for a linkage: sqrt(rest_len^2 + (d * gap_scale)^2).
double diagonal_target(const Linkage& l, const EnergyParams& p);

}  // namespace freeshell
