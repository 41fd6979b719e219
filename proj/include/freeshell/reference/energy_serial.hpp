#pragma once

#include <span>

#include "freeshell/energy.hpp"

namespace freeshell::reference
{

/// Single-threaded energy and gradient; the oracle for EnergyEvaluator.
EnergyBreakdown energy_serial(const Layout& layout, std::span<const double> xy, const EnergyParams& p,
                              std::span<double> grad);

}  // namespace freeshell::reference
