#pragma once

#include <functional>
#include <span>
#include <vector>

#include "freeshell/error.hpp"

namespace freeshell
{

/// Smooth objective: eval writes the gradient into grad and returns the value.
struct Objective {
    int dim{0};
    std::function<double(std::span<const double> x, std::span<double> grad)> eval;
};

struct MinimizeOptions {
    int memory{10};
    /// Infinity-norm gradient tolerance; a value <= 0 selects 1e-6 * sqrt(dim).
    double grad_tol{0};
    int max_iters{500};
};

struct SolveStats {
    int iterations{0};
    double final_energy{0};
    double grad_norm{0};
    bool converged{false};
};

/// Line search failure; carries the last accepted iterate so callers can resume.
class LineSearchError : public Error
{
public:
    LineSearchError(const std::string& msg, std::vector<double> x, SolveStats stats)
        : Error(msg), last_x(std::move(x)), last_stats(stats)
    {
    }
    std::vector<double> last_x;
    SolveStats last_stats;
};

struct MinimizeResult {
    std::vector<double> x;
    SolveStats stats;
};

/**
 * L-BFGS with a strong Wolfe line search (c1 = 1e-4, c2 = 0.9, at most 60
 * trial steps). memory = 0 gives steepest descent. Accepted iterates never
 * increase f. Throws NonFiniteError if f or its gradient is not finite at
 * x0, LineSearchError if no Wolfe step is found.
 */
MinimizeResult minimize(const Objective& obj, std::vector<double> x0, const MinimizeOptions& opts = {});

/// Max over coordinates of |g_fd - g| / max(1, |g|) with central differences of step h.
double finite_difference_check(const Objective& obj, std::span<const double> x, double h);

}  // namespace freeshell
