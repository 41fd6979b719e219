#include "freeshell/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace freeshell
{

namespace
{

constexpr double kC1 = 1e-4;
constexpr double kC2 = 0.9;
constexpr int kMaxTrials = 60;

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double inf_norm(std::span<const double> a)
{
    double m = 0.0;
    for (double v : a) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

bool all_finite(std::span<const double> a)
{
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

/// Minimizer of the cubic through (a, fa, da) and (b, fb, db); NaN if none.
double cubic_min(double a, double fa, double da, double b, double fb, double db)
{
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (disc < 0.0) {
        return std::nan("");
    }
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

struct Point {
    double alpha{0};
    double f{0};
    double d{0};
};

class LineSearch
{
public:
    LineSearch(const Objective& obj, std::span<const double> x, std::span<const double> dir, double f0, double d0)
        : obj_(obj), x_(x), dir_(dir), f0_(f0), d0_(d0), trial_x_(x.size()), grad_(x.size())
    {
    }

    /// On success trial_x/grad hold the accepted point.
    bool run(double alpha1, Point& accepted)
    {
        Point prev{0.0, f0_, d0_};
        double alpha = alpha1;
        for (int i = 0; trials_ < kMaxTrials; ++i) {
            Point cur = probe(alpha);
            if (!std::isfinite(cur.f) || cur.f > f0_ + kC1 * alpha * d0_ || (i > 0 && cur.f >= prev.f)) {
                return zoom(prev, cur, accepted);
            }
            if (std::abs(cur.d) <= -kC2 * d0_) {
                accepted = cur;
                return true;
            }
            if (cur.d >= 0.0) {
                return zoom(cur, prev, accepted);
            }
            prev = cur;
            alpha *= 2.0;
        }
        return false;
    }

    std::vector<double>& trial_x() { return trial_x_; }
    std::vector<double>& grad() { return grad_; }
    int evaluations() const { return trials_; }

private:
    Point probe(double alpha)
    {
        ++trials_;
        for (std::size_t k = 0; k < x_.size(); ++k) {
            trial_x_[k] = x_[k] + alpha * dir_[k];
        }
        const double f = obj_.eval(trial_x_, grad_);
        if (!std::isfinite(f) || !all_finite(grad_)) {
            return {alpha, std::numeric_limits<double>::infinity(), 0.0};
        }
        return {alpha, f, dot(grad_, dir_)};
    }

    bool zoom(Point lo, Point hi, Point& accepted)
    {
        while (trials_ < kMaxTrials) {
            const double width = hi.alpha - lo.alpha;
            if (std::abs(width) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) {
                return false;
            }
            double alpha = std::isfinite(hi.f) ? cubic_min(lo.alpha, lo.f, lo.d, hi.alpha, hi.f, hi.d)
                                               : std::nan("");
            const double a_min = std::min(lo.alpha, hi.alpha);
            const double a_max = std::max(lo.alpha, hi.alpha);
            const double margin = 0.1 * (a_max - a_min);
            if (!std::isfinite(alpha) || alpha < a_min + margin || alpha > a_max - margin) {
                alpha = 0.5 * (lo.alpha + hi.alpha);
            }
            Point cur = probe(alpha);
            if (!std::isfinite(cur.f) || cur.f > f0_ + kC1 * alpha * d0_ || cur.f >= lo.f) {
                hi = cur;
                continue;
            }
            if (std::abs(cur.d) <= -kC2 * d0_) {
                accepted = cur;
                return true;
            }
            if (cur.d * (hi.alpha - lo.alpha) >= 0.0) {
                hi = lo;
            }
            lo = cur;
        }
        return false;
    }

    const Objective& obj_;
    std::span<const double> x_;
    std::span<const double> dir_;
    double f0_;
    double d0_;
    std::vector<double> trial_x_;
    std::vector<double> grad_;
    int trials_{0};
};

}  // namespace

MinimizeResult minimize(const Objective& obj, std::vector<double> x, const MinimizeOptions& opts)
{
    const std::size_t n = x.size();
    if (static_cast<int>(n) != obj.dim) {
        throw DomainError("minimize: x0 has length " + std::to_string(n) + ", objective expects " +
                          std::to_string(obj.dim));
    }
    if (!all_finite(x)) {
        throw NonFiniteError("minimize: x0 is not finite");
    }
    const double tol = opts.grad_tol > 0.0 ? opts.grad_tol : 1e-6 * std::sqrt(static_cast<double>(n));
    std::vector<double> g(n);
    double f = obj.eval(x, g);
    if (!std::isfinite(f) || !all_finite(g)) {
        throw NonFiniteError("minimize: objective is not finite at x0");
    }

    SolveStats stats;
    std::deque<std::vector<double>> s_hist;
    std::deque<std::vector<double>> y_hist;
    std::deque<double> rho_hist;
    std::vector<double> dir(n);
    std::vector<double> alpha_buf;

    auto finish = [&](bool converged) {
        stats.final_energy = f;
        stats.grad_norm = inf_norm(g);
        stats.converged = converged;
        return MinimizeResult{std::move(x), stats};
    };

    for (;;) {
        if (inf_norm(g) <= tol) {
            return finish(true);
        }
        if (stats.iterations >= opts.max_iters) {
            return finish(false);
        }
        // Two-loop recursion.
        for (std::size_t k = 0; k < n; ++k) {
            dir[k] = -g[k];
        }
        const std::size_t m = s_hist.size();
        alpha_buf.assign(m, 0.0);
        for (std::size_t i = m; i-- > 0;) {
            alpha_buf[i] = rho_hist[i] * dot(s_hist[i], dir);
            for (std::size_t k = 0; k < n; ++k) {
                dir[k] -= alpha_buf[i] * y_hist[i][k];
            }
        }
        if (m > 0) {
            const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
            for (double& v : dir) {
                v *= gamma;
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            const double beta = rho_hist[i] * dot(y_hist[i], dir);
            for (std::size_t k = 0; k < n; ++k) {
                dir[k] += s_hist[i][k] * (alpha_buf[i] - beta);
            }
        }
        double d0 = dot(g, dir);
        if (!(d0 < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t k = 0; k < n; ++k) {
                dir[k] = -g[k];
            }
            d0 = dot(g, dir);
        }
        const double alpha1 = s_hist.empty() ? std::min(1.0, 1.0 / std::sqrt(dot(g, g))) : 1.0;

        LineSearch ls(obj, x, dir, f, d0);
        Point accepted;
        if (!ls.run(alpha1, accepted)) {
            stats.final_energy = f;
            stats.grad_norm = inf_norm(g);
            throw LineSearchError("minimize: no strong Wolfe step after " + std::to_string(ls.evaluations()) +
                                      " trials at iteration " + std::to_string(stats.iterations),
                                  x, stats);
        }
        ++stats.iterations;

        std::vector<double> s(n);
        std::vector<double> y(n);
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = ls.trial_x()[k] - x[k];
            y[k] = ls.grad()[k] - g[k];
        }
        const double f_prev = f;
        x.swap(ls.trial_x());
        g.swap(ls.grad());
        f = accepted.f;

        const double sy = dot(s, y);
        if (opts.memory > 0 && sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        // No representable progress left.
        if (!(f < f_prev)) {
            return finish(false);
        }
    }
}

double finite_difference_check(const Objective& obj, std::span<const double> x_in, double h)
{
    if (!(h > 0.0)) {
        throw DomainError("finite_difference_check: h must be positive");
    }
    const std::size_t n = x_in.size();
    std::vector<double> x(x_in.begin(), x_in.end());
    std::vector<double> g(n);
    std::vector<double> scratch(n);
    const double f = obj.eval(x, g);
    if (!std::isfinite(f) || !all_finite(g)) {
        throw NonFiniteError("finite_difference_check: objective is not finite");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double orig = x[k];
        x[k] = orig + h;
        const double fp = obj.eval(x, scratch);
        x[k] = orig - h;
        const double fm = obj.eval(x, scratch);
        x[k] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NonFiniteError("finite_difference_check: objective is not finite near x");
        }
        const double fd = (fp - fm) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - g[k]) / std::max(1.0, std::abs(g[k])));
    }
    return worst;
}

}  // namespace freeshell
