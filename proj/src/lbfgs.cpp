#include "vdpctl/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "vdpctl/errors.hpp"

namespace vdpctl {

namespace {

struct Probe {
    double alpha = 0.0;
    double f = 0.0;
    double slope = 0.0;  // directional derivative g(x + alpha p) . p
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), falling back
// to bisection when it is undefined or outside the safeguarded interval.
double cubic_step(const Probe& a, const Probe& b) {
    const double lo = std::min(a.alpha, b.alpha);
    const double hi = std::max(a.alpha, b.alpha);
    const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.slope * b.slope;
    double t = 0.5 * (lo + hi);
    if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
        const double denom = b.slope - a.slope + 2.0 * d2;
        if (denom != 0.0) {
            const double c = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
            if (std::isfinite(c)) t = c;
        }
    }
    const double margin = 0.1 * (hi - lo);
    if (!(t > lo + margin && t < hi - margin)) t = 0.5 * (lo + hi);
    return t;
}

class LineSearch {
public:
    LineSearch(const Objective& obj, const LbfgsConfig& cfg, std::size_t& evals) : obj_(obj), cfg_(cfg), evals_(evals) {}

    // On success x_out/g_out/f_out hold the last evaluated point, which is
    // the accepted one.
    bool run(const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& g0, const Eigen::VectorXd& dir,
             double alpha0, Eigen::VectorXd& x_out, double& f_out, Eigen::VectorXd& g_out) {
        const double slope0 = g0.dot(dir);
        const Probe origin{0.0, f0, slope0};
        best_ = origin;
        best_valid_ = false;

        Probe prev = origin;
        double alpha = alpha0;
        for (std::size_t i = 0; i < cfg_.max_line_search; ++i) {
            Probe cur = probe(x, dir, alpha, x_out, g_out);
            if (!std::isfinite(cur.f) || cur.f > f0 + cfg_.c1 * alpha * slope0 || (i > 0 && cur.f >= prev.f)) {
                return zoom(x, f0, slope0, dir, prev, cur, x_out, f_out, g_out, cfg_.max_line_search - i - 1);
            }
            if (std::abs(cur.slope) <= -cfg_.c2 * slope0) {
                f_out = cur.f;
                return true;
            }
            if (cur.slope >= 0.0) {
                return zoom(x, f0, slope0, dir, cur, prev, x_out, f_out, g_out, cfg_.max_line_search - i - 1);
            }
            prev = cur;
            alpha *= 2.0;
        }
        return false;
    }

    // Best sufficient-decrease point seen, if any.
    bool best(const Eigen::VectorXd& x, const Eigen::VectorXd& dir, Eigen::VectorXd& x_out, double& f_out,
              Eigen::VectorXd& g_out) {
        if (!best_valid_) return false;
        probe(x, dir, best_.alpha, x_out, g_out);
        f_out = best_.f;
        return true;
    }

private:
    Probe probe(const Eigen::VectorXd& x, const Eigen::VectorXd& dir, double alpha, Eigen::VectorXd& x_out,
                Eigen::VectorXd& g_out) {
        x_out = x + alpha * dir;
        g_out.resize(x.size());
        ++evals_;
        const double f = obj_(x_out, g_out);
        Probe p{alpha, f, std::isfinite(f) ? g_out.dot(dir) : std::numeric_limits<double>::quiet_NaN()};
        if (std::isfinite(f) && f < best_.f) {
            best_ = p;
            best_valid_ = true;
        }
        return p;
    }

    bool zoom(const Eigen::VectorXd& x, double f0, double slope0, const Eigen::VectorXd& dir, Probe lo, Probe hi,
              Eigen::VectorXd& x_out, double& f_out, Eigen::VectorXd& g_out, std::size_t budget) {
        for (std::size_t i = 0; i < budget; ++i) {
            double alpha;
            if (std::isfinite(hi.f) && std::isfinite(hi.slope)) {
                alpha = cubic_step(lo, hi);
            } else {
                alpha = 0.5 * (lo.alpha + hi.alpha);
            }
            if (std::abs(hi.alpha - lo.alpha) <= std::numeric_limits<double>::epsilon() * std::abs(lo.alpha)) {
                return false;
            }
            Probe cur = probe(x, dir, alpha, x_out, g_out);
            if (!std::isfinite(cur.f) || cur.f > f0 + cfg_.c1 * alpha * slope0 || cur.f >= lo.f) {
                hi = cur;
            } else {
                if (std::abs(cur.slope) <= -cfg_.c2 * slope0) {
                    f_out = cur.f;
                    return true;
                }
                if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = cur;
            }
        }
        return false;
    }

    const Objective& obj_;
    const LbfgsConfig& cfg_;
    std::size_t& evals_;
    Probe best_;
    bool best_valid_ = false;
};

}  // namespace

void LbfgsConfig::validate() const {
    if (max_iterations < 1) throw config_error("lbfgs: max_iterations must be at least 1");
    if (history < 1) throw config_error("lbfgs: history must be at least 1");
    if (!(grad_tol > 0.0) || !(rel_tol > 0.0)) throw config_error("lbfgs: tolerances must be positive");
    if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) throw config_error("lbfgs: need 0 < c1 < c2 < 1");
    if (max_line_search < 2) throw config_error("lbfgs: max_line_search must be at least 2");
}

std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::gradient_tolerance: return "gradient_tolerance";
        case StopReason::relative_decrease: return "relative_decrease";
        case StopReason::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

LbfgsResult lbfgs_minimize(const Objective& objective, const Eigen::VectorXd& start, const LbfgsConfig& cfg,
                           const IterationCallback& on_iteration) {
    cfg.validate();
    LbfgsResult res;
    res.x = start;
    Eigen::VectorXd g(start.size());
    res.f = objective(res.x, g);
    res.evaluations = 1;
    res.initial_f = res.f;
    if (!std::isfinite(res.f) || !g.allFinite()) throw invalid_state_error("lbfgs: non-finite objective at start");

    struct Pair {
        Eigen::VectorXd s, y;
        double rho;
    };
    std::deque<Pair> mem;
    std::vector<double> alphas;
    LineSearch ls(objective, cfg, res.evaluations);
    Eigen::VectorXd x_new, g_new, dir;

    if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
        res.reason = StopReason::gradient_tolerance;
        return res;
    }

    while (res.iterations < cfg.max_iterations) {
        // Two-loop recursion.
        dir = -g;
        alphas.resize(mem.size());
        for (std::size_t i = mem.size(); i-- > 0;) {
            alphas[i] = mem[i].rho * mem[i].s.dot(dir);
            dir -= alphas[i] * mem[i].y;
        }
        if (!mem.empty()) dir *= mem.back().s.dot(mem.back().y) / mem.back().y.squaredNorm();
        for (std::size_t i = 0; i < mem.size(); ++i) {
            const double beta = mem[i].rho * mem[i].y.dot(dir);
            dir += (alphas[i] - beta) * mem[i].s;
        }
        if (!(g.dot(dir) < 0.0)) {
            // Not a descent direction; restart from steepest descent.
            mem.clear();
            dir = -g;
        }
        const double alpha0 = mem.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;

        double f_new = 0.0;
        if (!ls.run(res.x, res.f, g, dir, alpha0, x_new, f_new, g_new)) {
            res.degraded = true;
            res.reason = StopReason::line_search_failure;
            if (ls.best(res.x, dir, x_new, f_new, g_new)) {
                ++res.iterations;
                res.x = x_new;
                res.f = f_new;
                if (on_iteration) on_iteration(res.iterations, res.x, res.f);
            }
            return res;
        }

        ++res.iterations;
        Pair pr{x_new - res.x, g_new - g, 0.0};
        const double sy = pr.s.dot(pr.y);
        const double f_old = res.f;
        res.x = x_new;
        res.f = f_new;
        g = g_new;
        if (on_iteration) on_iteration(res.iterations, res.x, res.f);

        if (sy > std::numeric_limits<double>::epsilon() * pr.y.squaredNorm()) {
            pr.rho = 1.0 / sy;
            mem.push_back(std::move(pr));
            if (mem.size() > cfg.history) mem.pop_front();
        }

        if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
            res.reason = StopReason::gradient_tolerance;
            return res;
        }
        if ((f_old - res.f) / std::max({std::abs(f_old), std::abs(res.f), 1.0}) <= cfg.rel_tol) {
            res.reason = StopReason::relative_decrease;
            return res;
        }
    }
    res.reason = StopReason::max_iterations;
    return res;
}

}  // namespace vdpctl
