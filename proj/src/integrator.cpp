#include "vdpctl/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "vdpctl/errors.hpp"

namespace vdpctl {

namespace {

using Vec2 = std::array<double, 2>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
// 5th minus 4th order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller constants.
constexpr double safety = 0.9;
constexpr double beta = 0.04;
constexpr double expo = 0.2 - beta * 0.75;
constexpr double min_shrink = 0.2;
constexpr double max_grow = 10.0;

bool finite2(const Vec2& y) { return std::isfinite(y[0]) && std::isfinite(y[1]); }

class Stepper {
public:
    Stepper(const PlanarSystem& sys, IntegrationStats& stats) : sys_(sys), stats_(stats) {}

    Vec2 eval(double t, const Vec2& y) {
        ++stats_.evaluations;
        const StateDerivative d = sys_.field(t, State{y[0], y[1]});
        return {d.dx, d.dv};
    }

private:
    const PlanarSystem& sys_;
    IntegrationStats& stats_;
};

double error_scale(double atol, double rtol, double y0, double y1) {
    return atol + rtol * std::max(std::abs(y0), std::abs(y1));
}

// Initial step guess (Hairer, Norsett & Wanner, II.4).
double initial_step(Stepper& f, double t, const Vec2& y, const Vec2& k1, double span, const IntegratorConfig& cfg) {
    double dnf = 0.0, dny = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double sk = cfg.atol + cfg.rtol * std::abs(y[i]);
        dnf += (k1[i] / sk) * (k1[i] / sk);
        dny += (y[i] / sk) * (y[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, span);
    Vec2 y1{y[0] + h * k1[0], y[1] + h * k1[1]};
    const Vec2 k2 = f.eval(t + h, y1);
    double der2 = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double sk = cfg.atol + cfg.rtol * std::abs(y[i]);
        der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, span});
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rtol > 0.0) || !std::isfinite(rtol)) throw config_error("integrator: rtol must be positive");
    if (!(atol > 0.0) || !std::isfinite(atol)) throw config_error("integrator: atol must be positive");
    if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0)) throw config_error("integrator: need t1 > t0");
    if (n_output < 2) throw config_error("integrator: n_output must be at least 2");
    if (max_steps < 1) throw config_error("integrator: max_steps must be positive");
}

std::vector<double> IntegratorConfig::grid() const {
    std::vector<double> g(n_output);
    const double dt = (t1 - t0) / static_cast<double>(n_output - 1);
    for (std::size_t i = 0; i < n_output; ++i) g[i] = t0 + dt * static_cast<double>(i);
    g.back() = t1;
    return g;
}

void Trajectory::resize(std::size_t n) {
    t.resize(n);
    x.resize(n);
    v.resize(n);
    a.resize(n);
    f.resize(n);
}

Trajectory integrate_system(const PlanarSystem& system, const State& init, const IntegratorConfig& cfg,
                            IntegrationStats* stats_out) {
    cfg.validate();
    if (!system.field) throw config_error("integrator: system has no vector field");
    if (!std::isfinite(init.x) || !std::isfinite(init.v)) {
        throw invalid_state_error("integrator: non-finite initial state");
    }

    IntegrationStats stats;
    Stepper f(system, stats);

    Trajectory out;
    out.resize(cfg.n_output);
    const std::vector<double> grid = cfg.grid();

    auto record = [&](std::size_t i, double t, const Vec2& y) {
        const State s{y[0], y[1]};
        const StateDerivative d = system.field(t, s);
        out.t[i] = t;
        out.x[i] = y[0];
        out.v[i] = y[1];
        out.a[i] = d.dv;
        out.f[i] = system.force ? system.force(t, s) : 0.0;
    };

    double t = cfg.t0;
    Vec2 y{init.x, init.v};
    Vec2 k1 = f.eval(t, y);
    if (!finite2(k1)) throw blowup_error("integrator: non-finite derivative at initial state", t);

    const double span = cfg.t1 - cfg.t0;
    double h = initial_step(f, t, y, k1, span, cfg);
    double fac_old = 1e-4;
    bool last_rejected = false;

    record(0, grid[0], y);
    std::size_t next = 1;

    std::size_t steps = 0;
    while (next < cfg.n_output) {
        if (steps++ >= cfg.max_steps) {
            throw divergence_error("integrator: step budget of " + std::to_string(cfg.max_steps) +
                                       " exceeded at t=" + std::to_string(t),
                                   t);
        }
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            throw divergence_error("integrator: step size underflow at t=" + std::to_string(t), t);
        }
        const bool final_step = t + 1.01 * h >= cfg.t1;
        if (final_step) h = cfg.t1 - t;

        Vec2 ys, k2, k3, k4, k5, k6, k7, y1;
        for (int i = 0; i < 2; ++i) ys[i] = y[i] + h * a21 * k1[i];
        k2 = f.eval(t + c2 * h, ys);
        for (int i = 0; i < 2; ++i) ys[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = f.eval(t + c3 * h, ys);
        for (int i = 0; i < 2; ++i) ys[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f.eval(t + c4 * h, ys);
        for (int i = 0; i < 2; ++i) ys[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f.eval(t + c5 * h, ys);
        for (int i = 0; i < 2; ++i) {
            ys[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        }
        const double t_new = final_step ? cfg.t1 : t + h;
        k6 = f.eval(t_new, ys);
        for (int i = 0; i < 2; ++i) {
            y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        }
        if (!finite2(y1)) throw blowup_error("integrator: state became non-finite", t);
        k7 = f.eval(t_new, y1);
        if (!finite2(k7)) throw blowup_error("integrator: derivative became non-finite", t);

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double r = e / error_scale(cfg.atol, cfg.rtol, y[i], y1[i]);
            err += r * r;
        }
        err = std::sqrt(err / 2.0);
        if (!std::isfinite(err)) throw blowup_error("integrator: error estimate became non-finite", t);

        const double fac11 = std::pow(err, expo);
        if (err <= 1.0) {
            double fac = fac11 / std::pow(fac_old, beta);
            fac = std::clamp(fac / safety, 1.0 / max_grow, 1.0 / min_shrink);
            double h_new = h / fac;
            if (last_rejected) h_new = std::min(h_new, h);
            fac_old = std::max(err, 1e-4);
            ++stats.accepted;

            // Dense output on [t, t_new].
            std::array<Vec2, 5> rc;
            for (int i = 0; i < 2; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                rc[0][i] = y[i];
                rc[1][i] = ydiff;
                rc[2][i] = bspl;
                rc[3][i] = ydiff - h * k7[i] - bspl;
                rc[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }
            while (next < cfg.n_output && (grid[next] <= t_new || (next == cfg.n_output - 1 && final_step))) {
                const double tg = grid[next];
                Vec2 yg;
                if (tg == t_new) {
                    yg = y1;
                } else {
                    const double th = (tg - t) / h;
                    const double th1 = 1.0 - th;
                    for (int i = 0; i < 2; ++i) {
                        yg[i] = rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
                    }
                }
                record(next, tg, yg);
                ++next;
            }

            t = t_new;
            y = y1;
            k1 = k7;
            h = h_new;
            last_rejected = false;
        } else {
            h = h / std::min(1.0 / min_shrink, fac11 / safety);
            last_rejected = true;
            ++stats.rejected;
        }
    }

    if (stats_out) *stats_out = stats;
    return out;
}

Trajectory integrate(const VdpParams& params, const ForcingFunction& force, const State& init,
                     const IntegratorConfig& cfg, IntegrationStats* stats) {
    params.validate();
    PlanarSystem sys;
    if (force) {
        sys.field = [params, &force](double t, const State& s) { return rhs_unchecked(params, s, force(t, s)); };
        sys.force = force;
    } else {
        sys.field = [params](double, const State& s) { return rhs_unchecked(params, s, 0.0); };
    }
    return integrate_system(sys, init, cfg, stats);
}

}  // namespace vdpctl
