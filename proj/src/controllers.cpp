#include "vdpctl/controllers.hpp"

#include <cmath>
#include <cstdio>
#include <complex>
#include <string>
#include <utility>

#include "vdpctl/errors.hpp"

namespace vdpctl {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// PBH test restricted to the non-stable modes of A.
bool stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const Eigen::Index n = A.rows();
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    const double scale = std::max({1.0, max_abs(A), max_abs(B)});
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> lambda = es.eigenvalues()(i);
        if (lambda.real() < 0.0) continue;
        Eigen::MatrixXcd pbh(n, n + B.cols());
        pbh.leftCols(n) = A.cast<std::complex<double>>() - lambda * Eigen::MatrixXcd::Identity(n, n);
        pbh.rightCols(B.cols()) = B.cast<std::complex<double>>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
        if (svd.singularValues()(n - 1) <= 1e-10 * scale) return false;
    }
    return true;
}

Eigen::MatrixXd hamiltonian(const LinearModel& m, const CostWeights& w) {
    const Eigen::Index n = m.A.rows();
    const Eigen::MatrixXd G = m.B * w.R.llt().solve(m.B.transpose());
    Eigen::MatrixXd H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = m.A;
    H.topRightCorner(n, n) = -G;
    H.bottomLeftCorner(n, n) = -w.Q;
    H.bottomRightCorner(n, n) = -m.A.transpose();
    return H;
}

// Matrix sign function by the determinant-scaled Newton iteration.
Eigen::MatrixXd matrix_sign(const Eigen::MatrixXd& H) {
    const Eigen::Index m = H.rows();
    Eigen::MatrixXd Z = H;
    bool scaling = true;
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(Z);
        if (!lu.isInvertible()) {
            throw synthesis_error("solve_are: Hamiltonian has eigenvalues on the imaginary axis");
        }
        const Eigen::MatrixXd Zinv = lu.inverse();
        double c = 1.0;
        if (scaling) {
            c = std::pow(std::abs(lu.determinant()), 1.0 / static_cast<double>(m));
            if (!std::isfinite(c) || c <= 0.0) c = 1.0;
        }
        Eigen::MatrixXd next = 0.5 * (Z / c + c * Zinv);
        const double change = (next - Z).lpNorm<1>();
        Z = std::move(next);
        if (!all_finite(Z)) throw synthesis_error("solve_are: sign iteration diverged");
        if (change <= 1e-3 * Z.lpNorm<1>()) scaling = false;
        if (change <= 1e-13 * Z.lpNorm<1>()) return Z;
    }
    throw synthesis_error("solve_are: sign iteration did not converge");
}

Eigen::MatrixXd gain(const LinearModel& m, const CostWeights& w, const Eigen::MatrixXd& S) {
    return w.R.llt().solve(m.B.transpose() * S);
}

// Solves Ac^T X + X Ac = -M through the Kronecker form.
Eigen::MatrixXd lyapunov(const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& M) {
    const Eigen::Index n = Ac.rows();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * n, n * n);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd AcT = Ac.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            // vec(Ac^T X) = (I kron Ac^T) vec X, vec(X Ac) = (Ac^T kron I) vec X
            L.block(i * n, j * n, n, n) += I(i, j) * AcT + AcT(i, j) * I;
        }
    }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(M.data(), n * n);
    Eigen::VectorXd x = L.fullPivLu().solve(rhs);
    return Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
}

bool hurwitz(const Eigen::VectorXcd& eig) {
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        if (!(eig(i).real() < 0.0)) return false;
    }
    return true;
}

}  // namespace

void LinearModel::validate() const {
    if (A.rows() == 0 || A.rows() != A.cols()) throw config_error("LinearModel: A must be square and non-empty");
    if (B.rows() != A.rows() || B.cols() == 0) throw config_error("LinearModel: B must have as many rows as A");
    if (!all_finite(A) || !all_finite(B)) throw invalid_state_error("LinearModel: non-finite entries");
    if (B.isZero(0.0)) throw config_error("LinearModel: B must be non-zero");
}

CostWeights CostWeights::unit(Eigen::Index n) {
    return {Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(1, 1)};
}

void CostWeights::validate() const {
    if (Q.rows() == 0 || Q.rows() != Q.cols()) throw config_error("CostWeights: Q must be square");
    if (R.rows() == 0 || R.rows() != R.cols()) throw config_error("CostWeights: R must be square");
    if (!all_finite(Q) || !all_finite(R)) throw invalid_state_error("CostWeights: non-finite entries");
    if (max_abs(Q - Q.transpose()) > 1e-12 * std::max(1.0, max_abs(Q))) {
        throw config_error("CostWeights: Q must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(Q);
    if (qe.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, max_abs(Q))) {
        throw config_error("CostWeights: Q must be positive semidefinite");
    }
    if (max_abs(R - R.transpose()) > 1e-12 * std::max(1.0, max_abs(R))) {
        throw config_error("CostWeights: R must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> re(R);
    if (!(re.eigenvalues().minCoeff() > 0.0)) throw config_error("CostWeights: R must be positive definite");
}

std::string_view to_string(FeedbackSign sign) {
    return sign == FeedbackSign::paper_as_written ? "paper" : "standard";
}

FeedbackSign parse_feedback_sign(std::string_view text) {
    if (text == "paper" || text == "paper-as-written") return FeedbackSign::paper_as_written;
    if (text == "standard" || text == "standard-tracking") return FeedbackSign::standard_tracking;
    throw config_error("unknown feedback sign convention '" + std::string(text) + "'");
}

LinearModel linearize(const VdpParams& params) {
    params.validate();
    LinearModel m;
    m.A.resize(2, 2);
    m.A << 0.0, 1.0, -1.0, params.mu;
    m.B.resize(2, 1);
    m.B << 0.0, 1.0;
    return m;
}

Eigen::MatrixXd riccati_residual(const LinearModel& m, const CostWeights& w, const Eigen::MatrixXd& S) {
    const Eigen::MatrixXd G = m.B * w.R.llt().solve(m.B.transpose());
    return S * m.A + m.A.transpose() * S - S * G * S + w.Q;
}

RiccatiSolution solve_are(const LinearModel& m, const CostWeights& w) {
    m.validate();
    w.validate();
    const Eigen::Index n = m.A.rows();
    if (w.Q.rows() != n || w.R.rows() != m.B.cols()) throw config_error("solve_are: weight dimensions mismatch");
    if (!stabilizable(m.A, m.B)) throw synthesis_error("solve_are: (A, B) is not stabilizable");

    // sign(H) [I; S] = -[I; S] for the stabilizing S.
    const Eigen::MatrixXd W = matrix_sign(hamiltonian(m, w));
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd lhs(2 * n, n), rhs(2 * n, n);
    lhs << W.topRightCorner(n, n), W.bottomRightCorner(n, n) + I;
    rhs << W.topLeftCorner(n, n) + I, W.bottomLeftCorner(n, n);
    Eigen::MatrixXd S = lhs.colPivHouseholderQr().solve(-rhs);
    S = (0.5 * (S + S.transpose())).eval();

    // Newton-Kleinman refinement.
    double best = max_abs(riccati_residual(m, w, S));
    int steps = 0;
    for (int iter = 0; iter < 50 && best > 1e-14 * std::max(1.0, max_abs(S)); ++iter) {
        const Eigen::MatrixXd K = gain(m, w, S);
        const Eigen::MatrixXd Ac = m.A - m.B * K;
        Eigen::MatrixXd next = lyapunov(Ac, w.Q + K.transpose() * w.R * K);
        next = (0.5 * (next + next.transpose())).eval();
        const double r = max_abs(riccati_residual(m, w, next));
        if (!std::isfinite(r) || r >= best) break;
        S = std::move(next);
        best = r;
        ++steps;
    }

    RiccatiSolution sol;
    sol.S = S;
    sol.K = gain(m, w, S);
    sol.residual = best;
    sol.refinement_steps = steps;
    sol.closed_loop_eigenvalues = Eigen::EigenSolver<Eigen::MatrixXd>(m.A - m.B * sol.K, false).eigenvalues();

    if (!(sol.residual < 1e-10)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "solve_are: residual %.3e above bound", sol.residual);
        throw synthesis_error(buf);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> se(S);
    if (se.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, max_abs(S))) {
        throw synthesis_error("solve_are: solution is not positive semidefinite");
    }
    if (!hurwitz(sol.closed_loop_eigenvalues)) throw synthesis_error("solve_are: closed loop is not stable");
    return sol;
}

ForcingFunction ff_force(const VdpParams& params, const DesiredTrajectory& d) {
    params.validate();
    d.validate();
    const double mu = params.mu;
    const double amp = d.amplitude;
    return [mu, amp](double t, const State&) {
        const double s = std::sin(t);
        return -mu * amp * std::cos(t) * (1.0 - amp * amp * s * s);
    };
}

ForcingFunction fb_force(double kp, double kd, const DesiredTrajectory& d, FeedbackSign sign) {
    if (!std::isfinite(kp) || !std::isfinite(kd)) throw invalid_state_error("fb_force: non-finite gains");
    d.validate();
    const double sgn = sign == FeedbackSign::paper_as_written ? -1.0 : 1.0;
    return [kp, kd, d, sgn](double t, const State& s) {
        const DesiredSample ds = d.eval(t);
        return sgn * (kd * (ds.v - s.v) + kp * (ds.x - s.x));
    };
}

ForcingFunction fb_force(const RiccatiSolution& sol, const DesiredTrajectory& d, FeedbackSign sign) {
    if (sol.K.rows() != 1 || sol.K.cols() != 2) throw config_error("fb_force: expected a 1x2 gain row");
    return fb_force(sol.kp(), sol.kd(), d, sign);
}

ForcingFunction combined_force(ForcingFunction ff, ForcingFunction fb) {
    if (!ff || !fb) throw config_error("combined_force: both laws must be defined");
    return [ff = std::move(ff), fb = std::move(fb)](double t, const State& s) { return ff(t, s) + fb(t, s); };
}

double cost_functional(const Trajectory& traj, const DesiredTrajectory& d, const CostWeights& w) {
    if (traj.empty()) throw contract_error("cost_functional: empty trajectory");
    if (w.Q.rows() != 2 || w.Q.cols() != 2 || w.R.rows() != 1) {
        throw config_error("cost_functional: expected 2x2 Q and 1x1 R");
    }
    auto integrand = [&](std::size_t i) {
        const DesiredSample ds = d.eval(traj.t[i]);
        Eigen::Vector2d e(traj.x[i] - ds.x, traj.v[i] - ds.v);
        const double u = traj.f[i];
        return e.dot(w.Q * e) + u * w.R(0, 0) * u;
    };
    double total = 0.0;
    double prev = integrand(0);
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const double cur = integrand(i);
        total += 0.5 * (prev + cur) * (traj.t[i] - traj.t[i - 1]);
        prev = cur;
    }
    return total;
}

}  // namespace vdpctl
