#pragma once

#include <Eigen/Dense>
#include <string_view>

#include "vdpctl/dynamics.hpp"
#include "vdpctl/integrator.hpp"

namespace vdpctl {

/// dX/dt = A X + B U.
struct LinearModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;

    void validate() const;
};

/// Quadratic cost weights: Q symmetric PSD, R symmetric positive definite.
struct CostWeights {
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;

    /// Q = I_n, R = [1].
    static CostWeights unit(Eigen::Index n = 2);
    void validate() const;
};

/// Stabilizing solution of the continuous algebraic Riccati equation and the
/// resulting gain K = R^-1 B^T S. For the oscillator K = [K_p, K_d].
struct RiccatiSolution {
    Eigen::MatrixXd S;
    Eigen::MatrixXd K;
    /// Eigenvalues of A - B K (diagnostic only).
    Eigen::VectorXcd closed_loop_eigenvalues;
    /// Max-norm of the Riccati residual at S.
    double residual = 0.0;
    int refinement_steps = 0;

    double kp() const { return K(0, 0); }
    double kd() const { return K(0, 1); }
};

enum class FeedbackSign {
    /// F = -K_d (xd' - x') - K_p (xd - x): positive feedback on the tracking error.
    paper_as_written,
    /// F = +K_d (xd' - x') + K_p (xd - x).
    standard_tracking,
};

std::string_view to_string(FeedbackSign sign);
/// Accepts "paper" / "paper-as-written" / "standard" / "standard-tracking".
FeedbackSign parse_feedback_sign(std::string_view text);

/// Small-signal model about the origin with the x^2 term dropped:
/// A = [[0, 1], [-1, mu]], B = [0, 1]^T.
LinearModel linearize(const VdpParams& params);

/// SA + A^T S - S B R^-1 B^T S + Q.
Eigen::MatrixXd riccati_residual(const LinearModel& m, const CostWeights& w, const Eigen::MatrixXd& S);

/// Solves the ARE through the stable invariant subspace of the Hamiltonian
/// matrix (matrix sign iteration) followed by Newton-Kleinman refinement.
/// Throws synthesis_error when (A, B) is not stabilizable or no stabilizing
/// PSD solution meets the residual bound.
RiccatiSolution solve_are(const LinearModel& m, const CostWeights& w);

/// Idealized nonlinear feedforward: xd'' - mu (1 - xd^2) xd' + xd, which
/// reduces to -mu L cos t (1 - L^2 sin^2 t). Ignores the measured state.
ForcingFunction ff_force(const VdpParams& params, const DesiredTrajectory& d);

/// PD law with LQR gains; see FeedbackSign.
ForcingFunction fb_force(const RiccatiSolution& sol, const DesiredTrajectory& d,
                         FeedbackSign sign = FeedbackSign::paper_as_written);
ForcingFunction fb_force(double kp, double kd, const DesiredTrajectory& d,
                         FeedbackSign sign = FeedbackSign::paper_as_written);

/// Pointwise sum ff + fb.
ForcingFunction combined_force(ForcingFunction ff, ForcingFunction fb);

/// Trapezoidal integral of e^T Q e + u R u with e = (x - xd, v - xd') and u
/// the recorded force.
double cost_functional(const Trajectory& traj, const DesiredTrajectory& d, const CostWeights& w);

}  // namespace vdpctl
