#include "vdpctl/pinn_loss.hpp"

#include <cmath>
#include <string>

#ifdef VDPCTL_HAVE_OPENMP
#include <omp.h>
#endif

#include "mlp_kernels.hpp"
#include "vdpctl/errors.hpp"

namespace vdpctl {

namespace {

constexpr Eigen::Index kBlock = 250;

// Per-sample loss contributions and their partials with respect to the
// network output x and its second derivative.
struct SampleTerms {
    double nn = 0.0;
    double dyn = 0.0;
    double g_x = 0.0;
    double g_xdd = 0.0;
};

SampleTerms sample_terms(double t, double x_train, double x, double xdd, double inv_n, double amp,
                         const DesiredTrajectory& d, DynamicsResidual mode) {
    SampleTerms s;
    const DesiredSample ds = d.eval(t);
    const double rn = x_train - x / amp;
    s.nn = rn * rn;
    s.g_x = -2.0 * inv_n * rn / amp;
    if (mode == DynamicsResidual::joint) {
        const double r = (ds.a - xdd) + (ds.x - x);
        s.dyn = r * r;
        s.g_x -= 2.0 * inv_n * r;
        s.g_xdd = -2.0 * inv_n * r;
    } else {
        const double ra = ds.a - xdd;
        const double rx = ds.x - x;
        s.dyn = ra * ra + rx * rx;
        s.g_x -= 2.0 * inv_n * rx;
        s.g_xdd = -2.0 * inv_n * ra;
    }
    return s;
}

struct BlockResult {
    double nn = 0.0;
    double dyn = 0.0;
    Eigen::VectorXd grad;
};

// Forward + backward over samples [start, start + n). Sample 0 also carries
// the initial-position term.
void run_block(const MlpParams& p, const TrainingData& data, const DesiredTrajectory& d, const LossOptions& opts,
               Eigen::Index start, Eigen::Index n, bool with_grad, double x0_target, BlockResult& out,
               detail::BlockCache& cache, double* x0_out) {
    detail::forward_block(p, data.t.data() + start, n, cache);
    const double inv_n = 1.0 / static_cast<double>(data.size());
    Eigen::MatrixXd upstream;
    if (with_grad) upstream = Eigen::MatrixXd::Zero(1, 3 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double x = cache.out(0, j);
        const double xdd = cache.out(0, 2 * n + j);
        const SampleTerms s =
            sample_terms(data.t[start + j], data.x_train[start + j], x, xdd, inv_n, d.amplitude, d, opts.residual);
        out.nn += s.nn;
        out.dyn += s.dyn;
        if (with_grad) {
            upstream(0, j) = s.g_x;
            upstream(0, 2 * n + j) = s.g_xdd;
        }
        if (start + j == 0) {
            *x0_out = x;
            if (with_grad) upstream(0, j) += 2.0 * (x - x0_target);
        }
    }
    if (with_grad) {
        out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.parameter_count()));
        detail::backward_block(p, cache, upstream, out.grad.data());
    }
}

LossGradient blocked(const MlpParams& p, const TrainingData& data, const DesiredTrajectory& d, const LossOptions& opts,
                     bool with_grad) {
    p.validate();
    data.validate();
    d.validate();

    const auto total = static_cast<Eigen::Index>(data.size());
    const Eigen::Index blocks = (total + kBlock - 1) / kBlock;
    const double x0_target = d.eval(data.t[0]).x;
    std::vector<BlockResult> results(static_cast<std::size_t>(blocks));
    double x0 = 0.0;

#ifdef VDPCTL_HAVE_OPENMP
#pragma omp parallel
#endif
    {
        detail::BlockCache cache;
#ifdef VDPCTL_HAVE_OPENMP
#pragma omp for schedule(static)
#endif
        for (Eigen::Index b = 0; b < blocks; ++b) {
            const Eigen::Index start = b * kBlock;
            const Eigen::Index n = std::min(kBlock, total - start);
            run_block(p, data, d, opts, start, n, with_grad, x0_target, results[static_cast<std::size_t>(b)], cache,
                      &x0);
        }
    }

    LossGradient out;
    double nn = 0.0, dyn = 0.0;
    if (with_grad) out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.parameter_count()));
    for (const auto& r : results) {
        nn += r.nn;
        dyn += r.dyn;
        if (with_grad) out.grad += r.grad;
    }
    const double inv_n = 1.0 / static_cast<double>(total);
    out.loss.mse_nn = nn * inv_n;
    out.loss.mse_d = dyn * inv_n;
    out.loss.mse_i = (x0 - x0_target) * (x0 - x0_target);
    out.loss.total = out.loss.mse_nn + out.loss.mse_i + out.loss.mse_d;
    return out;
}

// Scalar per-sample forward/backward used by loss_grad_reference.
struct Sample3 {
    std::vector<double> v, d1, d2;
};

}  // namespace

void TrainingData::validate() const {
    if (t.empty()) throw contract_error("training data is empty");
    if (t.size() != x_train.size()) throw contract_error("training data: grid and positions differ in length");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (!(t[i] > t[i - 1])) throw config_error("training data: grid must be strictly increasing");
    }
}

TrainingData TrainingData::subsample(std::size_t stride) const {
    if (stride == 0) throw config_error("subsample: stride must be positive");
    TrainingData out;
    for (std::size_t i = 0; i < t.size(); i += stride) {
        out.t.push_back(t[i]);
        out.x_train.push_back(x_train[i]);
    }
    return out;
}

LossBreakdown loss_eval(const MlpParams& p, const TrainingData& data, const DesiredTrajectory& d,
                        const LossOptions& opts) {
    return blocked(p, data, d, opts, false).loss;
}

LossGradient loss_grad(const MlpParams& p, const TrainingData& data, const DesiredTrajectory& d,
                       const LossOptions& opts) {
    return blocked(p, data, d, opts, true);
}

LossGradient loss_grad_reference(const MlpParams& p, const TrainingData& data, const DesiredTrajectory& d,
                                 const LossOptions& opts) {
    p.validate();
    data.validate();
    d.validate();

    const std::size_t L = p.layer_count();
    const double inv_n = 1.0 / static_cast<double>(data.size());
    const double x0_target = d.eval(data.t[0]).x;

    std::vector<std::size_t> offset(L);
    std::size_t k = 0;
    for (std::size_t l = 0; l < L; ++l) {
        offset[l] = k;
        k += static_cast<std::size_t>(p.weights[l].size() + p.biases[l].size());
    }

    LossGradient out;
    out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    double nn = 0.0, dyn = 0.0, x0 = 0.0;

    std::vector<Sample3> act(L);      // act[l] enters linear map l
    std::vector<Sample3> pre(L - 1);  // hidden pre-activations
    for (std::size_t i = 0; i < data.size(); ++i) {
        act[0].v = {p.input_scale * data.t[i] + p.input_shift};
        act[0].d1 = {p.input_scale};
        act[0].d2 = {0.0};
        for (std::size_t l = 0; l + 1 < L; ++l) {
            const auto& W = p.weights[l];
            const auto rows = static_cast<std::size_t>(W.rows());
            const auto cols = static_cast<std::size_t>(W.cols());
            pre[l].v.assign(rows, 0.0);
            pre[l].d1.assign(rows, 0.0);
            pre[l].d2.assign(rows, 0.0);
            act[l + 1].v.resize(rows);
            act[l + 1].d1.resize(rows);
            act[l + 1].d2.resize(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                double a = p.biases[l](static_cast<Eigen::Index>(r)), a1 = 0.0, a2 = 0.0;
                for (std::size_t c = 0; c < cols; ++c) {
                    const double w = W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                    a += w * act[l].v[c];
                    a1 += w * act[l].d1[c];
                    a2 += w * act[l].d2[c];
                }
                pre[l].v[r] = a;
                pre[l].d1[r] = a1;
                pre[l].d2[r] = a2;
                const double h = std::tanh(a);
                const double s = 1.0 - h * h;
                act[l + 1].v[r] = h;
                act[l + 1].d1[r] = s * a1;
                act[l + 1].d2[r] = s * a2 - 2.0 * h * s * a1 * a1;
            }
        }
        const auto& Wo = p.weights[L - 1];
        double x = p.biases[L - 1](0), xdd = 0.0;
        for (Eigen::Index c = 0; c < Wo.cols(); ++c) {
            x += Wo(0, c) * act[L - 1].v[static_cast<std::size_t>(c)];
            xdd += Wo(0, c) * act[L - 1].d2[static_cast<std::size_t>(c)];
        }

        const SampleTerms st = sample_terms(data.t[i], data.x_train[i], x, xdd, inv_n, d.amplitude, d, opts.residual);
        nn += st.nn;
        dyn += st.dyn;
        double gx = st.g_x;
        if (i == 0) {
            x0 = x;
            gx += 2.0 * (x - x0_target);
        }

        // Backward through the three streams.
        Sample3 g{{gx}, {0.0}, {st.g_xdd}};
        for (std::size_t l = L; l-- > 0;) {
            const auto& W = p.weights[l];
            const auto rows = static_cast<std::size_t>(W.rows());
            const auto cols = static_cast<std::size_t>(W.cols());
            Sample3 gz = g;
            if (l + 1 < L) {
                // g holds gradients of hidden layer l + 1 outputs; map them to
                // its pre-activations.
                for (std::size_t r = 0; r < rows; ++r) {
                    const double h = act[l + 1].v[r];
                    const double s = 1.0 - h * h;
                    const double a1 = pre[l].d1[r];
                    const double a2 = pre[l].d2[r];
                    gz.v[r] = g.v[r] * s - 2.0 * g.d1[r] * h * s * a1 -
                              g.d2[r] * (2.0 * h * s * a2 + 2.0 * a1 * a1 * s * (s - 2.0 * h * h));
                    gz.d1[r] = g.d1[r] * s - 4.0 * g.d2[r] * h * s * a1;
                    gz.d2[r] = g.d2[r] * s;
                }
            }
            Sample3 gprev{std::vector<double>(cols, 0.0), std::vector<double>(cols, 0.0),
                          std::vector<double>(cols, 0.0)};
            for (std::size_t c = 0; c < cols; ++c) {
                for (std::size_t r = 0; r < rows; ++r) {
                    const auto idx = static_cast<Eigen::Index>(offset[l] + c * rows + r);
                    out.grad(idx) += gz.v[r] * act[l].v[c] + gz.d1[r] * act[l].d1[c] + gz.d2[r] * act[l].d2[c];
                    const double w = W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                    gprev.v[c] += w * gz.v[r];
                    gprev.d1[c] += w * gz.d1[r];
                    gprev.d2[c] += w * gz.d2[r];
                }
            }
            for (std::size_t r = 0; r < rows; ++r) {
                out.grad(static_cast<Eigen::Index>(offset[l] + rows * cols + r)) += gz.v[r];
            }
            g = std::move(gprev);
        }
    }

    out.loss.mse_nn = nn * inv_n;
    out.loss.mse_d = dyn * inv_n;
    out.loss.mse_i = (x0 - x0_target) * (x0 - x0_target);
    out.loss.total = out.loss.mse_nn + out.loss.mse_i + out.loss.mse_d;
    return out;
}

}  // namespace vdpctl
