#include "vdpctl/mlp.hpp"

#include <cmath>
#include <random>
#include <string>

#include "mlp_kernels.hpp"
#include "vdpctl/errors.hpp"

namespace vdpctl {

namespace {

// 53-bit uniform in [0, 1) straight from the engine, portable across
// standard libraries.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_widths(const std::vector<int>& widths) {
    if (widths.size() < 2) throw config_error("mlp: need at least input and output widths");
    if (widths.front() != 1 || widths.back() != 1) throw config_error("mlp: input and output widths must be 1");
    for (int w : widths) {
        if (w < 1) throw config_error("mlp: layer widths must be positive");
    }
}

}  // namespace

MlpParams MlpParams::zeros(const std::vector<int>& widths) {
    check_widths(widths);
    MlpParams p;
    p.widths = widths;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        p.weights.push_back(Eigen::MatrixXd::Zero(widths[l + 1], widths[l]));
        p.biases.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
    }
    return p;
}

MlpParams MlpParams::glorot(const std::vector<int>& widths, std::uint64_t seed) {
    MlpParams p = zeros(widths);
    std::mt19937_64 rng(seed);
    for (auto& W : p.weights) {
        const double limit = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = limit * (2.0 * unit_uniform(rng) - 1.0);
        }
    }
    return p;
}

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

Eigen::VectorXd MlpParams::flatten() const {
    Eigen::VectorXd flat(parameter_count());
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        flat.segment(k, weights[l].size()) = Eigen::Map<const Eigen::VectorXd>(weights[l].data(), weights[l].size());
        k += weights[l].size();
        flat.segment(k, biases[l].size()) = biases[l];
        k += biases[l].size();
    }
    return flat;
}

void MlpParams::assign(const Eigen::VectorXd& flat) {
    if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
        throw config_error("mlp: flat parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
                           std::to_string(parameter_count()));
    }
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        Eigen::Map<Eigen::VectorXd>(weights[l].data(), weights[l].size()) = flat.segment(k, weights[l].size());
        k += weights[l].size();
        biases[l] = flat.segment(k, biases[l].size());
        k += biases[l].size();
    }
}

void MlpParams::set_input_range(double t0, double t1) {
    if (!(t1 > t0)) throw config_error("mlp: input range must satisfy t1 > t0");
    input_scale = 2.0 / (t1 - t0);
    input_shift = -1.0 - input_scale * t0;
}

void MlpParams::validate() const {
    check_widths(widths);
    if (weights.size() + 1 != widths.size() || biases.size() != weights.size()) {
        throw config_error("mlp: layer count does not match widths");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l] || biases[l].size() != widths[l + 1]) {
            throw config_error("mlp: shape mismatch in layer " + std::to_string(l));
        }
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            throw invalid_state_error("mlp: non-finite parameter in layer " + std::to_string(l));
        }
    }
    if (!std::isfinite(input_scale) || !std::isfinite(input_shift)) {
        throw invalid_state_error("mlp: non-finite input normalization");
    }
}

std::vector<int> hidden_widths(int depth, int width) {
    std::vector<int> w{1};
    for (int i = 0; i < depth; ++i) w.push_back(width);
    w.push_back(1);
    return w;
}

namespace detail {

void forward_block(const MlpParams& p, const double* t, Eigen::Index n, BlockCache& c) {
    const std::size_t L = p.layer_count();
    c.cols = n;
    c.streams.resize(L);
    c.pre.resize(L - 1);
    c.slope.resize(L - 1);

    Eigen::MatrixXd& in = c.streams[0];
    in.resize(1, 3 * n);
    for (Eigen::Index j = 0; j < n; ++j) in(0, j) = p.input_scale * t[j] + p.input_shift;
    in.middleCols(n, n).setConstant(p.input_scale);
    in.rightCols(n).setZero();

    for (std::size_t l = 0; l + 1 < L; ++l) {
        Eigen::MatrixXd& z = c.pre[l];
        z.noalias() = p.weights[l] * c.streams[l];
        z.leftCols(n).colwise() += p.biases[l];

        Eigen::MatrixXd& s = c.streams[l + 1];
        s.resize(z.rows(), 3 * n);
        auto h = s.leftCols(n).array();
        h = z.leftCols(n).array().tanh();
        c.slope[l] = 1.0 - h.square();
        const auto& d = c.slope[l];
        const auto ap = z.middleCols(n, n).array();
        const auto app = z.rightCols(n).array();
        s.middleCols(n, n).array() = d * ap;
        s.rightCols(n).array() = d * app - 2.0 * h * d * ap.square();
    }

    c.out.noalias() = p.weights[L - 1] * c.streams[L - 1];
    c.out.leftCols(n).colwise() += p.biases[L - 1];
}

void backward_block(const MlpParams& p, const BlockCache& c, const Eigen::MatrixXd& upstream, double* grad) {
    const std::size_t L = p.layer_count();
    const Eigen::Index n = c.cols;

    // Offsets of each layer's block in the flat gradient.
    std::vector<Eigen::Index> offset(L);
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < L; ++l) {
        offset[l] = k;
        k += p.weights[l].size() + p.biases[l].size();
    }

    auto accumulate = [&](std::size_t l, const Eigen::MatrixXd& gz) {
        const Eigen::Index rows = p.weights[l].rows(), cols = p.weights[l].cols();
        Eigen::Map<Eigen::MatrixXd> gW(grad + offset[l], rows, cols);
        gW.noalias() += gz * c.streams[l].transpose();
        Eigen::Map<Eigen::VectorXd> gb(grad + offset[l] + rows * cols, rows);
        gb += gz.leftCols(n).rowwise().sum();
    };

    accumulate(L - 1, upstream);
    Eigen::MatrixXd g = p.weights[L - 1].transpose() * upstream;
    Eigen::MatrixXd gz;

    for (std::size_t l = L - 1; l-- > 0;) {
        const auto& d = c.slope[l];
        const auto h = c.streams[l + 1].leftCols(n).array();
        const auto ap = c.pre[l].middleCols(n, n).array();
        const auto app = c.pre[l].rightCols(n).array();
        const auto gh = g.leftCols(n).array();
        const auto ghp = g.middleCols(n, n).array();
        const auto ghpp = g.rightCols(n).array();

        gz.resize(g.rows(), 3 * n);
        // h = tanh(a), h' = d a', h'' = d a'' - 2 h d a'^2 with d = 1 - h^2.
        gz.leftCols(n).array() = gh * d - 2.0 * ghp * h * d * ap -
                                 ghpp * (2.0 * h * d * app + 2.0 * ap.square() * d * (d - 2.0 * h.square()));
        gz.middleCols(n, n).array() = ghp * d - 4.0 * ghpp * h * d * ap;
        gz.rightCols(n).array() = ghpp * d;

        accumulate(l, gz);
        if (l > 0) g.noalias() = p.weights[l].transpose() * gz;
    }
}

}  // namespace detail

double mlp_forward(const MlpParams& p, double t) { return mlp_time_derivs(p, t).x; }

TimeDerivs mlp_time_derivs(const MlpParams& p, double t) {
    TimeDerivs r;
    mlp_time_derivs(p, std::span<const double>(&t, 1), std::span<double>(&r.x, 1), std::span<double>(&r.dx, 1),
                    std::span<double>(&r.ddx, 1));
    return r;
}

void mlp_time_derivs(const MlpParams& p, std::span<const double> t, std::span<double> x, std::span<double> dx,
                     std::span<double> ddx) {
    p.validate();
    if (x.size() != t.size() || dx.size() != t.size() || ddx.size() != t.size()) {
        throw config_error("mlp_time_derivs: output spans must match the input length");
    }
    constexpr Eigen::Index block = 256;
    detail::BlockCache cache;
    const auto total = static_cast<Eigen::Index>(t.size());
    for (Eigen::Index start = 0; start < total; start += block) {
        const Eigen::Index n = std::min(block, total - start);
        detail::forward_block(p, t.data() + start, n, cache);
        for (Eigen::Index j = 0; j < n; ++j) {
            x[start + j] = cache.out(0, j);
            dx[start + j] = cache.out(0, n + j);
            ddx[start + j] = cache.out(0, 2 * n + j);
        }
    }
}

}  // namespace vdpctl
