#include "gtms/mps.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

namespace gtms {

const Eigen::MatrixXcd& MpsTensor::matrix(int sigma) const {
    const auto vals = local_values(local_dim);
    for (std::size_t k = 0; k < vals.size(); ++k)
        if (vals[k] == sigma) return a[k];
    throw ShapeMismatch("spin value outside the local alphabet");
}

double MpsTensor::frobenius_norm() const {
    double s = 0.0;
    for (const auto& mat : a) s += mat.squaredNorm();
    return std::sqrt(s);
}

BlockWeights BlockWeights::zero(int n, int m) {
    if (n < 1 || m < 1) throw ShapeMismatch("block needs n, m >= 1");
    BlockWeights blk;
    blk.b = Eigen::VectorXcd::Zero(m);
    blk.a = Eigen::VectorXcd::Zero(n);
    blk.w = Eigen::VectorXcd::Zero(m);
    blk.w_tilde = Eigen::MatrixXcd::Zero(m, n);
    blk.w_hat = Eigen::MatrixXcd::Zero(m, n);
    return blk;
}

BlockWeights BlockWeights::random(int n, int m, RngStream& rng, double width) {
    BlockWeights blk = zero(n, m);
    blk.c = rng.complex_uniform(width, width);
    for (int mu = 0; mu < m; ++mu) blk.b(mu) = rng.complex_uniform(width, width);
    for (int nu = 0; nu < n; ++nu) blk.a(nu) = rng.complex_uniform(width, width);
    for (int mu = 0; mu < m; ++mu) blk.w(mu) = rng.complex_uniform(width, width);
    for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < n; ++nu) {
            blk.w_tilde(mu, nu) = rng.complex_uniform(width, width);
            blk.w_hat(mu, nu) = rng.complex_uniform(width, width);
        }
    return blk;
}

Eigen::VectorXd flatten(const BlockWeights& block, const ParamLayout& layout) {
    if (layout.kind != LayoutKind::Block)
        throw ShapeMismatch("layout kind does not match BlockWeights");
    if (block.n() != layout.block_n || block.m() != layout.block_m)
        throw ShapeMismatch("block dimensions do not match the layout");
    Eigen::VectorXd flat(layout.n_real());
    Eigen::Index k = 0;
    auto put = [&](cplx z) {
        flat(k++) = z.real();
        flat(k++) = z.imag();
    };
    put(block.c);
    for (int mu = 0; mu < block.m(); ++mu) put(block.b(mu));
    for (int nu = 0; nu < block.n(); ++nu) put(block.a(nu));
    for (int mu = 0; mu < block.m(); ++mu) put(block.w(mu));
    for (int mu = 0; mu < block.m(); ++mu)
        for (int nu = 0; nu < block.n(); ++nu) put(block.w_tilde(mu, nu));
    for (int mu = 0; mu < block.m(); ++mu)
        for (int nu = 0; nu < block.n(); ++nu) put(block.w_hat(mu, nu));
    return flat;
}

BlockWeights unflatten_block(const Eigen::VectorXd& flat, const ParamLayout& layout) {
    if (layout.kind != LayoutKind::Block)
        throw ShapeMismatch("layout kind does not match BlockWeights");
    if (flat.size() != static_cast<Eigen::Index>(layout.n_real()))
        throw LengthMismatch(static_cast<long>(layout.n_real()), flat.size());
    BlockWeights blk = BlockWeights::zero(layout.block_n, layout.block_m);
    Eigen::Index k = 0;
    auto get = [&]() {
        const double re = flat(k++), im = flat(k++);
        return cplx(re, im);
    };
    blk.c = get();
    for (int mu = 0; mu < blk.m(); ++mu) blk.b(mu) = get();
    for (int nu = 0; nu < blk.n(); ++nu) blk.a(nu) = get();
    for (int mu = 0; mu < blk.m(); ++mu) blk.w(mu) = get();
    for (int mu = 0; mu < blk.m(); ++mu)
        for (int nu = 0; nu < blk.n(); ++nu) blk.w_tilde(mu, nu) = get();
    for (int mu = 0; mu < blk.m(); ++mu)
        for (int nu = 0; nu < blk.n(); ++nu) blk.w_hat(mu, nu) = get();
    return blk;
}

Eigen::MatrixXcd block_tensor(const BlockWeights& block, int sigma) {
    const int n = block.n(), m = block.m();
    const int chi = 1 << n;
    Eigen::MatrixXcd T(chi, chi);
    for (int r = 0; r < chi; ++r) {
        cplx ea = 0.0;
        for (int nu = 0; nu < n; ++nu) ea += block.a(nu) * static_cast<double>(deep_sign(r, nu));
        for (int col = 0; col < chi; ++col) {
            cplx entry = std::exp(ea);
            for (int mu = 0; mu < m; ++mu) {
                cplx phi = block.b(mu) + static_cast<double>(sigma) * block.w(mu);
                for (int nu = 0; nu < n; ++nu)
                    phi += block.w_tilde(mu, nu) * static_cast<double>(deep_sign(r, nu)) +
                           block.w_hat(mu, nu) * static_cast<double>(deep_sign(col, nu));
                entry *= 2.0 * std::cosh(phi);
            }
            T(r, col) = entry;
        }
    }
    return std::exp(block.c * static_cast<double>(sigma)) * T;
}

BlockWeights aklt_weights() {
    using std::numbers::pi;
    BlockWeights blk = BlockWeights::zero(1, 2);
    blk.w(0) = cplx(0.0, pi / 4);
    blk.w(1) = cplx(0.0, pi / 2);
    blk.w_tilde(0, 0) = cplx(0.0, -pi / 4);
    blk.w_tilde(1, 0) = cplx(0.0, 3 * pi / 4);
    blk.w_hat(0, 0) = cplx(0.0, 0.0);
    blk.w_hat(1, 0) = cplx(0.0, 3 * pi / 4);
    blk.b(0) = cplx(0.0, 0.0);
    blk.b(1) = cplx(0.0, -pi / 2);
    return blk;
}

MpsTensor aklt_tensor() {
    const double norm = 2.0 / std::sqrt(3.0);
    const double s2 = 1.0 / std::sqrt(2.0);
    MpsTensor t;
    t.local_dim = 3;
    t.chi = 2;
    Eigen::MatrixXcd ap(2, 2), a0(2, 2), am(2, 2);
    ap << 0, s2, 0, 0;
    am << 0, 0, -s2, 0;
    a0 << -0.5, 0, 0, 0.5;
    t.a = {norm * ap, norm * a0, norm * am};
    return t;
}

MpsTensor random_mps_tensor(int chi, int local_dim, RngStream& rng) {
    if (chi < 1) throw ShapeMismatch("chi must be >= 1");
    MpsTensor t;
    t.local_dim = local_dim;
    t.chi = chi;
    t.a.assign(local_dim, Eigen::MatrixXcd(chi, chi));
    for (auto& mat : t.a)
        for (int r = 0; r < chi; ++r)
            for (int col = 0; col < chi; ++col) mat(r, col) = rng.complex_normal();
    const double norm = t.frobenius_norm();
    for (auto& mat : t.a) mat /= norm;
    return t;
}

namespace {

void check_block_target(const BlockWeights& block, const MpsTensor& target) {
    if ((1 << block.n()) != target.chi)
        throw ShapeMismatch("bond dimension mismatch between block and target");
    if (static_cast<int>(target.a.size()) != target.local_dim)
        throw ShapeMismatch("target tensor has wrong number of spin slices");
}

}  // namespace

double d_rel(const BlockWeights& block, const MpsTensor& target) {
    check_block_target(block, target);
    double num = 0.0, den = 0.0;
    const auto vals = local_values(target.local_dim);
    for (std::size_t k = 0; k < vals.size(); ++k) {
        num += (block_tensor(block, vals[k]) - target.a[k]).squaredNorm();
        den += target.a[k].squaredNorm();
    }
    return num / den;
}

Eigen::VectorXd d_rel_gradient(const BlockWeights& block, const MpsTensor& target) {
    check_block_target(block, target);
    const int n = block.n(), m = block.m();
    const int chi = 1 << n;
    const auto vals = local_values(target.local_dim);

    double den = 0.0;
    for (const auto& mat : target.a) den += mat.squaredNorm();

    // holomorphic derivatives g_p = sum conj(T - A) dT/dp; the real-layout
    // gradient is then (2 Re g, -2 Im g) / ||A||^2
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(block.n_params());
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const double sigma = vals[k];
        const Eigen::MatrixXcd T = block_tensor(block, static_cast<int>(sigma));
        const Eigen::MatrixXcd base = (T - target.a[k]).conjugate().cwiseProduct(T);
        for (int r = 0; r < chi; ++r)
            for (int col = 0; col < chi; ++col) {
                const cplx wgt = base(r, col);
                Eigen::Index q = 0;
                g(q++) += wgt * sigma;  // c
                for (int mu = 0; mu < m; ++mu) {
                    cplx phi = block.b(mu) + sigma * block.w(mu);
                    for (int nu = 0; nu < n; ++nu)
                        phi += block.w_tilde(mu, nu) * static_cast<double>(deep_sign(r, nu)) +
                               block.w_hat(mu, nu) * static_cast<double>(deep_sign(col, nu));
                    const cplx th = std::tanh(phi);
                    g(1 + mu) += wgt * th;                          // b
                    g(1 + m + n + mu) += wgt * sigma * th;          // w
                    for (int nu = 0; nu < n; ++nu) {
                        const double dr = deep_sign(r, nu), dc = deep_sign(col, nu);
                        g(1 + 2 * m + n + mu * n + nu) += wgt * dr * th;          // w_tilde
                        g(1 + 2 * m + n + m * n + mu * n + nu) += wgt * dc * th;  // w_hat
                    }
                }
                for (int nu = 0; nu < n; ++nu)
                    g(1 + m + nu) += wgt * static_cast<double>(deep_sign(r, nu));  // a
            }
    }

    Eigen::VectorXd grad(2 * block.n_params());
    for (Eigen::Index q = 0; q < g.size(); ++q) {
        grad(2 * q) = 2.0 * g(q).real() / den;
        grad(2 * q + 1) = -2.0 * g(q).imag() / den;
    }
    return grad;
}

std::pair<BlockWeights, TrainReport> train_tensor(const MpsTensor& target, int n, int m,
                                                  const TrainConfig& config, RngStream& rng) {
    const auto t0 = std::chrono::steady_clock::now();
    BlockWeights blk = BlockWeights::random(n, m, rng, config.init_width);
    const ParamLayout layout = ParamLayout::block(n, m);
    Eigen::VectorXd x = flatten(blk, layout);
    Eigen::VectorXd mom1 = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd mom2 = Eigen::VectorXd::Zero(x.size());

    TrainReport report;
    report.optimizer = config.optimizer;
    long it = 0;
    double d = d_rel(blk, target);
    for (it = 1; it <= config.max_iterations; ++it) {
        const Eigen::VectorXd grad = d_rel_gradient(blk, target);
        const double gnorm = grad.norm();
        if (it == 1 || (it % config.history_stride) == 0) {
            report.d_rel_history.push_back(d);
            report.grad_norm_history.push_back(gnorm);
        }
        if (d <= config.tolerance || gnorm <= config.grad_tolerance) break;

        switch (config.optimizer) {
            case OptimizerKind::SGD:
                x -= config.step * grad;
                break;
            case OptimizerKind::AdaGrad:
                mom2 += grad.cwiseProduct(grad);
                x -= config.step *
                     grad.cwiseQuotient(mom2.cwiseSqrt() +
                                        Eigen::VectorXd::Constant(x.size(), config.epsilon));
                break;
            case OptimizerKind::Adam: {
                mom1 = config.adam_beta1 * mom1 + (1.0 - config.adam_beta1) * grad;
                mom2 = config.adam_beta2 * mom2 +
                       (1.0 - config.adam_beta2) * grad.cwiseProduct(grad).eval();
                const double c1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(it));
                const double c2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(it));
                x -= config.step * (mom1 / c1)
                         .cwiseQuotient((mom2 / c2).cwiseSqrt() +
                                        Eigen::VectorXd::Constant(x.size(), config.epsilon));
                break;
            }
        }
        blk = unflatten_block(x, layout);
        d = d_rel(blk, target);
        if (!std::isfinite(d)) throw NonFinite("training diverged");
    }
    report.iterations = std::min(it, config.max_iterations);
    report.final_d_rel = d;
    report.d_rel_history.push_back(d);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {blk, report};
}

ScaledAmplitude mps_amplitude(const std::vector<MpsTensor>& tensors, const SpinConfig& sigma,
                              Boundary boundary) {
    if (tensors.empty() || tensors.size() != sigma.size())
        throw DimensionMismatch("tensors", static_cast<long>(sigma.size()),
                                static_cast<long>(tensors.size()));
    for (std::size_t i = 1; i < tensors.size(); ++i)
        if (tensors[i].chi != tensors[0].chi)
            throw DimensionMismatch("chi", tensors[0].chi, tensors[i].chi);

    constexpr double hi = 1e100, lo = 1e-100;
    Eigen::MatrixXcd prod = tensors[0].matrix(sigma[0]);
    double log_acc = 0.0;
    for (std::size_t i = 1; i < tensors.size(); ++i) {
        prod = (prod * tensors[i].matrix(sigma[i])).eval();
        const double mx = prod.cwiseAbs().maxCoeff();
        if (mx == 0.0) return ScaledAmplitude::zero();
        if (mx > hi || mx < lo) {
            prod /= mx;
            log_acc += std::log(mx);
        }
    }
    cplx value;
    if (boundary == Boundary::Periodic) {
        value = prod.trace();
    } else {
        value = Eigen::VectorXcd::Ones(prod.rows()).transpose() * prod *
                Eigen::VectorXcd::Ones(prod.cols());
    }
    if (value == cplx(0.0, 0.0)) return ScaledAmplitude::zero();
    return ScaledAmplitude::from_parts(value, log_acc);
}

std::vector<MpsTensor> extract_site_tensors(const NetworkShape& shape,
                                            const GtmsWeights& weights) {
    validate(shape, weights);
    if (!weights.is_mps_only(shape))
        throw ShapeMismatch("site tensors exist only without cross-site couplings");
    std::vector<MpsTensor> tensors(shape.n_sites);
    const auto vals = local_values(shape.local_dim);
    for (int i = 0; i < shape.n_sites; ++i) {
        BlockWeights blk = BlockWeights::zero(shape.deep_per_block, shape.hidden_per_block);
        blk.c = weights.c(i);
        blk.b = weights.b.row(i).transpose();
        blk.a = weights.a.row(i).transpose();
        blk.w = weights.w[i].row(i).transpose();
        blk.w_tilde = weights.w_tilde[i];
        blk.w_hat = weights.w_hat[i];
        MpsTensor t;
        t.local_dim = shape.local_dim;
        t.chi = shape.chi();
        for (int v : vals) t.a.push_back(block_tensor(blk, v));
        tensors[i] = std::move(t);
    }
    return tensors;
}

}  // namespace gtms
