#include "gtms/amplitude.hpp"

#include <algorithm>
#include <cmath>

namespace gtms {

namespace {

constexpr double kRescaleHi = 1e100;
constexpr double kRescaleLo = 1e-100;
// bound on the summed |Re(phi)| of one entry below which the plain product of
// exp-based cosh factors cannot overflow before the end-of-entry rescale
constexpr double kFastPathBound = 600.0;

// 2 cosh(phi) as (mantissa, log) without forming exp(phi) when Re(phi) is large:
// 2 cosh(phi) = e^{s phi} (1 + e^{-2 s phi}) with s = sign(Re phi).
void cosh_factor_scaled(cplx phi, cplx& mantissa, double& log) {
    const double s = phi.real() >= 0.0 ? 1.0 : -1.0;
    const cplx sp = s * phi;
    mantissa = std::exp(cplx(0.0, sp.imag())) * (1.0 + std::exp(-2.0 * sp));
    log = sp.real();
}

// tanh from p = e^{phi}: (p^2 - 1)/(p^2 + 1), with saturation guards
cplx tanh_from_exp(cplx p) {
    const double ap = std::abs(p);
    if (ap > 1e60) {
        const cplx q = 1.0 / (p * p);
        return (1.0 - q) / (1.0 + q);
    }
    if (ap < 1e-60) {
        const cplx p2 = p * p;
        return (p2 - 1.0) / (p2 + 1.0);
    }
    const cplx p2 = p * p;
    return (p2 - 1.0) / (p2 + 1.0);
}

}  // namespace

ScaledAmplitude ScaledAmplitude::from_value(cplx v) {
    return from_parts(v, 0.0);
}

ScaledAmplitude ScaledAmplitude::from_parts(cplx raw, double log) {
    const double mag = std::abs(raw);
    if (mag == 0.0) return zero();
    return {raw / mag, log + std::log(mag)};
}

cplx log_ratio(const ScaledAmplitude& num, const ScaledAmplitude& den) {
    if (den.is_zero()) throw ZeroDenominator();
    if (num.is_zero())
        return {-std::numeric_limits<double>::infinity(), 0.0};
    return {num.log_scale - den.log_scale, std::arg(num.mantissa / den.mantissa)};
}

GtmsEvaluator::GtmsEvaluator(const NetworkShape& shape, GtmsWeights weights)
    : shape_(shape), weights_(std::move(weights)) {
    validate(shape_, weights_);
    const int nt = shape_.n_blocks, n = shape_.deep_per_block;
    const int chi = shape_.chi();

    dsign_.resize(chi, n);
    for (int r = 0; r < chi; ++r)
        for (int nu = 0; nu < n; ++nu) dsign_(r, nu) = deep_sign(r, nu);
    dsign_row_.resize(chi * chi, n);
    dsign_col_.resize(chi * chi, n);
    for (int r = 0; r < chi; ++r)
        for (int col = 0; col < chi; ++col) {
            dsign_row_.row(r * chi + col) = dsign_.row(r);
            dsign_col_.row(r * chi + col) = dsign_.row(col);
        }

    dsign_row_c_ = dsign_row_.cast<cplx>();
    dsign_col_c_ = dsign_col_.cast<cplx>();

    exp_u_.resize(nt);
    exp_v_.resize(nt);
    u_raw_.resize(nt);
    v_raw_.resize(nt);
    exp_a_.resize(nt);
    uv_re_bound_.resize(nt);
    a_re_bound_.resize(nt);
    const Eigen::MatrixXcd dsign_c = dsign_.cast<cplx>();
    for (int j = 0; j < nt; ++j) {
        u_raw_[j] = dsign_c * weights_.w_tilde[j].transpose();  // chi x m
        v_raw_[j] = dsign_c * weights_.w_hat[j].transpose();
        exp_u_[j] = u_raw_[j].array().exp();
        exp_v_[j] = v_raw_[j].array().exp();
        exp_a_[j] = (dsign_c * weights_.a.row(j).transpose()).array().exp();
        uv_re_bound_[j] = u_raw_[j].real().cwiseAbs().colwise().maxCoeff().transpose() +
                          v_raw_[j].real().cwiseAbs().colwise().maxCoeff().transpose();
        a_re_bound_[j] = weights_.a.row(j).real().cwiseAbs().sum();
    }
}

void GtmsEvaluator::check_config(const SpinConfig& sigma) const {
    if (static_cast<int>(sigma.size()) != shape_.n_sites)
        throw DimensionMismatch("sigma", shape_.n_sites, static_cast<long>(sigma.size()));
    for (int v : sigma) {
        const bool ok = (v == 1 || v == -1 || (v == 0 && shape_.local_dim == 3));
        if (!ok) throw ShapeMismatch("spin value outside the local alphabet");
    }
}

void GtmsEvaluator::eval_block(int j, const Eigen::VectorXd& sigma_vec, bool want_tanh,
                               BlockEval& out, Scratch& s) const {
    const int chi = shape_.chi();
    const int m = shape_.hidden_per_block;

    s.theta = weights_.b.row(j).transpose() + weights_.w[j].transpose() * sigma_vec;

    double re_sum = a_re_bound_[j];
    for (int mu = 0; mu < m; ++mu)
        re_sum += std::abs(s.theta(mu).real()) + uv_re_bound_[j](mu);
    const bool fast = re_sum <= kFastPathBound;

    out.mat.resize(chi, chi);
    s.entry_log.resize(chi, chi);
    if (want_tanh) out.tanh_phi.resize(chi * chi, m);

    if (fast) {
        s.exp_theta = s.theta.array().exp();
        for (int r = 0; r < chi; ++r) {
            for (int col = 0; col < chi; ++col) {
                cplx acc = exp_a_[j](r);
                double lg = 0.0;
                for (int mu = 0; mu < m; ++mu) {
                    const cplx p = s.exp_theta(mu) * exp_u_[j](r, mu) * exp_v_[j](col, mu);
                    acc *= p + 1.0 / p;
                    if (want_tanh) out.tanh_phi(r * chi + col, mu) = tanh_from_exp(p);
                }
                const double mag = std::abs(acc);
                if (mag > kRescaleHi || (mag < kRescaleLo && mag > 0.0)) {
                    lg = std::log(mag);
                    acc /= mag;
                }
                out.mat(r, col) = acc;
                s.entry_log(r, col) = lg;
            }
        }
    } else {
        // large |Re(phi)|: accumulate each 2cosh factor in scaled form
        for (int r = 0; r < chi; ++r) {
            for (int col = 0; col < chi; ++col) {
                cplx acc = exp_a_[j](r);
                double lg = 0.0;
                for (int mu = 0; mu < m; ++mu) {
                    const cplx phi = s.theta(mu) + u_raw_[j](r, mu) + v_raw_[j](col, mu);
                    cplx fm;
                    double fl;
                    cosh_factor_scaled(phi, fm, fl);
                    acc *= fm;
                    lg += fl;
                    if (want_tanh) out.tanh_phi(r * chi + col, mu) = std::tanh(phi);
                    const double mag = std::abs(acc);
                    if (mag > kRescaleHi || (mag < kRescaleLo && mag > 0.0)) {
                        lg += std::log(mag);
                        acc /= mag;
                    }
                }
                out.mat(r, col) = acc;
                s.entry_log(r, col) = lg;
            }
        }
    }

    // pull the entry logs into one common scale
    double max_log = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < chi; ++r)
        for (int col = 0; col < chi; ++col) {
            const double mag = std::abs(out.mat(r, col));
            if (mag > 0.0) max_log = std::max(max_log, s.entry_log(r, col) + std::log(mag));
        }
    if (!std::isfinite(max_log)) {  // all entries zero
        out.log_scale = 0.0;
        return;
    }
    bool uniform = true;
    const double l00 = s.entry_log(0, 0);
    for (int r = 0; r < chi && uniform; ++r)
        for (int col = 0; col < chi; ++col)
            if (s.entry_log(r, col) != l00) {
                uniform = false;
                break;
            }
    if (uniform) {
        out.log_scale = l00;
        return;
    }
    for (int r = 0; r < chi; ++r)
        for (int col = 0; col < chi; ++col)
            out.mat(r, col) *= std::exp(s.entry_log(r, col) - max_log);
    out.log_scale = max_log;
}

ScaledAmplitude GtmsEvaluator::amplitude(const SpinConfig& sigma) const {
    Scratch s;
    return amplitude(sigma, s);
}

ScaledAmplitude GtmsEvaluator::amplitude(const SpinConfig& sigma, Scratch& s) const {
    check_config(sigma);
    const int nt = shape_.n_blocks;
    const int chi = shape_.chi();

    s.sigma_vec.resize(shape_.n_sites);
    for (int i = 0; i < shape_.n_sites; ++i) s.sigma_vec(i) = sigma[i];

    BlockEval blk;
    double log_acc = 0.0;
    eval_block(0, s.sigma_vec, false, blk, s);
    s.prod = blk.mat;
    log_acc += blk.log_scale;
    for (int j = 1; j < nt; ++j) {
        eval_block(j, s.sigma_vec, false, blk, s);
        s.tmp.noalias() = s.prod * blk.mat;
        s.prod.swap(s.tmp);
        log_acc += blk.log_scale;
        const double mx = s.prod.cwiseAbs().maxCoeff();
        if (mx == 0.0) return ScaledAmplitude::zero();
        if (mx > kRescaleHi || mx < kRescaleLo) {
            s.prod /= mx;
            log_acc += std::log(mx);
        }
    }

    cplx tr = 0.0;
    for (int r = 0; r < chi; ++r) tr += s.prod(r, r);

    cplx z = 0.0;  // sum_i c_i sigma_i
    for (int i = 0; i < shape_.n_sites; ++i) z += weights_.c(i) * s.sigma_vec(i);

    if (!std::isfinite(log_acc) || !std::isfinite(tr.real()) || !std::isfinite(tr.imag()))
        throw NonFinite("non-finite intermediate in transfer-matrix product");

    if (tr == cplx(0.0, 0.0)) return ScaledAmplitude::zero();
    return ScaledAmplitude::from_parts(tr * std::exp(cplx(0.0, z.imag())),
                                       log_acc + z.real());
}

Eigen::MatrixXcd GtmsEvaluator::transfer_matrix(int block, const SpinConfig& sigma) const {
    check_config(sigma);
    if (block < 0 || block >= shape_.n_blocks)
        throw ShapeMismatch("block index out of range");
    Scratch s;
    s.sigma_vec.resize(shape_.n_sites);
    for (int i = 0; i < shape_.n_sites; ++i) s.sigma_vec(i) = sigma[i];
    BlockEval blk;
    eval_block(block, s.sigma_vec, false, blk, s);
    return blk.mat * std::exp(blk.log_scale);
}

cplx GtmsEvaluator::log_amplitude_ratio(const SpinConfig& num, const SpinConfig& den) const {
    return log_ratio(amplitude(num), amplitude(den));
}

Eigen::VectorXcd GtmsEvaluator::log_derivatives(const SpinConfig& sigma,
                                                const ParamLayout& layout) const {
    check_config(sigma);
    if (layout.kind == LayoutKind::Block)
        throw ShapeMismatch("block layouts do not describe a full network");
    if (layout.kind == LayoutKind::Tied &&
        (shape_.n_blocks != shape_.n_sites || shape_.boundary != Boundary::Periodic))
        throw ShapeMismatch("tied layout requires N_T = N and periodic boundaries");

    const int nt = shape_.n_blocks, N = shape_.n_sites;
    const int n = shape_.deep_per_block, m = shape_.hidden_per_block;
    const int chi = shape_.chi();

    Scratch s;
    s.sigma_vec.resize(N);
    for (int i = 0; i < N; ++i) s.sigma_vec(i) = sigma[i];

    std::vector<BlockEval> blocks(nt);
    for (int j = 0; j < nt; ++j) eval_block(j, s.sigma_vec, true, blocks[j], s);

    // scaled prefix products L_j = T_0 .. T_{j-1} and suffixes R_j = T_{j+1} .. T_{nt-1}
    std::vector<Eigen::MatrixXcd> L(nt), R(nt);
    std::vector<double> l_log(nt, 0.0), r_log(nt, 0.0);
    L[0] = Eigen::MatrixXcd::Identity(chi, chi);
    for (int j = 1; j < nt; ++j) {
        L[j].noalias() = L[j - 1] * blocks[j - 1].mat;
        l_log[j] = l_log[j - 1] + blocks[j - 1].log_scale;
        const double mx = L[j].cwiseAbs().maxCoeff();
        if (mx > 0.0 && (mx > kRescaleHi || mx < kRescaleLo)) {
            L[j] /= mx;
            l_log[j] += std::log(mx);
        }
    }
    R[nt - 1] = Eigen::MatrixXcd::Identity(chi, chi);
    for (int j = nt - 2; j >= 0; --j) {
        R[j].noalias() = blocks[j + 1].mat * R[j + 1];
        r_log[j] = r_log[j + 1] + blocks[j + 1].log_scale;
        const double mx = R[j].cwiseAbs().maxCoeff();
        if (mx > 0.0 && (mx > kRescaleHi || mx < kRescaleLo)) {
            R[j] /= mx;
            r_log[j] += std::log(mx);
        }
    }

    Eigen::MatrixXcd full = L[nt - 1] * blocks[nt - 1].mat;
    const cplx tr = full.trace();
    const double full_log = l_log[nt - 1] + blocks[nt - 1].log_scale;

    double re_z = 0.0;
    for (int i = 0; i < N; ++i) re_z += weights_.c(i).real() * s.sigma_vec(i);
    const double log_abs_psi = (tr == cplx(0.0, 0.0))
                                   ? -std::numeric_limits<double>::infinity()
                                   : full_log + std::log(std::abs(tr)) + re_z;
    if (!(log_abs_psi > std::log(psi_floor_))) throw AmplitudeTooSmall(psi_floor_);

    // per-block sums of W_j(r,c) * factor(r,c), where W_j(r,c) = (R_j L_j)(c,r) T_j(r,c) / tr
    std::vector<Eigen::VectorXcd> s_b(nt), s_a(nt);
    std::vector<Eigen::MatrixXcd> s_wt(nt), s_wh(nt);
    Eigen::VectorXcd wvec(chi * chi);
    for (int j = 0; j < nt; ++j) {
        Eigen::MatrixXcd G = R[j] * L[j];
        const cplx coef = std::exp(l_log[j] + blocks[j].log_scale + r_log[j] - full_log) / tr;
        for (int r = 0; r < chi; ++r)
            for (int col = 0; col < chi; ++col)
                wvec(r * chi + col) = G(col, r) * blocks[j].mat(r, col) * coef;
        s_b[j] = blocks[j].tanh_phi.transpose() * wvec;                       // m
        s_a[j] = dsign_row_c_.transpose() * wvec;                             // n
        Eigen::MatrixXcd weighted =
            (blocks[j].tanh_phi.array().colwise() * wvec.array()).matrix();
        s_wt[j] = weighted.transpose() * dsign_row_c_;                        // m x n
        s_wh[j] = weighted.transpose() * dsign_col_c_;                        // m x n
    }

    Eigen::VectorXcd g(layout.n_complex);
    Eigen::Index k = 0;
    if (layout.kind == LayoutKind::Untied) {
        const int hat_blocks = (shape_.boundary == Boundary::Open) ? nt - 1 : nt;
        for (int i = 0; i < N; ++i) g(k++) = s.sigma_vec(i);
        for (int j = 0; j < nt; ++j)
            for (int mu = 0; mu < m; ++mu) g(k++) = s_b[j](mu);
        for (int j = 0; j < nt; ++j)
            for (int nu = 0; nu < n; ++nu) g(k++) = s_a[j](nu);
        for (int j = 0; j < nt; ++j)
            for (int i = 0; i < N; ++i)
                for (int mu = 0; mu < m; ++mu) g(k++) = s.sigma_vec(i) * s_b[j](mu);
        for (int j = 0; j < nt; ++j)
            for (int mu = 0; mu < m; ++mu)
                for (int nu = 0; nu < n; ++nu) g(k++) = s_wt[j](mu, nu);
        for (int j = 0; j < hat_blocks; ++j)
            for (int mu = 0; mu < m; ++mu)
                for (int nu = 0; nu < n; ++nu) g(k++) = s_wh[j](mu, nu);
    } else {  // Tied
        g(k++) = s.sigma_vec.sum();
        for (int mu = 0; mu < m; ++mu) {
            cplx acc = 0.0;
            for (int j = 0; j < nt; ++j) acc += s_b[j](mu);
            g(k++) = acc;
        }
        for (int nu = 0; nu < n; ++nu) {
            cplx acc = 0.0;
            for (int j = 0; j < nt; ++j) acc += s_a[j](nu);
            g(k++) = acc;
        }
        for (int d = 0; d <= layout.rbm_range; ++d)
            for (int mu = 0; mu < m; ++mu) {
                cplx acc = 0.0;
                for (int j = 0; j < nt; ++j) acc += s.sigma_vec(((j - d) % N + N) % N) * s_b[j](mu);
                g(k++) = acc;
            }
        for (int mu = 0; mu < m; ++mu)
            for (int nu = 0; nu < n; ++nu) {
                cplx acc = 0.0;
                for (int j = 0; j < nt; ++j) acc += s_wt[j](mu, nu);
                g(k++) = acc;
            }
        for (int mu = 0; mu < m; ++mu)
            for (int nu = 0; nu < n; ++nu) {
                cplx acc = 0.0;
                for (int j = 0; j < nt; ++j) acc += s_wh[j](mu, nu);
                g(k++) = acc;
            }
    }

    Eigen::VectorXcd out(layout.n_real());
    for (Eigen::Index q = 0; q < g.size(); ++q) {
        out(2 * q) = g(q);
        out(2 * q + 1) = cplx(0.0, 1.0) * g(q);
    }
    return out;
}

ScaledAmplitude amplitude(const NetworkShape& shape, const GtmsWeights& weights,
                          const SpinConfig& sigma) {
    return GtmsEvaluator(shape, weights).amplitude(sigma);
}

Eigen::MatrixXcd transfer_matrix(const NetworkShape& shape, const GtmsWeights& weights,
                                 int block, const SpinConfig& sigma) {
    return GtmsEvaluator(shape, weights).transfer_matrix(block, sigma);
}

cplx log_amplitude_ratio(const NetworkShape& shape, const GtmsWeights& weights,
                         const SpinConfig& num, const SpinConfig& den) {
    return GtmsEvaluator(shape, weights).log_amplitude_ratio(num, den);
}

Eigen::VectorXcd log_derivatives(const NetworkShape& shape, const GtmsWeights& weights,
                                 const SpinConfig& sigma, const ParamLayout& layout) {
    return GtmsEvaluator(shape, weights).log_derivatives(sigma, layout);
}

void LookupWaveFunction::set(const SpinConfig& sigma, cplx value) {
    table_.emplace_back(basis_index(sigma, local_dim_), value);
    sorted_ = false;
}

ScaledAmplitude LookupWaveFunction::amplitude(const SpinConfig& sigma) const {
    if (!sorted_) {
        std::sort(table_.begin(), table_.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        sorted_ = true;
    }
    const long idx = basis_index(sigma, local_dim_);
    auto it = std::lower_bound(table_.begin(), table_.end(), idx,
                               [](const auto& e, long v) { return e.first < v; });
    if (it == table_.end() || it->first != idx) return ScaledAmplitude::zero();
    return ScaledAmplitude::from_value(it->second);
}

long LookupWaveFunction::basis_index(const SpinConfig& sigma, int local_dim) {
    long idx = 0, mult = 1;
    for (int v : sigma) {
        int digit;
        if (local_dim == 2) {
            digit = (v == 1) ? 0 : 1;
        } else {
            digit = (v == 1) ? 0 : (v == 0 ? 1 : 2);
        }
        idx += digit * mult;
        mult *= local_dim;
    }
    return idx;
}

SpinConfig LookupWaveFunction::basis_config(long index, int n_sites, int local_dim) {
    SpinConfig sigma(n_sites);
    for (int i = 0; i < n_sites; ++i) {
        const int digit = static_cast<int>(index % local_dim);
        index /= local_dim;
        if (local_dim == 2)
            sigma[i] = digit == 0 ? 1 : -1;
        else
            sigma[i] = digit == 0 ? 1 : (digit == 1 ? 0 : -1);
    }
    return sigma;
}

}  // namespace gtms
