#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "gtms/model.hpp"

namespace gtms {

// A complex value v represented as mantissa * exp(log_scale) with |mantissa| = 1
// (or mantissa = 0 and log_scale = 0 for the exact zero), so that products of
// many transfer matrices never overflow a double.
struct ScaledAmplitude {
    cplx mantissa{0.0, 0.0};
    double log_scale = 0.0;

    static ScaledAmplitude zero() { return {}; }
    static ScaledAmplitude from_value(cplx v);
    static ScaledAmplitude from_parts(cplx raw_mantissa, double log);

    bool is_zero() const { return mantissa == cplx(0.0, 0.0); }
    cplx value() const { return is_zero() ? cplx(0, 0) : mantissa * std::exp(log_scale); }
    // principal-branch complex logarithm; meaningful only for nonzero values
    cplx log() const { return {log_scale, std::arg(mantissa)}; }
    double log_abs() const { return log_scale; }
};

// ln(a/b) with the phase difference taken on the principal branch.
cplx log_ratio(const ScaledAmplitude& num, const ScaledAmplitude& den);

// Minimal wave-function interface shared by the network evaluator, exact-vector
// lookups and anything else the sampler or local-energy estimator may consume.
class WaveFunction {
  public:
    virtual ~WaveFunction() = default;
    virtual int n_sites() const = 0;
    virtual int local_dim() const = 0;
    virtual ScaledAmplitude amplitude(const SpinConfig& sigma) const = 0;
};

// Evaluates the network wave function and its parameter log-derivatives through
// numerically scaled transfer-matrix products. Binding weights once lets the
// spin-independent exponential factors exp(w_tilde d), exp(w_hat d), exp(a d)
// be cached across many configurations.
//
// All methods are const and share no mutable state; concurrent evaluation for
// different configurations is safe. Pass a Scratch per thread to avoid repeated
// allocation in tight loops.
class GtmsEvaluator final : public WaveFunction {
  public:
    struct Scratch {
        Eigen::VectorXd sigma_vec;
        Eigen::VectorXcd theta, exp_theta;
        Eigen::MatrixXcd block, prod, tmp;
        Eigen::MatrixXd entry_log;
    };

    GtmsEvaluator(const NetworkShape& shape, GtmsWeights weights);

    int n_sites() const override { return shape_.n_sites; }
    int local_dim() const override { return shape_.local_dim; }
    const NetworkShape& shape() const { return shape_; }
    const GtmsWeights& weights() const { return weights_; }

    ScaledAmplitude amplitude(const SpinConfig& sigma) const override;
    ScaledAmplitude amplitude(const SpinConfig& sigma, Scratch& scratch) const;

    // transfer matrix of one block, unscaled
    Eigen::MatrixXcd transfer_matrix(int block, const SpinConfig& sigma) const;

    // ln psi(num) - ln psi(den); throws ZeroDenominator when psi(den) = 0
    cplx log_amplitude_ratio(const SpinConfig& num, const SpinConfig& den) const;

    // Log-derivatives with respect to the flat real parameter vector of the
    // layout, one complex entry per real component. The derivative with respect
    // to an imaginary part is i times the one for the real part.
    Eigen::VectorXcd log_derivatives(const SpinConfig& sigma, const ParamLayout& layout) const;

    double amplitude_floor() const { return psi_floor_; }
    void set_amplitude_floor(double f) { psi_floor_ = f; }

  private:
    struct BlockEval {
        Eigen::MatrixXcd mat;       // chi x chi mantissas
        double log_scale = 0.0;
        Eigen::MatrixXcd tanh_phi;  // (chi*chi) x m, row index r*chi + c
    };

    void check_config(const SpinConfig& sigma) const;
    void eval_block(int block, const Eigen::VectorXd& sigma_vec, bool want_tanh,
                    BlockEval& out, Scratch& scratch) const;

    NetworkShape shape_;
    GtmsWeights weights_;
    double psi_floor_ = 1e-280;

    // spin-independent per-block caches
    std::vector<Eigen::MatrixXcd> exp_u_, exp_v_;  // chi x m
    std::vector<Eigen::MatrixXcd> u_raw_, v_raw_;  // chi x m
    std::vector<Eigen::VectorXcd> exp_a_;          // chi
    std::vector<Eigen::VectorXd> uv_re_bound_;     // per-mu bound on |Re(u)|+|Re(v)|
    std::vector<double> a_re_bound_;
    Eigen::MatrixXd dsign_;        // chi x n deep signs
    Eigen::MatrixXd dsign_row_;    // (chi*chi) x n, sign of the row index
    Eigen::MatrixXd dsign_col_;    // (chi*chi) x n, sign of the column index
    Eigen::MatrixXcd dsign_row_c_, dsign_col_c_;
};

// Convenience wrappers for one-off evaluations.
ScaledAmplitude amplitude(const NetworkShape& shape, const GtmsWeights& weights,
                          const SpinConfig& sigma);
Eigen::MatrixXcd transfer_matrix(const NetworkShape& shape, const GtmsWeights& weights,
                                 int block, const SpinConfig& sigma);
cplx log_amplitude_ratio(const NetworkShape& shape, const GtmsWeights& weights,
                         const SpinConfig& num, const SpinConfig& den);
Eigen::VectorXcd log_derivatives(const NetworkShape& shape, const GtmsWeights& weights,
                                 const SpinConfig& sigma, const ParamLayout& layout);

// Wave function defined by an explicit amplitude table; configurations outside
// the table have amplitude zero. Used for exact-state cross checks.
class LookupWaveFunction final : public WaveFunction {
  public:
    LookupWaveFunction(int n_sites, int local_dim) : n_sites_(n_sites), local_dim_(local_dim) {}

    void set(const SpinConfig& sigma, cplx value);
    int n_sites() const override { return n_sites_; }
    int local_dim() const override { return local_dim_; }
    ScaledAmplitude amplitude(const SpinConfig& sigma) const override;

    // basis index with site 0 as the least-significant digit, +1 mapped to 0
    static long basis_index(const SpinConfig& sigma, int local_dim);
    static SpinConfig basis_config(long index, int n_sites, int local_dim);

  private:
    int n_sites_, local_dim_;
    mutable std::vector<std::pair<long, cplx>> table_;
    mutable bool sorted_ = true;
};

}  // namespace gtms
