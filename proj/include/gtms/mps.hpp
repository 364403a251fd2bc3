#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gtms/amplitude.hpp"
#include "gtms/model.hpp"

namespace gtms {

// Site tensor A^{sigma}_{a,a'}: one chi x chi matrix per local spin value, in
// the order given by local_values().
struct MpsTensor {
    std::vector<Eigen::MatrixXcd> a;
    int local_dim = 2;
    int chi = 1;

    const Eigen::MatrixXcd& matrix(int sigma) const;
    double frobenius_norm() const;
};

// Couplings of one translation-invariant block with a single physical spin.
struct BlockWeights {
    cplx c{0.0, 0.0};
    Eigen::VectorXcd b;        // m
    Eigen::VectorXcd a;        // n
    Eigen::VectorXcd w;        // m
    Eigen::MatrixXcd w_tilde;  // m x n
    Eigen::MatrixXcd w_hat;    // m x n

    int n() const { return static_cast<int>(a.size()); }
    int m() const { return static_cast<int>(b.size()); }
    long n_params() const { return 1 + 2 * m() + n() + 2 * static_cast<long>(m()) * n(); }

    static BlockWeights zero(int n, int m);
    static BlockWeights random(int n, int m, RngStream& rng, double width = 0.1);
};

Eigen::VectorXd flatten(const BlockWeights& block, const ParamLayout& layout);
BlockWeights unflatten_block(const Eigen::VectorXd& flat, const ParamLayout& layout);

// e^{c sigma} T(sigma): the MPS tensor slice realized by the block.
Eigen::MatrixXcd block_tensor(const BlockWeights& block, int sigma);

// The exact valence-bond (AKLT) construction: n = 1, m = 2, spin-1 weights whose
// scaled transfer matrices reproduce the standard chi = 2 site matrices.
BlockWeights aklt_weights();

// The standard normalized AKLT site matrices (local values +1, 0, -1).
MpsTensor aklt_tensor();

// i.i.d. complex standard normal entries, normalized to unit Frobenius norm
MpsTensor random_mps_tensor(int chi, int local_dim, RngStream& rng);

// Frobenius cost between the block's stacked tensor and a target, relative to
// the target norm, plus its exact gradient in the flat real layout.
double d_rel(const BlockWeights& block, const MpsTensor& target);
Eigen::VectorXd d_rel_gradient(const BlockWeights& block, const MpsTensor& target);

enum class OptimizerKind { SGD, AdaGrad, Adam };

struct TrainConfig {
    OptimizerKind optimizer = OptimizerKind::Adam;
    double step = 1e-2;           // 0.1 is the usual AdaGrad choice
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double epsilon = 1e-8;
    long max_iterations = 50000;
    double tolerance = 1e-8;      // stop when d_rel falls below
    double grad_tolerance = 1e-10;
    double init_width = 0.1;
    int history_stride = 1;       // record every k-th iteration
};

struct TrainReport {
    long iterations = 0;
    std::vector<double> d_rel_history;
    std::vector<double> grad_norm_history;
    double final_d_rel = 0.0;
    double wall_time_seconds = 0.0;
    OptimizerKind optimizer = OptimizerKind::Adam;
};

// Full-batch gradient descent of d_rel towards a fixed random target tensor.
std::pair<BlockWeights, TrainReport> train_tensor(const MpsTensor& target, int n, int m,
                                                  const TrainConfig& config, RngStream& rng);

// tr(prod_i A^{[i] sigma_i}) with the same scaling scheme as the network
// amplitude; Open contracts against all-ones boundary vectors.
ScaledAmplitude mps_amplitude(const std::vector<MpsTensor>& tensors, const SpinConfig& sigma,
                              Boundary boundary);

// Per-site tensors e^{c_i sigma} T_i(sigma) of an MPS-only network.
std::vector<MpsTensor> extract_site_tensors(const NetworkShape& shape,
                                            const GtmsWeights& weights);

}  // namespace gtms
