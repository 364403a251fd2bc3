#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gtms/amplitude.hpp"
#include "gtms/model.hpp"
#include "gtms/oracle.hpp"
#include "gtms/sampling.hpp"

namespace gtms {

// <sigma|H|psi> / <sigma|psi> for the XXZ chain: the diagonal Ising part plus
// the exchange of every antiparallel neighbor pair.
cplx local_energy(const WaveFunction& wf, const XxzModel& model, const SpinConfig& sigma);

// Covariance estimates over one sample set, in the 2 N_w real-parameter layout:
//   S_jk = Re[ <O_j^* O_k> - <O_j^*><O_k> ],  F_j = Re[ <O_j^* E> - <O_j^*><E> ].
// S is symmetrized exactly; E statistics use 16-block binning for the error.
struct SrEstimate {
    Eigen::MatrixXd s;
    Eigen::VectorXd f;
    cplx energy_mean{0.0, 0.0};
    double energy_stderr = 0.0;
};

SrEstimate sr_accumulate(const Eigen::MatrixXcd& o_rows, const Eigen::VectorXcd& e_loc);

// dw = -gamma (S + lambda diag(S) + lambda_abs I)^{-1} F, solved as an SPD
// system with a pseudo-inverse fallback (relative eigenvalue cutoff 1e-10).
Eigen::VectorXd sr_step(const Eigen::MatrixXd& s, const Eigen::VectorXd& f, double gamma,
                        double lambda, double lambda_abs = 1e-6);

struct SrConfig {
    double learning_rate = 0.02;
    double lambda0 = 100.0;        // regularization schedule lambda0 * decay^p
    double lambda_decay = 0.9;
    double lambda_min = 1e-4;
    double lambda_abs = 1e-6;
    long samples_per_iter = 2000;
    long burn_in_sweeps = 200;
    long iterations = 2000;
    std::uint64_t seed = 0;
    int n_chains = 2;
    double init_width = 0.1;
    // optional early exit once the energy estimate reaches a known target
    double stop_energy = std::numeric_limits<double>::quiet_NaN();
};

struct SrTracePoint {
    long iteration = 0;
    double energy_re = 0.0;
    double energy_im = 0.0;
    double stderr_ = 0.0;
    double lambda = 0.0;
    double acceptance = 0.0;
};

struct VmcResult {
    TiedWeights weights;       // best-energy iterate
    double best_energy = 0.0;
    long best_iteration = 0;
    std::vector<SrTracePoint> trace;
    std::vector<SpinConfig> last_configs;  // one per chain
};

// Iteration callback for checkpointing; return false to stop.
using VmcObserver = std::function<bool(long iteration, const TiedWeights&, const SrTracePoint&)>;

// Stochastic-reconfiguration ground-state search with a translation-invariant
// ansatz in the zero-magnetization sector (pair-exchange moves from a shuffled
// Neel start). rbm_range = N-1 is the full network, 0 the MPS limit.
VmcResult run_vmc(const NetworkShape& shape, const XxzModel& model, int rbm_range,
                  const SrConfig& config, const VmcObserver& observer = {});

// Independent energy estimate for fixed weights.
struct EnergyEstimate {
    cplx mean{0.0, 0.0};
    double std_error = 0.0;
    long n_samples = 0;
};

EnergyEstimate estimate_energy(const WaveFunction& wf, const XxzModel& model, long n_samples,
                               std::uint64_t seed, int n_chains = 2,
                               MoveKind move = MoveKind::PairExchange, long burn_in = 500);

}  // namespace gtms
