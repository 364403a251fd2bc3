#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gtms/amplitude.hpp"
#include "gtms/model.hpp"

namespace gtms {

// Spin-1/2 XXZ chain H = -J sum_j (Sx_j Sx_{j+1} + Sy_j Sy_{j+1}) + Delta sum_j Sz_j Sz_{j+1}
// with periodic wrap-around.
struct XxzModel {
    int n_sites = 2;
    double J = 1.0;
    double Delta = 1.0;
};

namespace oracle {

// Literal partial partition sum of the network energy over every hidden and
// deep configuration. Exponential cost; the independent ground truth for the
// transfer-matrix amplitude.
cplx brute_force_amplitude(const NetworkShape& shape, const GtmsWeights& weights,
                           const SpinConfig& sigma);

// Explicit wave-function vector over the computational basis, site 0 as the
// least-significant digit and +1 mapped to digit 0. Amplitudes share one
// common scale (the largest log is pulled out), so only ratios are meaningful.
struct StateVector {
    std::vector<cplx> amplitudes;  // local_dim^N entries
    int n_sites = 0;
    int local_dim = 2;
    double norm = 0.0;

    long size() const { return static_cast<long>(amplitudes.size()); }
};

StateVector full_state_vector(const NetworkShape& shape, const GtmsWeights& weights);
StateVector state_vector_of(const WaveFunction& wf);

// -ln tr(rho_A^2) for A = the first ell sites, from the singular values of the
// reshaped normalized vector.
double exact_renyi2(const StateVector& state, int ell);

// Ground state of the XXZ chain restricted to the sum-sigma = sector subspace.
struct EdResult {
    double energy = 0.0;
    std::vector<std::uint32_t> basis;  // bit i set means sigma_i = -1
    Eigen::VectorXd vector;            // coefficients over basis
    double residual = 0.0;
    int lanczos_iterations = 0;
};

// Lanczos with full reorthogonalization; dense fallback would be wasteful here.
EdResult ed_ground_state(const XxzModel& model, int sector);

// Dense diagonalization of the same sector, for cross-checking the Lanczos path.
EdResult ed_ground_state_dense(const XxzModel& model, int sector);

// Wave function backed by the ED eigenvector (amplitudes outside the sector
// are zero). Useful for zero-variance checks of the local-energy estimator.
LookupWaveFunction lookup_from_ed(const EdResult& ed, int n_sites);

}  // namespace oracle
}  // namespace gtms
