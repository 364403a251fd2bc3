#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gtms/errors.hpp"
#include "gtms/rng.hpp"

namespace gtms {

using cplx = std::complex<double>;

// Physical configuration: one entry per site, values in {-1,+1} (spin-1/2)
// or {-1,0,+1} (spin-1).
using SpinConfig = std::vector<int>;

enum class Boundary { Periodic, Open };

// Geometry of the network: N physical sites feeding N_T transfer-matrix blocks,
// each block holding n deep and m hidden units. The bond dimension is 2^n and
// is never stored separately.
struct NetworkShape {
    int n_sites = 1;           // N
    int n_blocks = 1;          // N_T, may differ from N
    int deep_per_block = 1;    // n
    int hidden_per_block = 1;  // m
    int local_dim = 2;         // 2s+1, spins {-1,+1} or {-1,0,+1}
    Boundary boundary = Boundary::Periodic;

    int chi() const { return 1 << deep_per_block; }
    void validate() const;

    static NetworkShape make(int n_sites, int n_blocks, int deep, int hidden,
                             int local_dim = 2, Boundary b = Boundary::Periodic) {
        NetworkShape s{n_sites, n_blocks, deep, hidden, local_dim, b};
        s.validate();
        return s;
    }
};

// Full coupling set of the network. Per block j: hidden biases b(j,mu), deep
// biases a(j,nu), physical-hidden couplings w[j](i,mu) over every site i,
// intra-block hidden-deep w_tilde[j](mu,nu) and couplings to the next block
// w_hat[j](mu,nu). Physical biases c(i) sit outside the blocks.
struct GtmsWeights {
    Eigen::VectorXcd c;                   // N
    Eigen::MatrixXcd b;                   // N_T x m
    Eigen::MatrixXcd a;                   // N_T x n
    std::vector<Eigen::MatrixXcd> w;      // N_T entries of N x m
    std::vector<Eigen::MatrixXcd> w_tilde;  // N_T entries of m x n
    std::vector<Eigen::MatrixXcd> w_hat;    // N_T entries of m x n

    static GtmsWeights zero(const NetworkShape& shape);
    // real and imaginary parts i.i.d. uniform on [-width, width]
    static GtmsWeights random(const NetworkShape& shape, RngStream& rng, double width = 0.1);

    // no physical-hidden links across sites: w[j](i,mu) = 0 for i != j
    bool is_mps_only(const NetworkShape& shape) const;
    // no deep layer couplings: a = w_tilde = w_hat = 0
    bool is_rbm_only() const;

    // zero out the nonlocal physical-hidden couplings (requires N_T = N)
    void strip_to_mps(const NetworkShape& shape);
    // zero out every deep-layer coupling
    void strip_to_rbm();
};

// Checks that every array matches the shape and that open boundaries carry no
// wrap-around w_hat on the last block. Throws on violation.
void validate(const NetworkShape& shape, const GtmsWeights& weights);

// Translation-invariant parameterization: one bias set shared by all blocks and
// distance-indexed physical-hidden couplings w_by_distance[d], coupling site i
// to block i+d with periodic wrap-around. Distances d > rbm_range are held at
// zero; rbm_range = 0 keeps only the on-site links and yields the MPS limit.
struct TiedWeights {
    cplx c{0.0, 0.0};
    Eigen::VectorXcd b;                        // m
    Eigen::VectorXcd a;                        // n
    std::vector<Eigen::VectorXcd> w_by_distance;  // N entries of length m
    Eigen::MatrixXcd w_tilde;                  // m x n
    Eigen::MatrixXcd w_hat;                    // m x n
    int rbm_range = 0;

    static TiedWeights zero(const NetworkShape& shape, int rbm_range);
    static TiedWeights random(const NetworkShape& shape, int rbm_range, RngStream& rng,
                              double width = 0.1);
};

// Replicates tied weights onto the full per-block storage. Requires N_T = N and
// periodic boundaries.
GtmsWeights tie(const TiedWeights& tied, const NetworkShape& shape);

// Reads the distance representation back out of replicated weights.
TiedWeights untie(const GtmsWeights& weights, const NetworkShape& shape, int rbm_range);

// Flat real parameter layout: complex weights in a fixed order (c, b, a, w,
// w_tilde, w_hat, row-major within each array), each as an adjacent (re, im)
// pair. Under open boundaries the structurally zero w_hat of the last block is
// excluded. The Tied kind orders distances d = 0..rbm_range; the Block kind
// covers a single translation-invariant block with one physical spin.
enum class LayoutKind { Untied, Tied, Block };

struct ParamLayout {
    LayoutKind kind = LayoutKind::Untied;
    NetworkShape shape;
    int rbm_range = 0;  // Tied only
    int block_n = 0, block_m = 0;  // Block only
    std::size_t n_complex = 0;     // N_w

    std::size_t n_real() const { return 2 * n_complex; }

    static ParamLayout untied(const NetworkShape& shape);
    static ParamLayout tied(const NetworkShape& shape, int rbm_range);
    static ParamLayout block(int n, int m);
};

Eigen::VectorXd flatten(const GtmsWeights& weights, const ParamLayout& layout);
GtmsWeights unflatten_weights(const Eigen::VectorXd& flat, const ParamLayout& layout);

Eigen::VectorXd flatten(const TiedWeights& tied, const ParamLayout& layout);
TiedWeights unflatten_tied(const Eigen::VectorXd& flat, const ParamLayout& layout);

// Number of tensor elements of one MPS site tensor with bond dimension 2^n.
inline long mps_tensor_elements(int n, int local_dim) {
    return static_cast<long>(local_dim) << (2 * n);
}

// Deep-spin sign of unit nu (0-based) in the row/column index: bit 0 means +1.
inline int deep_sign(int index, int nu) { return (index >> nu) & 1 ? -1 : +1; }

// All local spin values in tensor-slot order (+1 first).
std::vector<int> local_values(int local_dim);

}  // namespace gtms
