#include "gtms/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "gtms/rng.hpp"

namespace gtms {
namespace oracle {

cplx brute_force_amplitude(const NetworkShape& shape, const GtmsWeights& weights,
                           const SpinConfig& sigma) {
    validate(shape, weights);
    const int nt = shape.n_blocks, n = shape.deep_per_block, m = shape.hidden_per_block;
    const long M = static_cast<long>(m) * nt, D = static_cast<long>(n) * nt;
    if (M + D > 22) throw TooLarge("brute-force trace limited to m*N_T + n*N_T <= 22");
    if (static_cast<int>(sigma.size()) != shape.n_sites)
        throw DimensionMismatch("sigma", shape.n_sites, static_cast<long>(sigma.size()));

    // angle of each hidden unit before deep couplings
    Eigen::MatrixXcd theta(nt, m);
    for (int j = 0; j < nt; ++j)
        for (int mu = 0; mu < m; ++mu) {
            cplx t = weights.b(j, mu);
            for (int i = 0; i < shape.n_sites; ++i)
                t += static_cast<double>(sigma[i]) * weights.w[j](i, mu);
            theta(j, mu) = t;
        }
    cplx csum = 0.0;
    for (int i = 0; i < shape.n_sites; ++i) csum += weights.c(i) * static_cast<double>(sigma[i]);

    const auto spin_of = [](std::uint64_t mask, long k) {
        return (mask >> k) & 1ULL ? -1.0 : 1.0;
    };

    cplx total = 0.0;
    for (std::uint64_t dmask = 0; dmask < (1ULL << D); ++dmask) {
        for (std::uint64_t hmask = 0; hmask < (1ULL << M); ++hmask) {
            // network energy, physical bias excluded (factored out below)
            cplx energy = 0.0;
            for (int j = 0; j < nt; ++j) {
                for (int nu = 0; nu < n; ++nu)
                    energy -= weights.a(j, nu) * spin_of(dmask, static_cast<long>(j) * n + nu);
                for (int mu = 0; mu < m; ++mu) {
                    cplx angle = theta(j, mu);
                    const int jn = (j + 1) % nt;
                    for (int nu = 0; nu < n; ++nu) {
                        angle += weights.w_tilde[j](mu, nu) *
                                 spin_of(dmask, static_cast<long>(j) * n + nu);
                        angle += weights.w_hat[j](mu, nu) *
                                 spin_of(dmask, static_cast<long>(jn) * n + nu);
                    }
                    energy += angle * spin_of(hmask, static_cast<long>(j) * m + mu);
                }
            }
            total += std::exp(-energy);
        }
    }
    return std::exp(csum) * total;
}

StateVector state_vector_of(const WaveFunction& wf) {
    const int N = wf.n_sites(), ld = wf.local_dim();
    if (N > 20) throw TooLarge("state vectors limited to N <= 20");
    long dim = 1;
    for (int i = 0; i < N; ++i) dim *= ld;

    std::vector<ScaledAmplitude> amps(dim);
    double max_log = -std::numeric_limits<double>::infinity();
    for (long idx = 0; idx < dim; ++idx) {
        amps[idx] = wf.amplitude(LookupWaveFunction::basis_config(idx, N, ld));
        if (!amps[idx].is_zero()) max_log = std::max(max_log, amps[idx].log_scale);
    }

    StateVector sv;
    sv.n_sites = N;
    sv.local_dim = ld;
    sv.amplitudes.assign(dim, cplx(0.0, 0.0));
    if (!std::isfinite(max_log)) {
        sv.norm = 0.0;
        return sv;
    }
    double norm2 = 0.0;
    for (long idx = 0; idx < dim; ++idx) {
        if (amps[idx].is_zero()) continue;
        const cplx v = amps[idx].mantissa * std::exp(amps[idx].log_scale - max_log);
        sv.amplitudes[idx] = v;
        norm2 += std::norm(v);
    }
    sv.norm = std::sqrt(norm2);
    return sv;
}

StateVector full_state_vector(const NetworkShape& shape, const GtmsWeights& weights) {
    GtmsEvaluator ev(shape, weights);
    return state_vector_of(ev);
}

double exact_renyi2(const StateVector& state, int ell) {
    if (state.norm <= 0.0) throw ZeroState();
    if (ell < 1 || ell > state.n_sites)
        throw ShapeMismatch("subsystem length must lie in [1, N]");
    long dim_a = 1, dim_b = 1;
    for (int i = 0; i < ell; ++i) dim_a *= state.local_dim;
    for (int i = ell; i < state.n_sites; ++i) dim_b *= state.local_dim;

    // site 0 is the least-significant digit, so A indexes vary fastest
    Eigen::MatrixXcd psi(dim_a, dim_b);
    for (long bidx = 0; bidx < dim_b; ++bidx)
        for (long aidx = 0; aidx < dim_a; ++aidx)
            psi(aidx, bidx) = state.amplitudes[bidx * dim_a + aidx] / state.norm;

    const Eigen::VectorXd s = psi.jacobiSvd().singularValues();
    double purity = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) purity += std::pow(s(k), 4);
    return -std::log(purity);
}

namespace {

std::vector<std::uint32_t> sector_basis(int n_sites, int sector) {
    // sum sigma = sector with sigma = +1 for clear bits: n_minus = (N - sector)/2
    std::vector<std::uint32_t> basis;
    if ((n_sites - sector) % 2 != 0 || sector < -n_sites || sector > n_sites) return basis;
    const int n_minus = (n_sites - sector) / 2;
    for (std::uint32_t mask = 0; mask < (1u << n_sites); ++mask)
        if (std::popcount(mask) == n_minus) basis.push_back(mask);
    return basis;
}

// y += H x within the sector
void apply_xxz(const XxzModel& model, const std::vector<std::uint32_t>& basis,
               const std::vector<long>& position, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    const int N = model.n_sites;
    y.setZero();
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const std::uint32_t mask = basis[k];
        double diag = 0.0;
        for (int j = 0; j < N; ++j) {
            const int jn = (j + 1) % N;
            const bool bj = (mask >> j) & 1u, bn = (mask >> jn) & 1u;
            if (bj == bn) {
                diag += model.Delta * 0.25;
            } else {
                diag -= model.Delta * 0.25;
                const std::uint32_t flipped = mask ^ (1u << j) ^ (1u << jn);
                y(position[flipped]) += -0.5 * model.J * x(k);
            }
        }
        y(k) += diag * x(k);
    }
}

double residual_norm(const XxzModel& model, const std::vector<std::uint32_t>& basis,
                     const std::vector<long>& position, const Eigen::VectorXd& v, double e) {
    Eigen::VectorXd hv(v.size());
    apply_xxz(model, basis, position, v, hv);
    return (hv - e * v).norm();
}

}  // namespace

EdResult ed_ground_state(const XxzModel& model, int sector) {
    if (model.n_sites < 2) throw ShapeMismatch("chain needs at least two sites");
    if (model.n_sites > 20) throw TooLarge("exact diagonalization limited to N <= 20");
    const auto basis = sector_basis(model.n_sites, sector);
    if (basis.empty()) throw ShapeMismatch("empty magnetization sector");
    std::vector<long> position(1u << model.n_sites, -1);
    for (std::size_t k = 0; k < basis.size(); ++k) position[basis[k]] = static_cast<long>(k);

    const long dim = static_cast<long>(basis.size());
    const int max_iter = std::min<long>(300, dim);

    // seeded random start, full reorthogonalization
    RngStream rng(0x5eedu, static_cast<std::uint64_t>(model.n_sites) * 1000 + sector + 500);
    Eigen::VectorXd v(dim);
    for (long i = 0; i < dim; ++i) v(i) = rng.normal();
    v.normalize();

    std::vector<Eigen::VectorXd> krylov;
    std::vector<double> alpha, beta;
    Eigen::VectorXd w(dim);
    EdResult result;

    krylov.push_back(v);
    for (int it = 0; it < max_iter; ++it) {
        apply_xxz(model, basis, position, krylov.back(), w);
        const double a = krylov.back().dot(w);
        alpha.push_back(a);
        w -= a * krylov.back();
        if (krylov.size() > 1) w -= beta.back() * krylov[krylov.size() - 2];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : krylov) w -= q.dot(w) * q;

        // tridiagonal eigenproblem of the current Krylov space
        const int kdim = static_cast<int>(alpha.size());
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(kdim, kdim);
        for (int i = 0; i < kdim; ++i) {
            tri(i, i) = alpha[i];
            if (i + 1 < kdim) tri(i, i + 1) = tri(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        const double e0 = es.eigenvalues()(0);
        Eigen::VectorXd gs = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i < kdim; ++i) gs += es.eigenvectors()(i, 0) * krylov[i];
        gs.normalize();
        const double res = residual_norm(model, basis, position, gs, e0);
        if (res <= 1e-10 || kdim == dim || it == max_iter - 1) {
            if (res > 1e-10 && kdim < dim)
                throw NoConvergence("Lanczos did not reach the residual target");
            result.energy = e0;
            result.vector = gs;
            result.residual = res;
            result.lanczos_iterations = kdim;
            break;
        }
        const double bnorm = w.norm();
        if (bnorm < 1e-14) {  // invariant subspace exhausted
            result.energy = e0;
            result.vector = gs;
            result.residual = res;
            result.lanczos_iterations = kdim;
            break;
        }
        beta.push_back(bnorm);
        krylov.push_back(w / bnorm);
    }
    result.basis = basis;
    if (result.residual > 1e-10)
        throw NoConvergence("Lanczos did not reach the residual target");
    return result;
}

EdResult ed_ground_state_dense(const XxzModel& model, int sector) {
    if (model.n_sites > 14) throw TooLarge("dense diagonalization limited to N <= 14");
    const auto basis = sector_basis(model.n_sites, sector);
    if (basis.empty()) throw ShapeMismatch("empty magnetization sector");
    std::vector<long> position(1u << model.n_sites, -1);
    for (std::size_t k = 0; k < basis.size(); ++k) position[basis[k]] = static_cast<long>(k);

    const long dim = static_cast<long>(basis.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    const int N = model.n_sites;
    for (long k = 0; k < dim; ++k) {
        const std::uint32_t mask = basis[k];
        for (int j = 0; j < N; ++j) {
            const int jn = (j + 1) % N;
            const bool bj = (mask >> j) & 1u, bn = (mask >> jn) & 1u;
            if (bj == bn) {
                H(k, k) += model.Delta * 0.25;
            } else {
                H(k, k) -= model.Delta * 0.25;
                const std::uint32_t flipped = mask ^ (1u << j) ^ (1u << jn);
                H(position[flipped], k) += -0.5 * model.J;
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    EdResult result;
    result.energy = es.eigenvalues()(0);
    result.vector = es.eigenvectors().col(0);
    result.basis = basis;
    result.residual = (H * result.vector - result.energy * result.vector).norm();
    return result;
}

LookupWaveFunction lookup_from_ed(const EdResult& ed, int n_sites) {
    LookupWaveFunction wf(n_sites, 2);
    for (std::size_t k = 0; k < ed.basis.size(); ++k) {
        SpinConfig sigma(n_sites);
        for (int i = 0; i < n_sites; ++i) sigma[i] = (ed.basis[k] >> i) & 1u ? -1 : 1;
        if (ed.vector(static_cast<long>(k)) != 0.0)
            wf.set(sigma, cplx(ed.vector(static_cast<long>(k)), 0.0));
    }
    return wf;
}

}  // namespace oracle
}  // namespace gtms
