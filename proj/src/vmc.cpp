#include "gtms/vmc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "gtms/rng.hpp"

namespace gtms {

cplx local_energy(const WaveFunction& wf, const XxzModel& model, const SpinConfig& sigma) {
    const int N = model.n_sites;
    if (static_cast<int>(sigma.size()) != N)
        throw DimensionMismatch("sigma", N, static_cast<long>(sigma.size()));
    const ScaledAmplitude base = wf.amplitude(sigma);
    if (base.is_zero()) throw AmplitudeTooSmall(0.0);

    cplx e = 0.0;
    SpinConfig exchanged = sigma;
    for (int j = 0; j < N; ++j) {
        const int jn = (j + 1) % N;
        e += model.Delta * 0.25 * sigma[j] * sigma[jn];
        if (sigma[j] != sigma[jn]) {
            std::swap(exchanged[j], exchanged[jn]);
            const ScaledAmplitude flipped = wf.amplitude(exchanged);
            std::swap(exchanged[j], exchanged[jn]);
            if (!flipped.is_zero()) {
                const cplx ratio = (flipped.mantissa / base.mantissa) *
                                   std::exp(flipped.log_scale - base.log_scale);
                e += -0.5 * model.J * ratio;
            }
        }
    }
    return e;
}

namespace {

// binned mean/stderr of a complex series
void binned_stats(const Eigen::VectorXcd& x, cplx& mean, double& stderr_out) {
    const long n = x.size();
    mean = x.sum() / static_cast<double>(n);
    const long n_bins = std::min<long>(16, n);
    if (n_bins < 2) {
        stderr_out = 0.0;
        return;
    }
    double var = 0.0;
    for (long b = 0; b < n_bins; ++b) {
        const long lo = (b * n) / n_bins, hi = ((b + 1) * n) / n_bins;
        cplx bm = 0.0;
        for (long k = lo; k < hi; ++k) bm += x(k);
        bm /= static_cast<double>(hi - lo);
        var += std::norm(bm.real() - mean.real());
    }
    var /= static_cast<double>(n_bins - 1);
    stderr_out = std::sqrt(var / static_cast<double>(n_bins));
}

}  // namespace

SrEstimate sr_accumulate(const Eigen::MatrixXcd& o_rows, const Eigen::VectorXcd& e_loc) {
    const long n = o_rows.rows();
    if (n < 2 || e_loc.size() != n) throw InsufficientSamples();
    const double inv_n = 1.0 / static_cast<double>(n);

    // covariances from the real and imaginary parts separately: the result is
    // the real part of the Hermitian covariance and symmetric by construction
    const Eigen::MatrixXd X = o_rows.real();
    const Eigen::MatrixXd Y = o_rows.imag();
    const Eigen::VectorXd xm = X.colwise().mean();
    const Eigen::VectorXd ym = Y.colwise().mean();

    SrEstimate est;
    est.s.noalias() = (X.transpose() * X + Y.transpose() * Y) * inv_n;
    est.s.noalias() -= xm * xm.transpose();
    est.s.noalias() -= ym * ym.transpose();
    est.s = ((est.s + est.s.transpose()) * 0.5).eval();

    binned_stats(e_loc, est.energy_mean, est.energy_stderr);

    const Eigen::VectorXd er = e_loc.real(), ei = e_loc.imag();
    est.f.noalias() = (X.transpose() * er + Y.transpose() * ei) * inv_n;
    est.f.noalias() -= xm * est.energy_mean.real() + ym * est.energy_mean.imag();
    return est;
}

Eigen::VectorXd sr_step(const Eigen::MatrixXd& s, const Eigen::VectorXd& f, double gamma,
                        double lambda, double lambda_abs) {
    if (lambda <= 0.0) throw ShapeMismatch("regularization must be positive");
    Eigen::MatrixXd reg = s;
    reg.diagonal() += lambda * s.diagonal();
    reg.diagonal().array() += lambda_abs;

    Eigen::LLT<Eigen::MatrixXd> llt(reg);
    if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd x = llt.solve(f);
        if (x.allFinite()) return -gamma * x;
    }
    // pseudo-inverse with a relative eigenvalue cutoff
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reg);
    if (es.info() != Eigen::Success) throw SingularSystem();
    const double cutoff = 1e-10 * es.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = es.eigenvalues();
    for (Eigen::Index k = 0; k < inv.size(); ++k)
        inv(k) = std::abs(inv(k)) > cutoff ? 1.0 / inv(k) : 0.0;
    const Eigen::VectorXd x =
        es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * f;
    if (!x.allFinite()) throw SingularSystem();
    return -gamma * x;
}

namespace {

struct ChainSlice {
    std::vector<SpinConfig> samples;
    double acceptance = 0.0;
    SpinConfig final_config;
};

}  // namespace

VmcResult run_vmc(const NetworkShape& shape, const XxzModel& model, int rbm_range,
                  const SrConfig& config, const VmcObserver& observer) {
    if (model.n_sites != shape.n_sites)
        throw ShapeMismatch("model and network disagree on the number of sites");
    if (model.n_sites % 2 != 0)
        throw ShapeMismatch("the zero-magnetization sector needs an even chain");

    const ParamLayout layout = ParamLayout::tied(shape, rbm_range);
    RngStream init_rng(config.seed, 0xffffffffULL);
    TiedWeights tied = TiedWeights::random(shape, rbm_range, init_rng, config.init_width);

    const int n_chains = std::max(1, config.n_chains);
    const long per_chain = (config.samples_per_iter + n_chains - 1) / n_chains;

    VmcResult result;
    result.best_energy = std::numeric_limits<double>::infinity();
    std::vector<SpinConfig> warm_starts(n_chains);

    for (long iter = 0; iter < config.iterations; ++iter) {
        const GtmsEvaluator ev(shape, tie(tied, shape));

        std::vector<ChainSlice> slices(n_chains);
        auto run_slice = [&](int chain) {
            ChainConfig cc;
            cc.n_samples = per_chain;
            cc.burn_in = config.burn_in_sweeps;
            cc.thinning = 1;
            cc.move = MoveKind::PairExchange;
            cc.seed = config.seed;
            cc.stream = static_cast<std::uint64_t>(iter) * n_chains + chain + 1;
            if (!warm_starts[chain].empty()) cc.start = warm_starts[chain];
            ChainResult cr = run_chain(ev, cc);
            slices[chain].samples = std::move(cr.samples);
            slices[chain].acceptance = cr.acceptance_rate;
            slices[chain].final_config = std::move(cr.final_config);
        };
        if (n_chains == 1) {
            run_slice(0);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(n_chains);
            for (int c = 0; c < n_chains; ++c) pool.emplace_back(run_slice, c);
            for (auto& t : pool) t.join();
        }

        long n_total = 0;
        double acc = 0.0;
        for (int c = 0; c < n_chains; ++c) {
            n_total += static_cast<long>(slices[c].samples.size());
            acc += slices[c].acceptance;
            warm_starts[c] = slices[c].final_config;
        }
        acc /= n_chains;

        Eigen::MatrixXcd o_rows(n_total, layout.n_real());
        Eigen::VectorXcd e_loc(n_total);
        std::atomic<bool> failed{false};
        auto fill_rows = [&](int chain, long row0) {
            try {
                for (std::size_t k = 0; k < slices[chain].samples.size(); ++k) {
                    const SpinConfig& sigma = slices[chain].samples[k];
                    e_loc(row0 + static_cast<long>(k)) = local_energy(ev, model, sigma);
                    o_rows.row(row0 + static_cast<long>(k)) =
                        ev.log_derivatives(sigma, layout).transpose();
                }
            } catch (const Error&) {
                failed = true;
            }
        };
        {
            std::vector<std::thread> pool;
            long row0 = 0;
            for (int c = 0; c < n_chains; ++c) {
                pool.emplace_back(fill_rows, c, row0);
                row0 += static_cast<long>(slices[c].samples.size());
            }
            for (auto& t : pool) t.join();
        }
        if (failed) throw Diverged("estimator evaluation failed mid-run");

        const SrEstimate est = sr_accumulate(o_rows, e_loc);
        if (!std::isfinite(est.energy_mean.real())) throw Diverged("energy became non-finite");

        const double lambda =
            std::max(config.lambda0 * std::pow(config.lambda_decay, static_cast<double>(iter)),
                     config.lambda_min);
        const Eigen::VectorXd dw =
            sr_step(est.s, est.f, config.learning_rate, lambda, config.lambda_abs);

        SrTracePoint pt;
        pt.iteration = iter;
        pt.energy_re = est.energy_mean.real();
        pt.energy_im = est.energy_mean.imag();
        pt.stderr_ = est.energy_stderr;
        pt.lambda = lambda;
        pt.acceptance = acc;
        result.trace.push_back(pt);

        if (pt.energy_re < result.best_energy) {
            result.best_energy = pt.energy_re;
            result.best_iteration = iter;
            result.weights = tied;
        }

        if (observer && !observer(iter, tied, pt)) break;
        if (std::isfinite(config.stop_energy) &&
            pt.energy_re + pt.stderr_ <= config.stop_energy)
            break;

        Eigen::VectorXd flat = flatten(tied, layout);
        flat += dw;
        if (!flat.allFinite()) throw Diverged("weights became non-finite");
        tied = unflatten_tied(flat, layout);
    }

    if (!std::isfinite(result.best_energy)) throw Diverged("no finite energy was recorded");
    result.last_configs = warm_starts;
    return result;
}

EnergyEstimate estimate_energy(const WaveFunction& wf, const XxzModel& model, long n_samples,
                               std::uint64_t seed, int n_chains, MoveKind move, long burn_in) {
    const int nc = std::max(1, n_chains);
    const long per_chain = (n_samples + nc - 1) / nc;
    std::vector<Eigen::VectorXcd> parts(nc);
    auto run_part = [&](int chain) {
        ChainConfig cc;
        cc.n_samples = per_chain;
        cc.burn_in = burn_in;
        cc.move = move;
        cc.seed = seed;
        cc.stream = 7000 + chain;
        const ChainResult cr = run_chain(wf, cc);
        Eigen::VectorXcd es(cr.samples.size());
        for (std::size_t k = 0; k < cr.samples.size(); ++k)
            es(static_cast<long>(k)) = local_energy(wf, model, cr.samples[k]);
        parts[chain] = std::move(es);
    };
    if (nc == 1) {
        run_part(0);
    } else {
        std::vector<std::thread> pool;
        for (int c = 0; c < nc; ++c) pool.emplace_back(run_part, c);
        for (auto& t : pool) t.join();
    }
    long total = 0;
    for (const auto& p : parts) total += p.size();
    Eigen::VectorXcd all(total);
    long at = 0;
    for (const auto& p : parts) {
        all.segment(at, p.size()) = p;
        at += p.size();
    }
    EnergyEstimate est;
    est.n_samples = total;
    binned_stats(all, est.mean, est.std_error);
    return est;
}

}  // namespace gtms
