#include "gtms/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "gtms/rng.hpp"

namespace gtms {

namespace {

SpinConfig random_start(const WaveFunction& wf, MoveKind move, RngStream& rng) {
    const int N = wf.n_sites();
    SpinConfig sigma(N);
    if (move == MoveKind::PairExchange) {
        // zero-magnetization start: conserved by the move set afterwards
        if (N % 2 != 0) throw ShapeMismatch("pair exchange needs an even number of sites");
        for (int i = 0; i < N; ++i) sigma[i] = (i % 2 == 0) ? 1 : -1;
        for (int i = N - 1; i > 0; --i) std::swap(sigma[i], sigma[rng.uniform_int(i + 1)]);
    } else {
        const auto vals = local_values(wf.local_dim());
        for (int i = 0; i < N; ++i) sigma[i] = vals[rng.uniform_int(static_cast<int>(vals.size()))];
    }
    return sigma;
}

struct MetropolisState {
    SpinConfig sigma;
    ScaledAmplitude amp;
    long accepted = 0;
    long proposed = 0;
};

void propose_and_step(const WaveFunction& wf, MoveKind move, RngStream& rng,
                      MetropolisState& st) {
    const int N = wf.n_sites();
    SpinConfig cand = st.sigma;
    if (move == MoveKind::SingleFlip) {
        const int i = rng.uniform_int(N);
        if (wf.local_dim() == 2) {
            cand[i] = -cand[i];
        } else {
            // one of the two other local values, uniformly
            static const int others[3][2] = {{0, -1}, {1, -1}, {1, 0}};
            const int slot = cand[i] == 1 ? 0 : (cand[i] == 0 ? 1 : 2);
            cand[i] = others[slot][rng.uniform_int(2)];
        }
    } else {
        // swap two opposite spins; magnetization is conserved exactly
        int i = rng.uniform_int(N), k = rng.uniform_int(N);
        int tries = 0;
        while ((i == k || cand[i] == cand[k]) && tries < 64 * N) {
            i = rng.uniform_int(N);
            k = rng.uniform_int(N);
            ++tries;
        }
        if (i == k || cand[i] == cand[k]) return;  // no exchangeable pair exists
        std::swap(cand[i], cand[k]);
    }
    ++st.proposed;

    const ScaledAmplitude cand_amp = wf.amplitude(cand);
    if (cand_amp.is_zero()) return;
    bool accept;
    if (st.amp.is_zero()) {
        accept = true;
    } else {
        const double dlog = 2.0 * (cand_amp.log_scale - st.amp.log_scale);
        accept = dlog >= 0.0 || rng.uniform() < std::exp(dlog);
    }
    if (accept) {
        st.sigma = std::move(cand);
        st.amp = cand_amp;
        ++st.accepted;
    }
}

}  // namespace

ChainResult run_chain(const WaveFunction& wf, const ChainConfig& config) {
    if (config.thinning < 1) throw ShapeMismatch("thinning must be >= 1");
    RngStream rng(config.seed, config.stream);
    const int N = wf.n_sites();

    MetropolisState st;
    if (config.start) {
        st.sigma = *config.start;
        st.amp = wf.amplitude(st.sigma);
        if (st.amp.is_zero()) throw NoValidStart();
    } else {
        long tries = 0;
        do {
            st.sigma = random_start(wf, config.move, rng);
            st.amp = wf.amplitude(st.sigma);
        } while (st.amp.is_zero() && ++tries < config.start_retries);
        if (st.amp.is_zero()) throw NoValidStart();
    }

    auto sweep = [&]() {
        for (int k = 0; k < N; ++k) propose_and_step(wf, config.move, rng, st);
    };

    for (long s = 0; s < config.burn_in; ++s) sweep();

    ChainResult result;
    result.samples.reserve(config.n_samples);
    for (long s = 0; s < config.n_samples; ++s) {
        for (long t = 0; t < config.thinning; ++t) sweep();
        result.samples.push_back(st.sigma);
    }
    result.acceptance_rate =
        st.proposed > 0 ? static_cast<double>(st.accepted) / static_cast<double>(st.proposed)
                        : 0.0;
    result.final_config = st.sigma;
    return result;
}

cplx swap_ratio(const WaveFunction& wf, int ell, const SpinConfig& s, const SpinConfig& sp) {
    SpinConfig mixed_a(sp.begin(), sp.end());  // s'_A s_B
    SpinConfig mixed_b(s.begin(), s.end());    // s_A s'_B
    for (std::size_t i = static_cast<std::size_t>(ell); i < s.size(); ++i) {
        mixed_a[i] = s[i];
        mixed_b[i] = sp[i];
    }
    const ScaledAmplitude num1 = wf.amplitude(mixed_a);
    const ScaledAmplitude num2 = wf.amplitude(mixed_b);
    if (num1.is_zero() || num2.is_zero()) return {0.0, 0.0};
    const ScaledAmplitude den1 = wf.amplitude(s);
    const ScaledAmplitude den2 = wf.amplitude(sp);
    if (den1.is_zero() || den2.is_zero()) throw ZeroDenominator();
    const double lg = num1.log_scale + num2.log_scale - den1.log_scale - den2.log_scale;
    const cplx phase =
        num1.mantissa * num2.mantissa / (den1.mantissa * den2.mantissa);
    return phase * std::exp(lg);
}

Renyi2Estimate renyi2_swap(const WaveFunction& wf, int ell, const ChainConfig& config) {
    if (ell < 1 || ell > wf.n_sites())
        throw ShapeMismatch("subsystem length must lie in [1, N]");
    if (ell == wf.n_sites()) {  // swapping the whole system is the identity
        Renyi2Estimate est;
        est.swap_mean = cplx(1.0, 0.0);
        est.s2 = 0.0;
        est.std_error = 0.0;
        est.n_pairs = config.n_samples;
        return est;
    }

    ChainConfig ca = config, cb = config;
    ca.stream = 2 * config.stream;
    cb.stream = 2 * config.stream + 1;
    const ChainResult ra = run_chain(wf, ca);
    const ChainResult rb = run_chain(wf, cb);

    const long n_pairs = static_cast<long>(std::min(ra.samples.size(), rb.samples.size()));
    if (n_pairs < 2) throw InsufficientSamples();

    std::vector<cplx> terms(n_pairs);
    cplx mean = 0.0;
    for (long k = 0; k < n_pairs; ++k) {
        terms[k] = swap_ratio(wf, ell, ra.samples[k], rb.samples[k]);
        mean += terms[k];
    }
    mean /= static_cast<double>(n_pairs);

    Renyi2Estimate est;
    est.swap_mean = mean;
    est.n_pairs = n_pairs;
    if (!(mean.real() > 0.0)) throw NegativeMean(mean.real());
    est.s2 = -std::log(mean.real());

    // delete-one-block jackknife on s2
    const long n_blocks = std::min<long>(32, n_pairs);
    std::vector<cplx> block_sum(n_blocks, cplx(0.0, 0.0));
    std::vector<long> block_count(n_blocks, 0);
    for (long k = 0; k < n_pairs; ++k) {
        const long blk = (k * n_blocks) / n_pairs;
        block_sum[blk] += terms[k];
        ++block_count[blk];
    }
    const cplx total = mean * static_cast<double>(n_pairs);
    std::vector<double> jk;
    jk.reserve(n_blocks);
    for (long blk = 0; blk < n_blocks; ++blk) {
        const double rest = (total - block_sum[blk]).real() /
                            static_cast<double>(n_pairs - block_count[blk]);
        if (rest > 0.0) jk.push_back(-std::log(rest));
    }
    if (jk.size() >= 2) {
        double jm = 0.0;
        for (double v : jk) jm += v;
        jm /= static_cast<double>(jk.size());
        double var = 0.0;
        for (double v : jk) var += (v - jm) * (v - jm);
        const double nb = static_cast<double>(jk.size());
        est.std_error = std::sqrt(var * (nb - 1.0) / nb);
    }
    return est;
}

}  // namespace gtms
