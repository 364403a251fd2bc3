#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gtms/amplitude.hpp"
#include "gtms/model.hpp"

namespace gtms {

enum class MoveKind { SingleFlip, PairExchange };

// One Markov chain sampling |psi|^2. A sweep is one proposal per site; burn_in
// and thinning count sweeps. The stream id appended to the seed makes chains
// replayable: (seed, stream) fully determines the trajectory.
struct ChainConfig {
    long n_samples = 1000;
    long burn_in = 1000;
    long thinning = 1;
    MoveKind move = MoveKind::SingleFlip;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::optional<SpinConfig> start;  // random (move-compatible) when absent
    long start_retries = 1000;
};

struct ChainResult {
    std::vector<SpinConfig> samples;
    double acceptance_rate = 0.0;
    SpinConfig final_config;
};

ChainResult run_chain(const WaveFunction& wf, const ChainConfig& config);

// Second Renyi entropy estimate from the two-replica swap observable.
struct Renyi2Estimate {
    double s2 = 0.0;
    cplx swap_mean{0.0, 0.0};
    double std_error = 0.0;
    long n_pairs = 0;
};

// Runs two independent chains (streams 2*stream and 2*stream+1) and averages
// the swap ratio over paired samples; the error is a 32-block jackknife.
// Throws NegativeMean if the real part of the mean is not positive.
Renyi2Estimate renyi2_swap(const WaveFunction& wf, int subsystem_length,
                           const ChainConfig& config);

// The per-pair swap ratio psi(s'_A s_B) psi(s_A s'_B) / (psi(s) psi(s')).
cplx swap_ratio(const WaveFunction& wf, int subsystem_length, const SpinConfig& s,
                const SpinConfig& s_prime);

}  // namespace gtms
