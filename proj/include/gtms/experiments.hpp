#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gtms/mps.hpp"
#include "gtms/oracle.hpp"
#include "gtms/sampling.hpp"
#include "gtms/serialize.hpp"
#include "gtms/vmc.hpp"

namespace gtms::experiments {

// Strict key-checked JSON config access: every key must be consumed exactly
// once and unknown keys are rejected with their path.
class ConfigReader {
  public:
    explicit ConfigReader(const json& j, std::string path = "");

    int get_int(const std::string& key, std::optional<int> def = {});
    long get_long(const std::string& key, std::optional<long> def = {});
    double get_double(const std::string& key, std::optional<double> def = {});
    bool get_bool(const std::string& key, std::optional<bool> def = {});
    std::string get_string(const std::string& key, std::optional<std::string> def = {});
    std::uint64_t get_u64(const std::string& key, std::optional<std::uint64_t> def = {});

    void finish() const;  // throws on unvisited keys

  private:
    const json& peek(const std::string& key);
    const json j_;
    std::string path_;
    std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// aklt-check: compares the constructed spin-1 block against the exact
// valence-bond matrices and cross-checks all 3^6 amplitudes of the N=6 ring.

struct AkltReport {
    double max_matrix_deviation = 0.0;
    double max_amplitude_deviation = 0.0;  // relative to the largest amplitude
    bool pass = false;
};

AkltReport aklt_check(double tolerance = 1e-10);
json to_json(const AkltReport& r);

// ---------------------------------------------------------------------------
// learn-mps: supervised learning of random site tensors, several seeds.

struct LearnMpsConfig {
    int chi = 4;
    int m = 8;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double step = 1e-2;
    long iterations = 50000;
    int seeds = 10;
    std::uint64_t seed0 = 1;
    double tolerance = 1e-8;
    int history_stride = 50;

    int deep_units() const;  // log2(chi), rejects non-powers of two
    static LearnMpsConfig from_json(const json& j);
};

struct LearnMpsSeedResult {
    std::uint64_t seed = 0;
    double final_d_rel = 0.0;
    long iterations = 0;
};

struct LearnMpsSummary {
    std::vector<LearnMpsSeedResult> per_seed;
    double mean_final_d_rel = 0.0;
    long n_w = 0;
    long n_el = 0;
};

LearnMpsSummary run_learn_mps(const LearnMpsConfig& config, const std::string& out_dir);

// ---------------------------------------------------------------------------
// entropy-scan: Renyi-2 profile of random translation-invariant networks,
// exact (full vector, N <= 14) or sampled via the two-replica swap estimator.

struct EntropyScanConfig {
    int n_sites = 14;
    int deep_units = 1;
    int hidden_units = 2;
    bool mps_only = false;
    bool exact = true;
    int realizations = 10;
    double re_width = 0.1;      // half-width of the real-part distribution
    double im_width = 4.0 * 3.14159265358979323846;  // and of the imaginary part
    long n_samples = 4000;
    long burn_in = 1000;
    std::uint64_t seed = 1;

    static EntropyScanConfig from_json(const json& j);
};

struct EntropyPoint {
    int ell = 0;
    double s2 = 0.0;
    double std_error = 0.0;
    long n_pairs = 0;
};

struct EntropyScanResult {
    std::vector<std::vector<EntropyPoint>> realizations;
};

EntropyScanResult run_entropy_scan(const EntropyScanConfig& config, const std::string& out_dir);

// The weight draw used by the scan, exposed for tests: a tied network whose
// active couplings are uniform with the configured widths.
TiedWeights draw_scan_weights(const NetworkShape& shape, int rbm_range, double re_width,
                              double im_width, RngStream& rng);

// ---------------------------------------------------------------------------
// vmc: ground-state search on the critical XXZ chain.

struct VmcCommandConfig {
    int n_sites = 12;
    int deep_units = 2;
    int hidden_units = 4;
    int rbm_range = -1;  // -1 means N-1 (full network); 0 is the MPS limit
    double J = 1.0;
    double Delta = 1.0;
    SrConfig sr;
    long final_eval_samples = 30000;
    long checkpoint_every = 0;
    bool use_ed_reference = true;  // N <= 20 only; provides the error column
    int threads = 2;

    static VmcCommandConfig from_json(const json& j);
};

struct VmcCommandResult {
    double best_energy = 0.0;
    double final_energy = 0.0;
    double final_stderr = 0.0;
    std::optional<double> reference_energy;
    std::optional<double> relative_error;
    long iterations_run = 0;
};

VmcCommandResult run_vmc_command(const VmcCommandConfig& config, const std::string& out_dir);

// ---------------------------------------------------------------------------
// ed: cached exact ground-state reference.

struct EdCommandConfig {
    int n_sites = 12;
    double J = 1.0;
    double Delta = 1.0;
    int sector = 0;

    static EdCommandConfig from_json(const json& j);
};

// Computes (or reloads) the reference; the cache file is keyed by the model.
oracle::EdResult run_ed_command(const EdCommandConfig& config, const std::string& out_dir,
                                std::string* cache_path = nullptr);

std::string ed_cache_filename(const EdCommandConfig& config);

}  // namespace gtms::experiments
