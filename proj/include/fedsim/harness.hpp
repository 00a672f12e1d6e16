#pragma once
// Experiment orchestration: builds the federated task from a resolved
// config, steps synchronous rounds (honest local training, attack
// injection, aggregation, global update), records per-round diagnostics,
// and emits results as CSV rows plus a JSON summary. Every stochastic
// component draws from a stream labeled by module, client, and round, so
// a (config, seed) pair pins the whole trajectory.

#include <string>
#include <vector>

#include "fedsim/config.hpp"

namespace fedsim::harness {

struct RoundRecord {
    long round = 0;
    double test_error = -1.0;      // -1 on rounds without an evaluation pass
    double attack_success = -1.0;  // -1 unless a targeted attack is active
    int selected_client = -1;      // client id whose update was replicated/selected
    double raw_variance_mean = 0.0;
    double augmented_variance_mean = 0.0;
    double update_norm = 0.0;
};

// Stream labels; exposed so tests can recompose rounds out of module calls.
std::string local_stream_label(long round, std::size_t client);
std::string participation_stream_label(long round);
std::string attack_stream_label(long round);
std::string synth_stream_label(long round);
inline constexpr const char* kDatagenLabel = "datagen";
inline constexpr const char* kSplitLabel = "split";
inline constexpr const char* kPartitionLabel = "partition";
inline constexpr const char* kInitLabel = "init";
inline constexpr const char* kMpafTargetLabel = "mpaf_target";

// A fully assembled experiment, steppable round by round.
struct Experiment {
    config::ExperimentConfig cfg;
    config::ResolvedAggregation resolved;
    models::ModelSpec model;
    models::LocalTrainConfig train;
    agg::AggregatorSpec agg_spec;
    std::vector<datagen::DatasetShard> shards;  // data-level poisoning already applied
    datagen::Dataset test_set;
    datagen::Dataset triggered_test;            // populated for the scaling attack
    ModelParams theta;
    ModelParams theta_fake;                     // fake-target attack destination
    std::size_t n_malicious = 0;                // malicious ids are 0..n_malicious-1
    long next_round = 0;
};

Experiment setup_experiment(const config::ExperimentConfig& cfg);

// Advances one round in place; fills test_error (and attack_success when a
// targeted attack is active) only when `evaluate` is set.
RoundRecord run_round(Experiment& ex, bool evaluate);

struct ExperimentResult {
    std::vector<RoundRecord> records;  // evaluated rounds only
    double final_test_error = -1.0;
    double final_attack_success = -1.0;
    ModelParams final_params;
    config::ResolvedAggregation resolved;
};

// Runs cfg.rounds rounds; round t is evaluated iff (t+1) divides into the
// eval cadence or t is the last round, giving ceil(rounds/eval_every) rows.
ExperimentResult run_experiment(const config::ExperimentConfig& cfg);

// CSV with the pinned column set; floats carry 17 significant digits so
// parsing the file reproduces the records bit-for-bit.
void write_csv(const std::string& path, const std::vector<RoundRecord>& records);
std::string csv_text(const std::vector<RoundRecord>& records);
std::vector<RoundRecord> parse_csv_text(const std::string& text);

void write_summary_json(const std::string& path, const config::ExperimentConfig& cfg,
                        const ExperimentResult& result);

// Convergence diagnostics against the fixed point of the client-averaged
// objective (logistic with l2_reg > 0 only): fits the smallest additive
// floor b such that every round satisfies
//   ||theta_{t+1} - theta*|| <= (1 - mu/(mu+lambda)) ||theta_t - theta*|| + b,
// and compares it against the stochastic-gradient noise floor (mean
// deviation of the applied step from the exact full-batch step).
struct ConvergenceReport {
    double mu = 0.0;
    double lambda = 0.0;
    double rho = 0.0;         // contraction factor 1 - mu/(mu+lambda)
    double fitted_b = 0.0;
    double noise_floor = 0.0;
    bool contraction_ok = false;  // fitted_b <= 10*noise_floor + 1e-8
};

// Smoothness/strong-convexity constants for the client-averaged objective
// of this config's task (max per-shard smoothness bound).
models::ConvexityConstants estimate_task_constants(const config::ExperimentConfig& cfg);

ConvergenceReport convergence_diagnostic(const config::ExperimentConfig& cfg);

} // namespace fedsim::harness
