#pragma once
// Experiment configuration: a flat key=value text format with [section]
// headers, a strict resolver (unknown sections or keys are errors, every
// value is range-checked), and the resolved experiment description the
// harness consumes. Sentinel "auto" values (-1 counts, 0 factors) are
// resolved against the attack setup when the experiment is assembled.

#include <cstdint>
#include <map>
#include <string>

#include "fedsim/aggregators.hpp"
#include "fedsim/attacks.hpp"
#include "fedsim/models.hpp"

namespace fedsim::config {

// section -> key -> raw value, in file order semantics (later wins).
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

// Applies a "section.key=value" override (sweep machinery); the key must
// already be a recognised one for the resolver to accept the result.
void apply_override(ConfigMap& map, const std::string& dotted_key, const std::string& value);

struct ExperimentConfig {
    // [dataset]
    std::size_t n_examples = 10000;
    int n_classes = 10;
    std::size_t n_features = 20;
    double separation = 4.0;
    double test_fraction = 0.2;
    std::string dump_path;  // optional: write the generated dataset here
    std::string load_path;  // optional: read the dataset here instead of generating

    // [partition]
    std::size_t n_clients = 20;
    double bias = 0.5;

    // [model] (n_features / n_classes mirror the dataset section)
    models::ModelKind model_kind = models::ModelKind::logistic;
    std::size_t hidden_width = 16;
    double l2_reg = 1e-3;      // mlp configs default to 0 unless set
    bool l2_reg_set = false;

    // [train]
    models::LocalTrainConfig train;

    // [aggregator]
    agg::Rule rule = agg::Rule::fedavg;
    long trim_c = -1;        // -1: use the malicious count
    long synthetic_m = -1;   // -1: use n_clients / 2
    long assumed_f = -1;     // -1: use the malicious count
    bool estimate_malicious = false;

    // [attack]
    attacks::AttackSpec attack;

    // [run]
    long rounds = 200;
    double global_lr = 1.0;
    double participation = 1.0;
    long eval_every = 10;
    std::uint64_t seed = 42;
};

// Validates the map against the recognised key set and produces the
// typed config; throws std::invalid_argument with the offending key.
ExperimentConfig resolve_config(const ConfigMap& map);

ExperimentConfig load_experiment_config(const std::string& path);

// Auto-value resolution shared by the harness and the summary emitter.
struct ResolvedAggregation {
    std::size_t n_malicious = 0;
    std::size_t trim_c = 0;
    std::size_t synthetic_m = 0;
    std::size_t assumed_f = 0;
    double scale_factor = 0.0;  // scaling attack
    double adaptive_z = 0.0;    // adaptive attack
};

ResolvedAggregation resolve_auto_values(const ExperimentConfig& cfg);

const char* rule_name(agg::Rule rule);
const char* attack_name(attacks::AttackKind kind);
const char* perturb_name(attacks::PerturbKind kind);
const char* model_name(models::ModelKind kind);

} // namespace fedsim::config
