#pragma once
// Poisoning attacks. Update-forgery attacks receive the round's benign
// updates (the strongest threat model: full knowledge of honest traffic
// and the aggregation rule) and fabricate the malicious updates; data
// poisoning (label flips, triggered scaling) goes through honest local
// training on tampered shards instead.

#include <cstddef>
#include <vector>

#include "fedsim/core.hpp"
#include "fedsim/datagen.hpp"
#include "fedsim/models.hpp"

namespace fedsim::attacks {

enum class AttackKind {
    none,
    label_flip,
    gaussian,
    trim_attack,
    krum_attack,
    min_max,
    min_sum,
    scaling,
    mpaf,
    adaptive,
};

enum class PerturbKind { unit_mean, sign, std_dev };

struct AttackSpec {
    AttackKind kind = AttackKind::none;
    double malicious_fraction = 0.2;     // first round(n * fraction) client ids
    double gaussian_variance = 200.0;
    double mpaf_magnitude = 100.0;
    double adaptive_z = 0.0;             // <= 0 selects the supported-fraction rule
    double scale_factor = 0.0;           // <= 0 selects n_clients / n_malicious
    PerturbKind perturb = PerturbKind::unit_mean;
    datagen::TriggerSpec trigger;        // scaling attack payload
};

// i.i.d. per-coordinate normal noise with the given variance.
std::vector<UpdateVector> gaussian_attack(std::size_t n_malicious, std::size_t dim,
                                          double variance, RngStream& stream);

// Pushes every coordinate 3-4 benign standard deviations away from the
// benign mean, opposite its sign (sign(0) counts as positive). A zero
// benign std is widened to |mean|*0.1 + 1e-6 so the interval stays proper.
std::vector<UpdateVector> trim_attack(const std::vector<UpdateVector>& benign,
                                      std::size_t n_malicious, RngStream& stream);

// Malicious updates -lambda * unit(fedavg(benign)) plus per-client noise of
// norm <= 1e-4*lambda; lambda is the largest value in (0, 10*||fedavg||+1]
// for which the rule still selects a malicious client, found by bisection
// (at most 50 steps, interval narrowed below 1e-6 of the upper bound). If
// no tested lambda succeeds the smallest tested one is used.
std::vector<UpdateVector> krum_attack(const std::vector<UpdateVector>& benign,
                                      std::size_t n_malicious, std::size_t assumed_f,
                                      RngStream& stream);

// All malicious clients send mean + gamma * p where p is the chosen unit
// perturbation; gamma is maximised by bisection subject to
//   max_i ||(mean + gamma p) - g_i|| <= max_{i,j} ||g_i - g_j||.
std::vector<UpdateVector> min_max_attack(const std::vector<UpdateVector>& benign,
                                         std::size_t n_malicious, PerturbKind perturb);

// Same construction under the summed-square constraint
//   sum_i ||(mean + gamma p) - g_i||^2 <= max_i sum_j ||g_i - g_j||^2.
std::vector<UpdateVector> min_sum_attack(const std::vector<UpdateVector>& benign,
                                         std::size_t n_malicious, PerturbKind perturb);

// Honest local training on the shard augmented with a triggered copy of
// every example, then the update scaled by `factor`.
UpdateVector scaling_attack_update(const models::ModelSpec& spec,
                                   const ModelParams& theta_global,
                                   const datagen::DatasetShard& shard,
                                   const datagen::TriggerSpec& trigger, double factor,
                                   const models::LocalTrainConfig& train_cfg,
                                   RngStream& stream);

// magnitude * (theta_fake - theta_global), identical for every malicious
// client; theta_fake is fixed per experiment.
UpdateVector mpaf_update(const ModelParams& theta_global, const ModelParams& theta_fake,
                         double magnitude);

// Per coordinate: benign mean minus z benign standard deviations
// (coordinates with zero spread stay at the mean); identical copies.
std::vector<UpdateVector> adaptive_attack(const std::vector<UpdateVector>& benign,
                                          std::size_t n_malicious, double z);

// Supported-fraction default for the adaptive attack's z, clamped to
// [0.1, 1.5].
double adaptive_default_z(std::size_t n_total, std::size_t n_malicious);

} // namespace fedsim::attacks
