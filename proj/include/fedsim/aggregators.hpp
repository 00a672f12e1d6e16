#pragma once
// Byzantine-robust aggregation rules plus the synthetic-update defense:
// a server-side augmentation step that scores clients by how far they sit
// from both coordinate-wise extreme vectors, replicates the best-scoring
// update m times, and feeds the augmented set to trimmed-mean or median.
// A Gaussian moment-matching synthesiser serves as the ablation baseline,
// and a cosine-distance 2-means estimator guesses the malicious count.

#include <cstddef>
#include <vector>

#include "fedsim/core.hpp"

namespace fedsim::agg {

enum class Rule {
    fedavg,
    trim_mean,
    median,
    krum,
    gaussian_trim,
    gaussian_median,
    foundation_trim,
    foundation_median,
};

struct AggregatorSpec {
    Rule rule = Rule::fedavg;
    std::size_t trim_c = 0;       // per-side trim count for *_trim rules
    std::size_t synthetic_m = 0;  // synthetic updates appended by foundation/gaussian rules
    std::size_t assumed_f = 0;    // malicious count krum assumes
    bool estimate_malicious = false;  // derive trim_c / assumed_f per round from the updates
};

struct ScoreTable {
    std::vector<double> scores;  // closeness score per client, input order
    std::size_t selected = 0;    // argmax score, ties to the lowest index
};

// Coordinate-wise mean.
UpdateVector fedavg(const std::vector<UpdateVector>& updates);

// Per coordinate: drop the c largest and c smallest, average the rest.
// Requires 2c < updates.size().
UpdateVector trimmed_mean(const std::vector<UpdateVector>& updates, std::size_t c);

// Per-coordinate median; even counts average the two middle values.
UpdateVector coordinate_median(const std::vector<UpdateVector>& updates);

struct KrumResult {
    UpdateVector update;
    std::size_t selected = 0;
};

// Picks the update minimising the summed squared distance to its
// n - f - 2 nearest neighbours. Requires updates.size() >= f + 3.
KrumResult krum(const std::vector<UpdateVector>& updates, std::size_t f);

struct ExtremeVectors {
    UpdateVector max;  // coordinate-wise maximum over the set
    UpdateVector min;  // coordinate-wise minimum
};

ExtremeVectors extreme_vectors(const std::vector<UpdateVector>& updates);

// Interiority score per client: the negative L1 distance to the
// coordinate-wise median of the received set, so the top score marks the
// update closest to the robust centre. A crafted minority can't drag the
// median toward itself and only loses score by deviating, so outliers are
// never selected however they crowd. The selected index maximises the
// score (ties -> the lowest index).
ScoreTable closeness_scores(const std::vector<UpdateVector>& updates);

struct FoundationResult {
    UpdateVector aggregate;
    ScoreTable scores;
    std::vector<UpdateVector> augmented;  // inputs followed by m copies of the pick
};

// Scores the inputs by closeness to the coordinate-wise median, appends
// m copies of the selected update, then applies trimmed-mean
// (use_median == false; trim count c over the augmented set) or median.
// The trimmed-mean variant needs 2c < updates.size() + m.
FoundationResult foundation_aggregate(const std::vector<UpdateVector>& updates,
                                      std::size_t m, bool use_median, std::size_t c);

struct GaussianSynthResult {
    UpdateVector aggregate;
    std::vector<UpdateVector> augmented;
};

// Ablation baseline: appends m synthetic updates drawn per coordinate from
// a normal matching the clients' per-coordinate mean and population std,
// then applies trimmed-mean or median over the augmented set.
GaussianSynthResult gaussian_synthetic_aggregate(const std::vector<UpdateVector>& updates,
                                                 std::size_t m, bool use_median,
                                                 std::size_t c, RngStream& stream);

// Estimated malicious count: pairwise cosine distances (zero vectors count
// as distance 1 to everything), 2-means over matrix rows with k-means++
// init from a fixed internal stream, at most 100 iterations; returns the
// smaller cluster's size. Identical updates short-circuit to 0.
std::size_t estimate_malicious_count(const std::vector<UpdateVector>& updates);

struct AggregateOutcome {
    UpdateVector aggregate;
    // Participant index whose update was replicated (foundation rules) or
    // selected (krum); -1 for rules without a selection step.
    int selected = -1;
    // The set the final rule actually ran on, synthetics included; equals
    // the input set for non-augmenting rules.
    std::vector<UpdateVector> augmented;
    std::size_t resolved_c = 0;   // trim count actually applied, if any
    std::size_t estimated_f = 0;  // estimator output when it ran
};

// Unified entry point used by the experiment loop; `stream` feeds only the
// gaussian_* synthesisers.
AggregateOutcome aggregate(const std::vector<UpdateVector>& updates,
                           const AggregatorSpec& spec, RngStream& stream);

} // namespace fedsim::agg
