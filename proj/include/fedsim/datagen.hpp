#pragma once
// Synthetic classification data, the label-bias non-IID partitioner, and
// the data-level poisoning helpers (label flips, triggers), plus a plain
// text dump/load round-trip format.

#include <cstddef>
#include <string>
#include <vector>

#include "fedsim/core.hpp"

namespace fedsim::datagen {

struct LabeledExample {
    std::vector<double> features;
    int label = 0;
};

using Dataset = std::vector<LabeledExample>;
using DatasetShard = Dataset;

struct PartitionConfig {
    std::size_t n_clients = 0;
    int n_clusters = 0;     // one cluster per class
    double bias = 0.5;      // probability an example lands in its label's cluster
};

struct TrainTestSplit {
    Dataset train;
    Dataset test;
};

// Distance between sibling class means along their split coordinate, and
// the per-band noise scales of the paired layout: simplex coordinates
// (which carry the cross-pair separation), split coordinates (which carry
// the sibling separation), and ambient coordinates (which carry nothing).
// Siblings are cleanly separable (2.5 noise widths apart) but only through
// a low-variance feature that needs weights an order of magnitude larger
// than the rest of the model, which makes those directions slow to fit and
// nearly flat in curvature. Ambient and simplex noise is kept quiet so the
// class boundaries' noise budget is owned by the structured coordinates
// rather than by weight error on structureless ones.
inline constexpr double kSiblingSplit = 0.5;
inline constexpr double kSplitCoordStd = 0.2;
inline constexpr double kSimplexStd = 0.2;
inline constexpr double kAmbientStd = 0.2;

// How a label's stray (non-own-cluster) mass is routed by the non-IID
// partition: a kSiblingShare fraction goes to the sibling class's cluster
// (keeping every owner's view of a class pair two-sided, so no single
// client can testify for only one sibling), a kBalancedShare fraction goes
// to a small balanced tail of kBalancedClients clients that own no cluster
// and instead hold a representative slice of everything, and the remainder
// spreads uniformly over the other clusters. The balanced tail models the
// representative end of a real federation's client spectrum: most clients
// are niche specialists, a few see near-global traffic.
inline constexpr double kSiblingShare = 0.85;
inline constexpr double kBalancedShare = 0.10;
inline constexpr std::size_t kBalancedClients = 1;

// Gaussian blobs, one per class. When the feature space has at least as many
// dimensions as there are classes, classes come in sibling pairs whose
// midpoints form a centered regular simplex with pairwise distance
// `separation`; the two siblings of a pair differ only along a private split
// coordinate (kSiblingSplit apart, kSplitCoordStd noise), and the remaining
// coordinates are ambient noise. Otherwise the means are standard-normal
// draws rescaled so the minimum pairwise distance equals `separation`
// exactly, with unit noise everywhere. Per-class counts are balanced within
// one example.
Dataset generate_synthetic_classification(std::size_t n_examples, int n_classes,
                                          std::size_t n_features, double separation,
                                          RngStream& stream);

// Shuffled split; the test side receives floor(n * test_fraction) examples.
TrainTestSplit train_test_split(const Dataset& dataset, double test_fraction,
                                RngStream& stream);

// Label-biased partition with a balanced tail: the last kBalancedClients
// clients (when the client count allows at least one owner per cluster)
// own no cluster and receive a kBalancedShare cut of all stray mass, so
// their shards mirror the global distribution; the remaining clients are
// assigned round-robin to one cluster per class (client i -> cluster
// i mod M). An example labeled y goes to cluster y with probability
// `bias`; of the stray mass, a kSiblingShare fraction goes to the sibling
// cluster (labels pair as 2j/2j+1), a kBalancedShare fraction to the
// balanced tail, and the rest spreads uniformly over the other clusters;
// then uniformly to a client inside the chosen cluster. A draw that
// leaves any shard empty is retried with a fresh sub-stream up to 16
// times before erroring out.
std::vector<DatasetShard> partition_non_iid(const Dataset& train, const PartitionConfig& cfg,
                                            RngStream& stream);

// y -> n_classes - 1 - y; features untouched. Involution.
Dataset flip_labels(const Dataset& dataset, int n_classes);

struct TriggerSpec {
    std::vector<std::size_t> feature_indices;
    double value = 0.0;
    int target_label = 0;
};

// Stamps trigger features and rewrites the label to the trigger's target.
LabeledExample inject_trigger(const LabeledExample& example, const TriggerSpec& trigger);
Dataset inject_trigger(const Dataset& dataset, const TriggerSpec& trigger);

// One example per line: comma-separated features, label last.
void dump_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

} // namespace fedsim::datagen
