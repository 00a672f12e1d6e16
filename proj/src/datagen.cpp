#include "fedsim/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fedsim::datagen {

namespace {

void check_labels(const Dataset& dataset, int n_classes, const std::string& what) {
    for (const auto& ex : dataset)
        if (ex.label < 0 || ex.label >= n_classes)
            throw std::invalid_argument(what + ": label out of range [0," +
                                        std::to_string(n_classes) + ")");
}

// Classes come in sibling pairs: pair midpoints form a centered regular
// simplex with pairwise distance `separation`, and the two classes of a pair
// sit kSiblingSplit apart along a private coordinate axis no midpoint uses.
// Cross-pair confusion is mild, and sibling discrimination runs entirely
// through the pair's low-variance split coordinate. Falls back to random
// placement rescaled so the closest class pair sits at `separation` when the
// feature space is too narrow for the paired layout.
std::vector<std::vector<double>> draw_class_means(int n_classes, std::size_t n_features,
                                                  double separation, RngStream& stream) {
    const std::size_t m_sz = static_cast<std::size_t>(n_classes);
    std::vector<std::vector<double>> means(m_sz, std::vector<double>(n_features, 0.0));
    if (n_classes == 1) return means;
    const std::size_t n_pairs = (m_sz + 1) / 2;
    if (n_features >= m_sz) {
        // Midpoint simplex on coordinates [0, n_pairs); split axes on
        // [n_pairs, n_pairs + m_sz/2), one per full pair.
        const double s = separation / std::sqrt(2.0);
        for (std::size_t c = 0; c < m_sz; ++c) {
            const std::size_t pair = c / 2;
            for (std::size_t j = 0; j < n_pairs; ++j)
                means[c][j] = -s / static_cast<double>(n_pairs);
            means[c][pair] += s;
            if (c + 1 < m_sz || c % 2 == 1)  // has a sibling
                means[c][n_pairs + pair] = (c % 2 == 0 ? -0.5 : 0.5) * kSiblingSplit;
        }
        return means;
    }
    RngStream ms = stream.sub("means");
    for (int attempt = 0; attempt < 16; ++attempt) {
        for (auto& m : means)
            for (auto& x : m) x = ms.normal();
        double min_dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < means.size(); ++i)
            for (std::size_t j = i + 1; j < means.size(); ++j)
                min_dist = std::min(min_dist, l2_distance(means[i], means[j]));
        if (min_dist <= 0.0) continue;  // coincident draw: retry
        const double scale = separation / min_dist;
        for (auto& m : means) kernels::active().scale(m.data(), m.size(), scale);
        return means;
    }
    throw std::runtime_error("generate_synthetic_classification: coincident class means");
}

} // namespace

Dataset generate_synthetic_classification(std::size_t n_examples, int n_classes,
                                          std::size_t n_features, double separation,
                                          RngStream& stream) {
    if (n_examples == 0) throw std::invalid_argument("generate: requires n_examples > 0");
    if (n_classes < 1) throw std::invalid_argument("generate: requires n_classes >= 1");
    if (n_features == 0) throw std::invalid_argument("generate: requires n_features > 0");
    if (n_classes > 1 && !(separation > 0.0))
        throw std::invalid_argument("generate: requires separation > 0");

    const auto means = draw_class_means(n_classes, n_features, separation, stream);

    // Balanced class counts: the first (n mod M) classes get one extra.
    const std::size_t m = static_cast<std::size_t>(n_classes);
    const std::size_t base = n_examples / m;
    const std::size_t extra = n_examples % m;

    // Under the paired layout the noise scale is per-band: simplex
    // coordinates kSimplexStd, split coordinates kSplitCoordStd, ambient
    // (structureless) coordinates kAmbientStd. Loud ambient coordinates
    // would dominate every class boundary's noise budget, drowning the
    // low-variance split signal; quiet ones keep discrimination on the
    // coordinates that carry structure. A fallback layout is unit
    // everywhere.
    const bool paired = n_classes > 1 && n_features >= m;
    const std::size_t n_pairs = (m + 1) / 2;
    const std::size_t split_begin = paired ? n_pairs : n_features;
    const std::size_t split_end = paired ? split_begin + m / 2 : n_features;

    Dataset out;
    out.reserve(n_examples);
    RngStream noise = stream.sub("noise");
    for (std::size_t c = 0; c < m; ++c) {
        const std::size_t count = base + (c < extra ? 1 : 0);
        for (std::size_t k = 0; k < count; ++k) {
            LabeledExample ex;
            ex.label = static_cast<int>(c);
            ex.features.resize(n_features);
            for (std::size_t j = 0; j < n_features; ++j) {
                double sd = 1.0;
                if (paired)
                    sd = j < split_begin    ? kSimplexStd
                         : j < split_end    ? kSplitCoordStd
                                            : kAmbientStd;
                ex.features[j] = means[c][j] + sd * noise.normal();
            }
            out.push_back(std::move(ex));
        }
    }
    RngStream order = stream.sub("shuffle");
    order.shuffle(out);
    return out;
}

TrainTestSplit train_test_split(const Dataset& dataset, double test_fraction,
                                RngStream& stream) {
    if (!(test_fraction >= 0.0) || !(test_fraction < 1.0))
        throw std::invalid_argument("train_test_split: requires test_fraction in [0,1)");
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    RngStream s = stream.sub("split");
    s.shuffle(order);
    const std::size_t n_test =
        static_cast<std::size_t>(static_cast<double>(dataset.size()) * test_fraction);
    TrainTestSplit split;
    split.test.reserve(n_test);
    split.train.reserve(dataset.size() - n_test);
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n_test ? split.test : split.train).push_back(dataset[order[i]]);
    return split;
}

std::vector<DatasetShard> partition_non_iid(const Dataset& train, const PartitionConfig& cfg,
                                            RngStream& stream) {
    const int m = cfg.n_clusters;
    if (m < 1) throw std::invalid_argument("partition_non_iid: requires n_clusters >= 1");
    if (cfg.n_clients == 0)
        throw std::invalid_argument("partition_non_iid: requires n_clients > 0");
    if (cfg.n_clients < static_cast<std::size_t>(m))
        throw std::invalid_argument(
            "partition_non_iid: requires n_clients >= n_clusters so every cluster owns a client");
    if (!(cfg.bias >= 1.0 / static_cast<double>(m)) || !(cfg.bias <= 1.0))
        throw std::invalid_argument("partition_non_iid: requires bias in [1/n_clusters, 1]");
    if (train.empty()) throw std::invalid_argument("partition_non_iid: empty training set");
    check_labels(train, m, "partition_non_iid");

    // The last kBalancedClients clients hold a representative slice of every
    // cluster instead of owning one; real federations span a spectrum from
    // niche to representative participants, and the representative tail is
    // what interior-update selection keys on. The remaining clients map to
    // clusters round-robin; at least one owner per cluster is required.
    const std::size_t balanced =
        std::min<std::size_t>(kBalancedClients, cfg.n_clients - static_cast<std::size_t>(m));
    const std::size_t n_owners = cfg.n_clients - balanced;
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < n_owners; ++i)
        members[i % static_cast<std::size_t>(m)].push_back(i);

    for (int attempt = 0; attempt < 16; ++attempt) {
        RngStream s = stream.sub("attempt=" + std::to_string(attempt));
        std::vector<DatasetShard> shards(cfg.n_clients);
        for (const auto& ex : train) {
            std::size_t cluster = static_cast<std::size_t>(ex.label);
            if (s.uniform() >= cfg.bias) {
                // Stray mass goes three ways: some to the sibling cluster
                // (labels pair up as 2j/2j+1, so no client's view of a pair
                // is one-sided), some to the balanced tail, and the rest
                // uniformly over the other clusters.
                const std::size_t sibling = cluster ^ 1U;
                const double v = s.uniform();
                if (m >= 2 && sibling < static_cast<std::size_t>(m) && v < kSiblingShare) {
                    cluster = sibling;
                } else if (balanced > 0 && v < kSiblingShare + kBalancedShare) {
                    shards[n_owners + s.uniform_index(balanced)].push_back(ex);
                    continue;
                } else if (m >= 2) {
                    std::size_t k = s.uniform_index(static_cast<std::size_t>(m) - 1);
                    cluster = k >= cluster ? k + 1 : k;
                }
            }
            const auto& owners = members[cluster];
            shards[owners[s.uniform_index(owners.size())]].push_back(ex);
        }
        bool any_empty = false;
        for (const auto& shard : shards)
            if (shard.empty()) { any_empty = true; break; }
        if (!any_empty) return shards;
    }
    throw std::runtime_error("partition_non_iid: a shard stayed empty after 16 attempts");
}

Dataset flip_labels(const Dataset& dataset, int n_classes) {
    if (n_classes < 1) throw std::invalid_argument("flip_labels: requires n_classes >= 1");
    check_labels(dataset, n_classes, "flip_labels");
    Dataset out = dataset;
    for (auto& ex : out) ex.label = n_classes - 1 - ex.label;
    return out;
}

LabeledExample inject_trigger(const LabeledExample& example, const TriggerSpec& trigger) {
    LabeledExample out = example;
    for (std::size_t idx : trigger.feature_indices) {
        if (idx >= out.features.size())
            throw std::invalid_argument("inject_trigger: feature index out of range");
        out.features[idx] = trigger.value;
    }
    out.label = trigger.target_label;
    return out;
}

Dataset inject_trigger(const Dataset& dataset, const TriggerSpec& trigger) {
    Dataset out;
    out.reserve(dataset.size());
    for (const auto& ex : dataset) out.push_back(inject_trigger(ex, trigger));
    return out;
}

void dump_dataset(const std::string& path, const Dataset& dataset) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("dump_dataset: cannot open " + path);
    char buf[40];
    for (const auto& ex : dataset) {
        for (double x : ex.features) {
            std::snprintf(buf, sizeof(buf), "%.17g", x);
            f << buf << ',';
        }
        f << ex.label << '\n';
    }
    if (!f) throw std::runtime_error("dump_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_dataset: cannot open " + path);
    Dataset out;
    std::string line;
    std::size_t n_features = 0;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> fields;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &pos);
            } catch (const std::exception&) {
                throw std::runtime_error("load_dataset: bad field at line " +
                                         std::to_string(line_no));
            }
            if (pos != tok.size())
                throw std::runtime_error("load_dataset: trailing junk at line " +
                                         std::to_string(line_no));
            fields.push_back(v);
        }
        if (fields.size() < 2)
            throw std::runtime_error("load_dataset: too few fields at line " +
                                     std::to_string(line_no));
        LabeledExample ex;
        ex.label = static_cast<int>(fields.back());
        if (static_cast<double>(ex.label) != fields.back())
            throw std::runtime_error("load_dataset: non-integer label at line " +
                                     std::to_string(line_no));
        fields.pop_back();
        if (n_features == 0) n_features = fields.size();
        if (fields.size() != n_features)
            throw std::runtime_error("load_dataset: inconsistent feature count at line " +
                                     std::to_string(line_no));
        ex.features = std::move(fields);
        out.push_back(std::move(ex));
    }
    return out;
}

} // namespace fedsim::datagen
