#include "fedsim/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fedsim::agg {

namespace {

const kernels::Ops& K() { return kernels::active(); }

} // namespace

UpdateVector fedavg(const std::vector<UpdateVector>& updates) {
    check_update_set(updates, "fedavg");
    return mean_update(updates);
}

UpdateVector trimmed_mean(const std::vector<UpdateVector>& updates, std::size_t c) {
    check_update_set(updates, "trimmed_mean");
    const std::size_t n = updates.size();
    if (2 * c >= n)
        throw std::invalid_argument("trimmed_mean: requires 2*c < number of updates (c=" +
                                    std::to_string(c) + ", n=" + std::to_string(n) + ")");
    const std::size_t d = updates.front().size();
    UpdateVector out(d);
    std::vector<double> col(n);
    const double inv = 1.0 / static_cast<double>(n - 2 * c);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < n; ++i) col[i] = updates[i][k];
        std::sort(col.begin(), col.end());
        double acc = 0.0;
        for (std::size_t i = c; i < n - c; ++i) acc += col[i];
        out[k] = acc * inv;
    }
    return out;
}

UpdateVector coordinate_median(const std::vector<UpdateVector>& updates) {
    check_update_set(updates, "coordinate_median");
    const std::size_t n = updates.size();
    const std::size_t d = updates.front().size();
    UpdateVector out(d);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < n; ++i) col[i] = updates[i][k];
        std::sort(col.begin(), col.end());
        out[k] = (n % 2 == 1) ? col[n / 2] : (col[n / 2 - 1] + col[n / 2]) / 2.0;
    }
    return out;
}

KrumResult krum(const std::vector<UpdateVector>& updates, std::size_t f) {
    check_update_set(updates, "krum");
    const std::size_t n = updates.size();
    if (n < f + 3)
        throw std::invalid_argument("krum: requires at least f + 3 updates (f=" +
                                    std::to_string(f) + ", n=" + std::to_string(n) + ")");
    const std::size_t d = updates.front().size();
    // Full pairwise squared-distance matrix; n is small by construction.
    std::vector<double> dist2(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = K().sumsq_diff(updates[i].data(), updates[j].data(), d);
            dist2[i * n + j] = v;
            dist2[j * n + i] = v;
        }
    const std::size_t keep = n - f - 2;
    std::size_t best = 0;
    double best_score = 0.0;
    std::vector<double> row(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t w = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) row[w++] = dist2[i * n + j];
        std::sort(row.begin(), row.end());
        double score = 0.0;
        for (std::size_t j = 0; j < keep; ++j) score += row[j];
        if (i == 0 || score < best_score) {  // strict < keeps the lowest index on ties
            best_score = score;
            best = i;
        }
    }
    return {updates[best], best};
}

ExtremeVectors extreme_vectors(const std::vector<UpdateVector>& updates) {
    check_update_set(updates, "extreme_vectors");
    const std::size_t d = updates.front().size();
    ExtremeVectors ev;
    ev.max = updates.front();
    ev.min = updates.front();
    for (std::size_t i = 1; i < updates.size(); ++i) {
        K().elem_max(updates[i].data(), ev.max.data(), d);
        K().elem_min(updates[i].data(), ev.min.data(), d);
    }
    return ev;
}

ScoreTable closeness_scores(const std::vector<UpdateVector>& updates) {
    check_update_set(updates, "closeness_scores");
    const std::size_t n = updates.size();
    const std::size_t d = updates.front().size();
    ScoreTable table;
    table.scores.assign(n, 0.0);
    // Negative L1 distance to the coordinate-wise median, so the top score
    // goes to the update nearest the robust centre of the received set.
    // The median's 50% breakdown point means a crafted minority can neither
    // drag the centre toward itself (values hiding just beyond the honest
    // range move it at most one rank) nor ever score well itself: deviating
    // on any coordinate only adds distance. An envelope or extreme-vector
    // midpoint would instead chase half-extremes on skewed coordinates and
    // shift with whatever one side crowds onto the range's edge.
    std::vector<double> col(n);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < n; ++i) col[i] = updates[i][k];
        std::sort(col.begin(), col.end());
        const double med =
            (n % 2 == 1) ? col[n / 2] : (col[n / 2 - 1] + col[n / 2]) / 2.0;
        for (std::size_t i = 0; i < n; ++i)
            table.scores[i] -= std::abs(updates[i][k] - med);
    }
    table.selected = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (table.scores[i] > table.scores[table.selected]) table.selected = i;
    return table;
}

FoundationResult foundation_aggregate(const std::vector<UpdateVector>& updates,
                                      std::size_t m, bool use_median, std::size_t c) {
    FoundationResult res;
    res.scores = closeness_scores(updates);
    res.augmented = updates;
    res.augmented.reserve(updates.size() + m);
    for (std::size_t j = 0; j < m; ++j)
        res.augmented.push_back(updates[res.scores.selected]);
    res.aggregate = use_median ? coordinate_median(res.augmented)
                               : trimmed_mean(res.augmented, c);
    return res;
}

GaussianSynthResult gaussian_synthetic_aggregate(const std::vector<UpdateVector>& updates,
                                                 std::size_t m, bool use_median,
                                                 std::size_t c, RngStream& stream) {
    check_update_set(updates, "gaussian_synthetic_aggregate");
    const std::size_t d = updates.front().size();
    const std::size_t n = updates.size();
    const UpdateVector mean = mean_update(updates);
    std::vector<double> var(d, 0.0);
    for (const auto& u : updates) K().acc_sq_diff(u.data(), mean.data(), var.data(), d);
    K().scale(var.data(), d, 1.0 / static_cast<double>(n));

    GaussianSynthResult res;
    res.augmented = updates;
    res.augmented.reserve(n + m);
    for (std::size_t j = 0; j < m; ++j) {
        UpdateVector synth(d);
        for (std::size_t k = 0; k < d; ++k)
            synth[k] = mean[k] + std::sqrt(var[k]) * stream.normal();
        res.augmented.push_back(std::move(synth));
    }
    res.aggregate = use_median ? coordinate_median(res.augmented)
                               : trimmed_mean(res.augmented, c);
    return res;
}

namespace {

// Pairwise cosine distance between two updates given precomputed norms;
// any zero vector is distance 1 from everything else.
double cosine_distance(const UpdateVector& a, double na, const UpdateVector& b, double nb) {
    if (na == 0.0 || nb == 0.0) return 1.0;
    return 1.0 - K().dot(a.data(), b.data(), a.size()) / (na * nb);
}

} // namespace

std::size_t estimate_malicious_count(const std::vector<UpdateVector>& updates) {
    check_update_set(updates, "estimate_malicious_count");
    const std::size_t n = updates.size();
    if (n < 2) return 0;

    bool all_same = true;
    for (std::size_t i = 1; i < n && all_same; ++i) all_same = updates[i] == updates[0];
    if (all_same) return 0;

    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) norms[i] = l2_norm(updates[i]);
    // Rows of the pairwise cosine-distance matrix are the clustering inputs.
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = cosine_distance(updates[i], norms[i], updates[j], norms[j]);
            rows[i][j] = v;
            rows[j][i] = v;
        }

    RngStream stream(0x2C15755E5ull, "estimate_malicious/kmeanspp");
    // k-means++ seeding for two centroids.
    std::vector<double> c0 = rows[stream.uniform_index(n)];
    std::vector<double> w(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = K().sumsq_diff(rows[i].data(), c0.data(), n);
        total += w[i];
    }
    std::size_t second = 0;
    if (total <= 0.0) {
        second = stream.uniform_index(n);
    } else {
        const double target = stream.uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += w[i];
            second = i;
            if (target < acc) break;
        }
    }
    std::vector<double> c1 = rows[second];

    std::vector<int> assign(n, 0), prev(n, -1);
    for (int iter = 0; iter < 100; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d0 = K().sumsq_diff(rows[i].data(), c0.data(), n);
            const double d1 = K().sumsq_diff(rows[i].data(), c1.data(), n);
            assign[i] = d1 < d0 ? 1 : 0;  // ties stay with the first centroid
        }
        if (assign == prev) break;
        prev = assign;
        std::vector<double> s0(n, 0.0), s1(n, 0.0);
        std::size_t n0 = 0, n1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (assign[i] == 0) {
                K().add(rows[i].data(), s0.data(), n);
                ++n0;
            } else {
                K().add(rows[i].data(), s1.data(), n);
                ++n1;
            }
        }
        // An emptied cluster keeps its previous centroid.
        if (n0 > 0) {
            K().scale(s0.data(), n, 1.0 / static_cast<double>(n0));
            c0 = std::move(s0);
        }
        if (n1 > 0) {
            K().scale(s1.data(), n, 1.0 / static_cast<double>(n1));
            c1 = std::move(s1);
        }
    }
    std::size_t n1 = 0;
    for (int a : assign) n1 += a == 1 ? 1 : 0;
    return std::min(n1, n - n1);
}

AggregateOutcome aggregate(const std::vector<UpdateVector>& updates,
                           const AggregatorSpec& spec, RngStream& stream) {
    check_update_set(updates, "aggregate");
    const std::size_t n = updates.size();
    AggregateOutcome out;

    std::size_t c = spec.trim_c;
    std::size_t f = spec.assumed_f;
    if (spec.estimate_malicious) {
        out.estimated_f = estimate_malicious_count(updates);
        c = out.estimated_f;
        f = out.estimated_f;
    }

    // Clamp so the estimator can never hand a trim rule an infeasible count.
    const auto clamp_c = [](std::size_t want, std::size_t count) {
        const std::size_t max_c = count == 0 ? 0 : (count - 1) / 2;
        return std::min(want, max_c);
    };

    switch (spec.rule) {
    case Rule::fedavg:
        out.aggregate = fedavg(updates);
        out.augmented = updates;
        return out;
    case Rule::trim_mean:
        out.resolved_c = spec.estimate_malicious ? clamp_c(c, n) : c;
        out.aggregate = trimmed_mean(updates, out.resolved_c);
        out.augmented = updates;
        return out;
    case Rule::median:
        out.aggregate = coordinate_median(updates);
        out.augmented = updates;
        return out;
    case Rule::krum: {
        if (spec.estimate_malicious && n >= 3) f = std::min(f, n - 3);
        KrumResult kr = krum(updates, f);
        out.aggregate = std::move(kr.update);
        out.selected = static_cast<int>(kr.selected);
        out.augmented = updates;
        return out;
    }
    case Rule::gaussian_trim:
    case Rule::gaussian_median: {
        const bool use_median = spec.rule == Rule::gaussian_median;
        out.resolved_c = use_median ? 0 : (spec.estimate_malicious
                                               ? clamp_c(c, n + spec.synthetic_m)
                                               : c);
        GaussianSynthResult gs = gaussian_synthetic_aggregate(
            updates, spec.synthetic_m, use_median, out.resolved_c, stream);
        out.aggregate = std::move(gs.aggregate);
        out.augmented = std::move(gs.augmented);
        return out;
    }
    case Rule::foundation_trim:
    case Rule::foundation_median: {
        const bool use_median = spec.rule == Rule::foundation_median;
        // The scoring envelope always excludes the c most extreme values per
        // side, for the median variant too; only the trim aggregation itself
        // is skipped under median. Scoring needs 2c < n.
        out.resolved_c = spec.estimate_malicious ? clamp_c(c, n) : c;
        FoundationResult fr =
            foundation_aggregate(updates, spec.synthetic_m, use_median, out.resolved_c);
        out.aggregate = std::move(fr.aggregate);
        out.selected = static_cast<int>(fr.scores.selected);
        out.augmented = std::move(fr.augmented);
        return out;
    }
    }
    throw std::logic_error("aggregate: unknown rule");
}

} // namespace fedsim::agg
