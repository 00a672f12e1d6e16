#include "fedsim/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedsim/aggregators.hpp"
#include "fedsim/attacks.hpp"
#include "fedsim/config.hpp"
#include "fedsim/core.hpp"
#include "fedsim/datagen.hpp"
#include "fedsim/harness.hpp"
#include "fedsim/models.hpp"
#include "fedsim/rng.hpp"

namespace fedsim::verify {
namespace {

using clock_type = std::chrono::steady_clock;

double elapsed_seconds(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string fmt(double x, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << x;
    return os.str();
}

// ---------------------------------------------------------------------------
// Brute-force oracles, written against the math alone: plain index loops,
// long-double accumulation, no shared code with the library kernels.
// ---------------------------------------------------------------------------

std::vector<UpdateVector> random_update_set(RngStream& s, std::size_t n, std::size_t d) {
    const double scale = std::pow(10.0, s.uniform(-1.0, 2.0));
    std::vector<UpdateVector> u(n, UpdateVector(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) u[i][k] = s.normal() * scale;
    if (n >= 2 && s.uniform() < 0.25) u[s.uniform_index(n)] = u[s.uniform_index(n)];
    if (s.uniform() < 0.15) {
        auto& row = u[s.uniform_index(n)];
        std::fill(row.begin(), row.end(), 0.0);
    }
    if (s.uniform() < 0.20) {
        auto& row = u[s.uniform_index(n)];
        for (auto& x : row) x *= 1000.0;
    }
    return u;
}

double set_scale(const std::vector<UpdateVector>& u) {
    double m = 1.0;
    for (const auto& row : u)
        for (double x : row) m = std::max(m, std::fabs(x));
    return m * static_cast<double>(u.size());
}

UpdateVector oracle_trimmed_mean(const std::vector<UpdateVector>& u, std::size_t c) {
    const std::size_t n = u.size(), d = u[0].size();
    UpdateVector out(d, 0.0);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < n; ++i) col[i] = u[i][k];
        std::sort(col.begin(), col.end(), std::greater<double>());
        long double acc = 0.0L;
        for (std::size_t i = c; i < n - c; ++i) acc += col[i];
        out[k] = static_cast<double>(acc / static_cast<long double>(n - 2 * c));
    }
    return out;
}

UpdateVector oracle_median(const std::vector<UpdateVector>& u) {
    const std::size_t n = u.size(), d = u[0].size();
    UpdateVector out(d, 0.0);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < n; ++i) col[i] = u[i][k];
        std::sort(col.begin(), col.end());
        if (n % 2 == 1) {
            out[k] = col[n / 2];
        } else {
            out[k] = static_cast<double>(
                (static_cast<long double>(col[n / 2 - 1]) + col[n / 2]) / 2.0L);
        }
    }
    return out;
}

std::size_t oracle_krum_index(const std::vector<UpdateVector>& u, std::size_t f) {
    const std::size_t n = u.size(), d = u[0].size();
    std::vector<std::vector<long double>> dist2(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            long double acc = 0.0L;
            for (std::size_t k = 0; k < d; ++k) {
                const long double diff =
                    static_cast<long double>(u[i][k]) - static_cast<long double>(u[j][k]);
                acc += diff * diff;
            }
            dist2[i][j] = dist2[j][i] = acc;
        }
    const std::size_t keep = n - f - 2;
    std::size_t best = 0;
    long double best_score = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<long double> others;
        others.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) others.push_back(dist2[i][j]);
        std::sort(others.begin(), others.end());
        long double score = 0.0L;
        for (std::size_t j = 0; j < keep; ++j) score += others[j];
        if (i == 0 || score < best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

struct OracleExtremes {
    UpdateVector max_vec;
    UpdateVector min_vec;
};

OracleExtremes oracle_extremes(const std::vector<UpdateVector>& u) {
    const std::size_t n = u.size(), d = u[0].size();
    OracleExtremes out{u[0], u[0]};
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            if (u[i][k] > out.max_vec[k]) out.max_vec[k] = u[i][k];
            if (u[i][k] < out.min_vec[k]) out.min_vec[k] = u[i][k];
        }
    return out;
}

struct OracleScores {
    std::vector<double> scores;
    std::size_t selected = 0;
};

OracleScores oracle_closeness(const std::vector<UpdateVector>& u) {
    const std::size_t n = u.size(), d = u[0].size();
    OracleScores out;
    out.scores.assign(n, 0.0);
    std::vector<long double> acc(n, 0.0L);
    for (std::size_t k = 0; k < d; ++k) {
        // Median via selection rather than a full sort.
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = u[i][k];
        std::nth_element(w.begin(), w.begin() + static_cast<long>(n / 2), w.end());
        double med = w[n / 2];
        if (n % 2 == 0) {
            std::nth_element(w.begin(), w.begin() + static_cast<long>(n / 2 - 1), w.end());
            med = (w[n / 2 - 1] + med) / 2.0;
        }
        for (std::size_t i = 0; i < n; ++i)
            acc[i] -= std::fabs(static_cast<long double>(u[i][k]) - med);
    }
    for (std::size_t i = 0; i < n; ++i) {
        out.scores[i] = static_cast<double>(acc[i]);
        if (out.scores[i] > out.scores[out.selected]) out.selected = i;
    }
    return out;
}

bool vectors_close(const UpdateVector& a, const UpdateVector& b, double tol, double& worst) {
    if (a.size() != b.size()) return false;
    bool ok = true;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double delta = std::fabs(a[k] - b[k]);
        worst = std::max(worst, delta / tol * 1e-12);
        if (delta > tol) ok = false;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// Experiment helpers on the pinned desk-scale task (the config defaults).
// ---------------------------------------------------------------------------

config::ExperimentConfig standard_task(std::uint64_t seed, agg::Rule rule,
                                       attacks::AttackKind atk, double frac = 0.2) {
    config::ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.rule = rule;
    cfg.attack.kind = atk;
    cfg.attack.malicious_fraction = frac;
    return cfg;
}

const std::vector<std::uint64_t>& acceptance_seeds() {
    static const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    return seeds;
}

double mean_final_error(agg::Rule rule, attacks::AttackKind atk,
                        const std::vector<std::uint64_t>& seeds, double frac = 0.2) {
    double sum = 0.0;
    for (const std::uint64_t seed : seeds)
        sum += harness::run_experiment(standard_task(seed, rule, atk, frac)).final_test_error;
    return sum / static_cast<double>(seeds.size());
}

struct VarianceStats {
    double mean_raw = 0.0;  // mean over every round of the raw-set variance
    double mean_aug = 0.0;  // same for the set the final rule actually saw
    double final_error = -1.0;
};

VarianceStats all_round_variances(agg::Rule rule, attacks::AttackKind atk, std::uint64_t seed) {
    const config::ExperimentConfig cfg = standard_task(seed, rule, atk);
    harness::Experiment ex = harness::setup_experiment(cfg);
    VarianceStats out;
    for (long t = 0; t < cfg.rounds; ++t) {
        const harness::RoundRecord rec = harness::run_round(ex, t == cfg.rounds - 1);
        out.mean_raw += rec.raw_variance_mean;
        out.mean_aug += rec.augmented_variance_mean;
        if (t == cfg.rounds - 1) out.final_error = rec.test_error;
    }
    out.mean_raw /= static_cast<double>(cfg.rounds);
    out.mean_aug /= static_cast<double>(cfg.rounds);
    return out;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

CriterionResult c1_aggregator_oracles() {
    CriterionResult r;
    r.name = "aggregator-oracle-equivalence";
    r.limit_seconds = 10.0;
    const auto start = clock_type::now();

    RngStream stream(0xACCE01, "acceptance/aggregators");
    double worst = 0.0;
    std::size_t bad = 0;
    std::string first_fail;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 3 + stream.uniform_index(23);  // [3, 25]
        const std::size_t d = 1 + stream.uniform_index(8);   // [1, 8]
        const auto u = random_update_set(stream, n, d);
        const double tol = 1e-12 * set_scale(u);
        bool ok = true;
        std::string why;

        const std::size_t c = stream.uniform_index((n - 1) / 2 + 1);
        if (!vectors_close(agg::trimmed_mean(u, c), oracle_trimmed_mean(u, c), tol, worst)) {
            ok = false;
            why = "trimmed_mean";
        }
        if (!vectors_close(agg::coordinate_median(u), oracle_median(u), tol, worst)) {
            ok = false;
            why = "coordinate_median";
        }

        const std::size_t f = stream.uniform_index(n - 2);  // [0, n-3]
        const agg::KrumResult kr = agg::krum(u, f);
        if (kr.selected != oracle_krum_index(u, f) || kr.update != u[kr.selected]) {
            ok = false;
            why = "krum";
        }

        const agg::ExtremeVectors ext = agg::extreme_vectors(u);
        const OracleExtremes oext = oracle_extremes(u);
        if (ext.max != oext.max_vec || ext.min != oext.min_vec) {
            ok = false;
            why = "extreme_vectors";
        }

        const agg::ScoreTable st = agg::closeness_scores(u);
        const OracleScores os = oracle_closeness(u);
        bool scores_ok = st.selected == os.selected && st.scores.size() == os.scores.size();
        if (scores_ok && !vectors_close(st.scores, os.scores, tol, worst)) scores_ok = false;
        if (!scores_ok) {
            ok = false;
            why = "closeness_scores";
        }

        if (!ok) {
            ++bad;
            if (first_fail.empty())
                first_fail = why + " at instance " + std::to_string(i) + " (n=" +
                             std::to_string(n) + ", d=" + std::to_string(d) + ")";
        }
    }
    r.seconds = elapsed_seconds(start);
    r.passed = bad == 0 && r.seconds < r.limit_seconds;
    std::ostringstream os;
    if (bad == 0)
        os << "1000 instances x 5 ops, worst scaled deviation " << fmt(worst, 3) << " (tol 1e-12)";
    else
        os << bad << " mismatching instances; first: " << first_fail;
    r.detail = os.str();
    return r;
}

CriterionResult c2_augmentation_identity() {
    CriterionResult r;
    r.name = "augmentation-identity";
    r.limit_seconds = 5.0;
    const auto start = clock_type::now();

    RngStream stream(0xACCE02, "acceptance/augmentation");
    std::size_t bad = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 3 + stream.uniform_index(23);
        const std::size_t d = 1 + stream.uniform_index(8);
        const auto u = random_update_set(stream, n, d);
        const std::size_t c = stream.uniform_index((n - 1) / 2 + 1);
        if (agg::foundation_aggregate(u, 0, false, c).aggregate != agg::trimmed_mean(u, c)) ++bad;
        if (agg::foundation_aggregate(u, 0, true, 0).aggregate != agg::coordinate_median(u)) ++bad;
    }

    // Hand-evaluated 1-d example: updates {1, 2, 10}, two copies of the
    // interior pick (value 2) appended; both rules must return exactly 2.
    const std::vector<UpdateVector> worked{{1.0}, {2.0}, {10.0}};
    const agg::FoundationResult ft = agg::foundation_aggregate(worked, 2, false, 1);
    const agg::FoundationResult fm = agg::foundation_aggregate(worked, 2, true, 0);
    bool worked_ok = ft.aggregate.size() == 1 && ft.aggregate[0] == 2.0 &&
                     fm.aggregate.size() == 1 && fm.aggregate[0] == 2.0 &&
                     ft.scores.selected == 1 && fm.scores.selected == 1 &&
                     ft.scores.scores == std::vector<double>{-1.0, 0.0, -8.0} &&
                     fm.scores.scores == std::vector<double>{-1.0, 0.0, -8.0} &&
                     ft.augmented.size() == 5 && ft.augmented[3] == worked[1] &&
                     ft.augmented[4] == worked[1];

    r.seconds = elapsed_seconds(start);
    r.passed = bad == 0 && worked_ok && r.seconds < r.limit_seconds;
    std::ostringstream os;
    os << "m=0 equals base rule on 1000 instances (" << bad << " mismatches); worked {1,2,10}+2 -> "
       << "trim " << fmt(ft.aggregate[0]) << ", median " << fmt(fm.aggregate[0])
       << ", pick " << ft.scores.selected << (worked_ok ? "" : " [worked-example MISMATCH]");
    r.detail = os.str();
    return r;
}

CriterionResult c3_no_attack_parity() {
    CriterionResult r;
    r.name = "no-attack-parity";
    r.limit_seconds = 180.0;
    const auto start = clock_type::now();

    const auto& seeds = acceptance_seeds();
    const double fedavg_err = mean_final_error(agg::Rule::fedavg, attacks::AttackKind::none, seeds);
    const double ftrim_err =
        mean_final_error(agg::Rule::foundation_trim, attacks::AttackKind::none, seeds);
    const double fmed_err =
        mean_final_error(agg::Rule::foundation_median, attacks::AttackKind::none, seeds);

    r.seconds = elapsed_seconds(start);
    const bool ok =
        std::fabs(ftrim_err - fedavg_err) <= 0.02 && std::fabs(fmed_err - fedavg_err) <= 0.02;
    r.passed = ok && r.seconds < r.limit_seconds;
    std::ostringstream os;
    os << "mean final error over 5 seeds: fedavg " << fmt(fedavg_err) << ", foundation_trim "
       << fmt(ftrim_err) << ", foundation_median " << fmt(fmed_err) << " (tolerance 0.02)";
    r.detail = os.str();
    return r;
}

CriterionResult c4_robustness_separation() {
    CriterionResult r;
    r.name = "attack-robustness-separation";
    r.limit_seconds = 300.0;
    const auto start = clock_type::now();

    const auto& seeds = acceptance_seeds();
    const double no_attack =
        mean_final_error(agg::Rule::fedavg, attacks::AttackKind::none, seeds);
    const double ft_trim =
        mean_final_error(agg::Rule::foundation_trim, attacks::AttackKind::trim_attack, seeds);
    const double plain_trim =
        mean_final_error(agg::Rule::trim_mean, attacks::AttackKind::trim_attack, seeds);
    const double ft_gauss =
        mean_final_error(agg::Rule::foundation_trim, attacks::AttackKind::gaussian, seeds);
    const double fedavg_gauss =
        mean_final_error(agg::Rule::fedavg, attacks::AttackKind::gaussian, seeds);

    const bool trim_ok = ft_trim <= no_attack + 0.05 && plain_trim >= ft_trim + 0.05;
    const bool gauss_ok = ft_gauss <= no_attack + 0.05 && fedavg_gauss >= ft_gauss + 0.05;
    r.seconds = elapsed_seconds(start);
    r.passed = trim_ok && gauss_ok && r.seconds < r.limit_seconds;
    std::ostringstream os;
    os << "no-attack fedavg " << fmt(no_attack) << "; trim attack: foundation_trim "
       << fmt(ft_trim) << " vs trim_mean " << fmt(plain_trim) << (trim_ok ? " ok" : " VIOLATED")
       << "; gaussian attack: foundation_trim " << fmt(ft_gauss) << " vs fedavg "
       << fmt(fedavg_gauss) << (gauss_ok ? " ok" : " VIOLATED");
    r.detail = os.str();
    return r;
}

CriterionResult c5_variance_reduction() {
    CriterionResult r;
    r.name = "variance-reduction";
    r.limit_seconds = 300.0;
    const auto start = clock_type::now();

    // Pairing mirrors the motivating observation: the augmented-set variance
    // of the defended (foundation_median) run against the raw-set variance
    // of the plain-median run, both under the trim attack, averaged over
    // every round and the 5 acceptance seeds.
    double defended_aug = 0.0, plain_raw = 0.0;
    for (const std::uint64_t seed : acceptance_seeds()) {
        defended_aug += all_round_variances(agg::Rule::foundation_median,
                                            attacks::AttackKind::trim_attack, seed)
                            .mean_aug;
        plain_raw +=
            all_round_variances(agg::Rule::median, attacks::AttackKind::trim_attack, seed)
                .mean_raw;
    }
    defended_aug /= static_cast<double>(acceptance_seeds().size());
    plain_raw /= static_cast<double>(acceptance_seeds().size());

    r.seconds = elapsed_seconds(start);
    const bool ok = defended_aug <= 0.5 * plain_raw;
    r.passed = ok && r.seconds < r.limit_seconds;
    std::ostringstream os;
    os << "augmented variance (defended run) " << fmt(defended_aug)
       << " vs raw variance (plain median run) " << fmt(plain_raw) << "; ratio "
       << fmt(plain_raw > 0 ? defended_aug / plain_raw : 0.0) << " (must be <= 0.5)";
    r.detail = os.str();
    return r;
}

CriterionResult c6_contraction_step() {
    CriterionResult r;
    r.name = "gradient-step-contraction";
    r.limit_seconds = 10.0;
    const auto start = clock_type::now();

    RngStream stream(0xACCE06, "acceptance/contraction");
    std::size_t quad_bad = 0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t d = 1 + stream.uniform_index(16);
        models::QuadraticSurrogate q;
        q.curvature = stream.uniform(0.25, 8.0);
        q.center.resize(d);
        ModelParams theta(d);
        for (std::size_t k = 0; k < d; ++k) {
            q.center[k] = stream.normal(0.0, 3.0);
            theta[k] = stream.normal(0.0, 5.0);
        }
        const models::ConvexityConstants cc = q.constants();
        const double rho = 1.0 - cc.mu / (cc.mu + cc.lambda);  // = 1/2
        const ModelParams next =
            apply_global_update(theta, q.gradient(theta), -1.0 / cc.lambda);
        if (!(l2_distance(next, q.center) <= rho * l2_distance(theta, q.center))) ++quad_bad;
    }

    // Regularized logistic task with estimated constants.
    RngStream data_stream(0xACCE06, "acceptance/contraction-data");
    const datagen::Dataset data =
        datagen::generate_synthetic_classification(240, 3, 6, 3.0, data_stream);
    models::ModelSpec spec;
    spec.kind = models::ModelKind::logistic;
    spec.n_features = 6;
    spec.n_classes = 3;
    spec.l2_reg = 1e-3;
    const models::ConvexityConstants cc = models::estimate_convexity_constants(spec, data);
    const double rho = 1.0 - cc.mu / (cc.mu + cc.lambda);
    const ModelParams theta_star = models::minimize_full_batch(
        spec, data, ModelParams(models::param_dim(spec), 0.0), cc);
    std::size_t logi_bad = 0;
    double worst_slack = -1e300;
    for (int i = 0; i < 100; ++i) {
        ModelParams theta(models::param_dim(spec));
        for (auto& x : theta) x = stream.normal(0.0, 2.0);
        const models::LossGrad lg = models::loss_and_gradient(spec, theta, data);
        const ModelParams next = apply_global_update(theta, lg.grad, -1.0 / cc.lambda);
        const double lhs = l2_distance(next, theta_star);
        const double rhs = rho * l2_distance(theta, theta_star);
        worst_slack = std::max(worst_slack, lhs - rhs);
        if (!(lhs <= rhs + 1e-6)) ++logi_bad;
    }

    r.seconds = elapsed_seconds(start);
    r.passed = quad_bad == 0 && logi_bad == 0 && r.seconds < r.limit_seconds;
    std::ostringstream os;
    os << "quadratic: " << quad_bad << "/100 violations (zero tolerance); logistic (mu "
       << fmt(cc.mu) << ", lambda " << fmt(cc.lambda) << "): " << logi_bad
       << "/100 beyond 1e-6, worst lhs-rhs " << fmt(worst_slack, 3);
    r.detail = os.str();
    return r;
}

CriterionResult c7_attack_sampler_validity() {
    CriterionResult r;
    r.name = "attack-sampler-validity";
    r.limit_seconds = 20.0;
    const auto start = clock_type::now();

    // Noise-attack moments over 1e5 draws.
    RngStream gauss_stream(0xACCE07, "acceptance/gaussian-attack");
    const auto noise = attacks::gaussian_attack(10, 10000, 200.0, gauss_stream);
    long double sum = 0.0L, sumsq = 0.0L;
    std::size_t count = 0;
    for (const auto& row : noise)
        for (const double x : row) {
            sum += x;
            sumsq += static_cast<long double>(x) * x;
            ++count;
        }
    const double mean = static_cast<double>(sum / count);
    const double var = static_cast<double>(
        (sumsq - sum * sum / static_cast<long double>(count)) / (count - 1));
    const bool gauss_ok = var >= 197.0 && var <= 203.0 && std::fabs(mean) <= 0.15;

    // Deviation attacks: own constraint feasible at the returned gamma,
    // infeasible at 1.01x, on 100 random instances each.
    RngStream inst_stream(0xACCE07, "acceptance/deviation-attacks");
    std::size_t minmax_bad = 0, minsum_bad = 0, mismatch = 0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 4 + inst_stream.uniform_index(17);  // [4, 20]
        const std::size_t d = 2 + inst_stream.uniform_index(7);   // [2, 8]
        const double scale = inst_stream.uniform(0.5, 20.0);
        std::vector<UpdateVector> u(n, UpdateVector(d, 0.0));
        for (auto& row : u)
            for (auto& x : row) x = inst_stream.normal() * scale;
        const attacks::PerturbKind kind = i % 3 == 0   ? attacks::PerturbKind::unit_mean
                                          : i % 3 == 1 ? attacks::PerturbKind::sign
                                                       : attacks::PerturbKind::std_dev;
        const std::size_t n_mal = 1 + inst_stream.uniform_index(3);
        const UpdateVector mu = agg::fedavg(u);

        double diam2 = 0.0;
        std::vector<double> sum_sq(n, 0.0);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                const double dist = l2_distance(u[a], u[b]);
                diam2 = std::max(diam2, dist);
                sum_sq[a] += dist * dist;
            }
        const double diam = diam2;
        const double sum_bound = *std::max_element(sum_sq.begin(), sum_sq.end());

        auto scaled_point = [&](const UpdateVector& w, double factor) {
            UpdateVector out(d);
            for (std::size_t k = 0; k < d; ++k) out[k] = mu[k] + factor * (w[k] - mu[k]);
            return out;
        };
        auto max_dist = [&](const UpdateVector& w) {
            double worst = 0.0;
            for (const auto& g : u) worst = std::max(worst, l2_distance(w, g));
            return worst;
        };
        auto sum_sq_dist = [&](const UpdateVector& w) {
            double acc = 0.0;
            for (const auto& g : u) {
                const double dist = l2_distance(w, g);
                acc += dist * dist;
            }
            return acc;
        };

        {
            const auto mal = attacks::min_max_attack(u, n_mal, kind);
            for (const auto& row : mal)
                if (row != mal[0]) ++mismatch;
            const UpdateVector& w = mal[0];
            const double slack = 1e-9 * std::max(1.0, diam);
            const bool feasible = max_dist(w) <= diam + slack;
            const bool stretched_infeasible = max_dist(scaled_point(w, 1.01)) > diam - slack;
            if (!(feasible && stretched_infeasible)) ++minmax_bad;
        }
        {
            const auto mal = attacks::min_sum_attack(u, n_mal, kind);
            for (const auto& row : mal)
                if (row != mal[0]) ++mismatch;
            const UpdateVector& w = mal[0];
            const double slack = 1e-9 * std::max(1.0, sum_bound);
            const bool feasible = sum_sq_dist(w) <= sum_bound + slack;
            const bool stretched_infeasible = sum_sq_dist(scaled_point(w, 1.01)) > sum_bound - slack;
            if (!(feasible && stretched_infeasible)) ++minsum_bad;
        }
    }

    r.seconds = elapsed_seconds(start);
    r.passed = gauss_ok && minmax_bad == 0 && minsum_bad == 0 && mismatch == 0 &&
               r.seconds < r.limit_seconds;
    std::ostringstream os;
    os << "noise variance " << fmt(var, 6) << " (need [197,203]), mean " << fmt(mean, 3)
       << "; min_max violations " << minmax_bad << "/100, min_sum violations " << minsum_bad
       << "/100, non-identical malicious rows " << mismatch;
    r.detail = os.str();
    return r;
}

CriterionResult c8_malicious_fraction_sweep() {
    CriterionResult r;
    r.name = "malicious-fraction-sweep";
    r.limit_seconds = 600.0;
    const auto start = clock_type::now();

    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const double no_attack = mean_final_error(agg::Rule::fedavg, attacks::AttackKind::none, seeds);
    std::ostringstream os;
    os << "no-attack " << fmt(no_attack) << "; foundation_trim under trim attack:";
    bool ok = true;
    for (const double frac : {0.1, 0.2, 0.3, 0.4}) {
        const double err = mean_final_error(agg::Rule::foundation_trim,
                                            attacks::AttackKind::trim_attack, seeds, frac);
        const bool point_ok = err <= no_attack + 0.07;
        ok = ok && point_ok;
        os << " f/n=" << fmt(frac, 2) << " -> " << fmt(err) << (point_ok ? "" : " VIOLATED");
    }
    r.seconds = elapsed_seconds(start);
    r.passed = ok && r.seconds < r.limit_seconds;
    r.detail = os.str();
    return r;
}

CriterionResult c9_repeat_determinism() {
    CriterionResult r;
    r.name = "repeat-determinism";
    r.limit_seconds = 120.0;
    const auto start = clock_type::now();

    const config::ExperimentConfig cfg_a =
        standard_task(123, agg::Rule::foundation_trim, attacks::AttackKind::trim_attack);
    const std::string a1 = harness::csv_text(harness::run_experiment(cfg_a).records);
    const std::string a2 = harness::csv_text(harness::run_experiment(cfg_a).records);

    const config::ExperimentConfig cfg_b =
        standard_task(7, agg::Rule::foundation_median, attacks::AttackKind::gaussian);
    const std::string b1 = harness::csv_text(harness::run_experiment(cfg_b).records);
    const std::string b2 = harness::csv_text(harness::run_experiment(cfg_b).records);

    r.seconds = elapsed_seconds(start);
    const bool ok = a1 == a2 && b1 == b2 && !a1.empty() && !b1.empty();
    r.passed = ok && r.seconds < r.limit_seconds;
    std::ostringstream os;
    os << "repeated runs byte-identical: trim-attack/foundation_trim " << (a1 == a2 ? "yes" : "NO")
       << ", gaussian/foundation_median " << (b1 == b2 ? "yes" : "NO") << " (" << a1.size()
       << " and " << b1.size() << " CSV bytes)";
    r.detail = os.str();
    return r;
}

} // namespace

std::vector<CriterionResult> run_all(std::ostream& out) {
    using CriterionFn = CriterionResult (*)();
    const CriterionFn criteria[] = {
        c1_aggregator_oracles,     c2_augmentation_identity, c3_no_attack_parity,
        c4_robustness_separation,  c5_variance_reduction,    c6_contraction_step,
        c7_attack_sampler_validity, c8_malicious_fraction_sweep, c9_repeat_determinism,
    };
    std::vector<CriterionResult> results;
    int index = 0;
    for (const CriterionFn fn : criteria) {
        ++index;
        CriterionResult r = fn();
        results.push_back(r);
        out << (r.passed ? "[PASS] " : "[FAIL] ") << index << "/9 " << r.name << " ("
            << fmt(r.seconds, 3) << "s, limit " << fmt(r.limit_seconds, 3) << "s): " << r.detail
            << "\n";
        out.flush();
    }
    return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return !results.empty();
}

} // namespace fedsim::verify
