#include "fedsim/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fedsim/aggregators.hpp"

namespace fedsim::attacks {

namespace {

const kernels::Ops& K() { return kernels::active(); }

void require_malicious(std::size_t n_malicious, const char* what) {
    if (n_malicious == 0)
        throw std::invalid_argument(std::string(what) + ": requires n_malicious > 0");
}

struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // population
};

ColumnStats column_stats(const std::vector<UpdateVector>& benign) {
    const std::size_t d = benign.front().size();
    ColumnStats st;
    st.mean = mean_update(benign);
    std::vector<double> var(d, 0.0);
    for (const auto& u : benign) K().acc_sq_diff(u.data(), st.mean.data(), var.data(), d);
    K().scale(var.data(), d, 1.0 / static_cast<double>(benign.size()));
    st.stddev.resize(d);
    for (std::size_t k = 0; k < d; ++k) st.stddev[k] = std::sqrt(var[k]);
    return st;
}

// Unit vector along the benign mean, or e_1 when the mean is zero.
UpdateVector unit_or_e1(UpdateVector v) {
    const double nrm = l2_norm(v);
    if (nrm == 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        v[0] = 1.0;
        return v;
    }
    K().scale(v.data(), v.size(), 1.0 / nrm);
    return v;
}

double max_pairwise_distance(const std::vector<UpdateVector>& set) {
    double best = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j)
            best = std::max(best, l2_distance(set[i], set[j]));
    return best;
}

UpdateVector perturbation_vector(const std::vector<UpdateVector>& benign, PerturbKind kind,
                                 const ColumnStats& st) {
    const std::size_t d = benign.front().size();
    UpdateVector p(d);
    switch (kind) {
    case PerturbKind::unit_mean:
        p = st.mean;
        break;
    case PerturbKind::sign:
        for (std::size_t k = 0; k < d; ++k) p[k] = st.mean[k] < 0.0 ? -1.0 : 1.0;
        break;
    case PerturbKind::std_dev:
        p = st.stddev;
        break;
    }
    K().scale(p.data(), d, -1.0);
    return unit_or_e1(std::move(p));
}

// Shared bisection for the min_max / min_sum constructions: maximise gamma
// subject to `feasible`, which must hold at gamma = 0.
std::vector<UpdateVector> bounded_deviation_attack(
    const std::vector<UpdateVector>& benign, std::size_t n_malicious, PerturbKind kind,
    bool sum_constraint) {
    check_update_set(benign, "bounded_deviation_attack");
    require_malicious(n_malicious, "bounded_deviation_attack");
    const std::size_t d = benign.front().size();
    const ColumnStats st = column_stats(benign);
    const UpdateVector p = perturbation_vector(benign, kind, st);

    // Constraint budgets from the benign set itself.
    double budget = 0.0;
    if (sum_constraint) {
        for (std::size_t i = 0; i < benign.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < benign.size(); ++j)
                s += K().sumsq_diff(benign[i].data(), benign[j].data(), d);
            budget = std::max(budget, s);
        }
    } else {
        budget = max_pairwise_distance(benign);
    }

    UpdateVector w(d);
    const auto feasible = [&](double gamma) {
        w = st.mean;
        K().axpy(gamma, p.data(), w.data(), d);
        if (sum_constraint) {
            double s = 0.0;
            for (const auto& g : benign) s += K().sumsq_diff(w.data(), g.data(), d);
            return s <= budget;
        }
        double worst = 0.0;
        for (const auto& g : benign)
            worst = std::max(worst, l2_distance(w, g));
        return worst <= budget;
    };

    const double diam = max_pairwise_distance(benign);
    double gamma = 0.0;
    if (diam > 0.0) {
        const double gamma_init = diam;
        double lo = 0.0, hi = gamma_init;
        if (feasible(hi)) {
            // Grow until infeasible; distances increase with gamma, so this
            // terminates long before the doubling cap.
            int doublings = 0;
            while (feasible(hi) && doublings < 60) {
                lo = hi;
                hi *= 2.0;
                ++doublings;
            }
        }
        for (int it = 0; it < 50 && hi - lo > 1e-5 * gamma_init; ++it) {
            const double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
        }
        gamma = lo;
    }

    w = st.mean;
    K().axpy(gamma, p.data(), w.data(), d);
    check_finite(w, "bounded_deviation_attack: malicious update");
    return std::vector<UpdateVector>(n_malicious, w);
}

} // namespace

std::vector<UpdateVector> gaussian_attack(std::size_t n_malicious, std::size_t dim,
                                          double variance, RngStream& stream) {
    require_malicious(n_malicious, "gaussian_attack");
    if (dim == 0) throw std::invalid_argument("gaussian_attack: requires dim > 0");
    if (!(variance > 0.0)) throw std::invalid_argument("gaussian_attack: requires variance > 0");
    const double sd = std::sqrt(variance);
    std::vector<UpdateVector> out(n_malicious, UpdateVector(dim));
    for (auto& u : out)
        for (auto& x : u) x = stream.normal(0.0, sd);
    return out;
}

std::vector<UpdateVector> trim_attack(const std::vector<UpdateVector>& benign,
                                      std::size_t n_malicious, RngStream& stream) {
    check_update_set(benign, "trim_attack");
    require_malicious(n_malicious, "trim_attack");
    const std::size_t d = benign.front().size();
    const ColumnStats st = column_stats(benign);
    std::vector<UpdateVector> out(n_malicious, UpdateVector(d));
    for (auto& u : out) {
        for (std::size_t k = 0; k < d; ++k) {
            double sd = st.stddev[k];
            if (sd == 0.0) sd = std::abs(st.mean[k]) * 0.1 + 1e-6;
            // Push opposite the benign direction, 3-4 stddevs out.
            if (st.mean[k] >= 0.0)
                u[k] = stream.uniform(st.mean[k] - 4.0 * sd, st.mean[k] - 3.0 * sd);
            else
                u[k] = stream.uniform(st.mean[k] + 3.0 * sd, st.mean[k] + 4.0 * sd);
        }
    }
    return out;
}

std::vector<UpdateVector> krum_attack(const std::vector<UpdateVector>& benign,
                                      std::size_t n_malicious, std::size_t assumed_f,
                                      RngStream& stream) {
    check_update_set(benign, "krum_attack");
    require_malicious(n_malicious, "krum_attack");
    const std::size_t d = benign.front().size();
    const std::size_t n_benign = benign.size();
    const UpdateVector mean = mean_update(benign);
    const UpdateVector dir = unit_or_e1(mean);
    const double lambda_max = l2_norm(mean) * 10.0 + 1.0;

    // Per-client noise drawn once so feasibility is stable across the
    // bisection; scaled to norm <= 1e-4 * lambda at evaluation time.
    std::vector<UpdateVector> noise_dirs(n_malicious, UpdateVector(d));
    std::vector<double> noise_mags(n_malicious);
    for (std::size_t i = 0; i < n_malicious; ++i) {
        for (auto& x : noise_dirs[i]) x = stream.normal();
        noise_dirs[i] = unit_or_e1(std::move(noise_dirs[i]));
        noise_mags[i] = stream.uniform();
    }

    std::vector<UpdateVector> combined = benign;
    combined.resize(n_benign + n_malicious);
    const auto build = [&](double lambda) {
        std::vector<UpdateVector> mal(n_malicious, UpdateVector(d, 0.0));
        for (std::size_t i = 0; i < n_malicious; ++i) {
            K().axpy(-lambda, dir.data(), mal[i].data(), d);
            K().axpy(1e-4 * lambda * noise_mags[i], noise_dirs[i].data(), mal[i].data(), d);
        }
        return mal;
    };
    const auto selects_malicious = [&](double lambda) {
        auto mal = build(lambda);
        for (std::size_t i = 0; i < n_malicious; ++i) combined[n_benign + i] = std::move(mal[i]);
        return agg::krum(combined, assumed_f).selected >= n_benign;
    };

    double lo = 0.0, hi = lambda_max;
    double best = -1.0, smallest_tested = lambda_max;
    for (int it = 0; it < 50 && hi - lo >= 1e-6 * lambda_max; ++it) {
        const double mid = 0.5 * (lo + hi);
        smallest_tested = std::min(smallest_tested, mid);
        if (selects_malicious(mid)) {
            best = mid;
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return build(best > 0.0 ? best : smallest_tested);
}

std::vector<UpdateVector> min_max_attack(const std::vector<UpdateVector>& benign,
                                         std::size_t n_malicious, PerturbKind perturb) {
    return bounded_deviation_attack(benign, n_malicious, perturb, /*sum_constraint=*/false);
}

std::vector<UpdateVector> min_sum_attack(const std::vector<UpdateVector>& benign,
                                         std::size_t n_malicious, PerturbKind perturb) {
    return bounded_deviation_attack(benign, n_malicious, perturb, /*sum_constraint=*/true);
}

UpdateVector scaling_attack_update(const models::ModelSpec& spec,
                                   const ModelParams& theta_global,
                                   const datagen::DatasetShard& shard,
                                   const datagen::TriggerSpec& trigger, double factor,
                                   const models::LocalTrainConfig& train_cfg,
                                   RngStream& stream) {
    if (!(factor > 0.0))
        throw std::invalid_argument("scaling_attack_update: requires factor > 0");
    if (shard.empty()) throw std::invalid_argument("scaling_attack_update: empty shard");
    datagen::DatasetShard poisoned = shard;
    poisoned.reserve(shard.size() * 2);
    for (const auto& ex : shard) poisoned.push_back(datagen::inject_trigger(ex, trigger));
    UpdateVector update = models::local_update(spec, theta_global, poisoned, train_cfg, stream);
    K().scale(update.data(), update.size(), factor);
    check_finite(update, "scaling_attack_update: update");
    return update;
}

UpdateVector mpaf_update(const ModelParams& theta_global, const ModelParams& theta_fake,
                         double magnitude) {
    check_same_dim(theta_global, theta_fake, "mpaf_update");
    if (!(magnitude > 0.0)) throw std::invalid_argument("mpaf_update: requires magnitude > 0");
    UpdateVector u(theta_global.size());
    K().sub(theta_fake.data(), theta_global.data(), u.data(), u.size());
    K().scale(u.data(), u.size(), magnitude);
    return u;
}

std::vector<UpdateVector> adaptive_attack(const std::vector<UpdateVector>& benign,
                                          std::size_t n_malicious, double z) {
    check_update_set(benign, "adaptive_attack");
    require_malicious(n_malicious, "adaptive_attack");
    if (!(z > 0.0)) throw std::invalid_argument("adaptive_attack: requires z > 0");
    const ColumnStats st = column_stats(benign);
    const std::size_t d = benign.front().size();
    UpdateVector w(d);
    for (std::size_t k = 0; k < d; ++k) w[k] = st.mean[k] - z * st.stddev[k];
    return std::vector<UpdateVector>(n_malicious, w);
}

double adaptive_default_z(std::size_t n_total, std::size_t n_malicious) {
    if (n_total == 0) throw std::invalid_argument("adaptive_default_z: requires n_total > 0");
    double s = (static_cast<double>(n_total) - static_cast<double>(n_total / 2) - 1.0 +
                static_cast<double>(n_malicious)) /
               static_cast<double>(n_total);
    s = std::min(std::max(s, 1e-9), 1.0 - 1e-9);
    const double z = inverse_normal_cdf(s);
    return std::min(std::max(z, 0.1), 1.5);
}

} // namespace fedsim::attacks
