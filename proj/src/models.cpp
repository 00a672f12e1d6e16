#include "fedsim/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fedsim::models {

namespace {

const kernels::Ops& K() { return kernels::active(); }

void check_spec(const ModelSpec& spec) {
    if (spec.n_features == 0) throw std::invalid_argument("ModelSpec: requires n_features > 0");
    if (spec.n_classes < 2) throw std::invalid_argument("ModelSpec: requires n_classes >= 2");
    if (spec.kind == ModelKind::mlp && spec.hidden_width == 0)
        throw std::invalid_argument("ModelSpec: requires hidden_width > 0 for mlp");
    if (!(spec.l2_reg >= 0.0)) throw std::invalid_argument("ModelSpec: requires l2_reg >= 0");
}

void check_example(const ModelSpec& spec, const datagen::LabeledExample& ex,
                   const char* what) {
    if (ex.features.size() != spec.n_features)
        throw std::invalid_argument(std::string(what) + ": feature dimension mismatch");
    if (ex.label < 0 || ex.label >= spec.n_classes)
        throw std::invalid_argument(std::string(what) + ": label out of range");
}

// scores -> softmax probabilities, in place, numerically stabilised.
void softmax_inplace(std::vector<double>& s) {
    double m = s[0];
    for (double v : s) m = std::max(m, v);
    double z = 0.0;
    for (double& v : s) {
        v = std::exp(v - m);
        z += v;
    }
    for (double& v : s) v /= z;
}

struct MlpScratch {
    std::vector<double> hidden_pre, hidden, scores, delta_out, delta_hidden;
};

void mlp_forward(const ModelSpec& spec, const ModelParams& theta,
                 const std::vector<double>& x, MlpScratch& ws) {
    const std::size_t p = spec.n_features;
    const std::size_t h = spec.hidden_width;
    const std::size_t m = static_cast<std::size_t>(spec.n_classes);
    ws.hidden_pre.resize(h);
    ws.hidden.resize(h);
    ws.scores.resize(m);
    const double* w1 = theta.data();          // h rows of length p
    const double* w2 = theta.data() + h * p;  // m rows of length h
    for (std::size_t j = 0; j < h; ++j) ws.hidden_pre[j] = K().dot(w1 + j * p, x.data(), p);
    for (std::size_t j = 0; j < h; ++j) ws.hidden[j] = std::tanh(ws.hidden_pre[j]);
    for (std::size_t c = 0; c < m; ++c) ws.scores[c] = K().dot(w2 + c * h, ws.hidden.data(), h);
}

} // namespace

std::size_t param_dim(const ModelSpec& spec) {
    check_spec(spec);
    const std::size_t p = spec.n_features;
    const std::size_t m = static_cast<std::size_t>(spec.n_classes);
    if (spec.kind == ModelKind::logistic) return m * p;
    return spec.hidden_width * p + m * spec.hidden_width;
}

ModelParams init_params(const ModelSpec& spec, RngStream& stream) {
    const std::size_t d = param_dim(spec);
    if (spec.kind == ModelKind::logistic) return ModelParams(d, 0.0);
    ModelParams theta(d);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(spec.n_features));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(spec.hidden_width));
    const std::size_t w1_len = spec.hidden_width * spec.n_features;
    for (std::size_t i = 0; i < d; ++i)
        theta[i] = stream.normal(0.0, i < w1_len ? s1 : s2);
    return theta;
}

std::vector<double> predict_scores(const ModelSpec& spec, const ModelParams& theta,
                                   const std::vector<double>& features) {
    check_spec(spec);
    if (theta.size() != param_dim(spec))
        throw std::invalid_argument("predict_scores: parameter dimension mismatch");
    if (features.size() != spec.n_features)
        throw std::invalid_argument("predict_scores: feature dimension mismatch");
    const std::size_t p = spec.n_features;
    const std::size_t m = static_cast<std::size_t>(spec.n_classes);
    std::vector<double> scores(m);
    if (spec.kind == ModelKind::logistic) {
        for (std::size_t c = 0; c < m; ++c)
            scores[c] = K().dot(theta.data() + c * p, features.data(), p);
        return scores;
    }
    MlpScratch ws;
    mlp_forward(spec, theta, features, ws);
    return ws.scores;
}

int predict_label(const ModelSpec& spec, const ModelParams& theta,
                  const std::vector<double>& features) {
    const auto scores = predict_scores(spec, theta, features);
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c)
        if (scores[c] > scores[best]) best = c;  // ties keep the lowest index
    return static_cast<int>(best);
}

LossGrad loss_and_gradient(const ModelSpec& spec, const ModelParams& theta,
                           const datagen::Dataset& batch) {
    check_spec(spec);
    const std::size_t d = param_dim(spec);
    if (theta.size() != d)
        throw std::invalid_argument("loss_and_gradient: parameter dimension mismatch");
    if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");

    const std::size_t p = spec.n_features;
    const std::size_t m = static_cast<std::size_t>(spec.n_classes);
    LossGrad out;
    out.grad.assign(d, 0.0);
    double loss = 0.0;

    if (spec.kind == ModelKind::logistic) {
        std::vector<double> s(m);
        for (const auto& ex : batch) {
            check_example(spec, ex, "loss_and_gradient");
            for (std::size_t c = 0; c < m; ++c)
                s[c] = K().dot(theta.data() + c * p, ex.features.data(), p);
            double mx = s[0];
            for (double v : s) mx = std::max(mx, v);
            double z = 0.0;
            for (double& v : s) {
                v = std::exp(v - mx);
                z += v;
            }
            loss -= std::log(s[static_cast<std::size_t>(ex.label)] / z);
            for (std::size_t c = 0; c < m; ++c) {
                const double coef = s[c] / z - (static_cast<int>(c) == ex.label ? 1.0 : 0.0);
                K().axpy(coef, ex.features.data(), out.grad.data() + c * p, p);
            }
        }
    } else {
        const std::size_t h = spec.hidden_width;
        const std::size_t w1_len = h * p;
        const double* w2 = theta.data() + w1_len;
        MlpScratch ws;
        for (const auto& ex : batch) {
            check_example(spec, ex, "loss_and_gradient");
            mlp_forward(spec, theta, ex.features, ws);
            auto& prob = ws.scores;
            double mx = prob[0];
            for (double v : prob) mx = std::max(mx, v);
            double z = 0.0;
            for (double& v : prob) {
                v = std::exp(v - mx);
                z += v;
            }
            loss -= std::log(prob[static_cast<std::size_t>(ex.label)] / z);
            ws.delta_out.resize(m);
            for (std::size_t c = 0; c < m; ++c)
                ws.delta_out[c] = prob[c] / z - (static_cast<int>(c) == ex.label ? 1.0 : 0.0);
            // W2 rows: delta_out outer hidden.
            for (std::size_t c = 0; c < m; ++c)
                K().axpy(ws.delta_out[c], ws.hidden.data(), out.grad.data() + w1_len + c * h, h);
            // Backprop through tanh.
            ws.delta_hidden.assign(h, 0.0);
            for (std::size_t c = 0; c < m; ++c)
                K().axpy(ws.delta_out[c], w2 + c * h, ws.delta_hidden.data(), h);
            for (std::size_t j = 0; j < h; ++j)
                ws.delta_hidden[j] *= 1.0 - ws.hidden[j] * ws.hidden[j];
            for (std::size_t j = 0; j < h; ++j)
                K().axpy(ws.delta_hidden[j], ex.features.data(), out.grad.data() + j * p, p);
        }
    }

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    K().scale(out.grad.data(), d, inv_b);
    out.loss = loss * inv_b;
    if (spec.l2_reg > 0.0) {
        out.loss += 0.5 * spec.l2_reg * K().dot(theta.data(), theta.data(), d);
        K().axpy(spec.l2_reg, theta.data(), out.grad.data(), d);
    }
    check_finite(out.grad, "loss_and_gradient: gradient");
    if (!std::isfinite(out.loss))
        throw std::runtime_error("loss_and_gradient: non-finite loss");
    return out;
}

UpdateVector local_update(const ModelSpec& spec, const ModelParams& theta_global,
                          const datagen::DatasetShard& shard, const LocalTrainConfig& cfg,
                          RngStream& stream) {
    check_spec(spec);
    if (cfg.epochs < 1) throw std::invalid_argument("local_update: requires epochs >= 1");
    if (cfg.batch_size == 0) throw std::invalid_argument("local_update: requires batch_size > 0");
    if (!(cfg.learning_rate > 0.0))
        throw std::invalid_argument("local_update: requires learning_rate > 0");
    if (shard.empty()) throw std::invalid_argument("local_update: empty shard");
    const std::size_t d = param_dim(spec);
    if (theta_global.size() != d)
        throw std::invalid_argument("local_update: parameter dimension mismatch");

    const std::size_t bs = std::min(cfg.batch_size, shard.size());
    const bool full_batch = bs == shard.size();
    ModelParams theta = theta_global;
    std::vector<std::size_t> order(shard.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    datagen::Dataset batch;
    batch.reserve(bs);

    for (int e = 0; e < cfg.epochs; ++e) {
        // Full-batch order is immaterial to the mean gradient; skipping the
        // shuffle keeps one full-batch epoch equal to one exact gradient step.
        if (!full_batch) stream.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t stop = std::min(start + bs, order.size());
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(shard[order[i]]);
            const LossGrad lg = loss_and_gradient(spec, theta, batch);
            K().axpy(-cfg.learning_rate, lg.grad.data(), theta.data(), d);
        }
    }
    UpdateVector update(d);
    K().sub(theta.data(), theta_global.data(), update.data(), d);
    check_finite(update, "local_update: update");
    return update;
}

double evaluate_error_rate(const ModelSpec& spec, const ModelParams& theta,
                           const datagen::Dataset& dataset) {
    if (dataset.empty()) throw std::invalid_argument("evaluate_error_rate: empty dataset");
    std::size_t wrong = 0;
    for (const auto& ex : dataset) {
        check_example(spec, ex, "evaluate_error_rate");
        if (predict_label(spec, theta, ex.features) != ex.label) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(dataset.size());
}

double evaluate_attack_success(const ModelSpec& spec, const ModelParams& theta,
                               const datagen::Dataset& triggered, int target_label) {
    if (triggered.empty())
        throw std::invalid_argument("evaluate_attack_success: empty dataset");
    if (target_label < 0 || target_label >= spec.n_classes)
        throw std::invalid_argument("evaluate_attack_success: target label out of range");
    std::size_t hits = 0;
    for (const auto& ex : triggered)
        if (predict_label(spec, theta, ex.features) == target_label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(triggered.size());
}

double power_iteration_top_eigenvalue(
    const std::function<std::vector<double>(const std::vector<double>&)>& matvec,
    std::size_t dim, RngStream& stream, int max_iters, double rel_tol) {
    if (dim == 0) throw std::invalid_argument("power_iteration: requires dim > 0");
    std::vector<double> v(dim);
    for (auto& x : v) x = stream.normal();
    double nrm = l2_norm(v);
    if (nrm == 0.0) v[0] = 1.0, nrm = 1.0;
    K().scale(v.data(), dim, 1.0 / nrm);

    double prev = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        std::vector<double> z = matvec(v);
        if (z.size() != dim) throw std::invalid_argument("power_iteration: matvec dim mismatch");
        const double ray = K().dot(v.data(), z.data(), dim);
        const double znrm = l2_norm(z);
        if (znrm < 1e-300) return 0.0;  // numerically zero operator
        if (it > 0 && std::abs(ray - prev) <= rel_tol * std::max(1.0, std::abs(ray)))
            return ray;
        prev = ray;
        K().scale(z.data(), dim, 1.0 / znrm);
        v.swap(z);
    }
    throw std::runtime_error("power_iteration: no convergence after " +
                             std::to_string(max_iters) + " iterations");
}

std::vector<double> logistic_data_hessian_vec(const ModelSpec& spec, const ModelParams& theta,
                                              const datagen::Dataset& dataset,
                                              const std::vector<double>& v) {
    if (spec.kind != ModelKind::logistic)
        throw std::invalid_argument("logistic_data_hessian_vec: logistic models only");
    const std::size_t d = param_dim(spec);
    if (theta.size() != d || v.size() != d)
        throw std::invalid_argument("logistic_data_hessian_vec: dimension mismatch");
    if (dataset.empty())
        throw std::invalid_argument("logistic_data_hessian_vec: empty dataset");
    const std::size_t p = spec.n_features;
    const std::size_t m = static_cast<std::size_t>(spec.n_classes);
    std::vector<double> out(d, 0.0), prob(m), u(m), w(m);
    for (const auto& ex : dataset) {
        check_example(spec, ex, "logistic_data_hessian_vec");
        for (std::size_t c = 0; c < m; ++c)
            prob[c] = K().dot(theta.data() + c * p, ex.features.data(), p);
        softmax_inplace(prob);
        for (std::size_t c = 0; c < m; ++c)
            u[c] = K().dot(v.data() + c * p, ex.features.data(), p);
        double pu = 0.0;
        for (std::size_t c = 0; c < m; ++c) pu += prob[c] * u[c];
        for (std::size_t c = 0; c < m; ++c) w[c] = prob[c] * (u[c] - pu);
        for (std::size_t c = 0; c < m; ++c)
            K().axpy(w[c], ex.features.data(), out.data() + c * p, p);
    }
    K().scale(out.data(), d, 1.0 / static_cast<double>(dataset.size()));
    return out;
}

ConvexityConstants estimate_convexity_constants(const ModelSpec& spec,
                                                const datagen::Dataset& dataset) {
    check_spec(spec);
    if (spec.kind != ModelKind::logistic)
        throw std::invalid_argument("estimate_convexity_constants: logistic models only");
    if (dataset.empty())
        throw std::invalid_argument("estimate_convexity_constants: empty dataset");
    const std::size_t d = param_dim(spec);
    RngStream root(0x0FEDC0DEull, "convexity");
    double lam_data = 0.0;
    for (int j = 0; j < 8; ++j) {
        RngStream ps = root.sub("point=" + std::to_string(j));
        ModelParams theta(d);
        for (auto& x : theta) x = ps.normal();
        RngStream vs = root.sub("v0=" + std::to_string(j));
        const double eig = power_iteration_top_eigenvalue(
            [&](const std::vector<double>& v) {
                return logistic_data_hessian_vec(spec, theta, dataset, v);
            },
            d, vs);
        lam_data = std::max(lam_data, eig);
    }
    return {spec.l2_reg, spec.l2_reg + 1.5 * lam_data};
}

double QuadraticSurrogate::loss(const ModelParams& theta) const {
    check_same_dim(theta, center, "QuadraticSurrogate::loss");
    return 0.5 * curvature * kernels::active().sumsq_diff(theta.data(), center.data(), theta.size());
}

std::vector<double> QuadraticSurrogate::gradient(const ModelParams& theta) const {
    check_same_dim(theta, center, "QuadraticSurrogate::gradient");
    std::vector<double> g(theta.size());
    kernels::active().sub(theta.data(), center.data(), g.data(), g.size());
    kernels::active().scale(g.data(), g.size(), curvature);
    return g;
}

ModelParams minimize_full_batch(const ModelSpec& spec, const datagen::Dataset& dataset,
                                const ModelParams& theta0, const ConvexityConstants& cc,
                                double grad_tol, long max_iters) {
    if (!(cc.mu > 0.0) || !(cc.lambda >= cc.mu))
        throw std::invalid_argument("minimize_full_batch: requires 0 < mu <= lambda");
    const std::size_t d = param_dim(spec);
    if (theta0.size() != d)
        throw std::invalid_argument("minimize_full_batch: parameter dimension mismatch");
    const double step = 1.0 / cc.lambda;
    const double sq = std::sqrt(cc.mu / cc.lambda);
    const double beta = (1.0 - sq) / (1.0 + sq);
    ModelParams x = theta0, y = theta0, x_prev = theta0;
    for (long it = 0; it < max_iters; ++it) {
        const LossGrad lg = loss_and_gradient(spec, y, dataset);
        if (l2_norm(lg.grad) < grad_tol) return y;
        x_prev.swap(x);
        x = y;
        K().axpy(-step, lg.grad.data(), x.data(), d);
        // y = x + beta * (x - x_prev)
        y = x;
        K().axpy(beta, x.data(), y.data(), d);
        K().axpy(-beta, x_prev.data(), y.data(), d);
    }
    throw std::runtime_error("minimize_full_batch: no convergence within iteration budget");
}

} // namespace fedsim::models
