#pragma once
// Desk-scale models trained with mini-batch SGD: a multinomial logistic
// regression (no bias terms, so l2_reg alone sets the strong-convexity
// constant) and a one-hidden-layer tanh MLP. Also carries the smoothness /
// strong-convexity estimation and the deterministic full-batch minimizer
// that convergence diagnostics rely on.

#include <cstddef>
#include <functional>
#include <vector>

#include "fedsim/core.hpp"
#include "fedsim/datagen.hpp"

namespace fedsim::models {

enum class ModelKind { logistic, mlp };

struct ModelSpec {
    ModelKind kind = ModelKind::logistic;
    std::size_t n_features = 0;
    int n_classes = 0;
    std::size_t hidden_width = 16;  // mlp only
    // Small ridge: keeps the logistic objective strongly convex without
    // capping the weight growth that low-variance features require.
    double l2_reg = 1e-5;
};

struct LocalTrainConfig {
    int epochs = 1;
    std::size_t batch_size = 32;   // clamped to the shard size
    double learning_rate = 0.1;
};

// Flat parameter dimension: logistic M*p; mlp H*p + M*H.
std::size_t param_dim(const ModelSpec& spec);

// Logistic starts at zero (convex objective); the MLP draws scaled normal
// weights to break hidden-unit symmetry.
ModelParams init_params(const ModelSpec& spec, RngStream& stream);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

// Mean cross-entropy over the batch plus (l2_reg/2)*||theta||^2, with the
// exact gradient of that objective.
LossGrad loss_and_gradient(const ModelSpec& spec, const ModelParams& theta,
                           const datagen::Dataset& batch);

// Class scores for one example (softmax logits).
std::vector<double> predict_scores(const ModelSpec& spec, const ModelParams& theta,
                                   const std::vector<double>& features);

// Argmax prediction; score ties resolve to the lowest class index.
int predict_label(const ModelSpec& spec, const ModelParams& theta,
                  const std::vector<double>& features);

// `epochs` passes of mini-batch SGD from theta_global; returns the
// parameter delta theta_local - theta_global. When the batch covers the
// whole shard no shuffling is drawn, so a single full-batch epoch equals
// one exact gradient step.
UpdateVector local_update(const ModelSpec& spec, const ModelParams& theta_global,
                          const datagen::DatasetShard& shard, const LocalTrainConfig& cfg,
                          RngStream& stream);

// Fraction of examples whose predicted label differs from the stored one.
double evaluate_error_rate(const ModelSpec& spec, const ModelParams& theta,
                           const datagen::Dataset& dataset);

// Fraction of examples predicted as `target_label` (caller supplies the
// triggered dataset with original-target examples already excluded).
double evaluate_attack_success(const ModelSpec& spec, const ModelParams& theta,
                               const datagen::Dataset& triggered, int target_label);

struct ConvexityConstants {
    double mu = 0.0;      // strong convexity lower bound
    double lambda = 0.0;  // smoothness upper bound
};

// Top eigenvalue of a symmetric PSD operator given by its matvec, via
// power iteration; errors out if the Rayleigh quotient has not settled
// after max_iters steps. A numerically zero operator yields 0.
double power_iteration_top_eigenvalue(
    const std::function<std::vector<double>(const std::vector<double>&)>& matvec,
    std::size_t dim, RngStream& stream, int max_iters = 200, double rel_tol = 1e-8);

// Logistic only: mu = l2_reg; lambda = l2_reg + 1.5 * (largest power-iteration
// estimate of the data-term Hessian's top eigenvalue over 8 random points).
ConvexityConstants estimate_convexity_constants(const ModelSpec& spec,
                                                const datagen::Dataset& dataset);

// Exact data-term Hessian-vector product for the logistic model at theta
// (used by the smoothness estimate and exposed for oracle tests).
std::vector<double> logistic_data_hessian_vec(const ModelSpec& spec, const ModelParams& theta,
                                              const datagen::Dataset& dataset,
                                              const std::vector<double>& v);

// Test hook with analytically known constants: L(theta) =
// (curvature/2)*||theta - center||^2, so mu = lambda = curvature.
struct QuadraticSurrogate {
    ModelParams center;
    double curvature = 1.0;

    double loss(const ModelParams& theta) const;
    std::vector<double> gradient(const ModelParams& theta) const;
    ConvexityConstants constants() const { return {curvature, curvature}; }
};

// Nesterov-accelerated full-batch descent to ||grad|| < grad_tol; errors
// out at max_iters. Deterministic; used to pin theta* for diagnostics.
ModelParams minimize_full_batch(const ModelSpec& spec, const datagen::Dataset& dataset,
                                const ModelParams& theta0, const ConvexityConstants& cc,
                                double grad_tol = 1e-10, long max_iters = 200000);

} // namespace fedsim::models
