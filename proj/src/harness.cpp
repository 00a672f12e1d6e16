#include "fedsim/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fedsim::harness {

namespace {

const kernels::Ops& K() { return kernels::active(); }

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

std::string local_stream_label(long round, std::size_t client) {
    return "local/t=" + std::to_string(round) + "/client=" + std::to_string(client);
}

std::string participation_stream_label(long round) {
    return "participation/t=" + std::to_string(round);
}

std::string attack_stream_label(long round) {
    return "attack/t=" + std::to_string(round);
}

std::string synth_stream_label(long round) {
    return "aggsynth/t=" + std::to_string(round);
}

Experiment setup_experiment(const config::ExperimentConfig& cfg) {
    Experiment ex;
    ex.cfg = cfg;
    ex.resolved = config::resolve_auto_values(cfg);
    ex.n_malicious = ex.resolved.n_malicious;

    // Dataset: generated (or loaded), then split, then partitioned.
    datagen::Dataset data;
    if (!cfg.load_path.empty()) {
        data = datagen::load_dataset(cfg.load_path);
        if (data.empty()) throw std::runtime_error("setup_experiment: loaded dataset is empty");
        for (const auto& e : data) {
            if (e.features.size() != cfg.n_features)
                throw std::runtime_error("setup_experiment: loaded feature width differs from config");
            if (e.label < 0 || e.label >= cfg.n_classes)
                throw std::runtime_error("setup_experiment: loaded label outside [0, n_classes)");
        }
    } else {
        RngStream gen(cfg.seed, kDatagenLabel);
        data = datagen::generate_synthetic_classification(cfg.n_examples, cfg.n_classes,
                                                          cfg.n_features, cfg.separation, gen);
    }
    if (!cfg.dump_path.empty()) datagen::dump_dataset(cfg.dump_path, data);

    RngStream split_stream(cfg.seed, kSplitLabel);
    datagen::TrainTestSplit split =
        datagen::train_test_split(data, cfg.test_fraction, split_stream);
    ex.test_set = std::move(split.test);

    datagen::PartitionConfig pc;
    pc.n_clients = cfg.n_clients;
    pc.n_clusters = cfg.n_classes;
    pc.bias = cfg.bias;
    RngStream part_stream(cfg.seed, kPartitionLabel);
    ex.shards = datagen::partition_non_iid(split.train, pc, part_stream);

    // Model and parameter state.
    ex.model.kind = cfg.model_kind;
    ex.model.n_features = cfg.n_features;
    ex.model.n_classes = cfg.n_classes;
    ex.model.hidden_width = cfg.hidden_width;
    ex.model.l2_reg = cfg.l2_reg;
    ex.train = cfg.train;
    RngStream init_stream(cfg.seed, kInitLabel);
    ex.theta = models::init_params(ex.model, init_stream);

    // Aggregator spec with auto values resolved.
    ex.agg_spec.rule = cfg.rule;
    ex.agg_spec.trim_c = ex.resolved.trim_c;
    ex.agg_spec.synthetic_m = ex.resolved.synthetic_m;
    ex.agg_spec.assumed_f = ex.resolved.assumed_f;
    ex.agg_spec.estimate_malicious = cfg.estimate_malicious;

    // Attack-side preparation.
    if (cfg.attack.kind == attacks::AttackKind::label_flip) {
        for (std::size_t i = 0; i < ex.n_malicious; ++i)
            ex.shards[i] = datagen::flip_labels(ex.shards[i], cfg.n_classes);
    }
    if (cfg.attack.kind == attacks::AttackKind::mpaf) {
        RngStream fake(cfg.seed, kMpafTargetLabel);
        ex.theta_fake.resize(ex.theta.size());
        for (auto& x : ex.theta_fake) x = fake.normal();
    }
    if (cfg.attack.kind == attacks::AttackKind::scaling) {
        for (const auto& e : ex.test_set)
            if (e.label != cfg.attack.trigger.target_label)
                ex.triggered_test.push_back(datagen::inject_trigger(e, cfg.attack.trigger));
        if (ex.triggered_test.empty())
            throw std::runtime_error("setup_experiment: triggered test set is empty");
    }
    return ex;
}

RoundRecord run_round(Experiment& ex, bool evaluate) {
    const long t = ex.next_round++;
    const std::size_t n = ex.cfg.n_clients;
    const auto kind = ex.cfg.attack.kind;

    // Participant sample for this round (everyone at participation = 1).
    std::size_t k = static_cast<std::size_t>(
        std::llround(ex.cfg.participation * static_cast<double>(n)));
    k = std::min(std::max<std::size_t>(k, 1), n);
    std::vector<std::size_t> participants;
    if (k == n) {
        participants.resize(n);
        for (std::size_t i = 0; i < n; ++i) participants[i] = i;
    } else {
        RngStream ps(ex.cfg.seed, participation_stream_label(t));
        participants = ps.sample_without_replacement(n, k);
    }

    // Honest updates. With data-level attacks the malicious clients also
    // train honestly (their shards were tampered with at setup); with
    // update-forgery attacks their slots are filled afterwards.
    const bool forging = kind != attacks::AttackKind::none &&
                         kind != attacks::AttackKind::label_flip &&
                         kind != attacks::AttackKind::scaling;
    std::vector<UpdateVector> updates(participants.size());
    std::vector<std::size_t> malicious_slots;
    std::vector<UpdateVector> benign_updates;
    for (std::size_t slot = 0; slot < participants.size(); ++slot) {
        const std::size_t id = participants[slot];
        const bool is_malicious = id < ex.n_malicious && kind != attacks::AttackKind::none;
        RngStream ls(ex.cfg.seed, local_stream_label(t, id));
        if (!is_malicious || kind == attacks::AttackKind::label_flip) {
            updates[slot] = models::local_update(ex.model, ex.theta, ex.shards[id], ex.train, ls);
            if (!is_malicious) benign_updates.push_back(updates[slot]);
        } else if (kind == attacks::AttackKind::scaling) {
            updates[slot] = attacks::scaling_attack_update(
                ex.model, ex.theta, ex.shards[id], ex.cfg.attack.trigger,
                ex.resolved.scale_factor, ex.train, ls);
        } else {
            malicious_slots.push_back(slot);
        }
    }

    if (forging && !malicious_slots.empty()) {
        if (benign_updates.empty())
            throw std::runtime_error(
                "run_round: update-forgery attack with no benign participant this round");
        RngStream as(ex.cfg.seed, attack_stream_label(t));
        std::vector<UpdateVector> forged;
        const std::size_t fm = malicious_slots.size();
        switch (kind) {
        case attacks::AttackKind::gaussian:
            forged = attacks::gaussian_attack(fm, ex.theta.size(),
                                              ex.cfg.attack.gaussian_variance, as);
            break;
        case attacks::AttackKind::trim_attack:
            forged = attacks::trim_attack(benign_updates, fm, as);
            break;
        case attacks::AttackKind::krum_attack:
            forged = attacks::krum_attack(benign_updates, fm, ex.agg_spec.assumed_f, as);
            break;
        case attacks::AttackKind::min_max:
            forged = attacks::min_max_attack(benign_updates, fm, ex.cfg.attack.perturb);
            break;
        case attacks::AttackKind::min_sum:
            forged = attacks::min_sum_attack(benign_updates, fm, ex.cfg.attack.perturb);
            break;
        case attacks::AttackKind::mpaf: {
            const UpdateVector u =
                attacks::mpaf_update(ex.theta, ex.theta_fake, ex.cfg.attack.mpaf_magnitude);
            forged.assign(fm, u);
            break;
        }
        case attacks::AttackKind::adaptive:
            forged = attacks::adaptive_attack(benign_updates, fm, ex.resolved.adaptive_z);
            break;
        default:
            throw std::logic_error("run_round: unhandled attack kind");
        }
        for (std::size_t i = 0; i < fm; ++i) updates[malicious_slots[i]] = std::move(forged[i]);
    }

    RoundRecord rec;
    rec.round = t;
    rec.raw_variance_mean = updates.size() > 1 ? mean_coordinate_variance(updates) : 0.0;

    RngStream synth(ex.cfg.seed, synth_stream_label(t));
    agg::AggregateOutcome outcome = agg::aggregate(updates, ex.agg_spec, synth);
    rec.augmented_variance_mean =
        outcome.augmented.size() > 1 ? mean_coordinate_variance(outcome.augmented) : 0.0;
    rec.update_norm = l2_norm(outcome.aggregate);
    if (outcome.selected >= 0)
        rec.selected_client =
            static_cast<int>(participants[static_cast<std::size_t>(outcome.selected)]);

    ex.theta = apply_global_update(ex.theta, outcome.aggregate, ex.cfg.global_lr);

    if (evaluate) {
        rec.test_error = models::evaluate_error_rate(ex.model, ex.theta, ex.test_set);
        if (kind == attacks::AttackKind::scaling)
            rec.attack_success = models::evaluate_attack_success(
                ex.model, ex.theta, ex.triggered_test, ex.cfg.attack.trigger.target_label);
    }
    return rec;
}

ExperimentResult run_experiment(const config::ExperimentConfig& cfg) {
    Experiment ex = setup_experiment(cfg);
    ExperimentResult res;
    res.resolved = ex.resolved;
    for (long t = 0; t < cfg.rounds; ++t) {
        const bool evaluate = ((t + 1) % cfg.eval_every == 0) || t == cfg.rounds - 1;
        RoundRecord rec = run_round(ex, evaluate);
        if (evaluate) res.records.push_back(rec);
    }
    res.final_test_error = res.records.back().test_error;
    res.final_attack_success = res.records.back().attack_success;
    res.final_params = std::move(ex.theta);
    return res;
}

std::string csv_text(const std::vector<RoundRecord>& records) {
    std::string out =
        "round, test_error, attack_success, selected_client, raw_variance_mean, "
        "augmented_variance_mean, update_norm\n";
    for (const auto& r : records) {
        out += std::to_string(r.round);
        out += ", " + fmt17(r.test_error);
        out += ", " + fmt17(r.attack_success);
        out += ", " + std::to_string(r.selected_client);
        out += ", " + fmt17(r.raw_variance_mean);
        out += ", " + fmt17(r.augmented_variance_mean);
        out += ", " + fmt17(r.update_norm);
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<RoundRecord>& records) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_csv: cannot open " + path);
    f << csv_text(records);
    if (!f) throw std::runtime_error("write_csv: write failed for " + path);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t b = 0, e = tok.size();
        while (b < e && std::isspace(static_cast<unsigned char>(tok[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(tok[e - 1]))) --e;
        out.push_back(tok.substr(b, e - b));
    }
    return out;
}

} // namespace

std::vector<RoundRecord> parse_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("parse_csv: empty input");
    const std::vector<std::string> header = split_fields(line);
    const std::vector<std::string> expected = {
        "round", "test_error", "attack_success", "selected_client",
        "raw_variance_mean", "augmented_variance_mean", "update_norm"};
    if (header != expected) throw std::runtime_error("parse_csv: unexpected header");
    std::vector<RoundRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != expected.size()) throw std::runtime_error("parse_csv: bad field count");
        RoundRecord r;
        r.round = std::stol(f[0]);
        r.test_error = std::stod(f[1]);
        r.attack_success = std::stod(f[2]);
        r.selected_client = std::stoi(f[3]);
        r.raw_variance_mean = std::stod(f[4]);
        r.augmented_variance_mean = std::stod(f[5]);
        r.update_norm = std::stod(f[6]);
        out.push_back(r);
    }
    return out;
}

void write_summary_json(const std::string& path, const config::ExperimentConfig& cfg,
                        const ExperimentResult& result) {
    nlohmann::json j;
    j["final_test_error"] = result.final_test_error;
    j["final_attack_success"] = result.final_attack_success;
    j["rounds_evaluated"] = result.records.size();

    nlohmann::json c;
    c["dataset"] = {{"n_examples", cfg.n_examples},
                    {"n_classes", cfg.n_classes},
                    {"n_features", cfg.n_features},
                    {"separation", cfg.separation},
                    {"test_fraction", cfg.test_fraction},
                    {"dump_path", cfg.dump_path},
                    {"load_path", cfg.load_path}};
    c["partition"] = {{"n_clients", cfg.n_clients}, {"bias", cfg.bias}};
    c["model"] = {{"kind", config::model_name(cfg.model_kind)},
                  {"hidden_width", cfg.hidden_width},
                  {"l2_reg", cfg.l2_reg}};
    c["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate}};
    c["aggregator"] = {{"rule", config::rule_name(cfg.rule)},
                       {"trim_c", result.resolved.trim_c},
                       {"synthetic_m", result.resolved.synthetic_m},
                       {"assumed_f", result.resolved.assumed_f},
                       {"estimate_malicious", cfg.estimate_malicious}};
    c["attack"] = {{"kind", config::attack_name(cfg.attack.kind)},
                   {"n_malicious", result.resolved.n_malicious},
                   {"malicious_fraction", cfg.attack.malicious_fraction},
                   {"gaussian_variance", cfg.attack.gaussian_variance},
                   {"mpaf_magnitude", cfg.attack.mpaf_magnitude},
                   {"adaptive_z", result.resolved.adaptive_z},
                   {"scale_factor", result.resolved.scale_factor},
                   {"perturbation", config::perturb_name(cfg.attack.perturb)},
                   {"trigger_indices", cfg.attack.trigger.feature_indices},
                   {"trigger_value", cfg.attack.trigger.value},
                   {"target_label", cfg.attack.trigger.target_label}};
    c["run"] = {{"rounds", cfg.rounds},
                {"global_lr", cfg.global_lr},
                {"participation", cfg.participation},
                {"eval_every", cfg.eval_every},
                {"seed", cfg.seed}};
    j["config"] = std::move(c);

    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_summary_json: cannot open " + path);
    f << j.dump(2) << '\n';
    if (!f) throw std::runtime_error("write_summary_json: write failed for " + path);
}

namespace {

// Gradient of the client-averaged objective (each shard weighted equally,
// matching what a full-batch mean aggregation descends).
std::vector<double> client_averaged_grad(const models::ModelSpec& model,
                                         const std::vector<datagen::DatasetShard>& shards,
                                         const ModelParams& theta) {
    std::vector<double> grad(theta.size(), 0.0);
    for (const auto& shard : shards) {
        const models::LossGrad lg = models::loss_and_gradient(model, theta, shard);
        K().add(lg.grad.data(), grad.data(), grad.size());
    }
    K().scale(grad.data(), grad.size(), 1.0 / static_cast<double>(shards.size()));
    return grad;
}

ModelParams minimize_client_averaged(const models::ModelSpec& model,
                                     const std::vector<datagen::DatasetShard>& shards,
                                     const ModelParams& theta0,
                                     const models::ConvexityConstants& cc, double grad_tol,
                                     long max_iters) {
    const double step = 1.0 / cc.lambda;
    const double sq = std::sqrt(cc.mu / cc.lambda);
    const double beta = (1.0 - sq) / (1.0 + sq);
    ModelParams x = theta0, y = theta0, x_prev = theta0;
    for (long it = 0; it < max_iters; ++it) {
        const std::vector<double> g = client_averaged_grad(model, shards, y);
        if (l2_norm(g) < grad_tol) return y;
        x_prev.swap(x);
        x = y;
        K().axpy(-step, g.data(), x.data(), x.size());
        y = x;
        K().axpy(beta, x.data(), y.data(), y.size());
        K().axpy(-beta, x_prev.data(), y.data(), y.size());
    }
    throw std::runtime_error("convergence_diagnostic: fixed-point solve did not converge");
}

} // namespace

models::ConvexityConstants estimate_task_constants(const config::ExperimentConfig& cfg) {
    if (cfg.model_kind != models::ModelKind::logistic)
        throw std::invalid_argument("estimate_task_constants: logistic models only");
    Experiment ex = setup_experiment(cfg);
    // Max per-shard smoothness upper-bounds the client-averaged Hessian.
    models::ConvexityConstants cc{cfg.l2_reg, cfg.l2_reg};
    for (const auto& shard : ex.shards) {
        const models::ConvexityConstants sc =
            models::estimate_convexity_constants(ex.model, shard);
        cc.lambda = std::max(cc.lambda, sc.lambda);
    }
    return cc;
}

ConvergenceReport convergence_diagnostic(const config::ExperimentConfig& cfg) {
    if (cfg.model_kind != models::ModelKind::logistic || !(cfg.l2_reg > 0.0))
        throw std::invalid_argument(
            "convergence_diagnostic: requires a logistic model with l2_reg > 0");

    ConvergenceReport rep;
    const models::ConvexityConstants cc = estimate_task_constants(cfg);
    rep.mu = cc.mu;
    rep.lambda = cc.lambda;
    rep.rho = 1.0 - cc.mu / (cc.mu + cc.lambda);

    Experiment ex = setup_experiment(cfg);
    const ModelParams theta_star = minimize_client_averaged(
        ex.model, ex.shards, ModelParams(ex.theta.size(), 0.0), cc, 1e-10, 500000);

    double floor_acc = 0.0;
    double fitted_b = 0.0;
    for (long t = 0; t < cfg.rounds; ++t) {
        const ModelParams theta_before = ex.theta;
        const double dist_before = l2_distance(theta_before, theta_star);
        run_round(ex, /*evaluate=*/false);

        // Deviation of the applied step from the exact full-batch step.
        std::vector<double> g = client_averaged_grad(ex.model, ex.shards, theta_before);
        ModelParams ideal = theta_before;
        K().axpy(-cfg.global_lr * cfg.train.learning_rate, g.data(), ideal.data(), ideal.size());
        floor_acc += l2_distance(ex.theta, ideal);

        const double dist_after = l2_distance(ex.theta, theta_star);
        fitted_b = std::max(fitted_b, dist_after - rep.rho * dist_before);
    }
    rep.fitted_b = std::max(fitted_b, 0.0);
    rep.noise_floor = floor_acc / static_cast<double>(cfg.rounds);
    rep.contraction_ok = rep.fitted_b <= 10.0 * rep.noise_floor + 1e-8;
    return rep;
}

} // namespace fedsim::harness
