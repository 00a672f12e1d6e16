#include "fedsim/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fedsim::config {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

long to_long(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    long x = 0;
    try {
        x = std::stol(v, &pos);
    } catch (const std::exception&) {
        fail(key + ": not an integer: '" + v + "'");
    }
    if (pos != v.size()) fail(key + ": not an integer: '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &pos);
    } catch (const std::exception&) {
        fail(key + ": not an unsigned integer: '" + v + "'");
    }
    if (pos != v.size()) fail(key + ": not an unsigned integer: '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        fail(key + ": not a number: '" + v + "'");
    }
    if (pos != v.size()) fail(key + ": not a number: '" + v + "'");
    if (!std::isfinite(x)) fail(key + ": not finite: '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key + ": not a boolean (true/false): '" + v + "'");
}

std::vector<std::size_t> to_index_list(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) fail(key + ": empty entry in list");
        const long x = to_long(key, tok);
        if (x < 0) fail(key + ": negative index");
        out.push_back(static_cast<std::size_t>(x));
    }
    if (out.empty()) fail(key + ": empty list");
    return out;
}

} // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail("line " + std::to_string(line_no) + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) fail("line " + std::to_string(line_no) + ": empty section name");
            map[section];  // a section may legitimately stay empty
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            fail("line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            fail("line " + std::to_string(line_no) + ": key outside any [section]");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) fail("line " + std::to_string(line_no) + ": empty key");
        map[section][key] = value;
    }
    return map;
}

ConfigMap load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

void apply_override(ConfigMap& map, const std::string& dotted_key, const std::string& value) {
    const std::size_t dot = dotted_key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= dotted_key.size())
        fail("override must look like section.key: '" + dotted_key + "'");
    map[dotted_key.substr(0, dot)][dotted_key.substr(dot + 1)] = value;
}

ExperimentConfig resolve_config(const ConfigMap& map) {
    ExperimentConfig cfg;

    // Recognised keys per section; anything else is an error.
    const std::map<std::string, std::set<std::string>> known = {
        {"dataset", {"n_examples", "n_classes", "n_features", "separation", "test_fraction",
                     "dump_path", "load_path"}},
        {"partition", {"n_clients", "bias"}},
        {"model", {"kind", "l2_reg", "hidden_width"}},
        {"train", {"epochs", "batch_size", "learning_rate"}},
        {"aggregator", {"rule", "trim_c", "synthetic_m", "assumed_f", "estimate_malicious"}},
        {"attack", {"kind", "malicious_fraction", "gaussian_variance", "mpaf_magnitude",
                    "adaptive_z", "scale_factor", "perturbation", "trigger_indices",
                    "trigger_value", "target_label"}},
        {"run", {"rounds", "global_lr", "participation", "eval_every", "seed"}},
    };
    for (const auto& [section, kv] : map) {
        const auto it = known.find(section);
        if (it == known.end()) fail("unknown section [" + section + "]");
        for (const auto& [key, value] : kv) {
            (void)value;
            if (!it->second.count(key)) fail("unknown key '" + section + "." + key + "'");
        }
    }

    const auto get = [&](const char* section, const char* key) -> const std::string* {
        const auto sit = map.find(section);
        if (sit == map.end()) return nullptr;
        const auto kit = sit->second.find(key);
        return kit == sit->second.end() ? nullptr : &kit->second;
    };
    const auto dotted = [](const char* s, const char* k) {
        return std::string(s) + "." + k;
    };

    // [dataset]
    if (const auto* v = get("dataset", "n_examples")) {
        const long x = to_long(dotted("dataset", "n_examples"), *v);
        if (x < 1) fail("dataset.n_examples: must be >= 1");
        cfg.n_examples = static_cast<std::size_t>(x);
    }
    if (const auto* v = get("dataset", "n_classes")) {
        const long x = to_long(dotted("dataset", "n_classes"), *v);
        if (x < 2) fail("dataset.n_classes: must be >= 2");
        cfg.n_classes = static_cast<int>(x);
    }
    if (const auto* v = get("dataset", "n_features")) {
        const long x = to_long(dotted("dataset", "n_features"), *v);
        if (x < 1) fail("dataset.n_features: must be >= 1");
        cfg.n_features = static_cast<std::size_t>(x);
    }
    if (const auto* v = get("dataset", "separation")) {
        cfg.separation = to_double(dotted("dataset", "separation"), *v);
        if (!(cfg.separation > 0.0)) fail("dataset.separation: must be > 0");
    }
    if (const auto* v = get("dataset", "test_fraction")) {
        cfg.test_fraction = to_double(dotted("dataset", "test_fraction"), *v);
        if (!(cfg.test_fraction >= 0.0 && cfg.test_fraction < 1.0))
            fail("dataset.test_fraction: must be in [0,1)");
    }
    if (const auto* v = get("dataset", "dump_path")) cfg.dump_path = *v;
    if (const auto* v = get("dataset", "load_path")) cfg.load_path = *v;

    // [partition]
    if (const auto* v = get("partition", "n_clients")) {
        const long x = to_long(dotted("partition", "n_clients"), *v);
        if (x < 1) fail("partition.n_clients: must be >= 1");
        cfg.n_clients = static_cast<std::size_t>(x);
    }
    if (const auto* v = get("partition", "bias")) {
        cfg.bias = to_double(dotted("partition", "bias"), *v);
        if (!(cfg.bias > 0.0 && cfg.bias <= 1.0)) fail("partition.bias: must be in (0,1]");
    }

    // [model]
    if (const auto* v = get("model", "kind")) {
        if (*v == "logistic") cfg.model_kind = models::ModelKind::logistic;
        else if (*v == "mlp") cfg.model_kind = models::ModelKind::mlp;
        else fail("model.kind: expected logistic or mlp, got '" + *v + "'");
    }
    if (const auto* v = get("model", "hidden_width")) {
        const long x = to_long(dotted("model", "hidden_width"), *v);
        if (x < 1) fail("model.hidden_width: must be >= 1");
        cfg.hidden_width = static_cast<std::size_t>(x);
    }
    if (const auto* v = get("model", "l2_reg")) {
        cfg.l2_reg = to_double(dotted("model", "l2_reg"), *v);
        if (cfg.l2_reg < 0.0) fail("model.l2_reg: must be >= 0");
        cfg.l2_reg_set = true;
    }
    if (!cfg.l2_reg_set) cfg.l2_reg = cfg.model_kind == models::ModelKind::mlp ? 0.0 : 1e-3;

    // [train]
    if (const auto* v = get("train", "epochs")) {
        const long x = to_long(dotted("train", "epochs"), *v);
        if (x < 1) fail("train.epochs: must be >= 1");
        cfg.train.epochs = static_cast<int>(x);
    }
    if (const auto* v = get("train", "batch_size")) {
        const long x = to_long(dotted("train", "batch_size"), *v);
        if (x < 1) fail("train.batch_size: must be >= 1");
        cfg.train.batch_size = static_cast<std::size_t>(x);
    }
    if (const auto* v = get("train", "learning_rate")) {
        cfg.train.learning_rate = to_double(dotted("train", "learning_rate"), *v);
        if (!(cfg.train.learning_rate > 0.0)) fail("train.learning_rate: must be > 0");
    }

    // [aggregator]
    if (const auto* v = get("aggregator", "rule")) {
        const std::map<std::string, agg::Rule> rules = {
            {"fedavg", agg::Rule::fedavg},
            {"trim_mean", agg::Rule::trim_mean},
            {"median", agg::Rule::median},
            {"krum", agg::Rule::krum},
            {"gaussian_trim", agg::Rule::gaussian_trim},
            {"gaussian_median", agg::Rule::gaussian_median},
            {"foundation_trim", agg::Rule::foundation_trim},
            {"foundation_median", agg::Rule::foundation_median},
        };
        const auto it = rules.find(*v);
        if (it == rules.end()) fail("aggregator.rule: unknown rule '" + *v + "'");
        cfg.rule = it->second;
    }
    if (const auto* v = get("aggregator", "trim_c")) {
        cfg.trim_c = to_long(dotted("aggregator", "trim_c"), *v);
        if (cfg.trim_c < -1) fail("aggregator.trim_c: must be >= 0 (or -1 for auto)");
    }
    if (const auto* v = get("aggregator", "synthetic_m")) {
        cfg.synthetic_m = to_long(dotted("aggregator", "synthetic_m"), *v);
        if (cfg.synthetic_m < -1) fail("aggregator.synthetic_m: must be >= 0 (or -1 for auto)");
    }
    if (const auto* v = get("aggregator", "assumed_f")) {
        cfg.assumed_f = to_long(dotted("aggregator", "assumed_f"), *v);
        if (cfg.assumed_f < -1) fail("aggregator.assumed_f: must be >= 0 (or -1 for auto)");
    }
    if (const auto* v = get("aggregator", "estimate_malicious"))
        cfg.estimate_malicious = to_bool(dotted("aggregator", "estimate_malicious"), *v);

    // [attack]
    if (const auto* v = get("attack", "kind")) {
        const std::map<std::string, attacks::AttackKind> kinds = {
            {"none", attacks::AttackKind::none},
            {"label_flip", attacks::AttackKind::label_flip},
            {"gaussian", attacks::AttackKind::gaussian},
            {"trim_attack", attacks::AttackKind::trim_attack},
            {"krum_attack", attacks::AttackKind::krum_attack},
            {"min_max", attacks::AttackKind::min_max},
            {"min_sum", attacks::AttackKind::min_sum},
            {"scaling", attacks::AttackKind::scaling},
            {"mpaf", attacks::AttackKind::mpaf},
            {"adaptive", attacks::AttackKind::adaptive},
        };
        const auto it = kinds.find(*v);
        if (it == kinds.end()) fail("attack.kind: unknown attack '" + *v + "'");
        cfg.attack.kind = it->second;
    }
    if (const auto* v = get("attack", "malicious_fraction")) {
        cfg.attack.malicious_fraction = to_double(dotted("attack", "malicious_fraction"), *v);
        if (!(cfg.attack.malicious_fraction > 0.0 && cfg.attack.malicious_fraction < 1.0))
            fail("attack.malicious_fraction: must be in (0,1)");
    }
    if (const auto* v = get("attack", "gaussian_variance")) {
        cfg.attack.gaussian_variance = to_double(dotted("attack", "gaussian_variance"), *v);
        if (!(cfg.attack.gaussian_variance > 0.0)) fail("attack.gaussian_variance: must be > 0");
    }
    if (const auto* v = get("attack", "mpaf_magnitude")) {
        cfg.attack.mpaf_magnitude = to_double(dotted("attack", "mpaf_magnitude"), *v);
        if (!(cfg.attack.mpaf_magnitude > 0.0)) fail("attack.mpaf_magnitude: must be > 0");
    }
    if (const auto* v = get("attack", "adaptive_z")) {
        cfg.attack.adaptive_z = to_double(dotted("attack", "adaptive_z"), *v);
        if (cfg.attack.adaptive_z < 0.0) fail("attack.adaptive_z: must be >= 0 (0 for auto)");
    }
    if (const auto* v = get("attack", "scale_factor")) {
        cfg.attack.scale_factor = to_double(dotted("attack", "scale_factor"), *v);
        if (cfg.attack.scale_factor < 0.0) fail("attack.scale_factor: must be >= 0 (0 for auto)");
    }
    if (const auto* v = get("attack", "perturbation")) {
        if (*v == "unit_mean") cfg.attack.perturb = attacks::PerturbKind::unit_mean;
        else if (*v == "sign") cfg.attack.perturb = attacks::PerturbKind::sign;
        else if (*v == "std") cfg.attack.perturb = attacks::PerturbKind::std_dev;
        else fail("attack.perturbation: expected unit_mean, sign, or std, got '" + *v + "'");
    }
    if (const auto* v = get("attack", "trigger_indices"))
        cfg.attack.trigger.feature_indices = to_index_list(dotted("attack", "trigger_indices"), *v);
    else
        cfg.attack.trigger.feature_indices = {0, 1};
    if (const auto* v = get("attack", "trigger_value"))
        cfg.attack.trigger.value = to_double(dotted("attack", "trigger_value"), *v);
    else
        cfg.attack.trigger.value = 6.0;
    if (const auto* v = get("attack", "target_label")) {
        const long x = to_long(dotted("attack", "target_label"), *v);
        if (x < 0) fail("attack.target_label: must be >= 0");
        cfg.attack.trigger.target_label = static_cast<int>(x);
    }

    // [run]
    if (const auto* v = get("run", "rounds")) {
        cfg.rounds = to_long(dotted("run", "rounds"), *v);
        if (cfg.rounds < 1) fail("run.rounds: must be >= 1");
    }
    if (const auto* v = get("run", "global_lr")) {
        cfg.global_lr = to_double(dotted("run", "global_lr"), *v);
        if (cfg.global_lr < 0.0) fail("run.global_lr: must be >= 0");
    }
    if (const auto* v = get("run", "participation")) {
        cfg.participation = to_double(dotted("run", "participation"), *v);
        if (!(cfg.participation > 0.0 && cfg.participation <= 1.0))
            fail("run.participation: must be in (0,1]");
    }
    if (const auto* v = get("run", "eval_every")) {
        cfg.eval_every = to_long(dotted("run", "eval_every"), *v);
        if (cfg.eval_every < 1) fail("run.eval_every: must be >= 1");
    }
    if (const auto* v = get("run", "seed")) cfg.seed = to_u64(dotted("run", "seed"), *v);

    // Cross-field checks that do not need the data.
    if (cfg.n_clients < static_cast<std::size_t>(cfg.n_classes))
        fail("partition.n_clients must be >= dataset.n_classes");
    if (!(cfg.bias >= 1.0 / static_cast<double>(cfg.n_classes)))
        fail("partition.bias must be >= 1/n_classes");
    if (cfg.attack.trigger.target_label >= cfg.n_classes)
        fail("attack.target_label must be < dataset.n_classes");
    for (std::size_t idx : cfg.attack.trigger.feature_indices)
        if (idx >= cfg.n_features) fail("attack.trigger_indices: index beyond n_features");

    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return resolve_config(load_config_file(path));
}

ResolvedAggregation resolve_auto_values(const ExperimentConfig& cfg) {
    ResolvedAggregation r;
    if (cfg.attack.kind != attacks::AttackKind::none) {
        r.n_malicious = static_cast<std::size_t>(
            std::llround(cfg.attack.malicious_fraction * static_cast<double>(cfg.n_clients)));
        if (r.n_malicious == 0) r.n_malicious = 1;
        if (r.n_malicious >= cfg.n_clients)
            throw std::invalid_argument("config: attack leaves no benign client");
    }
    r.trim_c = cfg.trim_c >= 0 ? static_cast<std::size_t>(cfg.trim_c) : r.n_malicious;
    r.synthetic_m = cfg.synthetic_m >= 0 ? static_cast<std::size_t>(cfg.synthetic_m)
                                         : cfg.n_clients / 2;
    r.assumed_f = cfg.assumed_f >= 0 ? static_cast<std::size_t>(cfg.assumed_f) : r.n_malicious;
    r.scale_factor = cfg.attack.scale_factor > 0.0
                         ? cfg.attack.scale_factor
                         : (r.n_malicious > 0 ? static_cast<double>(cfg.n_clients) /
                                                    static_cast<double>(r.n_malicious)
                                              : 1.0);
    r.adaptive_z = cfg.attack.adaptive_z > 0.0
                       ? cfg.attack.adaptive_z
                       : attacks::adaptive_default_z(cfg.n_clients, r.n_malicious);
    return r;
}

const char* rule_name(agg::Rule rule) {
    switch (rule) {
    case agg::Rule::fedavg: return "fedavg";
    case agg::Rule::trim_mean: return "trim_mean";
    case agg::Rule::median: return "median";
    case agg::Rule::krum: return "krum";
    case agg::Rule::gaussian_trim: return "gaussian_trim";
    case agg::Rule::gaussian_median: return "gaussian_median";
    case agg::Rule::foundation_trim: return "foundation_trim";
    case agg::Rule::foundation_median: return "foundation_median";
    }
    return "?";
}

const char* attack_name(attacks::AttackKind kind) {
    switch (kind) {
    case attacks::AttackKind::none: return "none";
    case attacks::AttackKind::label_flip: return "label_flip";
    case attacks::AttackKind::gaussian: return "gaussian";
    case attacks::AttackKind::trim_attack: return "trim_attack";
    case attacks::AttackKind::krum_attack: return "krum_attack";
    case attacks::AttackKind::min_max: return "min_max";
    case attacks::AttackKind::min_sum: return "min_sum";
    case attacks::AttackKind::scaling: return "scaling";
    case attacks::AttackKind::mpaf: return "mpaf";
    case attacks::AttackKind::adaptive: return "adaptive";
    }
    return "?";
}

const char* perturb_name(attacks::PerturbKind kind) {
    switch (kind) {
    case attacks::PerturbKind::unit_mean: return "unit_mean";
    case attacks::PerturbKind::sign: return "sign";
    case attacks::PerturbKind::std_dev: return "std";
    }
    return "?";
}

const char* model_name(models::ModelKind kind) {
    return kind == models::ModelKind::logistic ? "logistic" : "mlp";
}

} // namespace fedsim::config
