// Command-line front end: `run` executes one experiment from a config file,
// `sweep` grids a single dotted key over a value list, `verify` runs the
// acceptance battery. All artifacts land under --out.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedsim/config.hpp"
#include "fedsim/harness.hpp"
#include "fedsim/kernels.hpp"
#include "fedsim/verify.hpp"

namespace fs = std::filesystem;

namespace {

void report_run(const fedsim::config::ExperimentConfig& cfg,
                const fedsim::harness::ExperimentResult& result, const fs::path& dir) {
    fs::create_directories(dir);
    fedsim::harness::write_csv((dir / "results.csv").string(), result.records);
    fedsim::harness::write_summary_json((dir / "summary.json").string(), cfg, result);
    std::cout << "wrote " << (dir / "results.csv").string() << " (" << result.records.size()
              << " rows); final test error " << result.final_test_error;
    if (result.final_attack_success >= 0.0)
        std::cout << ", attack success " << result.final_attack_success;
    std::cout << "\n";
}

std::string sanitize_component(std::string s) {
    for (char& c : s)
        if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
    return s;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    const auto cfg = fedsim::config::load_experiment_config(config_path);
    const auto result = fedsim::harness::run_experiment(cfg);
    report_run(cfg, result, fs::path(out_dir));
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& vary,
              const std::string& out_dir) {
    const auto eq = vary.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= vary.size())
        throw std::invalid_argument("--vary expects section.key=v1,v2,...");
    const std::string key = vary.substr(0, eq);
    std::vector<std::string> values;
    std::string rest = vary.substr(eq + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
        const auto comma = rest.find(',', pos);
        const std::string v =
            rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (v.empty()) throw std::invalid_argument("--vary has an empty value");
        values.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }

    const auto base_map = fedsim::config::load_config_file(config_path);
    nlohmann::json sweep_rows = nlohmann::json::array();
    for (const std::string& value : values) {
        auto map = base_map;
        fedsim::config::apply_override(map, key, value);
        const auto cfg = fedsim::config::resolve_config(map);
        const auto result = fedsim::harness::run_experiment(cfg);
        const fs::path dir =
            fs::path(out_dir) / (sanitize_component(key) + "=" + sanitize_component(value));
        report_run(cfg, result, dir);
        sweep_rows.push_back({{"key", key},
                              {"value", value},
                              {"final_test_error", result.final_test_error},
                              {"final_attack_success", result.final_attack_success},
                              {"dir", dir.string()}});
    }
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "sweep.json");
    out << sweep_rows.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write sweep.json");
    std::cout << "sweep complete: " << values.size() << " runs\n";
    return 0;
}

int cmd_verify(const std::string& out_dir) {
    std::cout << "compute backend: " << fedsim::kernels::active().name << "\n";
    const auto results = fedsim::verify::run_all(std::cout);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "verify_report.txt");
        for (const auto& r : results)
            out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << " (" << r.seconds
                << "s, limit " << r.limit_seconds << "s): " << r.detail << "\n";
    }
    const bool ok = fedsim::verify::all_passed(results);
    std::cout << (ok ? "all criteria passed\n" : "CRITERIA FAILED\n");
    return ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic federated-learning simulator with Byzantine-robust "
                 "aggregation, poisoning attacks, and a synthetic-update defense"};
    app.require_subcommand(1);

    std::string run_config, run_out = "out";
    CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("config", run_config, "config file (INI-style key=value)")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--out", run_out, "output directory (default: out)");

    std::string sweep_config, sweep_vary, sweep_out = "out";
    CLI::App* sweep = app.add_subcommand("sweep", "grid one config key over a value list");
    sweep->add_option("config", sweep_config, "base config file")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--vary", sweep_vary, "section.key=v1,v2,... to grid over")->required();
    sweep->add_option("--out", sweep_out, "output directory (default: out)");

    std::string verify_out;
    CLI::App* verify = app.add_subcommand("verify", "run the acceptance battery");
    verify->add_option("--out", verify_out, "optional directory for verify_report.txt");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_config, run_out);
        if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_vary, sweep_out);
        return cmd_verify(verify_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
