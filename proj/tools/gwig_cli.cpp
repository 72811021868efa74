// Command-line driver: profile validation, seeded Monte Carlo studies, and
// scaling-exponent fits over emitted results.
//
//   gwig profile validate --config profile.json
//   gwig run <study> --config config.json [--seed S] [--out PATH]
//                    [--workers K] [--format csv|json]
//   gwig report fit --config result.json --statistic <name>
//
// Exit codes: 0 all pass flags true, 2 config/usage errors, 3 numeric
// failures (failed records, invalid profiles, non-finite fits).

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwig/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw gwig::ConfigError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

int run_profile_validate(const std::string& config_path) {
    const gwig::VarianceProfile profile =
        gwig::variance_profile_from_json(load_json(config_path));
    const gwig::ValidationReport report = gwig::validate(profile);
    std::printf("profile kind=%s n=%lld\n", profile.kind().c_str(),
                static_cast<long long>(profile.n()));
    std::printf("symmetry_defect      %.3e  %s\n", report.symmetry_defect,
                report.symmetric_ok ? "pass" : "FAIL");
    std::printf("max_row_sum_deviation %.3e  %s\n",
                report.max_row_sum_deviation,
                report.row_sums_ok ? "pass" : "FAIL");
    std::printf("min_entry            %.3e  %s\n", report.min_entry,
                report.positive_entries ? "pass" : "FAIL");
    std::printf("overall              %s\n", report.pass() ? "pass" : "FAIL");
    return report.pass() ? kExitOk : kExitNumeric;
}

int run_study(const std::string& study, const std::string& config_path,
              std::uint64_t seed, bool seed_set, const std::string& out,
              int workers, const std::string& format) {
    nlohmann::json j = load_json(config_path);
    j["study"] = study;
    if (seed_set) j["seed"] = seed;
    gwig::ExperimentConfig config = gwig::config_from_json(j);
    if (!out.empty()) config.output_path = out;
    if (config.output_path.empty())
        throw gwig::ConfigError("no output path (config output_path or --out)");

    const gwig::RunResult result = gwig::run(config, workers);
    gwig::emit(result, format, config.output_path);

    for (const gwig::RunRecord& r : result.records)
        std::printf("%-16s N=%-6lld %-22s mean=%+.6e p50=%.6e %s\n",
                    result.study.c_str(), static_cast<long long>(r.n),
                    r.statistic.c_str(), r.mean, r.p50,
                    r.failed ? "FAILED" : (r.pass ? "pass" : "FAIL"));
    std::printf("wrote %s (%s)\n", config.output_path.c_str(), format.c_str());

    if (gwig::any_failed(result)) return kExitNumeric;
    return gwig::all_pass(result) ? kExitOk : kExitNumeric;
}

int run_report_fit(const std::string& result_path, const std::string& statistic) {
    const gwig::RunResult result =
        gwig::result_from_json(load_json(result_path));
    const double slope = gwig::fit_scaling_exponent(result, statistic);
    std::printf("statistic=%s slope=%.6f\n", statistic.c_str(), slope);
    return std::isfinite(slope) ? kExitOk : kExitNumeric;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized Wigner spectral statistics laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::string statistic = "eth_max";
    std::uint64_t seed = 0;
    int workers = 1;

    CLI::App* profile = app.add_subcommand("profile", "profile tools");
    profile->require_subcommand(1);
    CLI::App* validate = profile->add_subcommand("validate", "validate a profile");
    validate->add_option("--config", config_path, "profile JSON")->required();

    CLI::App* run_cmd = app.add_subcommand("run", "run a study");
    std::string study;
    run_cmd->add_option("study", study, "study name")->required();
    run_cmd->add_option("--config", config_path, "config JSON")->required();
    auto* seed_opt = run_cmd->add_option("--seed", seed, "override seed");
    run_cmd->add_option("--out", out_path, "output path");
    run_cmd->add_option("--workers", workers, "worker threads")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* report = app.add_subcommand("report", "reporting tools");
    report->require_subcommand(1);
    CLI::App* fit = report->add_subcommand("fit", "fit a scaling exponent");
    fit->add_option("--config", config_path, "result JSON")->required();
    fit->add_option("--statistic", statistic, "statistic name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (validate->parsed()) return run_profile_validate(config_path);
        if (run_cmd->parsed())
            return run_study(study, config_path, seed, seed_opt->count() > 0,
                             out_path, workers, format);
        if (fit->parsed()) return run_report_fit(config_path, statistic);
        return kExitConfig;
    } catch (const gwig::ConfigError& error) {
        std::fprintf(stderr, "config error: %s\n", error.what());
        return kExitConfig;
    } catch (const gwig::InsufficientSizesError& error) {
        std::fprintf(stderr, "config error: %s\n", error.what());
        return kExitConfig;
    } catch (const nlohmann::json::exception& error) {
        std::fprintf(stderr, "config error: %s\n", error.what());
        return kExitConfig;
    } catch (const std::exception& error) {
        std::fprintf(stderr, "error: %s\n", error.what());
        return kExitNumeric;
    }
}
