#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gwig/ensemble.hpp"
#include "gwig/errors.hpp"
#include "gwig/eth_stats.hpp"
#include "gwig/observables.hpp"
#include "gwig/predictions.hpp"
#include "gwig/resolvent_traces.hpp"
#include "gwig/spectral.hpp"
#include "gwig/variance_profile.hpp"

namespace gwig {

inline constexpr const char* kCodeVersion = "gwig 0.1.0";

enum class Study {
    eth_scaling,
    local_law,
    rigidity,
    two_resolvent,
    renorm_zero_mean,
    xi_boundedness,
    bridge,
};

inline std::string study_name(Study study) {
    switch (study) {
        case Study::eth_scaling: return "eth_scaling";
        case Study::local_law: return "local_law";
        case Study::rigidity: return "rigidity";
        case Study::two_resolvent: return "two_resolvent";
        case Study::renorm_zero_mean: return "renorm_zero_mean";
        case Study::xi_boundedness: return "xi_boundedness";
        case Study::bridge: return "bridge";
    }
    throw ConfigError("unknown study");
}

inline Study study_from_name(const std::string& name) {
    for (const Study s :
         {Study::eth_scaling, Study::local_law, Study::rigidity,
          Study::two_resolvent, Study::renorm_zero_mean, Study::xi_boundedness,
          Study::bridge})
        if (study_name(s) == name) return s;
    throw ConfigError("unknown study: " + name);
}

/// Pre-registered pass band per study; configs may override but the defaults
/// are fixed here, not tuned post hoc.
inline double default_bound(Study study) {
    switch (study) {
        case Study::eth_scaling: return 30.0;
        case Study::local_law: return 10.0;
        case Study::rigidity: return 10.0;
        case Study::two_resolvent: return 0.1;
        case Study::renorm_zero_mean: return 4.0;
        case Study::xi_boundedness: return 50.0;
        case Study::bridge: return 100.0;
    }
    throw ConfigError("unknown study");
}

struct ExperimentConfig {
    Study study = Study::eth_scaling;
    nlohmann::json profile_spec = {{"kind", "flat"}};
    EntryLaw law = EntryLaw::complex_gaussian;
    std::vector<Index> sizes;
    int samples_per_size = 2;
    double j_exponent = 0.3;
    std::vector<Complex> z_grid;
    nlohmann::json observable_spec = {{"kind", "alternating_diagonal"}};
    double eta_exponent = -0.6;
    std::vector<double> e_values = {0.0, 1.0};
    std::uint64_t seed = 0;
    std::string output_path;
    double bound = 0.0; // 0 means the study default
};

inline bool study_needs_z(Study study) {
    return study == Study::two_resolvent || study == Study::renorm_zero_mean;
}

inline void validate_config(const ExperimentConfig& config) {
    if (config.sizes.empty()) throw ConfigError("config needs at least one size");
    for (std::size_t i = 1; i < config.sizes.size(); ++i)
        if (config.sizes[i] <= config.sizes[i - 1])
            throw ConfigError("sizes must be strictly ascending");
    if (config.samples_per_size < 2)
        throw ConfigError("samples_per_size must be >= 2");
    if (config.j_exponent <= 0.0 || config.j_exponent >= 1.0)
        throw ConfigError("j_exponent must lie in (0, 1)");
    if (study_needs_z(config.study) && config.z_grid.empty())
        throw ConfigError("study " + study_name(config.study) +
                          " requires a non-empty z_grid");
    for (const Complex z : config.z_grid)
        if (z.imag() == 0.0) throw ConfigError("z_grid entries need Im z != 0");
    if (config.bound < 0.0) throw ConfigError("bound must be nonnegative");
    if (!config.profile_spec.contains("kind"))
        throw ConfigError("profile spec needs a kind");
    if (!config.observable_spec.contains("kind"))
        throw ConfigError("observable spec needs a kind");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig config;
    config.study = study_from_name(j.at("study").get<std::string>());
    config.profile_spec = j.at("profile");
    config.law = law_from_name(j.value("law", std::string("complex_gaussian")));
    for (const auto& size : j.at("sizes"))
        config.sizes.push_back(size.get<Index>());
    config.samples_per_size = j.at("samples_per_size").get<int>();
    config.j_exponent = j.value("j_exponent", 0.3);
    if (j.contains("z_grid"))
        for (const auto& z : j.at("z_grid"))
            config.z_grid.emplace_back(z.at(0).get<double>(),
                                       z.at(1).get<double>());
    if (j.contains("observable")) config.observable_spec = j.at("observable");
    config.eta_exponent = j.value("eta_exponent", -0.6);
    if (j.contains("e_values"))
        config.e_values = j.at("e_values").get<std::vector<double>>();
    config.seed = j.value("seed", std::uint64_t{0});
    config.output_path = j.value("output_path", std::string());
    config.bound = j.value("bound", 0.0);
    validate_config(config);
    return config;
}

inline nlohmann::json config_to_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["study"] = study_name(config.study);
    j["profile"] = config.profile_spec;
    j["law"] = law_name(config.law);
    j["sizes"] = config.sizes;
    j["samples_per_size"] = config.samples_per_size;
    j["j_exponent"] = config.j_exponent;
    nlohmann::json grid = nlohmann::json::array();
    for (const Complex z : config.z_grid) grid.push_back({z.real(), z.imag()});
    j["z_grid"] = std::move(grid);
    j["observable"] = config.observable_spec;
    j["eta_exponent"] = config.eta_exponent;
    j["e_values"] = config.e_values;
    j["seed"] = config.seed;
    j["output_path"] = config.output_path;
    j["bound"] = config.bound;
    return j;
}

inline std::string fnv1a_hash(const std::string& text) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(hash));
    return buffer;
}

struct RunRecord {
    Index n = 0;
    std::string statistic;
    double mean = 0.0;
    double stderr_ = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
    double envelope = 0.0;
    bool pass = false;
    bool failed = false;
};

struct RunResult {
    std::string study;
    std::vector<RunRecord> records;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string code_version = kCodeVersion;
};

namespace detail {

inline double percentile(std::vector<double> sorted_values, double q) {
    const std::size_t count = sorted_values.size();
    if (count == 0) return 0.0;
    const double position = q * static_cast<double>(count - 1);
    const auto lo = static_cast<std::size_t>(position);
    const double frac = position - static_cast<double>(lo);
    if (lo + 1 >= count) return sorted_values[count - 1];
    return sorted_values[lo] * (1.0 - frac) + sorted_values[lo + 1] * frac;
}

struct Aggregate {
    double mean = 0.0;
    double stderr_ = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

inline Aggregate aggregate(const std::vector<double>& values) {
    Aggregate out;
    const double count = static_cast<double>(values.size());
    for (const double v : values) out.mean += v;
    out.mean /= count;
    double ss = 0.0;
    for (const double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = values.size() > 1
                      ? std::sqrt(ss / (count - 1.0)) / std::sqrt(count)
                      : 0.0;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    out.p50 = percentile(sorted, 0.50);
    out.p90 = percentile(sorted, 0.90);
    out.p99 = percentile(sorted, 0.99);
    out.min = sorted.front();
    out.max = sorted.back();
    return out;
}

inline VarianceProfile profile_for_size(const nlohmann::json& spec, Index n) {
    const auto kind = spec.at("kind").get<std::string>();
    if (kind == "flat") return build_flat(n);
    if (kind == "cosine")
        return build_cosine_circulant(n, spec.value("beta", 0.5));
    if (kind == "explicit") {
        const VarianceProfile profile = variance_profile_from_json(spec);
        if (profile.n() != n)
            throw ConfigError("explicit profile size does not match the size list");
        return profile;
    }
    throw ConfigError("unknown profile kind: " + kind);
}

/// Per-size study context, built once and shared read-only by the workers.
struct StudyContext {
    std::shared_ptr<const VarianceProfile> profile;
    Observable observable = identity_observable(1);
    Index j_width = 1;
    std::vector<Complex> z_values;
    std::optional<ClassicalLocations> gammas;
    std::optional<TwoResolventPrediction> prediction;
    std::vector<std::string> statistics;
    std::vector<double> envelopes;
};

/// Parallel map over sample indices with order-independent, index-addressed
/// storage; results are identical at any worker count.
template <typename PerSample>
std::vector<std::vector<double>> map_samples(int samples, int workers,
                                             const PerSample& per_sample,
                                             std::vector<std::string>& errors) {
    std::vector<std::vector<double>> values(static_cast<std::size_t>(samples));
    std::vector<std::string> sample_errors(static_cast<std::size_t>(samples));
    std::atomic<int> next{0};
    const auto work = [&]() {
        while (true) {
            const int k = next.fetch_add(1);
            if (k >= samples) return;
            try {
                values[static_cast<std::size_t>(k)] =
                    per_sample(static_cast<std::uint64_t>(k));
            } catch (const std::exception& error) {
                sample_errors[static_cast<std::size_t>(k)] = error.what();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (std::thread& thread : pool) thread.join();
    }
    for (const std::string& error : sample_errors)
        if (!error.empty()) errors.push_back(error);
    return values;
}

} // namespace detail

/// Runs the configured study: for each size and sample index, sample ->
/// decompose -> study statistics, then aggregate in sample-index order.
/// Sample-level errors mark the affected records failed instead of aborting.
inline RunResult run(const ExperimentConfig& config, int workers = 1) {
    validate_config(config);
    RunResult result;
    result.study = study_name(config.study);
    result.seed = config.seed;
    result.config_hash = fnv1a_hash(config_to_json(config).dump());

    const double bound =
        config.bound > 0.0 ? config.bound : default_bound(config.study);

    for (const Index n : config.sizes) {
        detail::StudyContext ctx;
        std::vector<std::string> errors;
        std::vector<std::vector<double>> values;
        try {
        ctx.profile = std::make_shared<VarianceProfile>(
            detail::profile_for_size(config.profile_spec, n));
        ctx.observable = observable_from_json(config.observable_spec, n,
                                              splitmix64(config.seed ^ 0x0b5e));
        ctx.j_width = std::max<Index>(
            1, static_cast<Index>(std::pow(static_cast<double>(n),
                                           config.j_exponent)));

        switch (config.study) {
            case Study::eth_scaling: {
                ctx.statistics = {"eth_max"};
                ctx.envelopes = {envelope_eth(n, 0.0)};
                values = detail::map_samples(
                    config.samples_per_size, workers,
                    [&](std::uint64_t k) -> std::vector<double> {
                        const WignerSample s =
                            sample({ctx.profile, config.law, config.seed, k});
                        const SpectralDecomposition d = decompose(s);
                        const OverlapMatrix o =
                            overlap(d, ctx.observable, false);
                        return {eth_max(o, ctx.observable.mean())};
                    },
                    errors);
                break;
            }
            case Study::local_law: {
                const double eta =
                    std::pow(static_cast<double>(n), config.eta_exponent);
                for (const double e : config.e_values) {
                    std::ostringstream name;
                    name << "local_law_ratio_E" << e;
                    ctx.statistics.push_back(name.str());
                    ctx.z_values.emplace_back(e, eta);
                    ctx.envelopes.push_back(
                        envelope_local_law(n, Complex(e, eta)));
                }
                values = detail::map_samples(
                    config.samples_per_size, workers,
                    [&](std::uint64_t k) -> std::vector<double> {
                        const WignerSample s =
                            sample({ctx.profile, config.law, config.seed, k});
                        const SpectralDecomposition d = decompose(s);
                        std::vector<double> row;
                        for (std::size_t e = 0; e < ctx.z_values.size(); ++e) {
                            const Complex z = ctx.z_values[e];
                            ComplexMatrix g = resolvent_matrix(
                                d, {z, ResolventFlavor::plain});
                            g.diagonal().array() -= stieltjes_m(z).m;
                            row.push_back(g.cwiseAbs().maxCoeff() /
                                          ctx.envelopes[e]);
                        }
                        return row;
                    },
                    errors);
                break;
            }
            case Study::rigidity: {
                ctx.statistics = {"rigidity_excess"};
                ctx.envelopes = {envelope_rigidity(n, (n + 1) / 2)};
                ctx.gammas = classical_locations(n);
                values = detail::map_samples(
                    config.samples_per_size, workers,
                    [&](std::uint64_t k) -> std::vector<double> {
                        const WignerSample s =
                            sample({ctx.profile, config.law, config.seed, k});
                        return {rigidity_excess(decompose(s), *ctx.gammas)};
                    },
                    errors);
                break;
            }
            case Study::two_resolvent: {
                const Complex z1 = config.z_grid.at(0);
                const Complex z2 = config.z_grid.size() > 1 ? config.z_grid[1]
                                                            : std::conj(z1);
                ctx.z_values = {z1, z2};
                ctx.prediction = predict_two_resolvent(
                    *ctx.profile, ctx.observable, ctx.observable, z1, z2);
                ctx.statistics = {"two_resolvent_re", "two_resolvent_im"};
                ctx.envelopes = {ctx.prediction->total.real(),
                                 ctx.prediction->total.imag()};
                values = detail::map_samples(
                    config.samples_per_size, workers,
                    [&](std::uint64_t k) -> std::vector<double> {
                        const WignerSample s =
                            sample({ctx.profile, config.law, config.seed, k});
                        const SpectralDecomposition d = decompose(s);
                        const Complex t = trace_two(
                            d, ctx.observable, ctx.observable,
                            {z1, ResolventFlavor::plain},
                            {z2, ResolventFlavor::plain});
                        return {t.real(), t.imag()};
                    },
                    errors);
                break;
            }
            case Study::renorm_zero_mean: {
                const Complex z = config.z_grid.at(0);
                ctx.z_values = {z};
                ctx.statistics = {"underline_wga_re", "underline_wga_im"};
                ctx.envelopes = {0.0, 0.0};
                values = detail::map_samples(
                    config.samples_per_size, workers,
                    [&](std::uint64_t k) -> std::vector<double> {
                        const WignerSample s =
                            sample({ctx.profile, config.law, config.seed, k});
                        const SpectralDecomposition d = decompose(s);
                        const Complex u =
                            renormalized_wga(s, d, ctx.observable, z,
                                             ResolventFlavor::plain)
                                .value;
                        return {u.real(), u.imag()};
                    },
                    errors);
                break;
            }
            case Study::xi_boundedness: {
                // J-grid sweep: the configured exponent plus the fixed
                // {0.2, 0.4, 0.6} grid, deduplicated.
                std::vector<double> exponents = {config.j_exponent, 0.2, 0.4,
                                                 0.6};
                std::sort(exponents.begin(), exponents.end());
                exponents.erase(
                    std::unique(exponents.begin(), exponents.end(),
                                [](double a, double b) {
                                    return std::abs(a - b) < 1e-12;
                                }),
                    exponents.end());
                std::vector<Index> widths;
                for (const double e : exponents) {
                    widths.push_back(std::max<Index>(
                        1, static_cast<Index>(
                               std::pow(static_cast<double>(n), e))));
                    std::ostringstream xi_name, xi_bar_name;
                    xi_name << "xi_J" << e;
                    xi_bar_name << "xi_bar_J" << e;
                    ctx.statistics.push_back(xi_name.str());
                    ctx.statistics.push_back(xi_bar_name.str());
                    ctx.envelopes.push_back(1.0);
                    ctx.envelopes.push_back(1.0);
                }
                values = detail::map_samples(
                    config.samples_per_size, workers,
                    [&](std::uint64_t k) -> std::vector<double> {
                        const WignerSample s =
                            sample({ctx.profile, config.law, config.seed, k});
                        const SpectralDecomposition d = decompose(s);
                        const OverlapMatrix plain =
                            overlap(d, ctx.observable, false);
                        const OverlapMatrix conj =
                            overlap(d, ctx.observable, true);
                        std::vector<double> row;
                        for (const Index width : widths) {
                            row.push_back(xi(plain, width).value);
                            row.push_back(xi(conj, width).value);
                        }
                        return row;
                    },
                    errors);
                break;
            }
            case Study::bridge: {
                ctx.statistics = {"bridge_ratio"};
                ctx.envelopes = {1.0};
                const Index i0 = std::max<Index>(1, n / 2);
                const Index j0 = std::max<Index>(1, n / 3);
                values = detail::map_samples(
                    config.samples_per_size, workers,
                    [&](std::uint64_t k) -> std::vector<double> {
                        const WignerSample s =
                            sample({ctx.profile, config.law, config.seed, k});
                        const SpectralDecomposition d = decompose(s);
                        return {
                            bridge_ratio(d, ctx.observable, i0, j0, ctx.j_width)};
                    },
                    errors);
                break;
            }
        }
        } catch (const std::exception& error) {
            errors.push_back(error.what());
            if (ctx.statistics.empty()) {
                ctx.statistics = {study_name(config.study)};
                ctx.envelopes = {0.0};
            }
        }

        const bool size_failed = !errors.empty();
        for (std::size_t stat = 0; stat < ctx.statistics.size(); ++stat) {
            RunRecord record;
            record.n = n;
            record.statistic = ctx.statistics[stat];
            record.envelope = ctx.envelopes[stat];
            record.failed = size_failed;
            if (!size_failed) {
                std::vector<double> series;
                series.reserve(values.size());
                for (const auto& row : values) series.push_back(row.at(stat));
                const detail::Aggregate agg = detail::aggregate(series);
                record.mean = agg.mean;
                record.stderr_ = agg.stderr_;
                record.p50 = agg.p50;
                record.p90 = agg.p90;
                record.p99 = agg.p99;

                switch (config.study) {
                    case Study::eth_scaling:
                        record.pass = agg.p50 <= bound * record.envelope;
                        break;
                    case Study::local_law:
                    case Study::rigidity:
                        record.pass =
                            agg.p99 <= bound * std::log(static_cast<double>(n));
                        break;
                    case Study::two_resolvent: {
                        // combined complex test, stored on both components
                        std::vector<double> re, im;
                        for (const auto& row : values) {
                            re.push_back(row[0]);
                            im.push_back(row[1]);
                        }
                        const detail::Aggregate are = detail::aggregate(re);
                        const detail::Aggregate aim = detail::aggregate(im);
                        const Complex mean(are.mean, aim.mean);
                        const double stderr_combined =
                            std::hypot(are.stderr_, aim.stderr_);
                        const double residual =
                            std::abs(mean - ctx.prediction->total);
                        record.pass = residual <=
                                      std::max(4.0 * stderr_combined,
                                               bound *
                                                   std::abs(ctx.prediction->total));
                        break;
                    }
                    case Study::renorm_zero_mean:
                        record.pass =
                            std::abs(record.mean) <= bound * record.stderr_;
                        break;
                    case Study::xi_boundedness:
                        record.pass = agg.max <= bound;
                        break;
                    case Study::bridge:
                        record.pass = agg.min >= 1.0 / bound && agg.max <= bound;
                        break;
                }
            }
            result.records.push_back(std::move(record));
        }
    }

    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const RunRecord& a, const RunRecord& b) {
                         return a.n != b.n ? a.n < b.n
                                           : a.statistic < b.statistic;
                     });
    return result;
}

inline bool all_pass(const RunResult& result) {
    for (const RunRecord& record : result.records)
        if (record.failed || !record.pass) return false;
    return true;
}

inline bool any_failed(const RunResult& result) {
    for (const RunRecord& record : result.records)
        if (record.failed) return true;
    return false;
}

/// Least-squares slope of log(median statistic) against log N.
inline double fit_scaling_exponent(const RunResult& result,
                                   const std::string& statistic) {
    std::vector<double> xs, ys;
    for (const RunRecord& record : result.records)
        if (record.statistic == statistic && !record.failed) {
            xs.push_back(std::log(static_cast<double>(record.n)));
            ys.push_back(std::log(record.p50));
        }
    if (xs.size() < 3)
        throw InsufficientSizesError("fit needs at least 3 sizes, have " +
                                     std::to_string(xs.size()));
    const double count = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

namespace detail {

inline std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

} // namespace detail

inline void emit_csv(const RunResult& result, std::ostream& os) {
    os << "study,N,statistic,mean,stderr,p50,p90,p99,envelope,pass\n";
    for (const RunRecord& r : result.records) {
        os << result.study << ',' << r.n << ',' << r.statistic << ','
           << detail::format_number(r.mean) << ','
           << detail::format_number(r.stderr_) << ','
           << detail::format_number(r.p50) << ','
           << detail::format_number(r.p90) << ','
           << detail::format_number(r.p99) << ','
           << detail::format_number(r.envelope) << ','
           << (r.pass ? "true" : "false") << '\n';
    }
}

inline void to_json(nlohmann::json& j, const RunRecord& r) {
    j = nlohmann::json{{"N", r.n},         {"statistic", r.statistic},
                       {"mean", r.mean},   {"stderr", r.stderr_},
                       {"p50", r.p50},     {"p90", r.p90},
                       {"p99", r.p99},     {"envelope", r.envelope},
                       {"pass", r.pass},   {"failed", r.failed}};
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
    j.at("N").get_to(r.n);
    j.at("statistic").get_to(r.statistic);
    j.at("mean").get_to(r.mean);
    j.at("stderr").get_to(r.stderr_);
    j.at("p50").get_to(r.p50);
    j.at("p90").get_to(r.p90);
    j.at("p99").get_to(r.p99);
    j.at("envelope").get_to(r.envelope);
    j.at("pass").get_to(r.pass);
    r.failed = j.value("failed", false);
}

inline nlohmann::json result_to_json(const RunResult& result) {
    nlohmann::json j;
    j["study"] = result.study;
    j["records"] = result.records;
    j["provenance"] = {{"config_hash", result.config_hash},
                       {"seed", result.seed},
                       {"code_version", result.code_version}};
    return j;
}

inline RunResult result_from_json(const nlohmann::json& j) {
    RunResult result;
    result.study = j.at("study").get<std::string>();
    result.records = j.at("records").get<std::vector<RunRecord>>();
    result.config_hash = j.at("provenance").at("config_hash").get<std::string>();
    result.seed = j.at("provenance").at("seed").get<std::uint64_t>();
    result.code_version =
        j.at("provenance").at("code_version").get<std::string>();
    return result;
}

inline void emit(const RunResult& result, const std::string& format,
                 const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    if (format == "csv") {
        emit_csv(result, os);
    } else if (format == "json") {
        os << result_to_json(result).dump(2) << '\n';
    } else {
        throw ConfigError("unknown format: " + format);
    }
    if (!os.flush()) throw IoError("failed writing " + path);
}

} // namespace gwig
