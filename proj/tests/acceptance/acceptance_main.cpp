// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and bands are pinned here and in the study defaults.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gwig/experiments.hpp"

using namespace gwig;

namespace {

constexpr int kWorkers = 2;

struct Criterion {
    std::string label;
    std::function<std::pair<bool, std::string>()> body;
};

/// Brute-force windowed max over dyadic overlap matrices; sums are exact in
/// double precision, so equality with the prefix-sum route must be bitwise.
double brute_force_window_value(const ComplexMatrix& o, Index j_width) {
    const Index n = o.rows();
    double best = -1.0;
    for (Index i0 = 1; i0 <= n; ++i0)
        for (Index j0 = 1; j0 <= n; ++j0) {
            double mass = 0.0;
            for (Index r = std::max<Index>(1, i0 - j_width);
                 r <= std::min<Index>(n, i0 + j_width); ++r)
                for (Index c = std::max<Index>(1, j0 - j_width);
                     c <= std::min<Index>(n, j0 + j_width); ++c)
                    mass += std::norm(o(r - 1, c - 1));
            best = std::max(best, mass);
        }
    const double j = static_cast<double>(j_width);
    return static_cast<double>(n) * best / (4.0 * j * j);
}

ComplexMatrix random_dyadic(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(-8, 8);
    ComplexMatrix o(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            o(i, j) = Complex(pick(rng) / 4.0, pick(rng) / 4.0);
    return o;
}

ComplexMatrix random_dense(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    ComplexMatrix m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) m(i, j) = Complex(normal(rng), normal(rng));
    return m;
}

nlohmann::json cosine_spec(double beta) {
    return {{"kind", "cosine"}, {"beta", beta}};
}

nlohmann::json m0_traceless_observable(Index n, double beta, Index mu) {
    const SqrtProfile sq = sqrt_profile(build_cosine_circulant(n, beta));
    const ObservableFamily m0 = build_m0(sq);
    const Observable member = traceless(m0.members[static_cast<std::size_t>(mu)]);
    nlohmann::json j = member;
    return j;
}

std::pair<bool, std::string> criterion_exact_identities() {
    double worst = 0.0;
    const std::vector<Complex> zs = {Complex(0.0, 1.0), Complex(0.5, 0.1)};
    for (const bool flat : {true, false}) {
        const auto profile = std::make_shared<VarianceProfile>(
            flat ? build_flat(64) : build_cosine_circulant(64, 0.5));
        const SqrtProfile sq = sqrt_profile(*profile);
        const Observable a = make_alternating_diagonal(64);
        for (std::uint64_t k = 0; k < 50; ++k) {
            const WignerSample s =
                sample({profile, EntryLaw::complex_gaussian, 90210, k});
            const SpectralDecomposition d = decompose(s);
            for (const Complex z : zs) {
                worst = std::max(worst, identity_residual_fundga(s, d, a, z));
                worst = std::max(worst,
                                 identity_residual_splitting(s, d, a, z, sq));
            }
        }
    }
    std::ostringstream detail;
    detail << "max residual " << worst << " (tol 1e-9)";
    return {worst <= 1e-9, detail.str()};
}

std::pair<bool, std::string> criterion_stability_lemma() {
    double worst_margin = -1e9;
    for (std::uint64_t k = 0; k < 200; ++k) {
        const VarianceProfile profile = build_random_mix(64, 1000 + k);
        const StabilityOperator op = stability_radius(profile);
        const double margin =
            op.spectral_radius - (1.0 - profile.c_lower() + 1e-8);
        worst_margin = std::max(worst_margin, margin);
    }
    std::ostringstream detail;
    detail << "max (radius - (1 - c)) " << worst_margin << " (must be <= 0)";
    return {worst_margin <= 0.0, detail.str()};
}

std::pair<bool, std::string> criterion_renorm_zero_mean() {
    ExperimentConfig config;
    config.study = Study::renorm_zero_mean;
    config.sizes = {64};
    config.samples_per_size = 2000;
    config.z_grid = {Complex(0.0, 1.0)};
    config.seed = 31415;

    config.profile_spec = {{"kind", "flat"}};
    config.observable_spec = {{"kind", "alternating_diagonal"}};
    const RunResult alternating = run(config, kWorkers);

    config.profile_spec = cosine_spec(0.5);
    config.observable_spec = m0_traceless_observable(64, 0.5, 0);
    const RunResult member = run(config, kWorkers);

    bool pass = true;
    std::ostringstream detail;
    for (const RunResult* result : {&alternating, &member})
        for (const RunRecord& record : result->records) {
            pass = pass && !record.failed && record.pass;
            detail << record.statistic << " |mean|/stderr "
                   << std::abs(record.mean) / record.stderr_ << "  ";
        }
    detail << "(band 4)";
    return {pass, detail.str()};
}

std::pair<bool, std::string> criterion_eth_scaling() {
    bool pass = true;
    std::ostringstream detail;
    for (const bool flat : {true, false}) {
        ExperimentConfig config;
        config.study = Study::eth_scaling;
        config.profile_spec =
            flat ? nlohmann::json{{"kind", "flat"}} : cosine_spec(0.5);
        config.sizes = {128, 256, 512, 1024};
        config.samples_per_size = 50;
        config.seed = 271828;
        config.observable_spec = {{"kind", "alternating_diagonal"}};
        const RunResult result = run(config, kWorkers);

        for (const RunRecord& record : result.records) {
            const double scaled = record.p50 / record.envelope;
            pass = pass && !record.failed && record.pass;
            detail << (flat ? "flat" : "cos") << " N=" << record.n
                   << " sqrtN*median " << scaled << "  ";
        }
        const double slope = fit_scaling_exponent(result, "eth_max");
        pass = pass && slope >= -0.62 && slope <= -0.38;
        detail << "slope " << slope << "  ";
    }
    detail << "(median band 30, slope band [-0.62, -0.38])";
    return {pass, detail.str()};
}

std::pair<bool, std::string> criterion_local_law() {
    bool pass = true;
    std::ostringstream detail;
    for (const bool flat : {true, false}) {
        ExperimentConfig config;
        config.study = Study::local_law;
        config.profile_spec =
            flat ? nlohmann::json{{"kind", "flat"}} : cosine_spec(0.5);
        config.sizes = {256, 512};
        config.samples_per_size = 50;
        config.eta_exponent = -0.6;
        config.e_values = {0.0, 1.0};
        config.seed = 602214;
        const RunResult result = run(config, kWorkers);
        for (const RunRecord& record : result.records) {
            pass = pass && !record.failed && record.pass;
            detail << (flat ? "flat" : "cos") << " N=" << record.n << " "
                   << record.statistic << " p99 " << record.p99 << "  ";
        }
    }
    detail << "(band 10 log N)";
    return {pass, detail.str()};
}

std::pair<bool, std::string> criterion_rigidity() {
    bool pass = true;
    std::ostringstream detail;
    for (const bool flat : {true, false}) {
        ExperimentConfig config;
        config.study = Study::rigidity;
        config.profile_spec =
            flat ? nlohmann::json{{"kind", "flat"}} : cosine_spec(0.5);
        config.sizes = {512};
        config.samples_per_size = 100;
        config.seed = 161803;
        const RunResult result = run(config, kWorkers);
        for (const RunRecord& record : result.records) {
            pass = pass && !record.failed && record.pass;
            detail << (flat ? "flat" : "cos") << " p99 " << record.p99 << "  ";
        }
    }
    detail << "(band 10 log N = " << 10.0 * std::log(512.0) << ")";
    return {pass, detail.str()};
}

std::pair<bool, std::string> criterion_two_resolvent() {
    ExperimentConfig config;
    config.study = Study::two_resolvent;
    config.profile_spec = cosine_spec(0.5);
    config.sizes = {128, 512};
    config.samples_per_size = 200;
    config.z_grid = {Complex(0.3, 0.5), Complex(0.3, -0.5)};
    config.observable_spec = {{"kind", "cosine_diagonal"}};
    config.seed = 141421;
    const RunResult result = run(config, kWorkers);

    double residual_small = -1.0, residual_large = -1.0;
    bool bands = true;
    for (const Index n : {Index{128}, Index{512}}) {
        Complex mean, prediction;
        for (const RunRecord& record : result.records) {
            if (record.n != n) continue;
            bands = bands && !record.failed;
            if (record.statistic == "two_resolvent_re") {
                mean.real(record.mean);
                prediction.real(record.envelope);
                if (n == 512) bands = bands && record.pass;
            } else {
                mean.imag(record.mean);
                prediction.imag(record.envelope);
            }
        }
        const double residual = std::abs(mean - prediction);
        (n == 128 ? residual_small : residual_large) = residual;
    }
    const bool decay = residual_large < residual_small;
    std::ostringstream detail;
    detail << "residual N=128 " << residual_small << ", N=512 "
           << residual_large << ", decay " << (decay ? "yes" : "no")
           << " (band max(4 stderr, 0.1 |prediction|))";
    return {bands && decay, detail.str()};
}

std::pair<bool, std::string> criterion_xi_and_bridge() {
    bool pass = true;
    std::ostringstream detail;
    for (const bool flat : {true, false}) {
        ExperimentConfig config;
        config.study = Study::xi_boundedness;
        config.profile_spec =
            flat ? nlohmann::json{{"kind", "flat"}} : cosine_spec(0.5);
        config.sizes = {512};
        config.samples_per_size = 20;
        config.j_exponent = 0.3;
        config.observable_spec = {{"kind", "alternating_diagonal"}};
        config.seed = 577215;
        const RunResult xi_result = run(config, kWorkers);
        for (const RunRecord& record : xi_result.records) {
            pass = pass && !record.failed && record.pass;
            detail << (flat ? "flat" : "cos") << " " << record.statistic
                   << " p99 " << record.p99 << "  ";
        }

        config.study = Study::bridge;
        const RunResult bridge_result = run(config, kWorkers);
        for (const RunRecord& record : bridge_result.records) {
            pass = pass && !record.failed && record.pass;
            detail << (flat ? "flat" : "cos") << " bridge mean " << record.mean
                   << "  ";
        }
    }
    detail << "(Xi band 50, bridge band [1/100, 100])";
    return {pass, detail.str()};
}

std::pair<bool, std::string> criterion_oracle_equivalence() {
    double worst_trace = 0.0;
    for (std::uint64_t case_id = 0; case_id < 20; ++case_id) {
        const auto profile =
            std::make_shared<VarianceProfile>(build_random_mix(48, 40 + case_id));
        const WignerSample s =
            sample({profile, EntryLaw::complex_gaussian, 4800, case_id});
        const SpectralDecomposition d = decompose(s);
        const Observable a =
            Observable::dense_exact(random_dense(48, 900 + case_id));
        const Observable b =
            Observable::dense_exact(random_dense(48, 901 + case_id));
        const Complex z1(0.2 + 0.01 * static_cast<double>(case_id), 0.6);
        const Complex z2(-0.3, 0.4);

        ComplexMatrix shifted1 = s.w;
        shifted1.diagonal().array() -= z1;
        const ComplexMatrix g1 =
            shifted1.partialPivLu().solve(ComplexMatrix::Identity(48, 48));
        ComplexMatrix shifted2 = s.w;
        shifted2.diagonal().array() -= z2;
        const ComplexMatrix g2 =
            shifted2.partialPivLu().solve(ComplexMatrix::Identity(48, 48));

        const Complex spectral =
            trace_two(d, a, b, {z1, ResolventFlavor::plain},
                      {z2, ResolventFlavor::adjoint});
        const Complex dense = normalized_trace(
            ComplexMatrix(g1 * a.to_dense() * g2.adjoint() * b.to_dense()));
        worst_trace = std::max(
            worst_trace, std::abs(spectral - dense) / (1.0 + std::abs(dense)));

        const Complex spectral_ga = trace_ga(d, a, z1);
        const Complex dense_ga = normalized_trace(ComplexMatrix(g1 * a.to_dense()));
        worst_trace = std::max(worst_trace, std::abs(spectral_ga - dense_ga) /
                                                (1.0 + std::abs(dense_ga)));
    }

    bool windows_exact = true;
    for (std::uint64_t case_id = 0; case_id < 6; ++case_id) {
        const Index n = 16 * (1 + static_cast<Index>(case_id % 4));
        const ComplexMatrix o = random_dyadic(n, 7000 + case_id);
        for (const Index j : {Index{1}, Index{3}, Index{9}}) {
            OverlapMatrix wrapped;
            wrapped.entries = o;
            if (xi(wrapped, j).value != brute_force_window_value(o, j))
                windows_exact = false;
        }
    }

    std::ostringstream detail;
    detail << "max trace deviation " << worst_trace
           << " (tol 1e-9), window max exact: "
           << (windows_exact ? "yes" : "no");
    return {worst_trace <= 1e-9 && windows_exact, detail.str()};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"1 exact identities (fundGA + splitting)", criterion_exact_identities},
        {"2 stability lemma radius <= 1 - c", criterion_stability_lemma},
        {"3 Gaussian renormalization zero mean", criterion_renorm_zero_mean},
        {"4 ETH scaling and slope", criterion_eth_scaling},
        {"5 local law envelope", criterion_local_law},
        {"6 rigidity envelope", criterion_rigidity},
        {"7 two-resolvent prediction", criterion_two_resolvent},
        {"8 Xi boundedness and bridge", criterion_xi_and_bridge},
        {"9 oracle equivalence", criterion_oracle_equivalence},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        bool pass = false;
        std::string detail;
        try {
            const auto outcome = criterion.body();
            pass = outcome.first;
            detail = outcome.second;
        } catch (const std::exception& error) {
            pass = false;
            detail = std::string("exception: ") + error.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        std::printf("[%s] criterion %s: %s [%.1fs]\n", pass ? "PASS" : "FAIL",
                    criterion.label.c_str(), detail.c_str(), seconds);
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    if (failures > 0) std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
