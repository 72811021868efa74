#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "gwig/observables.hpp"
#include "gwig/variance_profile.hpp"
#include "oracle_helpers.hpp"

using namespace gwig;
using Catch::Approx;

namespace {

double true_norm(const Observable& b) {
    return b.to_dense().jacobiSvd().singularValues()(0);
}

double family_max_bound(const ObservableFamily& fam) {
    double worst = 0.0;
    for (const Observable& b : fam.members)
        worst = std::max(worst, b.op_norm_bound());
    return worst;
}

} // namespace

TEST_CASE("traceless projection") {
    const Observable id = identity_observable(4);
    const Observable zero = traceless(id);
    REQUIRE(zero.traceless());
    REQUIRE(zero.diagonal_entries().cwiseAbs().maxCoeff() == 0.0);

    ComplexVector d(2);
    d << 1.0, -1.0;
    const Observable balanced = Observable::diagonal(d);
    REQUIRE(traceless(balanced).diagonal_entries() == d);

    // Exact idempotence through the flag.
    const Observable once =
        traceless(Observable::dense_exact(oracle::random_hermitian(6, 21)));
    REQUIRE(std::abs(once.mean()) <= 1e-12);
    const Observable twice = traceless(once);
    REQUIRE(twice.to_dense() == once.to_dense());
}

TEST_CASE("build_m0") {
    SECTION("flat profile gives identity copies") {
        const ObservableFamily m0 = build_m0(sqrt_profile(build_flat(4)));
        REQUIRE(m0.level == 0);
        REQUIRE(m0.members.size() == 4);
        for (const Observable& member : m0.members) {
            REQUIRE(member.is_diagonal());
            REQUIRE((member.diagonal_entries().array() - Complex(1.0, 0.0))
                        .abs()
                        .maxCoeff() <= 1e-7);
        }
        // Flat traceless parts vanish, the degenerate family.
        REQUIRE(traceless(m0.members[0]).diagonal_entries().cwiseAbs().maxCoeff() <=
                1e-7);
    }

    SECTION("cosine profile columns") {
        const ObservableFamily m0 =
            build_m0(sqrt_profile(build_cosine_circulant(4, 0.5)));
        const ComplexVector& d = m0.members[0].diagonal_entries();
        REQUIRE(d[0].real() == Approx(1.5).margin(1e-8));
        REQUIRE(d[1].real() == Approx(1.0).margin(1e-8));
        REQUIRE(d[2].real() == Approx(0.5).margin(1e-8));
        REQUIRE(d[3].real() == Approx(1.0).margin(1e-8));
        for (const Observable& member : m0.members)
            REQUIRE(std::abs(member.mean() - 1.0) <= 1e-10);
    }

    SECTION("assumption violation propagates") {
        const SqrtProfile sq =
            sqrt_profile(build_explicit(RealMatrix::Identity(4, 4)), true);
        REQUIRE_THROWS_AS(build_m0(sq), AssumptionViolatedError);
    }
}

TEST_CASE("build_m1") {
    const ObservableFamily m0 = build_m0(sqrt_profile(build_flat(4)));
    const Observable m = make_alternating_diagonal(4);
    const ObservableFamily m1 = build_m1(m0, m);
    REQUIRE(m1.level == 1);
    REQUIRE(m1.members.size() == 4 + 2);
    REQUIRE(m1.members[1].diagonal_entries() == m.diagonal_entries());

    ComplexVector unbalanced(4);
    unbalanced << 1.0, 1.0, -1.0, 0.0;
    REQUIRE_THROWS_AS(build_m1(m0, Observable::diagonal(unbalanced)), ConfigError);
    REQUIRE_THROWS_AS(build_m1(m0, scale(m, 2.0)), ConfigError);

    const VarianceProfile cosine = build_cosine_circulant(8, 0.5);
    const SqrtProfile sq = sqrt_profile(cosine);
    const ObservableFamily level1 =
        build_m1(build_m0(sq), make_alternating_diagonal(8));
    REQUIRE(family_max_bound(level1) <= std::max(1.0, sq.bound_constant) + 1e-12);
}

TEST_CASE("extend") {
    const ObservableFamily m0 =
        build_m0(sqrt_profile(build_cosine_circulant(4, 0.5)));
    const ObservableFamily m1 = build_m1(m0, make_alternating_diagonal(4));
    const std::size_t s = m1.members.size();

    SECTION("full cross product when under the cap") {
        const ObservableFamily m2 = extend(m1, 4 * s * s, 1);
        REQUIRE(m2.level == 2);
        REQUIRE_FALSE(m2.sampled);
        REQUIRE(m2.members.size() == 4 * s * s);
        for (const Observable& b : m2.members) REQUIRE(b.is_diagonal());
    }

    SECTION("seeded subsample above the cap") {
        const ObservableFamily m2 = extend(m1, 10, 7);
        REQUIRE(m2.sampled);
        REQUIRE(m2.members.size() == 10);
        const ObservableFamily again = extend(m1, 10, 7);
        for (std::size_t i = 0; i < 10; ++i)
            REQUIRE(m2.members[i].to_dense() == again.members[i].to_dense());
    }

    SECTION("norm growth squares per level") {
        ObservableFamily fam = m1;
        double level1_bound = family_max_bound(fam);
        for (const Observable& b : fam.members)
            level1_bound = std::max(level1_bound, traceless(b).op_norm_bound());

        for (int level = 2; level <= 4; ++level) {
            fam = extend(fam, 40, 11 * static_cast<std::uint64_t>(level));
            const double cap =
                std::pow(level1_bound, std::pow(2.0, level - 1));
            for (const Observable& b : fam.members) {
                REQUIRE(b.op_norm_bound() <= cap + 1e-9);
                REQUIRE(true_norm(b) <= b.op_norm_bound() + 1e-9);
            }
        }
    }

    REQUIRE_THROWS_AS(extend(m0, 10, 1), ConfigError);
}

TEST_CASE("subsample keeps members and flags") {
    const ObservableFamily m0 =
        build_m0(sqrt_profile(build_cosine_circulant(16, 0.5)));
    const ObservableFamily thin = subsample(m0, 5, 3);
    REQUIRE(thin.sampled);
    REQUIRE(thin.members.size() == 5);
    REQUIRE(subsample(m0, 100, 3).members.size() == 16);
}

TEST_CASE("named generators") {
    const Observable alt = make_alternating_diagonal(6);
    REQUIRE(alt.traceless());
    REQUIRE(alt.op_norm_bound() == 1.0);
    REQUIRE(alt.diagonal_entries()[0] == Complex(1.0, 0.0));
    REQUIRE(alt.diagonal_entries()[1] == Complex(-1.0, 0.0));

    const Observable alt_odd = make_alternating_diagonal(5);
    REQUIRE(std::abs(alt_odd.mean()) <= 1e-12);
    REQUIRE(alt_odd.op_norm_bound() <= 1.0 + 1e-12);

    const Observable cosine = make_cosine_diagonal(8);
    REQUIRE(std::abs(cosine.mean()) <= 1e-12);
    REQUIRE(cosine.op_norm_bound() <= 1.0);

    const Observable gue = make_gue_like(12, 5);
    REQUIRE(std::abs(gue.mean()) <= 1e-12);
    REQUIRE(true_norm(gue) == Approx(1.0).margin(1e-9));
    REQUIRE((gue.dense_entries() - gue.dense_entries().adjoint())
                .cwiseAbs()
                .maxCoeff() <= 1e-14);

    const Observable rank1 = make_rank_one_traceless(6);
    REQUIRE(std::abs(rank1.mean()) <= 1e-12);
    REQUIRE(true_norm(rank1) == Approx(1.0).margin(1e-12));
}

TEST_CASE("observable json") {
    nlohmann::json named = {{"kind", "alternating_diagonal"}};
    const Observable alt = observable_from_json(named, 4, 0);
    REQUIRE(alt.diagonal_entries()[3] == Complex(-1.0, 0.0));

    const Observable gue = make_gue_like(5, 9);
    nlohmann::json dumped = gue;
    const Observable back = observable_from_json(dumped, 5, 0);
    REQUIRE((back.to_dense() - gue.to_dense()).cwiseAbs().maxCoeff() <= 1e-15);

    nlohmann::json bad = {{"kind", "haar"}};
    REQUIRE_THROWS_AS(observable_from_json(bad, 4, 0), ConfigError);
}
