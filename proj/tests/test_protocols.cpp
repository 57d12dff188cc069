#include <doctest.h>

#include <cmath>

#include "distillery/protocols.hpp"
#include "test_helpers.hpp"

using namespace distillery;

namespace {

BellSpectrum reference_input() {
    BellSpectrum spec{3, std::vector<double>(9, 1.0 / 18.0)};
    spec.at({2, 1}) = 5.0 / 9.0;
    return spec;
}

DensityOperator maximally_mixed(int d) {
    ComplexMatrix id = ComplexMatrix::identity(d * d);
    id *= Complex(1.0 / (d * d));
    return DensityOperator::make_unchecked(std::move(id), bipartite_layout(d));
}

}  // namespace

TEST_CASE("fimax_select on the reference distribution") {
    const auto dist = two_copy_error_distribution(reference_input());
    const auto choice = fimax_select(dist);
    CHECK(choice.generator == Generator::canonical(3, {{1, 0}, {1, 0}}));
    CHECK(choice.s_max == 1);
    CHECK(choice.success_prob == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(choice.score * choice.success_prob == doctest::Approx(17.0 / 54.0).epsilon(1e-9));
    CHECK(choice.score == doctest::Approx(17.0 / 27.0).epsilon(1e-9));
    REQUIRE(choice.c_max.elements.size() == 3);
    CHECK(choice.c_max.elements[0] == ErrorElement{{0, 1}, {0, 1}});
}

TEST_CASE("fimax_select on a point mass at zero picks the first generator with score 1") {
    for (int d : {2, 3}) {
        TwoCopyDistribution dist{d, std::vector<double>(d * d * d * d, 0.0)};
        dist.p[0] = 1.0;
        const auto choice = fimax_select(dist);
        CHECK(choice.score == doctest::Approx(1.0));
        CHECK(choice.s_max == 0);
        CHECK(choice.success_prob == doctest::Approx(1.0));
        // Shift-major lexicographically smallest representative: W(I x Z).
        CHECK(choice.generator == Generator::canonical(d, {{0, 0}, {1, 0}}));
    }
}

TEST_CASE("fimax_select on the uniform distribution scores 1/d^2 everywhere") {
    for (int d : {2, 3}) {
        const int n = d * d * d * d;
        TwoCopyDistribution dist{d, std::vector<double>(n, 1.0 / n)};
        const auto choice = fimax_select(dist);
        CHECK(choice.score == doctest::Approx(1.0 / (d * d)).epsilon(1e-12));
        // Enumeration oracle: every coset of every generator has the same score.
        for (const auto& g : generator_representatives(d)) {
            const auto c = coset_of(error_from_flat(d, n / 2), g);
            double mass = 0.0;
            for (const auto& e : c.elements) mass += dist.at(e);
            CHECK(mass * d == doctest::Approx(1.0 / (d * d)).epsilon(1e-12));
        }
    }
}

TEST_CASE("fimax_select rejects an all-zero distribution") {
    TwoCopyDistribution dist{2, std::vector<double>(16, 0.0)};
    CHECK_THROWS_AS(fimax_select(dist), std::invalid_argument);
}

TEST_CASE("fimax_step reproduces the reference round") {
    const auto res = fimax_step_spectrum(reference_input());
    CHECK(res.success_prob == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.correction == WeylIndex{0, 1});
    CHECK(res.output_spectrum.at({0, 0}) == doctest::Approx(17.0 / 27.0).epsilon(1e-9));
    CHECK(res.output_spectrum.at({1, 0}) == doctest::Approx(7.0 / 54.0).epsilon(1e-9));
    CHECK(res.output_spectrum.at({2, 0}) == doctest::Approx(7.0 / 54.0).epsilon(1e-9));
    for (int l = 1; l < 3; ++l)
        for (int k = 0; k < 3; ++k)
            CHECK(res.output_spectrum.at({k, l}) == doctest::Approx(1.0 / 54.0).epsilon(1e-9));
}

TEST_CASE("fimax_step fixed points") {
    const auto bell = pure_to_density(bell_state(2, {0, 0}));
    const auto res = fimax_step(bell);
    CHECK(res.output_spectrum.at({0, 0}) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(max_abs_diff(res.output.matrix(), bell.matrix()) < 1e-10);

    for (int d : {2, 3}) {
        const auto mixed = maximally_mixed(d);
        const auto r = fimax_step(mixed);
        CHECK(max_abs_diff(r.output.matrix(), mixed.matrix()) < 1e-10);
    }
}

TEST_CASE("spectrum path matches the dense simulation on random Bell-diagonal states") {
    for (int d : {2, 3}) {
        for (int trial = 0; trial < 100; ++trial) {
            auto rng = derive_stream(800 + d, trial);
            const auto rho = bell_diagonal_state(sample_bds(d, rng));
            const auto fast = fimax_step(rho);
            const auto dense = fimax_step_dense(rho);
            CHECK(fast.correction == dense.correction);
            CHECK(std::abs(fast.success_prob - dense.success_prob) < 1e-9);
            for (int pos = 0; pos < d * d; ++pos)
                CHECK(std::abs(fast.output_spectrum.p[pos] - dense.output_spectrum.p[pos]) < 1e-9);
        }
    }
}

TEST_CASE("dense path twirls non-Bell-diagonal inputs to the same result") {
    for (int d : {2, 3}) {
        auto rng = derive_stream(810 + d, 0);
        const auto rho = sample_haar_pure(d, rng);
        const auto fast = fimax_step(rho);
        const auto dense = fimax_step_dense(rho);
        for (int pos = 0; pos < d * d; ++pos)
            CHECK(std::abs(fast.output_spectrum.p[pos] - dense.output_spectrum.p[pos]) < 1e-9);
    }
}

TEST_CASE("fimax dense output stays Bell-diagonal") {
    for (int d : {2, 3}) {
        auto rng = derive_stream(820 + d, 0);
        for (int trial = 0; trial < 10; ++trial) {
            const auto rho = bell_diagonal_state(sample_bds(d, rng));
            const auto dense = fimax_step_dense(rho);
            CHECK(is_bell_diagonal(dense.output, 1e-10));
        }
    }
}

TEST_CASE("fimax never lowers the dominant Bell overlap") {
    for (int d : {2, 3}) {
        int successes = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            auto rng = derive_stream(830 + d, trial);
            const auto spec = sample_bds(d, rng);
            const auto rho = bell_diagonal_state(spec);
            if (!is_npt(rho, kNptTol)) continue;
            ++successes;
            const auto res = fimax_step_spectrum(spec);
            double max_in = 0.0;
            for (double p : spec.p) max_in = std::max(max_in, p);
            CHECK(res.output_spectrum.at({0, 0}) >= max_in - 1e-9);
        }
        CHECK(successes > 100);  // the ensemble is not vacuous
    }
}

TEST_CASE("bbpssw reproduces the standard recurrence formula on Werner states") {
    // Oracle: F' = (F^2 + q^2) / (F^2 + 2Fq + 5q^2), q = (1 - F)/3.
    auto formula = [](double f) {
        const double q = (1.0 - f) / 3.0;
        return (f * f + q * q) / (f * f + 2.0 * f * q + 5.0 * q * q);
    };
    for (double f : {0.75, 0.6, 0.9}) {
        const auto rho = bell_diagonal_state(detail::isotropic_spectrum(2, f));
        const auto res = baseline_step(rho, Protocol::bbpssw);
        CHECK(res.output_spectrum.at({0, 0}) == doctest::Approx(formula(f)).epsilon(1e-9));
    }
    CHECK(formula(0.75) == doctest::Approx(41.0 / 52.0).epsilon(1e-12));
}

TEST_CASE("dejmps improves the reference d=2 Bell-diagonal state") {
    BellSpectrum spec{2, {0.7, 0.1, 0.1, 0.1}};
    const auto res = baseline_step(bell_diagonal_state(spec), Protocol::dejmps);
    CHECK(res.output_spectrum.at({0, 0}) > 0.7);
}

TEST_CASE("every protocol fixes the target Bell state") {
    for (Protocol p : {Protocol::fimax, Protocol::bbpssw, Protocol::dejmps, Protocol::adgj,
                       Protocol::p1p2}) {
        const auto bell = pure_to_density(bell_state(2, {0, 0}));
        const auto res = protocol_step(bell, p);
        CHECK(res.output_spectrum.at({0, 0}) == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (Protocol p : {Protocol::fimax, Protocol::bbpssw, Protocol::adgj, Protocol::p1p2}) {
        const auto bell = pure_to_density(bell_state(3, {0, 0}));
        const auto res = protocol_step(bell, p);
        CHECK(res.output_spectrum.at({0, 0}) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("spectral baseline maps match dense two-copy circuit simulations") {
    // adgj: subtractive GXOR on both sides, no rotations.
    for (int d : {2, 3}) {
        for (int trial = 0; trial < 10; ++trial) {
            auto rng = derive_stream(840 + d, trial);
            const auto spec = sample_bds(d, rng);
            const auto rho = bell_diagonal_state(spec);
            double dense_success = 0.0;
            const auto id = ComplexMatrix::identity(d);
            const auto dense = testing::dense_coincidence_round(rho, id, id, 1, &dense_success);
            double fast_success = 0.0;
            const auto fast = detail::gxor_sub_coincidence_map(spec, &fast_success);
            CHECK(std::abs(dense_success - fast_success) < 1e-10);
            const auto dense_spec = bell_spectrum(dense);
            for (int pos = 0; pos < d * d; ++pos)
                CHECK(std::abs(dense_spec.p[pos] - fast.p[pos]) < 1e-10);
        }
    }
    // bbpssw stage: additive GXOR on both sides.
    for (int d : {2, 3}) {
        auto rng = derive_stream(850 + d, 0);
        const auto spec = sample_bds(d, rng);
        const auto rho = bell_diagonal_state(spec);
        double dense_success = 0.0;
        const auto id = ComplexMatrix::identity(d);
        const auto dense = testing::dense_coincidence_round(rho, id, id, 0, &dense_success);
        double fast_success = 0.0;
        const auto fast = detail::gxor_add_coincidence_map(spec, &fast_success);
        CHECK(std::abs(dense_success - fast_success) < 1e-10);
        const auto dense_spec = bell_spectrum(dense);
        for (int pos = 0; pos < d * d; ++pos)
            CHECK(std::abs(dense_spec.p[pos] - fast.p[pos]) < 1e-10);
    }
    // dejmps: the +-pi/4 X rotations followed by bilateral CNOT at d = 2.
    {
        const double inv = 1.0 / std::sqrt(2.0);
        ComplexMatrix rot_a(2, 2), rot_b(2, 2);
        rot_a(0, 0) = rot_a(1, 1) = inv;
        rot_a(0, 1) = rot_a(1, 0) = Complex(0.0, -inv);
        rot_b = rot_a.conjugate();
        for (int trial = 0; trial < 10; ++trial) {
            auto rng = derive_stream(860, trial);
            const auto spec = sample_bds(2, rng);
            const auto rho = bell_diagonal_state(spec);
            double dense_success = 0.0;
            const auto dense =
                testing::dense_coincidence_round(rho, rot_a, rot_b, 0, &dense_success);
            double fast_success = 0.0;
            const auto fast =
                detail::gxor_sub_coincidence_map(detail::dejmps_relabel(spec), &fast_success);
            CHECK(std::abs(dense_success - fast_success) < 1e-10);
            const auto dense_spec = bell_spectrum(dense);
            for (int pos = 0; pos < 4; ++pos)
                CHECK(std::abs(dense_spec.p[pos] - fast.p[pos]) < 1e-10);
        }
    }
}

TEST_CASE("dejmps is registered for d = 2 only") {
    auto rng = derive_stream(870, 0);
    const auto rho = bell_diagonal_state(sample_bds(3, rng));
    CHECK_THROWS_AS(baseline_step(rho, Protocol::dejmps), std::invalid_argument);
    CHECK_THROWS_AS(classify_distillability(rho, Protocol::dejmps), std::invalid_argument);
}

TEST_CASE("classifier on the reference input distills in one iteration") {
    const auto rho = bell_diagonal_state(reference_input());
    const auto verdict = classify_distillability(rho, Protocol::fimax);
    CHECK(verdict.distillable);
    CHECK(verdict.iterations_used == 1);
    CHECK(verdict.reason == VerdictReason::fidelity_threshold_reached);
    CHECK(verdict.final_fidelity == doctest::Approx(17.0 / 27.0).epsilon(1e-9));
}

TEST_CASE("classifier declares the maximally mixed state undistillable") {
    for (int d : {2, 3}) {
        const auto verdict = classify_distillability(maximally_mixed(d), Protocol::fimax);
        CHECK_FALSE(verdict.distillable);
        CHECK((verdict.reason == VerdictReason::output_ppt ||
               verdict.reason == VerdictReason::fixpoint_reached));
    }
}

TEST_CASE("classifier distills a shifted d=2 Bell-diagonal state with FIMAX") {
    BellSpectrum spec{2, {0.1, 0.6, 0.2, 0.1}};
    const auto verdict = classify_distillability(bell_diagonal_state(spec), Protocol::fimax);
    CHECK(verdict.distillable);
}

TEST_CASE("one-iteration dichotomy on random low-fidelity NPT states") {
    for (int d : {2, 3}) {
        for (int trial = 0; trial < 200; ++trial) {
            auto rng = derive_stream(880 + d, trial);
            const auto rho = bell_diagonal_state(sample_bds(d, rng));
            if (!passes_restriction(rho, Restriction::normal)) continue;
            const auto res = fimax_step(rho);
            const bool high_fidelity = res.output_spectrum.at({0, 0}) > 1.0 / d - 1e-9;
            const bool went_ppt = !is_npt(res.output, kNptTol);
            CHECK((high_fidelity || went_ppt));
        }
    }
}
