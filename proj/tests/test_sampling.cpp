#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "distillery/sampling.hpp"
#include "test_helpers.hpp"

using namespace distillery;

TEST_CASE("haar samples are normalized rank-one states") {
    for (int d : {2, 3}) {
        auto rng = derive_stream(900 + d, 0);
        const auto rho = sample_haar_pure(d, rng);
        CHECK(std::abs(rho.matrix().trace() - Complex(1.0)) < 1e-12);
        const auto spec = hermitian_spectrum(rho.matrix());
        CHECK(spec.back() == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(spec[spec.size() - 2]) < 1e-10);
    }
}

TEST_CASE("haar mean fidelity with the target Bell state is 1/d^2") {
    for (int d : {2, 3}) {
        const int n = 100000;
        const auto target = bell_state(d, {0, 0});
        double mean = 0.0;
        for (int i = 0; i < n; ++i) {
            auto rng = derive_stream(910 + d, i);
            const auto psi = sample_haar_pure_vector(d, rng);
            Complex ov = 0.0;
            for (int j = 0; j < d * d; ++j)
                ov += std::conj(target.amplitudes()[j]) * psi.amplitudes()[j];
            mean += std::norm(ov);
        }
        mean /= n;
        // For Haar overlaps the squared overlap is Beta-distributed with
        // mean 1/d^2 and variance (K-1)/(K^2 (K+1)), K = d^2.
        const double k = d * d;
        const double sigma = std::sqrt((k - 1.0) / (k * k * (k + 1.0)) / n);
        CHECK(std::abs(mean - 1.0 / k) < 3.0 * sigma);
    }
}

TEST_CASE("sampling is reproducible bit for bit") {
    for (int d : {2, 3}) {
        auto a = derive_stream(17, 3);
        auto b = derive_stream(17, 3);
        const auto s1 = sample_haar_pure(d, a);
        const auto s2 = sample_haar_pure(d, b);
        CHECK(max_abs_diff(s1.matrix(), s2.matrix()) == 0.0);
        auto c = derive_stream(18, 3);
        const auto s3 = sample_haar_pure(d, c);
        CHECK(max_abs_diff(s1.matrix(), s3.matrix()) > 0.0);
    }
}

TEST_CASE("bds samples lie on the simplex with uniform marginals") {
    const int n = 100000;
    double mean0 = 0.0;
    int corner = 0;
    for (int i = 0; i < n; ++i) {
        auto rng = derive_stream(21, i);
        const auto spec = sample_bds(2, rng);
        CHECK(spec.sum() == doctest::Approx(1.0).epsilon(1e-10));
        for (double p : spec.p) CHECK(p >= 0.0);
        mean0 += spec.p[0];
        corner += *std::max_element(spec.p.begin(), spec.p.end()) > 0.5 ? 1 : 0;
    }
    mean0 /= n;
    CHECK(std::abs(mean0 - 0.25) < 0.005);
    // Corner-volume oracle: P(max > 1/2) = 4 (1/2)^3 = 1/2 on the 3-simplex.
    CHECK(std::abs(static_cast<double>(corner) / n - 0.5) < 0.02);
}

TEST_CASE("gbds construction with trivial phases equals the standard BDS") {
    for (int d : {2, 3}) {
        PhaseMatrix phase{d, ComplexMatrix(d, d)};
        for (int s = 0; s < d; ++s)
            for (int t = 0; t < d; ++t) phase.alpha(s, t) = 1.0;
        const auto basis = generalized_bell_basis(phase);
        auto rng = derive_stream(23, d);
        const auto weights = sample_bds(d, rng);
        ComplexMatrix m(d * d, d * d);
        for (int pos = 0; pos < d * d; ++pos) {
            const auto& a = basis[pos].amplitudes();
            for (int i = 0; i < d * d; ++i)
                for (int j = 0; j < d * d; ++j)
                    m(i, j) += weights.p[pos] * a[i] * std::conj(a[j]);
        }
        CHECK(max_abs_diff(m, bell_diagonal_state(weights).matrix()) < 1e-12);
    }
}

TEST_CASE("gbds systems emit valid states diagonal in their own basis") {
    const auto sys = sample_gbds_system(3, 99, 0, 10, Restriction::normal, 10000);
    REQUIRE_FALSE(sys.filtered.exhausted);
    const auto basis = generalized_bell_basis(sys.phase);
    for (const auto& rho : sys.filtered.states) {
        CHECK_NOTHROW(DensityOperator::make_checked(rho.matrix(), rho.layout()));
        CHECK(passes_restriction(rho, Restriction::normal));
        for (int a = 0; a < 9; ++a)
            for (int b = 0; b < 9; ++b) {
                if (a == b) continue;
                Complex acc = 0.0;
                const auto& va = basis[a].amplitudes();
                const auto& vb = basis[b].amplitudes();
                for (int i = 0; i < 9; ++i) {
                    Complex row = 0.0;
                    for (int j = 0; j < 9; ++j) row += rho.matrix()(i, j) * vb[j];
                    acc += std::conj(va[i]) * row;
                }
                CHECK(std::abs(acc) < 1e-10);
            }
    }
}

TEST_CASE("strict d=2 BDS filtering exhausts instead of hanging") {
    auto sampler = [](RngStream& rng) { return bell_diagonal_state(sample_bds(2, rng)); };
    const auto result = filter_low_fidelity(sampler, 5, Restriction::strict, 3, 3000);
    CHECK(result.exhausted);
    CHECK(result.states.empty());
    CHECK(result.acceptance_rate == 0.0);
    CHECK(result.attempts == 3000);
}

TEST_CASE("restriction predicate rejects product states and accepts the reference input") {
    std::vector<Complex> prod(9, Complex(0.0));
    prod[0] = 1.0;
    CHECK_FALSE(passes_restriction(pure_to_density(PureStateVector(prod, bipartite_layout(3))),
                                   Restriction::normal));

    BellSpectrum ref{3, std::vector<double>(9, 1.0 / 18.0)};
    ref.at({2, 1}) = 5.0 / 9.0;
    CHECK(passes_restriction(bell_diagonal_state(ref), Restriction::normal));
    // Its fidelity 1/18 < 1/3 but the (2,1) overlap violates strict mode.
    CHECK_FALSE(passes_restriction(bell_diagonal_state(ref), Restriction::strict));
}

TEST_CASE("filtered states satisfy their restriction exactly") {
    auto sampler = [](RngStream& rng) { return sample_haar_pure(3, rng); };
    const auto result = filter_low_fidelity(sampler, 31, Restriction::strict, 25, 25000);
    REQUIRE_FALSE(result.exhausted);
    const double bound = 1.0 / 3.0;
    for (const auto& rho : result.states) {
        CHECK(is_npt(rho));
        for (int pos = 0; pos < 9; ++pos)
            CHECK(fidelity(rho, bell_state(3, bell_index_at(3, pos))) <= bound);
    }
}

TEST_CASE("haar fidelity distribution is invariant under a fixed unitary") {
    const int n = 10000;
    const int d = 2;
    const auto target = bell_state(d, {0, 0});
    // Fixed local unitary built from a Weyl operator pair.
    const auto u = kron(weyl_operator(d, {1, 1}), weyl_operator(d, {0, 1}));
    std::vector<double> base, rotated;
    base.reserve(n);
    rotated.reserve(n);
    for (int i = 0; i < n; ++i) {
        auto rng = derive_stream(37, i);
        const auto psi = sample_haar_pure_vector(d, rng);
        const auto rpsi = apply(u, psi.amplitudes());
        Complex o1 = 0.0, o2 = 0.0;
        for (int j = 0; j < d * d; ++j) {
            o1 += std::conj(target.amplitudes()[j]) * psi.amplitudes()[j];
            o2 += std::conj(target.amplitudes()[j]) * rpsi[j];
        }
        base.push_back(std::norm(o1));
        rotated.push_back(std::norm(o2));
    }
    std::sort(base.begin(), base.end());
    std::sort(rotated.begin(), rotated.end());
    // Two-sample Kolmogorov-Smirnov statistic.
    double ks = 0.0;
    std::size_t i = 0, j = 0;
    while (i < base.size() && j < rotated.size()) {
        if (base[i] <= rotated[j]) ++i;
        else ++j;
        ks = std::max(ks, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / n));
    }
    // alpha = 0.001 critical value for n = m = 10^4.
    CHECK(ks < 1.95 * std::sqrt(2.0 / n));
}

TEST_CASE("sample sets persist through JSON lines") {
    SampleConfig config;
    config.family = Family::pure_haar;
    config.d = 2;
    config.restriction = Restriction::normal;
    config.target_count = 4;
    config.seed = 11;
    auto sampler = [&](RngStream& rng) { return sample_haar_pure(2, rng); };
    const auto filtered = filter_low_fidelity(sampler, config.seed, config.restriction,
                                              config.target_count, 4000);
    const auto text = samples_to_jsonl(config, filtered.states);
    SampleConfig parsed_config;
    const auto parsed = samples_from_jsonl(text, &parsed_config);
    REQUIRE(parsed.size() == filtered.states.size());
    CHECK(parsed_config.seed == config.seed);
    CHECK(parsed_config.family == Family::pure_haar);
    for (std::size_t s = 0; s < parsed.size(); ++s)
        CHECK(max_abs_diff(parsed[s].matrix(), filtered.states[s].matrix()) == 0.0);
}
