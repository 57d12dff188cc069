#include <doctest.h>

#include <cmath>

#include "distillery/matrix.hpp"
#include "distillery/weyl.hpp"
#include "test_helpers.hpp"

using namespace distillery;

TEST_CASE("kron of d=2 phase operators is diag(1,-1,-1,1)") {
    const auto z = weyl_operator(2, {1, 0});
    const auto zz = kron(z, z);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double expected = i == j ? (i == 0 || i == 3 ? 1.0 : -1.0) : 0.0;
            CHECK(std::abs(zz(i, j) - Complex(expected)) < 1e-15);
        }
}

TEST_CASE("kron of identities is the identity") {
    for (int d : {2, 3}) {
        const auto id = kron(ComplexMatrix::identity(d), ComplexMatrix::identity(d));
        CHECK(max_abs_diff(id, ComplexMatrix::identity(d * d)) == 0.0);
    }
}

TEST_CASE("kron entries match the index-arithmetic oracle at d=3") {
    const auto a = weyl_operator(3, {1, 0});
    const auto b = weyl_operator(3, {0, 1});
    const auto k = kron(a, b);
    // Brute-force oracle: kron(A,B)[(i,j),(m,n)] = A[i,m] * B[j,n].
    auto rng = derive_stream(17, 0);
    for (int probe = 0; probe < 5; ++probe) {
        const int i = static_cast<int>(rng.next_u64() % 3), j = static_cast<int>(rng.next_u64() % 3);
        const int m = static_cast<int>(rng.next_u64() % 3), n = static_cast<int>(rng.next_u64() % 3);
        CHECK(std::abs(k(i * 3 + j, m * 3 + n) - a(i, m) * b(j, n)) < 1e-15);
    }
}

TEST_CASE("hermitian_spectrum of the identity") {
    const auto spec = hermitian_spectrum(ComplexMatrix::identity(4));
    for (double v : spec) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eigendecomposition reconstructs a random 9x9 Hermitian matrix") {
    auto rng = derive_stream(18, 0);
    const auto m = testing::random_hermitian(9, rng);
    const auto eig = hermitian_eigensystem(m);

    double trace = 0.0;
    for (int i = 0; i < 9; ++i) trace += m(i, i).real();
    double sum = 0.0;
    for (double v : eig.values) sum += v;
    CHECK(std::abs(sum - trace) < 1e-8);

    ComplexMatrix rebuilt(9, 9);
    for (int k = 0; k < 9; ++k)
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 9; ++j)
                rebuilt(i, j) += eig.values[k] * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    CHECK(max_abs_diff(rebuilt, m) < 1e-8);

    for (std::size_t k = 1; k < eig.values.size(); ++k) CHECK(eig.values[k - 1] <= eig.values[k]);
}

TEST_CASE("hermitian_spectrum rejects non-Hermitian input") {
    ComplexMatrix m(2, 2);
    m(0, 1) = Complex(1.0, 0.0);
    m(1, 0) = Complex(0.5, 0.0);
    CHECK_THROWS_AS(hermitian_spectrum(m), std::invalid_argument);
}
