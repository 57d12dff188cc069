#pragma once

// Weyl-Heisenberg operators, Bell bases (standard and generalized), the Weyl
// twirl channel, Bell spectra and the two-copy error distribution.
//
// Index conventions, fixed project-wide:
//   W[k,l] has entry omega^{jk} at (row j, column (j+l) mod d).
//   Bell states are ordered first by shift then by phase: position = l*d + k.
//   Error elements (k1,l1,k2,l2) flatten to k1*d^3 + l1*d^2 + k2*d + l2, so
//   flat order coincides with lexicographic order on the component tuple.

#include <vector>

#include "distillery/densmat.hpp"
#include "distillery/matrix.hpp"

namespace distillery {

bool is_prime(int d);

struct WeylIndex {
    int k = 0;  // phase index
    int l = 0;  // shift index
    bool operator==(const WeylIndex&) const = default;
};

struct ErrorElement {
    WeylIndex first;
    WeylIndex second;
    bool operator==(const ErrorElement&) const = default;
};

inline int bell_position(int d, WeylIndex idx) { return idx.l * d + idx.k; }
inline WeylIndex bell_index_at(int d, int pos) { return WeylIndex{pos % d, pos / d}; }

int error_flat_index(int d, const ErrorElement& e);
ErrorElement error_from_flat(int d, int flat);
ErrorElement error_add(int d, const ErrorElement& a, const ErrorElement& b);
ErrorElement error_scale(int d, const ErrorElement& a, int c);

// omega^power with omega = exp(2 pi i / d).
Complex root_of_unity(int d, long long power);

// The d x d unitary W[k,l]; throws if d is not prime.
ComplexMatrix weyl_operator(int d, WeylIndex idx);

// |Omega[k,l]> = (W[k,l] x I) |Omega[0,0]> on the (A, B) layout.
PureStateVector bell_state(int d, WeylIndex idx);

// Two-copy Bell state |Omega(e)> on the (A1, A2, B1, B2) layout.
PureStateVector two_copy_bell_state(int d, const ErrorElement& e);

struct BellSpectrum {
    int d = 0;
    std::vector<double> p;  // length d^2, position l*d + k

    double& at(WeylIndex idx) { return p[bell_position(d, idx)]; }
    double at(WeylIndex idx) const { return p[bell_position(d, idx)]; }
    double sum() const;
    // Largest entry; ties resolved toward the smallest position.
    WeylIndex argmax() const;
};

struct PhaseMatrix {
    int d = 0;
    ComplexMatrix alpha;  // d x d, unimodular entries
};

// Generalized Weyl operator V^alpha[k,l] = sum_j omega^{jk} alpha[j+l,l] |j><j+l|.
ComplexMatrix generalized_weyl_operator(const PhaseMatrix& phase, WeylIndex idx);

// All d^2 states |Phi^alpha[k,l]>, ordered by bell_position.
std::vector<PureStateVector> generalized_bell_basis(const PhaseMatrix& phase);

// Weyl twirl channel, Eq.-level sum over (W[i,j] x W[-i,j]) conjugations.
// Projects onto the Bell-diagonal family; diagonal Bell overlaps are
// preserved exactly.
DensityOperator weyl_twirl(const DensityOperator& rho);

// p[k,l] = <Omega[k,l]| rho |Omega[k,l]>. Negative overlaps above -1e-12 are
// clamped to zero; anything more negative throws (invalid input state).
BellSpectrum bell_spectrum(const DensityOperator& rho);

// Bell-diagonal state with the given spectrum.
DensityOperator bell_diagonal_state(const BellSpectrum& spec);

// True iff all off-diagonal Bell-basis entries are below tol in magnitude.
bool is_bell_diagonal(const DensityOperator& rho, double tol = 1e-12);

struct TwoCopyDistribution {
    int d = 0;
    std::vector<double> p;  // length d^4, error_flat_index order

    double at(const ErrorElement& e) const { return p[error_flat_index(d, e)]; }
    double sum() const;
};

// p([e1, e2]) = spec(e1) * spec(e2) over all d^4 two-copy error elements.
TwoCopyDistribution two_copy_error_distribution(const BellSpectrum& spec);

std::string bell_spectrum_to_json(const BellSpectrum& spec);
BellSpectrum bell_spectrum_from_json(const std::string& text);
std::string phase_matrix_to_json(const PhaseMatrix& phase);
PhaseMatrix phase_matrix_from_json(const std::string& text);

}  // namespace distillery
