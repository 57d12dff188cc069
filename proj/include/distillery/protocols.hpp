#pragma once

// Recurrence distillation protocols: FIMAX plus the baseline protocols
// behind a common step interface, and the distillability classifier.
//
// FIMAX has two evaluation paths. The dense path simulates the full
// d^4 x d^4 two-copy pipeline (twirl, stabilizer measurements on both sides,
// decode, discard, correct) and serves as ground truth. The fast path works
// purely on the d^4-entry two-copy error distribution via coset arithmetic
// and the precomputed coset -> output-Bell-index maps; the two are
// interchangeable on Bell-diagonal inputs (cross-checked by tests to 1e-9).

#include <optional>
#include <string>

#include "distillery/densmat.hpp"
#include "distillery/stabilizer.hpp"
#include "distillery/weyl.hpp"

namespace distillery {

inline constexpr double kFixpointTol = 1e-10;
inline constexpr double kFidelityMargin = 1e-9;

enum class Protocol { fimax, bbpssw, dejmps, adgj, p1p2 };

Protocol protocol_from_name(const std::string& name);
std::string protocol_name(Protocol p);
bool protocol_supported(Protocol p, int d);

struct StabilizerChoice {
    Generator generator;
    int s_max = 0;
    Coset c_max;
    double score = 0.0;         // P(C_max) / P(epsilon(s_max))
    double success_prob = 0.0;  // P(epsilon(s_max))
};

struct IterationResult {
    DensityOperator output;          // single-copy, normalized
    BellSpectrum output_spectrum;    // Bell diagonal of the output
    double success_prob = 0.0;
    std::optional<StabilizerChoice> choice;  // FIMAX only
    WeylIndex correction;            // (k_max, l_max) applied in the last step
};

// Steps 2-3 of the protocol: exhaustive maximization of P(C)/P(epsilon(s))
// over all stabilizer generators, symplectic values with positive class
// probability, and cosets. Ties break toward larger P(epsilon(s)), then the
// lexicographically smallest generator, then the smallest coset
// representative. Throws on an all-zero distribution.
StabilizerChoice fimax_select(const TwoCopyDistribution& dist);

// One FIMAX round via the fast coset-arithmetic path. Non-Bell-diagonal
// inputs are twirled first (step 1).
IterationResult fimax_step(const DensityOperator& rho);

// Same round evaluated on the Bell spectrum directly.
IterationResult fimax_step_spectrum(const BellSpectrum& spec);

// One FIMAX round via the dense two-copy matrix simulation (ground truth).
IterationResult fimax_step_dense(const DensityOperator& rho);

// One round of a baseline recurrence protocol. dejmps requires d = 2.
IterationResult baseline_step(const DensityOperator& rho, Protocol protocol);

// Dispatches on the protocol enum (fimax included).
IterationResult protocol_step(const DensityOperator& rho, Protocol protocol);

enum class VerdictReason {
    fidelity_threshold_reached,
    output_ppt,
    fixpoint_reached,
    iteration_cap,
};

std::string verdict_reason_name(VerdictReason reason);

struct DistillVerdict {
    bool distillable = false;
    int iterations_used = 0;
    double final_fidelity = 0.0;
    VerdictReason reason = VerdictReason::iteration_cap;
};

// Iterates the protocol step; each round consumes two copies of the previous
// round's output. Declares distillable once the output fidelity with
// |Omega00> exceeds 1/d + 1e-9, undistillable on a PPT output or a fixpoint
// with fidelity <= 1/d, and otherwise stops at the iteration cap.
DistillVerdict classify_distillability(const DensityOperator& rho, Protocol protocol,
                                       int max_iters = 10);

// Spectral fast maps used by the baseline steps; exposed for tests, which
// compare them against dense two-copy circuit simulations.
namespace detail {

// Bilateral GXOR |a,b> -> |a, a-b> on both sides, coincident outcomes kept:
// components with l1 = l2 survive and map to (k1 + k2, l1).
BellSpectrum gxor_sub_coincidence_map(const BellSpectrum& spec, double* success_prob);

// Bilateral GXOR |a,b> -> |a, b+a> on both sides, coincident outcomes kept:
// components with l1 + l2 = 0 survive and map to (k1 - k2, l1).
BellSpectrum gxor_add_coincidence_map(const BellSpectrum& spec, double* success_prob);

// Phase-coincidence dual of the subtractive map (Fourier-conjugated frame).
BellSpectrum gxor_dual_coincidence_map(const BellSpectrum& spec, double* success_prob);

// DEJMPS single-qubit rotations relabel the d = 2 Bell coefficients by
// swapping positions (1,0) and (1,1).
BellSpectrum dejmps_relabel(const BellSpectrum& spec);

// Isotropic twirl: keeps the Omega00 overlap, uniformizes the rest.
BellSpectrum isotropic_spectrum(int d, double f);

}  // namespace detail

}  // namespace distillery
