#pragma once

// Density operators and pure states over labeled tensor factors. Each factor
// carries a dimension and a side tag (A or B); the partial transpose, the
// NPT test and partial traces are expressed against that factor structure.

#include <cstdint>
#include <string>
#include <vector>

#include "distillery/matrix.hpp"

namespace distillery {

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;       // min eigenvalue >= -kPsdTol
inline constexpr double kNptTol = 1e-9;        // default negativity threshold
inline constexpr double kNormTol = 1e-12;      // pure-state norm tolerance

enum class Side : std::uint8_t { A = 0, B = 1 };

struct FactorLayout {
    std::vector<int> dims;
    std::vector<Side> sides;

    int total_dim() const;
    std::size_t count() const { return dims.size(); }
    bool operator==(const FactorLayout& other) const = default;
};

// Layout of a single bipartite d x d system: factors (A, B).
FactorLayout bipartite_layout(int d);
// Layout of two copies arranged as (A1, A2, B1, B2).
FactorLayout two_copy_layout(int d);

class PureStateVector {
public:
    PureStateVector(std::vector<Complex> amplitudes, FactorLayout layout);

    const std::vector<Complex>& amplitudes() const { return amp_; }
    const FactorLayout& layout() const { return layout_; }
    int dim() const { return static_cast<int>(amp_.size()); }

private:
    std::vector<Complex> amp_;
    FactorLayout layout_;
};

class DensityOperator {
public:
    // Validates Hermiticity (1e-10), unit trace (1e-10) and positivity
    // (min eigenvalue >= -1e-10). Throws std::invalid_argument on violation.
    static DensityOperator make_checked(ComplexMatrix m, FactorLayout layout);
    // For internal construction paths that are positive by construction.
    static DensityOperator make_unchecked(ComplexMatrix m, FactorLayout layout);

    const ComplexMatrix& matrix() const { return mat_; }
    const FactorLayout& layout() const { return layout_; }
    int dim() const { return static_cast<int>(mat_.rows()); }

private:
    DensityOperator(ComplexMatrix m, FactorLayout layout)
        : mat_(std::move(m)), layout_(std::move(layout)) {}

    ComplexMatrix mat_;
    FactorLayout layout_;
};

DensityOperator pure_to_density(const PureStateVector& psi);

// Transposes the indices of a single named tensor factor.
ComplexMatrix partial_transpose(const DensityOperator& rho, std::size_t factor);

// Transposes all factors on the given side jointly (the usual "PT over B").
ComplexMatrix partial_transpose_side(const DensityOperator& rho, Side side);

// True iff the minimum eigenvalue of the B-side partial transpose is < -tol.
bool is_npt(const DensityOperator& rho, double tol = kNptTol);

// <target| rho |target>; throws on dimension mismatch.
double fidelity(const DensityOperator& rho, const PureStateVector& target);

// Reorders tensor factors; perm[i] names the source factor that moves to
// slot i of the result.
DensityOperator permute_factors(const DensityOperator& rho, const std::vector<std::size_t>& perm);
PureStateVector permute_factors(const PureStateVector& psi, const std::vector<std::size_t>& perm);

// Traces out every factor whose keep flag is false.
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<bool>& keep);

// JSON state format: {"dims": [...], "ab_split": [...A-side factor indices...],
// "re": [[...]], "im": [[...]]}, row-major.
std::string density_to_json(const DensityOperator& rho);
DensityOperator density_from_json(const std::string& text);

}  // namespace distillery
