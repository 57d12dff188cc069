#pragma once

// Random state generation for the three analyzed families and the
// NPT / low-fidelity rejection filter. All randomness flows through
// counter-derived SplitMix64 streams: stream i of seed s is a pure function
// of (s, i), so sample sets are reproducible bit for bit and independent of
// evaluation order.

#include <cstdint>
#include <functional>
#include <vector>

#include "distillery/densmat.hpp"
#include "distillery/weyl.hpp"

namespace distillery {

enum class Family { pure_haar, bds_uniform, gbds };
enum class Restriction { normal, strict };

std::string family_name(Family f);
Family family_from_name(const std::string& name);
std::string restriction_name(Restriction r);
Restriction restriction_from_name(const std::string& name);

struct SampleConfig {
    Family family = Family::bds_uniform;
    int d = 2;
    Restriction restriction = Restriction::normal;
    int target_count = 1000;
    std::uint64_t seed = 0;
    int gbds_bases = 100;            // gbds only
    int gbds_states_per_basis = 100; // gbds only
};

class RngStream {
public:
    explicit RngStream(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double next_double();
    // Uniform in (0, 1]; safe for logarithms.
    double next_positive_double();
    double next_gaussian();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stream index i of the given seed; independent of all other indices.
RngStream derive_stream(std::uint64_t seed, std::uint64_t index);

// Haar-random pure state on C^d x C^d: normalized vector of iid standard
// complex Gaussians.
DensityOperator sample_haar_pure(int d, RngStream& rng);
PureStateVector sample_haar_pure_vector(int d, RngStream& rng);

// Flat-Dirichlet point on the (d^2 - 1)-simplex (normalized exponentials).
BellSpectrum sample_bds(int d, RngStream& rng);

// Uniformly random matrix of complex phases.
PhaseMatrix sample_phase_matrix(int d, RngStream& rng);

// Predicate used by the filter: NPT plus the active low-fidelity
// restriction, evaluated on the raw state.
bool passes_restriction(const DensityOperator& rho, Restriction restriction);

struct FilterResult {
    std::vector<DensityOperator> states;
    long long attempts = 0;
    double acceptance_rate = 0.0;
    bool exhausted = false;
};

// Rejection-samples candidate states (candidate i drawn from stream i) until
// target_count pass or max_attempts candidates have been tried. Exhaustion
// is a reported outcome, not an error.
FilterResult filter_low_fidelity(const std::function<DensityOperator(RngStream&)>& sample,
                                 std::uint64_t seed, Restriction restriction, int target_count,
                                 long long max_attempts);

// One generalized Bell basis plus states_per_basis filtered diagonal
// mixtures in that basis.
struct GbdsSystem {
    PhaseMatrix phase;
    FilterResult filtered;
};

GbdsSystem sample_gbds_system(int d, std::uint64_t seed, std::uint64_t basis_index,
                              int states_per_basis, Restriction restriction,
                              long long max_attempts);

// JSON-lines persistence: one header line echoing the config, one state per
// line in the densmat-core format.
std::string samples_to_jsonl(const SampleConfig& config, const std::vector<DensityOperator>& states);
std::vector<DensityOperator> samples_from_jsonl(const std::string& text, SampleConfig* config_out);

std::string sample_config_to_json(const SampleConfig& config);

}  // namespace distillery
