#include "distillery/sampling.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace distillery {

std::string family_name(Family f) {
    switch (f) {
        case Family::pure_haar: return "pure";
        case Family::bds_uniform: return "bds";
        case Family::gbds: return "gbds";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "pure" || name == "pure_haar") return Family::pure_haar;
    if (name == "bds" || name == "bds_uniform") return Family::bds_uniform;
    if (name == "gbds") return Family::gbds;
    throw std::invalid_argument("unknown family: " + name);
}

std::string restriction_name(Restriction r) {
    return r == Restriction::normal ? "normal" : "strict";
}

Restriction restriction_from_name(const std::string& name) {
    if (name == "normal") return Restriction::normal;
    if (name == "strict") return Restriction::strict;
    throw std::invalid_argument("unknown restriction: " + name);
}

namespace {

std::uint64_t splitmix_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t RngStream::next_u64() { return splitmix_next(state_); }

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_positive_double() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = next_positive_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
}

RngStream derive_stream(std::uint64_t seed, std::uint64_t index) {
    return RngStream(mix64(mix64(seed) ^ mix64(index + 0x632BE59BD9B4E019ULL)));
}

PureStateVector sample_haar_pure_vector(int d, RngStream& rng) {
    std::vector<Complex> amp(static_cast<std::size_t>(d) * d);
    double norm = 0.0;
    for (auto& a : amp) {
        a = Complex(rng.next_gaussian(), rng.next_gaussian());
        norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (auto& a : amp) a /= norm;
    return PureStateVector(std::move(amp), bipartite_layout(d));
}

DensityOperator sample_haar_pure(int d, RngStream& rng) {
    return pure_to_density(sample_haar_pure_vector(d, rng));
}

BellSpectrum sample_bds(int d, RngStream& rng) {
    BellSpectrum spec{d, std::vector<double>(static_cast<std::size_t>(d) * d)};
    double total = 0.0;
    for (auto& x : spec.p) {
        x = -std::log(rng.next_positive_double());
        total += x;
    }
    for (auto& x : spec.p) x /= total;
    return spec;
}

PhaseMatrix sample_phase_matrix(int d, RngStream& rng) {
    PhaseMatrix phase{d, ComplexMatrix(d, d)};
    for (int s = 0; s < d; ++s)
        for (int t = 0; t < d; ++t) {
            const double angle = 2.0 * std::numbers::pi * rng.next_double();
            phase.alpha(s, t) = Complex(std::cos(angle), std::sin(angle));
        }
    return phase;
}

bool passes_restriction(const DensityOperator& rho, Restriction restriction) {
    const int d = rho.layout().dims[0];
    const double bound = 1.0 / d;
    if (restriction == Restriction::normal) {
        if (fidelity(rho, bell_state(d, {0, 0})) > bound) return false;
    } else {
        for (int pos = 0; pos < d * d; ++pos)
            if (fidelity(rho, bell_state(d, bell_index_at(d, pos))) > bound) return false;
    }
    return is_npt(rho, kNptTol);
}

FilterResult filter_low_fidelity(const std::function<DensityOperator(RngStream&)>& sample,
                                 std::uint64_t seed, Restriction restriction, int target_count,
                                 long long max_attempts) {
    if (max_attempts < target_count)
        throw std::invalid_argument("filter_low_fidelity: max_attempts < target_count");
    FilterResult out;
    out.states.reserve(target_count);
    for (long long attempt = 0; attempt < max_attempts; ++attempt) {
        auto rng = derive_stream(seed, static_cast<std::uint64_t>(attempt));
        auto rho = sample(rng);
        out.attempts = attempt + 1;
        if (passes_restriction(rho, restriction)) {
            out.states.push_back(std::move(rho));
            if (static_cast<int>(out.states.size()) == target_count) break;
        }
    }
    out.acceptance_rate =
        out.attempts > 0 ? static_cast<double>(out.states.size()) / static_cast<double>(out.attempts)
                         : 0.0;
    out.exhausted = static_cast<int>(out.states.size()) < target_count;
    return out;
}

GbdsSystem sample_gbds_system(int d, std::uint64_t seed, std::uint64_t basis_index,
                              int states_per_basis, Restriction restriction,
                              long long max_attempts) {
    GbdsSystem sys;
    // Stream tag 1 for basis phases, tag 0 for the per-state simplex draws;
    // both are keyed by the basis index so bases are independent.
    auto basis_rng = derive_stream(seed, (1ULL << 62) | basis_index);
    sys.phase = sample_phase_matrix(d, basis_rng);
    const auto basis = generalized_bell_basis(sys.phase);

    auto sample = [&](RngStream& rng) {
        const auto weights = sample_bds(d, rng);
        ComplexMatrix m(d * d, d * d);
        for (int pos = 0; pos < d * d; ++pos) {
            const auto& a = basis[pos].amplitudes();
            for (int i = 0; i < d * d; ++i)
                for (int j = 0; j < d * d; ++j)
                    m(i, j) += weights.p[pos] * a[i] * std::conj(a[j]);
        }
        return DensityOperator::make_unchecked(std::move(m), bipartite_layout(d));
    };
    const std::uint64_t state_seed = mix64(seed ^ mix64(basis_index + 0x9E3779B97F4A7C15ULL));
    sys.filtered = filter_low_fidelity(sample, state_seed, restriction, states_per_basis,
                                       max_attempts);
    return sys;
}

std::string sample_config_to_json(const SampleConfig& config) {
    nlohmann::ordered_json j;
    j["family"] = family_name(config.family);
    j["d"] = config.d;
    j["restriction"] = restriction_name(config.restriction);
    j["target_count"] = config.target_count;
    j["seed"] = config.seed;
    if (config.family == Family::gbds) {
        j["gbds_bases"] = config.gbds_bases;
        j["gbds_states_per_basis"] = config.gbds_states_per_basis;
    }
    return j.dump();
}

std::string samples_to_jsonl(const SampleConfig& config,
                             const std::vector<DensityOperator>& states) {
    std::ostringstream out;
    out << sample_config_to_json(config) << '\n';
    for (const auto& s : states) out << density_to_json(s) << '\n';
    return out.str();
}

std::vector<DensityOperator> samples_from_jsonl(const std::string& text, SampleConfig* config_out) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("samples_from_jsonl: empty input");
    if (config_out) {
        const auto j = nlohmann::json::parse(line);
        config_out->family = family_from_name(j.at("family").get<std::string>());
        config_out->d = j.at("d").get<int>();
        config_out->restriction = restriction_from_name(j.at("restriction").get<std::string>());
        config_out->target_count = j.at("target_count").get<int>();
        config_out->seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("gbds_bases")) config_out->gbds_bases = j.at("gbds_bases").get<int>();
        if (j.contains("gbds_states_per_basis"))
            config_out->gbds_states_per_basis = j.at("gbds_states_per_basis").get<int>();
    }
    std::vector<DensityOperator> states;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        states.push_back(density_from_json(line));
    }
    return states;
}

}  // namespace distillery
