#pragma once

// Experiment orchestration: distillable-share runs over sampled state
// families, the worked-example regression record, report emission and the
// CLI entry point.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "distillery/protocols.hpp"
#include "distillery/sampling.hpp"

namespace distillery {

struct ProtocolShare {
    int distilled = 0;
    int total = 0;
    double share = 0.0;
    // gbds statistics over the per-basis shares.
    std::vector<double> per_basis;
    double share_max = 0.0;
    double share_min = 0.0;
    double share_mean = 0.0;
    double share_median = 0.0;
};

// Per-state facts recorded during a share run; consumed by the acceptance
// suite for the one-iteration dichotomy and superset checks.
struct StateRecord {
    std::map<Protocol, bool> distillable;
    double fimax_first_step_fidelity = 0.0;
    bool fimax_first_step_output_npt = false;
};

struct ShareReport {
    SampleConfig config;
    std::vector<Protocol> protocols;
    std::map<std::string, ProtocolShare> per_protocol;
    int sample_count = 0;
    double acceptance_rate = 0.0;
    bool filter_exhausted = false;
    double runtime_seconds = 0.0;  // informational; never serialized
};

// Samples and filters per the config, classifies every state with every
// protocol and aggregates shares. Deterministic for a fixed config,
// independent of the worker count (DISTILLERY_THREADS caps workers).
// records, when non-null, receives one entry per classified state.
ShareReport run_share_experiment(const SampleConfig& config, const std::vector<Protocol>& protocols,
                                 std::vector<StateRecord>* records = nullptr);

enum class ReportFormat { json, csv };

// Stable-order serialization; identical reports serialize to identical bytes.
std::string emit_report(const ShareReport& report, ReportFormat format);

struct ExampleRecord {
    Generator generator;
    int s_max = 0;
    double class_prob = 0.0;   // P(epsilon(s_max))
    double coset_prob = 0.0;   // P(C_max)
    BellSpectrum input;
    BellSpectrum pre_correction;
    WeylIndex correction;
    BellSpectrum output;
    double f_out = 0.0;
};

// Runs one FIMAX round on the reference d = 3 input state
// (p[2,1] = 5/9, all other Bell weights 1/18) and returns every
// intermediate.
ExampleRecord reproduce_example();

// True iff every anchored value of the record matches its tolerance.
bool example_matches(const ExampleRecord& record, std::string* diagnostics = nullptr);

// Worker count: DISTILLERY_THREADS when set, hardware concurrency otherwise.
int worker_count();

// CLI entry: subcommands example, distill, share. Exit codes: 0 success,
// 1 usage error, 2 filter exhaustion, 3 example mismatch.
int cli_main(int argc, char** argv);

}  // namespace distillery
