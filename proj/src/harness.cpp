#include "distillery/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

namespace distillery {

int worker_count() {
    if (const char* env = std::getenv("DISTILLERY_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::scoped_lock lock(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

StateRecord classify_state(const DensityOperator& rho, const std::vector<Protocol>& protocols) {
    StateRecord rec;
    for (Protocol p : protocols)
        rec.distillable[p] = classify_distillability(rho, p).distillable;
    const auto first = fimax_step(rho);
    rec.fimax_first_step_fidelity = first.output_spectrum.at({0, 0});
    rec.fimax_first_step_output_npt = is_npt(first.output, kNptTol);
    return rec;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ShareReport run_share_experiment(const SampleConfig& config, const std::vector<Protocol>& protocols,
                                 std::vector<StateRecord>* records) {
    for (Protocol p : protocols)
        if (!protocol_supported(p, config.d))
            throw std::invalid_argument("run_share_experiment: protocol " + protocol_name(p) +
                                        " is not supported at d=" + std::to_string(config.d));
    stabilizer_table(config.d);  // build the shared table before spawning workers

    const auto t0 = std::chrono::steady_clock::now();
    ShareReport report;
    report.config = config;
    report.protocols = protocols;

    if (config.family == Family::gbds) {
        const long long max_attempts = 1000LL * config.gbds_states_per_basis;
        std::vector<GbdsSystem> systems(config.gbds_bases);
        std::vector<std::vector<StateRecord>> basis_records(config.gbds_bases);
        parallel_for(config.gbds_bases, [&](int b) {
            systems[b] = sample_gbds_system(config.d, config.seed, static_cast<std::uint64_t>(b),
                                            config.gbds_states_per_basis, config.restriction,
                                            max_attempts);
            auto& recs = basis_records[b];
            recs.reserve(systems[b].filtered.states.size());
            for (const auto& rho : systems[b].filtered.states)
                recs.push_back(classify_state(rho, protocols));
        });

        long long attempts = 0;
        for (Protocol p : protocols) report.per_protocol[protocol_name(p)] = ProtocolShare{};
        for (int b = 0; b < config.gbds_bases; ++b) {
            const auto& sys = systems[b];
            attempts += sys.filtered.attempts;
            report.sample_count += static_cast<int>(sys.filtered.states.size());
            report.filter_exhausted = report.filter_exhausted || sys.filtered.exhausted;
            for (Protocol p : protocols) {
                auto& share = report.per_protocol[protocol_name(p)];
                int hit = 0;
                for (const auto& rec : basis_records[b]) hit += rec.distillable.at(p) ? 1 : 0;
                share.distilled += hit;
                share.total += static_cast<int>(basis_records[b].size());
                share.per_basis.push_back(basis_records[b].empty()
                                              ? 0.0
                                              : static_cast<double>(hit) / basis_records[b].size());
            }
            if (records)
                records->insert(records->end(), basis_records[b].begin(), basis_records[b].end());
        }
        report.acceptance_rate =
            attempts > 0 ? static_cast<double>(report.sample_count) / attempts : 0.0;
        for (auto& [name, share] : report.per_protocol) {
            share.share = share.total > 0 ? static_cast<double>(share.distilled) / share.total : 0.0;
            if (!share.per_basis.empty()) {
                share.share_max = *std::max_element(share.per_basis.begin(), share.per_basis.end());
                share.share_min = *std::min_element(share.per_basis.begin(), share.per_basis.end());
                double mean = 0.0;
                for (double x : share.per_basis) mean += x;
                share.share_mean = mean / share.per_basis.size();
                share.share_median = median_of(share.per_basis);
            }
        }
    } else {
        auto sampler = [&](RngStream& rng) {
            if (config.family == Family::pure_haar) return sample_haar_pure(config.d, rng);
            return bell_diagonal_state(sample_bds(config.d, rng));
        };
        const long long max_attempts = 1000LL * config.target_count;
        auto filtered = filter_low_fidelity(sampler, config.seed, config.restriction,
                                            config.target_count, max_attempts);
        report.sample_count = static_cast<int>(filtered.states.size());
        report.acceptance_rate = filtered.acceptance_rate;
        report.filter_exhausted = filtered.exhausted;

        std::vector<StateRecord> recs(filtered.states.size());
        parallel_for(static_cast<int>(filtered.states.size()),
                     [&](int i) { recs[i] = classify_state(filtered.states[i], protocols); });

        for (Protocol p : protocols) {
            ProtocolShare share;
            share.total = static_cast<int>(recs.size());
            for (const auto& rec : recs) share.distilled += rec.distillable.at(p) ? 1 : 0;
            share.share = share.total > 0 ? static_cast<double>(share.distilled) / share.total : 0.0;
            report.per_protocol[protocol_name(p)] = std::move(share);
        }
        if (records) records->insert(records->end(), recs.begin(), recs.end());
    }

    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

namespace {

std::string format_share(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

}  // namespace

std::string emit_report(const ShareReport& report, ReportFormat format) {
    const bool gbds = report.config.family == Family::gbds;
    if (format == ReportFormat::csv) {
        std::ostringstream out;
        out << "family,d,restriction,protocol,share,n,seed";
        if (gbds) out << ",share_max,share_min,share_mean,share_median";
        out << '\n';
        for (Protocol p : report.protocols) {
            const auto& share = report.per_protocol.at(protocol_name(p));
            out << family_name(report.config.family) << ',' << report.config.d << ','
                << restriction_name(report.config.restriction) << ',' << protocol_name(p) << ','
                << format_share(share.share) << ',' << report.sample_count << ','
                << report.config.seed;
            if (gbds)
                out << ',' << format_share(share.share_max) << ',' << format_share(share.share_min)
                    << ',' << format_share(share.share_mean) << ','
                    << format_share(share.share_median);
            out << '\n';
        }
        return out.str();
    }

    nlohmann::ordered_json j;
    j["config"] = nlohmann::ordered_json::parse(sample_config_to_json(report.config));
    j["sample_count"] = report.sample_count;
    j["acceptance_rate"] = report.acceptance_rate;
    j["filter_exhausted"] = report.filter_exhausted;
    nlohmann::ordered_json protos;
    for (Protocol p : report.protocols) {
        const auto& share = report.per_protocol.at(protocol_name(p));
        nlohmann::ordered_json s;
        s["share"] = share.share;
        s["distilled"] = share.distilled;
        s["total"] = share.total;
        if (gbds) {
            s["share_max"] = share.share_max;
            s["share_min"] = share.share_min;
            s["share_mean"] = share.share_mean;
            s["share_median"] = share.share_median;
            s["per_basis"] = share.per_basis;
        }
        protos[protocol_name(p)] = std::move(s);
    }
    j["protocols"] = std::move(protos);
    return j.dump(2) + "\n";
}

ExampleRecord reproduce_example() {
    const int d = 3;
    ExampleRecord rec;
    rec.input = BellSpectrum{d, std::vector<double>(9, 1.0 / 18.0)};
    rec.input.at({2, 1}) = 5.0 / 9.0;

    const auto res = fimax_step_spectrum(rec.input);
    rec.generator = res.choice->generator;
    rec.s_max = res.choice->s_max;
    rec.class_prob = res.choice->success_prob;
    rec.coset_prob = res.choice->score * res.choice->success_prob;
    rec.correction = res.correction;
    rec.output = res.output_spectrum;
    // Undo the final correction to recover the pre-correction spectrum.
    rec.pre_correction = BellSpectrum{d, std::vector<double>(9, 0.0)};
    for (int pos = 0; pos < 9; ++pos) {
        const auto idx = bell_index_at(d, pos);
        rec.pre_correction.at({(idx.k + rec.correction.k) % d, (idx.l + rec.correction.l) % d}) =
            rec.output.p[pos];
    }
    rec.f_out = rec.output.at({0, 0});
    return rec;
}

bool example_matches(const ExampleRecord& rec, std::string* diagnostics) {
    std::ostringstream diag;
    bool ok = true;
    auto check = [&](bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            diag << "MISMATCH: " << what << '\n';
        }
    };
    check(std::abs(rec.class_prob - 0.5) <= 1e-6, "P(epsilon(1)) != 0.500");
    check(std::abs(rec.coset_prob - 17.0 / 54.0) <= 5e-4, "P(C_max) != 0.3148");
    const auto expected_gen = Generator::canonical(3, ErrorElement{{1, 0}, {1, 0}});
    check(rec.generator == expected_gen, "generator not in the class of [(1,0),(1,0)]");
    check(rec.s_max == 1, "s_max != 1");
    check(rec.correction == WeylIndex{0, 1}, "correction index != (0,1)");
    check(std::abs(rec.f_out - 0.63) <= 0.005, "F_out != 0.63");
    for (int pos = 0; pos < 9; ++pos) {
        const double expected = pos == 0 ? 0.63 : (pos <= 2 ? 0.13 : 0.02);
        check(std::abs(rec.output.p[pos] - expected) <= 0.005,
              "output spectrum entry " + std::to_string(pos));
    }
    if (diagnostics) *diagnostics = diag.str();
    return ok;
}

namespace {

void print_example(const ExampleRecord& rec, std::ostream& out) {
    out << "input spectrum (l*d+k order):";
    for (double x : rec.input.p) out << ' ' << format_share(x);
    out << '\n';
    const auto c = rec.generator.components();
    out << "selected generator g = [(" << c[0] << "," << c[1] << "),(" << c[2] << "," << c[3]
        << ")]\n";
    out << "s_max = " << rec.s_max << '\n';
    out << "P(epsilon(s_max)) = " << format_share(rec.class_prob) << '\n';
    out << "P(C_max)          = " << format_share(rec.coset_prob) << '\n';
    out << "score             = " << format_share(rec.coset_prob / rec.class_prob) << '\n';
    out << "pre-correction spectrum:";
    for (double x : rec.pre_correction.p) out << ' ' << format_share(x);
    out << '\n';
    out << "correction index (k,l) = (" << rec.correction.k << "," << rec.correction.l << ")\n";
    out << "output spectrum:";
    for (double x : rec.output.p) out << ' ' << format_share(x);
    out << '\n';
    out << "F_out = " << format_share(rec.f_out) << '\n';
}

int run_example_command() {
    const auto rec = reproduce_example();
    print_example(rec, std::cout);
    std::string diag;
    if (!example_matches(rec, &diag)) {
        std::cerr << diag;
        std::cerr << "example: reference values NOT reproduced\n";
        return 3;
    }
    std::cout << "example: all reference values reproduced\n";
    return 0;
}

int run_distill_command(const std::string& state_file, const std::string& protocol_name_str,
                        int max_iters) {
    std::ifstream in(state_file);
    if (!in) {
        std::cerr << "distill: cannot open " << state_file << '\n';
        return 1;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto rho = density_from_json(buffer.str());
    const auto protocol = protocol_from_name(protocol_name_str);
    const int d = rho.layout().dims[0];
    if (!protocol_supported(protocol, d)) {
        std::cerr << "distill: protocol " << protocol_name_str << " unsupported at d=" << d << '\n';
        return 1;
    }

    const double threshold = 1.0 / d;
    DensityOperator current = rho;
    std::cout << "input fidelity = " << format_share(fidelity(rho, bell_state(d, {0, 0}))) << '\n';
    DistillVerdict verdict;
    for (int iter = 1; iter <= max_iters; ++iter) {
        const auto res = protocol_step(current, protocol);
        const double f = res.output_spectrum.at({0, 0});
        std::cout << "iter " << iter << ": fidelity = " << format_share(f)
                  << "  success_prob = " << format_share(res.success_prob) << '\n';
        verdict.iterations_used = iter;
        verdict.final_fidelity = f;
        if (f > threshold + kFidelityMargin) {
            verdict.distillable = true;
            verdict.reason = VerdictReason::fidelity_threshold_reached;
            break;
        }
        if (!is_npt(res.output, kNptTol)) {
            verdict.reason = VerdictReason::output_ppt;
            break;
        }
        if (max_abs_diff(res.output.matrix(), current.matrix()) < kFixpointTol) {
            verdict.reason = VerdictReason::fixpoint_reached;
            break;
        }
        verdict.reason = VerdictReason::iteration_cap;
        current = res.output;
    }
    std::cout << "verdict: " << (verdict.distillable ? "distillable" : "not distillable")
              << " after " << verdict.iterations_used
              << " iteration(s), reason = " << verdict_reason_name(verdict.reason) << '\n';
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Stabilizer-based two-copy entanglement distillation simulator"};
    app.require_subcommand(1);

    auto* example_cmd =
        app.add_subcommand("example", "Reproduce the d=3 worked distillation round");

    std::string state_file, distill_protocol = "fimax";
    int max_iters = 10;
    auto* distill_cmd = app.add_subcommand("distill", "Iterate a protocol on a state file");
    distill_cmd->add_option("--state", state_file, "state JSON file")->required();
    distill_cmd->add_option("--protocol", distill_protocol,
                            "fimax|bbpssw|dejmps|adgj|p1p2");
    distill_cmd->add_option("--max-iters", max_iters, "iteration cap")->check(CLI::PositiveNumber);

    std::string family_str = "bds", restriction_str = "normal", protocols_str = "fimax";
    std::string out_file, format_str = "json";
    int d = 2, n = 1000, gbds_bases = 100, gbds_per_basis = 100;
    std::uint64_t seed = 0;
    auto* share_cmd = app.add_subcommand("share", "Distillable-share experiment over a state family");
    share_cmd->add_option("--family", family_str, "pure|bds|gbds")->required();
    share_cmd->add_option("--d", d, "prime qudit dimension")->required();
    share_cmd->add_option("--restriction", restriction_str, "normal|strict");
    share_cmd->add_option("--n", n, "target sample count")->check(CLI::PositiveNumber);
    share_cmd->add_option("--seed", seed, "RNG seed");
    share_cmd->add_option("--protocols", protocols_str, "comma-separated protocol list");
    share_cmd->add_option("--gbds-bases", gbds_bases, "number of generalized bases");
    share_cmd->add_option("--gbds-per-basis", gbds_per_basis, "states per basis");
    share_cmd->add_option("--out", out_file, "output file (stdout when omitted)");
    share_cmd->add_option("--format", format_str, "json|csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (example_cmd->parsed()) return run_example_command();
        if (distill_cmd->parsed())
            return run_distill_command(state_file, distill_protocol, max_iters);

        SampleConfig config;
        config.family = family_from_name(family_str);
        config.d = d;
        config.restriction = restriction_from_name(restriction_str);
        config.target_count = n;
        config.seed = seed;
        config.gbds_bases = gbds_bases;
        config.gbds_states_per_basis = gbds_per_basis;
        if (!is_prime(d)) {
            std::cerr << "share: d must be prime\n";
            return 1;
        }

        std::vector<Protocol> protocols;
        std::stringstream ss(protocols_str);
        std::string token;
        while (std::getline(ss, token, ',')) {
            if (token.empty()) continue;
            protocols.push_back(protocol_from_name(token));
        }
        if (protocols.empty()) {
            std::cerr << "share: no protocols given\n";
            return 1;
        }
        for (Protocol p : protocols)
            if (!protocol_supported(p, d)) {
                std::cerr << "share: protocol " << protocol_name(p) << " unsupported at d=" << d
                          << '\n';
                return 1;
            }

        const ReportFormat format =
            format_str == "csv" ? ReportFormat::csv : ReportFormat::json;
        if (format_str != "csv" && format_str != "json") {
            std::cerr << "share: unknown format " << format_str << '\n';
            return 1;
        }

        const auto report = run_share_experiment(config, protocols);
        const auto text = emit_report(report, format);
        if (out_file.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_file, std::ios::binary);
            if (!out) {
                std::cerr << "share: cannot write " << out_file << '\n';
                return 1;
            }
            out << text;
        }
        std::cerr << "share: " << report.sample_count << " states in "
                  << format_share(report.runtime_seconds) << " s\n";
        if (report.filter_exhausted) {
            std::cerr << "share: filter exhausted (acceptance rate "
                      << format_share(report.acceptance_rate) << ")\n";
            return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace distillery
