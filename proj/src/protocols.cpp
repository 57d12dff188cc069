#include "distillery/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace distillery {

Protocol protocol_from_name(const std::string& name) {
    if (name == "fimax") return Protocol::fimax;
    if (name == "bbpssw") return Protocol::bbpssw;
    if (name == "dejmps") return Protocol::dejmps;
    if (name == "adgj") return Protocol::adgj;
    if (name == "p1p2") return Protocol::p1p2;
    throw std::invalid_argument("unknown protocol: " + name);
}

std::string protocol_name(Protocol p) {
    switch (p) {
        case Protocol::fimax: return "fimax";
        case Protocol::bbpssw: return "bbpssw";
        case Protocol::dejmps: return "dejmps";
        case Protocol::adgj: return "adgj";
        case Protocol::p1p2: return "p1p2";
    }
    return "?";
}

bool protocol_supported(Protocol p, int d) {
    if (p == Protocol::dejmps) return d == 2;
    return is_prime(d);
}

std::string verdict_reason_name(VerdictReason reason) {
    switch (reason) {
        case VerdictReason::fidelity_threshold_reached: return "fidelity_threshold_reached";
        case VerdictReason::output_ppt: return "output_ppt";
        case VerdictReason::fixpoint_reached: return "fixpoint_reached";
        case VerdictReason::iteration_cap: return "iteration_cap";
    }
    return "?";
}

StabilizerChoice fimax_select(const TwoCopyDistribution& dist) {
    const int d = dist.d;
    const int n_err = d * d * d * d;
    if (dist.sum() < 1e-9) throw std::invalid_argument("fimax_select: all-zero distribution");
    const auto& table = stabilizer_table(d);

    bool have_best = false;
    StabilizerChoice best;
    int best_rep_flat = 0;

    for (const auto& g : table.generators()) {
        const auto& srow = table.symplectic_row(g);
        std::vector<double> class_mass(d, 0.0);
        for (int flat = 0; flat < n_err; ++flat) class_mass[srow[flat]] += dist.p[flat];

        std::vector<bool> visited(n_err, false);
        for (int flat = 0; flat < n_err; ++flat) {
            if (visited[flat]) continue;
            const int s = srow[flat];
            double coset_mass = 0.0;
            ErrorElement cur = error_from_flat(d, flat);
            for (int i = 0; i < d; ++i) {
                const int cf = error_flat_index(d, cur);
                visited[cf] = true;
                coset_mass += dist.p[cf];
                cur = error_add(d, cur, g.g);
            }
            if (class_mass[s] <= 0.0) continue;
            const double score = coset_mass / class_mass[s];
            // Tie chain: score, then class probability, then generator order
            // (ascending scan), then coset representative (ascending scan).
            const bool better =
                !have_best || score > best.score ||
                (score == best.score && class_mass[s] > best.success_prob);
            if (better) {
                have_best = true;
                best.generator = g;
                best.s_max = s;
                best.score = score;
                best.success_prob = class_mass[s];
                best_rep_flat = flat;
            }
        }
    }
    best.c_max = coset_of(error_from_flat(d, best_rep_flat), best.generator);
    return best;
}

namespace {

BellSpectrum corrected_spectrum(const BellSpectrum& pre, WeylIndex correction) {
    const int d = pre.d;
    BellSpectrum out{d, std::vector<double>(pre.p.size(), 0.0)};
    for (int pos = 0; pos < d * d; ++pos) {
        const auto idx = bell_index_at(d, pos);
        const WeylIndex shifted{(idx.k - correction.k + d) % d, (idx.l - correction.l + d) % d};
        out.at(shifted) = pre.p[pos];
    }
    return out;
}

IterationResult result_from_spectrum(BellSpectrum pre, double success_prob,
                                     std::optional<StabilizerChoice> choice) {
    const WeylIndex correction = pre.argmax();
    BellSpectrum out = corrected_spectrum(pre, correction);
    IterationResult res{bell_diagonal_state(out), std::move(out), success_prob, std::move(choice),
                        correction};
    return res;
}

}  // namespace

IterationResult fimax_step_spectrum(const BellSpectrum& spec) {
    const int d = spec.d;
    const auto& table = stabilizer_table(d);
    const auto dist = two_copy_error_distribution(spec);
    auto choice = fimax_select(dist);
    if (choice.success_prob <= 0.0)
        throw std::runtime_error("fimax_step: no symplectic class with positive probability");

    const auto& cmap = table.coset_output_map(choice.generator, choice.s_max);
    BellSpectrum pre{d, std::vector<double>(static_cast<std::size_t>(d) * d, 0.0)};
    for (const auto& [rep_flat, pos] : cmap) {
        double mass = 0.0;
        ErrorElement cur = error_from_flat(d, rep_flat);
        for (int i = 0; i < d; ++i) {
            mass += dist.p[error_flat_index(d, cur)];
            cur = error_add(d, cur, choice.generator.g);
        }
        pre.p[pos] = mass / choice.success_prob;
    }
    const double success = choice.success_prob;
    return result_from_spectrum(std::move(pre), success, std::move(choice));
}

IterationResult fimax_step(const DensityOperator& rho) {
    // Step 1: the Weyl twirl preserves the diagonal Bell overlaps, so the
    // twirled state's spectrum equals the raw state's spectrum.
    return fimax_step_spectrum(bell_spectrum(rho));
}

IterationResult fimax_step_dense(const DensityOperator& rho) {
    const int d = rho.layout().dims[0];
    const auto& table = stabilizer_table(d);

    DensityOperator bd = is_bell_diagonal(rho) ? rho : weyl_twirl(rho);
    const auto spec = bell_spectrum(bd);
    const auto dist = two_copy_error_distribution(spec);
    auto choice = fimax_select(dist);

    // Two-copy state on (A1, A2, B1, B2).
    const auto rho2 = permute_factors(
        DensityOperator::make_unchecked(kron(bd.matrix(), bd.matrix()),
                                        FactorLayout{{d, d, d, d}, {Side::A, Side::B, Side::A, Side::B}}),
        {0, 2, 1, 3});

    const auto& enc_a = table.encoding(choice.generator, false);
    const auto& enc_b = table.encoding(choice.generator, true);
    const auto proj_a = stabilizer_projectors(enc_a);
    const auto proj_b = stabilizer_projectors(enc_b);
    const auto decode = kron(enc_a.unitary.adjoint(), enc_b.unitary.adjoint());

    ComplexMatrix post(d * d * d * d, d * d * d * d);
    for (int a = 0; a < d; ++a) {
        const int b = ((a - choice.s_max) % d + d) % d;
        const auto projector = kron(proj_a[a], proj_b[b]);
        const auto masked = projector * rho2.matrix() * projector;
        post += decode * masked * decode.adjoint();
    }
    const double success = post.trace().real();
    post *= Complex(1.0 / success);

    auto decoded = DensityOperator::make_unchecked(std::move(post), two_copy_layout(d));
    // Step 7: discard the first qudit on each side (factors A1 and B1).
    auto reduced = partial_trace(decoded, {false, true, false, true});

    const auto pre = bell_spectrum(reduced);
    const WeylIndex correction = pre.argmax();
    const auto w = weyl_operator(d, correction);
    const auto corrector = kron(w.adjoint(), ComplexMatrix::identity(d));
    ComplexMatrix out_mat = corrector * reduced.matrix() * corrector.adjoint();
    auto out = DensityOperator::make_unchecked(std::move(out_mat), bipartite_layout(d));
    auto out_spec = bell_spectrum(out);
    return IterationResult{std::move(out), std::move(out_spec), success, std::move(choice),
                           correction};
}

namespace detail {

BellSpectrum gxor_sub_coincidence_map(const BellSpectrum& spec, double* success_prob) {
    const int d = spec.d;
    BellSpectrum out{d, std::vector<double>(spec.p.size(), 0.0)};
    double norm = 0.0;
    for (int l = 0; l < d; ++l) {
        double sector = 0.0;
        for (int k = 0; k < d; ++k) sector += spec.at({k, l});
        norm += sector * sector;
    }
    for (int l = 0; l < d; ++l)
        for (int k1 = 0; k1 < d; ++k1)
            for (int k2 = 0; k2 < d; ++k2)
                out.at({(k1 + k2) % d, l}) += spec.at({k1, l}) * spec.at({k2, l});
    if (norm > 0.0)
        for (auto& x : out.p) x /= norm;
    if (success_prob) *success_prob = norm;
    return out;
}

BellSpectrum gxor_add_coincidence_map(const BellSpectrum& spec, double* success_prob) {
    const int d = spec.d;
    BellSpectrum out{d, std::vector<double>(spec.p.size(), 0.0)};
    double norm = 0.0;
    for (int l = 0; l < d; ++l) {
        double s1 = 0.0, s2 = 0.0;
        for (int k = 0; k < d; ++k) {
            s1 += spec.at({k, l});
            s2 += spec.at({k, (d - l) % d});
        }
        norm += s1 * s2;
    }
    for (int l = 0; l < d; ++l)
        for (int k1 = 0; k1 < d; ++k1)
            for (int k2 = 0; k2 < d; ++k2)
                out.at({(k1 - k2 + d) % d, l}) += spec.at({k1, l}) * spec.at({k2, (d - l) % d});
    if (norm > 0.0)
        for (auto& x : out.p) x /= norm;
    if (success_prob) *success_prob = norm;
    return out;
}

BellSpectrum gxor_dual_coincidence_map(const BellSpectrum& spec, double* success_prob) {
    const int d = spec.d;
    // Fourier relabel (k, l) -> (-l, k), subtractive map, relabel back.
    BellSpectrum relabeled{d, std::vector<double>(spec.p.size(), 0.0)};
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            relabeled.at({(d - l) % d, k}) = spec.at({k, l});
    auto mapped = gxor_sub_coincidence_map(relabeled, success_prob);
    BellSpectrum out{d, std::vector<double>(spec.p.size(), 0.0)};
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
            out.at({k, l}) = mapped.at({(d - l) % d, k});
    return out;
}

BellSpectrum dejmps_relabel(const BellSpectrum& spec) {
    BellSpectrum out = spec;
    std::swap(out.at({1, 0}), out.at({1, 1}));
    return out;
}

BellSpectrum isotropic_spectrum(int d, double f) {
    BellSpectrum out{d, std::vector<double>(static_cast<std::size_t>(d) * d,
                                            (1.0 - f) / (d * d - 1))};
    out.at({0, 0}) = f;
    return out;
}

}  // namespace detail

namespace {

// bbpssw and p1p2 re-twirl to isotropic form every round, so only the
// Omega00 overlap of the input survives; the two differ in the GXOR
// orientation of the compare-and-postselect stage. dejmps and adgj act on
// the Bell-diagonal form directly (a non-diagonal input has already been
// reduced to its spectrum by bell_spectrum, which the Weyl twirl preserves).
IterationResult baseline_step_spectrum(const BellSpectrum& input_spec, Protocol protocol) {
    const int d = input_spec.d;
    double success = 0.0;
    BellSpectrum pre{d, {}};
    switch (protocol) {
        case Protocol::bbpssw: {
            const auto iso = detail::isotropic_spectrum(d, input_spec.at({0, 0}));
            pre = detail::gxor_add_coincidence_map(iso, &success);
            break;
        }
        case Protocol::p1p2: {
            const auto iso = detail::isotropic_spectrum(d, input_spec.at({0, 0}));
            pre = detail::gxor_sub_coincidence_map(iso, &success);
            break;
        }
        case Protocol::dejmps: {
            const auto rotated = detail::dejmps_relabel(input_spec);
            pre = detail::gxor_sub_coincidence_map(rotated, &success);
            break;
        }
        case Protocol::adgj: {
            pre = detail::gxor_sub_coincidence_map(input_spec, &success);
            break;
        }
        case Protocol::fimax:
            throw std::invalid_argument("baseline_step: fimax is not a baseline");
    }
    // The baselines apply no adaptive final correction; the output spectrum
    // is the post-selected map output itself.
    IterationResult res{bell_diagonal_state(pre), pre, success, std::nullopt, WeylIndex{0, 0}};
    return res;
}

}  // namespace

IterationResult baseline_step(const DensityOperator& rho, Protocol protocol) {
    const int d = rho.layout().dims[0];
    if (!protocol_supported(protocol, d))
        throw std::invalid_argument("baseline_step: unsupported (protocol, d) combination");
    return baseline_step_spectrum(bell_spectrum(rho), protocol);
}

IterationResult protocol_step(const DensityOperator& rho, Protocol protocol) {
    if (protocol == Protocol::fimax) return fimax_step(rho);
    return baseline_step(rho, protocol);
}

DistillVerdict classify_distillability(const DensityOperator& rho, Protocol protocol,
                                       int max_iters) {
    if (max_iters < 1) throw std::invalid_argument("classify_distillability: max_iters must be >= 1");
    const int d = rho.layout().dims[0];
    if (!protocol_supported(protocol, d))
        throw std::invalid_argument("classify_distillability: unsupported (protocol, d)");
    const double threshold = 1.0 / d;

    DensityOperator current = rho;
    DistillVerdict verdict;
    for (int iter = 1; iter <= max_iters; ++iter) {
        const auto res = protocol_step(current, protocol);
        const double f = res.output_spectrum.at({0, 0});
        verdict.iterations_used = iter;
        verdict.final_fidelity = f;
        if (f > threshold + kFidelityMargin) {
            verdict.distillable = true;
            verdict.reason = VerdictReason::fidelity_threshold_reached;
            return verdict;
        }
        if (!is_npt(res.output, kNptTol)) {
            verdict.reason = VerdictReason::output_ppt;
            return verdict;
        }
        if (max_abs_diff(res.output.matrix(), current.matrix()) < kFixpointTol) {
            verdict.reason = VerdictReason::fixpoint_reached;
            return verdict;
        }
        current = res.output;
    }
    verdict.reason = VerdictReason::iteration_cap;
    return verdict;
}

}  // namespace distillery
