#include "distillery/weyl.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace distillery {

bool is_prime(int d) {
    if (d < 2) return false;
    for (int f = 2; f * f <= d; ++f)
        if (d % f == 0) return false;
    return true;
}

int error_flat_index(int d, const ErrorElement& e) {
    return ((e.first.k * d + e.first.l) * d + e.second.k) * d + e.second.l;
}

ErrorElement error_from_flat(int d, int flat) {
    ErrorElement e;
    e.second.l = flat % d;
    flat /= d;
    e.second.k = flat % d;
    flat /= d;
    e.first.l = flat % d;
    flat /= d;
    e.first.k = flat % d;
    return e;
}

ErrorElement error_add(int d, const ErrorElement& a, const ErrorElement& b) {
    return ErrorElement{{(a.first.k + b.first.k) % d, (a.first.l + b.first.l) % d},
                        {(a.second.k + b.second.k) % d, (a.second.l + b.second.l) % d}};
}

ErrorElement error_scale(int d, const ErrorElement& a, int c) {
    c = ((c % d) + d) % d;
    return ErrorElement{{(a.first.k * c) % d, (a.first.l * c) % d},
                        {(a.second.k * c) % d, (a.second.l * c) % d}};
}

Complex root_of_unity(int d, long long power) {
    const long long r = ((power % d) + d) % d;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(d);
    return Complex(std::cos(angle), std::sin(angle));
}

ComplexMatrix weyl_operator(int d, WeylIndex idx) {
    if (!is_prime(d)) throw std::invalid_argument("weyl_operator: d must be prime");
    ComplexMatrix w(d, d);
    for (int j = 0; j < d; ++j) w(j, (j + idx.l) % d) = root_of_unity(d, static_cast<long long>(j) * idx.k);
    return w;
}

namespace {

std::vector<Complex> maximally_entangled_amplitudes(int d) {
    std::vector<Complex> amp(static_cast<std::size_t>(d) * d, Complex(0.0));
    const double inv = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i) amp[static_cast<std::size_t>(i) * d + i] = inv;
    return amp;
}

// |Phi_M> = (M x I)|Omega00> for a d x d matrix M acting on the A side.
PureStateVector entangled_from_operator(int d, const ComplexMatrix& m) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<Complex> amp(static_cast<std::size_t>(d) * d, Complex(0.0));
    for (int r = 0; r < d; ++r)
        for (int i = 0; i < d; ++i) amp[static_cast<std::size_t>(r) * d + i] = m(r, i) * inv;
    return PureStateVector(std::move(amp), bipartite_layout(d));
}

}  // namespace

PureStateVector bell_state(int d, WeylIndex idx) {
    if (idx.k == 0 && idx.l == 0)
        return PureStateVector(maximally_entangled_amplitudes(d), bipartite_layout(d));
    return entangled_from_operator(d, weyl_operator(d, idx));
}

PureStateVector two_copy_bell_state(int d, const ErrorElement& e) {
    const auto b1 = bell_state(d, e.first);
    const auto b2 = bell_state(d, e.second);
    // kron of the two copies lives on (A1, B1, A2, B2); regroup the sides.
    std::vector<Complex> amp(static_cast<std::size_t>(d) * d * d * d);
    const auto& a1 = b1.amplitudes();
    const auto& a2 = b2.amplitudes();
    for (std::size_t i = 0; i < a1.size(); ++i)
        for (std::size_t j = 0; j < a2.size(); ++j)
            amp[i * a2.size() + j] = a1[i] * a2[j];
    PureStateVector copy_major(std::move(amp),
                               FactorLayout{{d, d, d, d}, {Side::A, Side::B, Side::A, Side::B}});
    return permute_factors(copy_major, {0, 2, 1, 3});
}

double BellSpectrum::sum() const {
    double s = 0.0;
    for (double x : p) s += x;
    return s;
}

WeylIndex BellSpectrum::argmax() const {
    int best = 0;
    for (int pos = 1; pos < static_cast<int>(p.size()); ++pos)
        if (p[pos] > p[best]) best = pos;
    return bell_index_at(d, best);
}

ComplexMatrix generalized_weyl_operator(const PhaseMatrix& phase, WeylIndex idx) {
    const int d = phase.d;
    for (std::size_t i = 0; i < phase.alpha.data().size(); ++i)
        if (std::abs(std::abs(phase.alpha.data()[i]) - 1.0) > 1e-12)
            throw std::invalid_argument("generalized_weyl_operator: non-unimodular alpha entry");
    ComplexMatrix v(d, d);
    for (int j = 0; j < d; ++j)
        v(j, (j + idx.l) % d) =
            root_of_unity(d, static_cast<long long>(j) * idx.k) * phase.alpha((j + idx.l) % d, idx.l);
    return v;
}

std::vector<PureStateVector> generalized_bell_basis(const PhaseMatrix& phase) {
    std::vector<PureStateVector> basis;
    basis.reserve(static_cast<std::size_t>(phase.d) * phase.d);
    for (int pos = 0; pos < phase.d * phase.d; ++pos) {
        const auto idx = bell_index_at(phase.d, pos);
        basis.push_back(entangled_from_operator(phase.d, generalized_weyl_operator(phase, idx)));
    }
    return basis;
}

DensityOperator weyl_twirl(const DensityOperator& rho) {
    const auto& layout = rho.layout();
    if (layout.count() != 2 || layout.sides[0] != Side::A || layout.sides[1] != Side::B ||
        layout.dims[0] != layout.dims[1])
        throw std::invalid_argument("weyl_twirl: expected a single-copy bipartite d x d state");
    const int d = layout.dims[0];
    ComplexMatrix acc(rho.dim(), rho.dim());
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const auto u = kron(weyl_operator(d, WeylIndex{i, j}),
                                weyl_operator(d, WeylIndex{((d - i) % d), j}));
            acc += u * rho.matrix() * u.adjoint();
        }
    }
    acc *= Complex(1.0 / (d * d));
    return DensityOperator::make_unchecked(std::move(acc), layout);
}

BellSpectrum bell_spectrum(const DensityOperator& rho) {
    const auto& layout = rho.layout();
    if (layout.count() != 2 || layout.dims[0] != layout.dims[1])
        throw std::invalid_argument("bell_spectrum: expected a single-copy bipartite state");
    const int d = layout.dims[0];
    BellSpectrum spec{d, std::vector<double>(static_cast<std::size_t>(d) * d, 0.0)};
    for (int pos = 0; pos < d * d; ++pos) {
        double v = fidelity(rho, bell_state(d, bell_index_at(d, pos)));
        if (v < 0.0) {
            if (v < -1e-12) throw std::invalid_argument("bell_spectrum: overlap below -1e-12");
            v = 0.0;
        }
        spec.p[pos] = v;
    }
    return spec;
}

DensityOperator bell_diagonal_state(const BellSpectrum& spec) {
    const int d = spec.d;
    ComplexMatrix m(d * d, d * d);
    for (int pos = 0; pos < d * d; ++pos) {
        if (spec.p[pos] == 0.0) continue;
        const auto psi = bell_state(d, bell_index_at(d, pos));
        const auto& a = psi.amplitudes();
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a.size(); ++j)
                m(i, j) += spec.p[pos] * a[i] * std::conj(a[j]);
    }
    return DensityOperator::make_unchecked(std::move(m), bipartite_layout(d));
}

bool is_bell_diagonal(const DensityOperator& rho, double tol) {
    const int d = rho.layout().dims[0];
    std::vector<PureStateVector> basis;
    for (int pos = 0; pos < d * d; ++pos) basis.push_back(bell_state(d, bell_index_at(d, pos)));
    for (int a = 0; a < d * d; ++a) {
        for (int b = 0; b < d * d; ++b) {
            if (a == b) continue;
            Complex acc = 0.0;
            const auto& va = basis[a].amplitudes();
            const auto& vb = basis[b].amplitudes();
            for (std::size_t i = 0; i < va.size(); ++i) {
                Complex row = 0.0;
                for (std::size_t j = 0; j < vb.size(); ++j) row += rho.matrix()(i, j) * vb[j];
                acc += std::conj(va[i]) * row;
            }
            if (std::abs(acc) > tol) return false;
        }
    }
    return true;
}

double TwoCopyDistribution::sum() const {
    double s = 0.0;
    for (double x : p) s += x;
    return s;
}

TwoCopyDistribution two_copy_error_distribution(const BellSpectrum& spec) {
    const int d = spec.d;
    TwoCopyDistribution dist{d, std::vector<double>(static_cast<std::size_t>(d) * d * d * d)};
    for (int flat = 0; flat < d * d * d * d; ++flat) {
        const auto e = error_from_flat(d, flat);
        dist.p[flat] = spec.at(e.first) * spec.at(e.second);
    }
    return dist;
}

std::string bell_spectrum_to_json(const BellSpectrum& spec) {
    nlohmann::ordered_json j;
    j["d"] = spec.d;
    j["p"] = spec.p;
    return j.dump();
}

BellSpectrum bell_spectrum_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    BellSpectrum spec;
    spec.d = j.at("d").get<int>();
    spec.p = j.at("p").get<std::vector<double>>();
    if (static_cast<int>(spec.p.size()) != spec.d * spec.d)
        throw std::invalid_argument("bell_spectrum_from_json: length mismatch");
    return spec;
}

std::string phase_matrix_to_json(const PhaseMatrix& phase) {
    nlohmann::ordered_json j;
    j["d"] = phase.d;
    std::vector<std::vector<double>> re(phase.d, std::vector<double>(phase.d)),
        im(phase.d, std::vector<double>(phase.d));
    for (int s = 0; s < phase.d; ++s)
        for (int t = 0; t < phase.d; ++t) {
            re[s][t] = phase.alpha(s, t).real();
            im[s][t] = phase.alpha(s, t).imag();
        }
    j["re"] = re;
    j["im"] = im;
    return j.dump();
}

PhaseMatrix phase_matrix_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PhaseMatrix phase;
    phase.d = j.at("d").get<int>();
    const auto re = j.at("re").get<std::vector<std::vector<double>>>();
    const auto im = j.at("im").get<std::vector<std::vector<double>>>();
    phase.alpha = ComplexMatrix(phase.d, phase.d);
    for (int s = 0; s < phase.d; ++s)
        for (int t = 0; t < phase.d; ++t) phase.alpha(s, t) = Complex(re.at(s).at(t), im.at(s).at(t));
    return phase;
}

}  // namespace distillery
