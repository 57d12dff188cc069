#include "distillery/stabilizer.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace distillery {

namespace {

int pow_mod(int base, int exp, int mod) {
    long long r = 1, b = ((base % mod) + mod) % mod;
    while (exp > 0) {
        if (exp & 1) r = (r * b) % mod;
        b = (b * b) % mod;
        exp >>= 1;
    }
    return static_cast<int>(r);
}

int mod_inverse(int c, int d) { return pow_mod(c, d - 2, d); }

// Phases are tracked as integers in units of 2pi/(4d); all eigenvalue phases
// that occur in the construction are exact multiples of that unit, which
// keeps the codespace labeling free of floating-point wobble.
Complex phase_unit_value(int d, int units) {
    const int full = 4 * d;
    units = ((units % full) + full) % full;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(units) / static_cast<double>(full);
    return Complex(std::cos(angle), std::sin(angle));
}

struct FactorEigenpair {
    int phase_units;              // eigenvalue = exp(2 pi i * phase_units / (4d))
    std::vector<Complex> vector;  // length d
};

// Eigenvectors of the single-factor Weyl operator W[a,b], ordered by
// eigenvalue phase angle in [0, 2pi). Shift components (b != 0) get the
// Fourier-type closed form; diagonal components use the computational basis.
std::vector<FactorEigenpair> factor_eigensystem(int d, int a, int b) {
    std::vector<FactorEigenpair> out;
    out.reserve(d);
    if (b == 0) {
        if (a == 0) {
            for (int j = 0; j < d; ++j) {
                std::vector<Complex> v(d, Complex(0.0));
                v[j] = 1.0;
                out.push_back({0, std::move(v)});
            }
            return out;
        }
        // W[a,0] = diag(omega^{ja}); position m holds the eigenvector with
        // eigenvalue omega^m.
        const int ainv = mod_inverse(a, d);
        for (int m = 0; m < d; ++m) {
            std::vector<Complex> v(d, Complex(0.0));
            v[(m * ainv) % d] = 1.0;
            out.push_back({4 * m, std::move(v)});
        }
        return out;
    }
    // Shift component: eigenvalues are lambda_base * omega^x with
    // lambda_base^d = omega^{ab d(d-1)/2}. For odd d the base is 1; for
    // d = 2 and odd ab it is i (W[1,1] squares to -1).
    const int base_units = (d == 2 && ((a * b) % 2) == 1) ? 2 : 0;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (int x = 0; x < d; ++x) {
        const int q = base_units + 4 * x;
        std::vector<Complex> v(d, Complex(0.0));
        for (int m = 0; m < d; ++m) {
            const int p = q * m - 2 * a * b * m * (m - 1);
            v[(m * b) % d] = phase_unit_value(d, p) * inv_sqrt_d;
        }
        out.push_back({q, std::move(v)});
    }
    return out;
}

}  // namespace

Generator Generator::canonical(int d, const ErrorElement& e) {
    if (!is_prime(d)) throw std::invalid_argument("Generator: d must be prime");
    const std::array<int, 4> comps = {e.first.k, e.first.l, e.second.k, e.second.l};
    int first_nonzero = 0;
    for (int c : comps)
        if (c % d != 0) {
            first_nonzero = ((c % d) + d) % d;
            break;
        }
    if (first_nonzero == 0) throw std::invalid_argument("Generator: zero element");
    Generator g;
    g.d = d;
    g.g = error_scale(d, e, mod_inverse(first_nonzero, d));
    return g;
}

int symplectic_product(int d, const ErrorElement& g, const ErrorElement& e) {
    const int v = g.first.l * e.first.k - g.first.k * e.first.l + g.second.l * e.second.k -
                  g.second.k * e.second.l;
    return ((v % d) + d) % d;
}

Coset coset_of(const ErrorElement& e, const Generator& g) {
    const int d = g.d;
    ErrorElement best = e;
    int best_flat = error_flat_index(d, e);
    ErrorElement cur = e;
    for (int i = 1; i < d; ++i) {
        cur = error_add(d, cur, g.g);
        const int flat = error_flat_index(d, cur);
        if (flat < best_flat) {
            best_flat = flat;
            best = cur;
        }
    }
    Coset c;
    c.elements.reserve(d);
    cur = best;
    for (int i = 0; i < d; ++i) {
        c.elements.push_back(cur);
        cur = error_add(d, cur, g.g);
    }
    return c;
}

SymplecticPartition partition_epsilon(const Generator& g) {
    const int d = g.d;
    SymplecticPartition part;
    part.generator = g;
    part.classes.resize(d);
    for (int flat = 0; flat < d * d * d * d; ++flat) {
        const auto e = error_from_flat(d, flat);
        part.classes[symplectic_product(d, g.g, e)].push_back(e);
    }
    return part;
}

std::vector<Generator> generator_representatives(int d) {
    if (!is_prime(d)) throw std::invalid_argument("generator_representatives: d must be prime");
    std::vector<Generator> reps;
    for (int flat = 1; flat < d * d * d * d; ++flat) {
        const auto e = error_from_flat(d, flat);
        const auto g = Generator::canonical(d, e);
        if (g.flat() == flat) reps.push_back(g);
    }
    std::sort(reps.begin(), reps.end());
    return reps;
}

Complex Encoding::eigenvalue(int x) const {
    const Complex base = lambda0 * root_of_unity(d(), x);
    return conjugated ? std::conj(base) : base;
}

std::vector<Complex> Encoding::codeword(int x, int k) const {
    const int n = d() * d();
    std::vector<Complex> v(n);
    for (int i = 0; i < n; ++i) v[i] = unitary(i, x * d() + k);
    return v;
}

Encoding canonic_encoding(const Generator& g, bool conjugated) {
    const int d = g.d;
    const auto f1 = factor_eigensystem(d, g.g.first.k, g.g.first.l);
    const auto f2 = factor_eigensystem(d, g.g.second.k, g.g.second.l);

    // Product vectors in lexicographic (i, j) order, grouped by total
    // eigenvalue phase relative to the first product.
    const int anchor_units = f1[0].phase_units + f2[0].phase_units;
    std::vector<std::vector<std::pair<int, int>>> codespaces(d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const int delta =
                ((f1[i].phase_units + f2[j].phase_units - anchor_units) % (4 * d) + 4 * d) % (4 * d);
            if (delta % 4 != 0)
                throw std::logic_error("canonic_encoding: eigenvalue phase off the omega lattice");
            codespaces[(delta / 4) % d].push_back({i, j});
        }
    }
    for (const auto& space : codespaces)
        if (static_cast<int>(space.size()) != d)
            throw std::logic_error("canonic_encoding: codespace dimension mismatch");

    Encoding enc;
    enc.generator = g;
    enc.conjugated = conjugated;
    enc.lambda0 = phase_unit_value(d, anchor_units);
    enc.unitary = ComplexMatrix(d * d, d * d);
    for (int x = 0; x < d; ++x) {
        for (int k = 0; k < d; ++k) {
            const auto [i, j] = codespaces[x][k];
            for (int r1 = 0; r1 < d; ++r1)
                for (int r2 = 0; r2 < d; ++r2) {
                    Complex amp = f1[i].vector[r1] * f2[j].vector[r2];
                    if (conjugated) amp = std::conj(amp);
                    enc.unitary(r1 * d + r2, x * d + k) = amp;
                }
        }
    }
    return enc;
}

std::vector<ComplexMatrix> stabilizer_projectors(const Encoding& enc) {
    const int d = enc.d();
    std::vector<ComplexMatrix> projectors;
    projectors.reserve(d);
    for (int x = 0; x < d; ++x) {
        ComplexMatrix p(d * d, d * d);
        for (int k = 0; k < d; ++k) {
            const auto u = enc.codeword(x, k);
            for (int i = 0; i < d * d; ++i)
                for (int j = 0; j < d * d; ++j) p(i, j) += u[i] * std::conj(u[j]);
        }
        projectors.push_back(std::move(p));
    }
    return projectors;
}

namespace {

// W(e) applied to a d^2-vector on the A-side pair; W(e) is a generalized
// permutation, so this is O(d^2).
std::vector<Complex> apply_two_copy_error(int d, const ErrorElement& e,
                                          const std::vector<Complex>& v) {
    std::vector<Complex> out(v.size());
    for (int j1 = 0; j1 < d; ++j1) {
        const Complex w1 = root_of_unity(d, static_cast<long long>(j1) * e.first.k);
        for (int j2 = 0; j2 < d; ++j2) {
            const Complex w2 = root_of_unity(d, static_cast<long long>(j2) * e.second.k);
            out[j1 * d + j2] =
                w1 * w2 * v[((j1 + e.first.l) % d) * d + ((j2 + e.second.l) % d)];
        }
    }
    return out;
}

// Bell position of the single-copy output produced by error element e under
// the encoding's decode-and-discard pipeline: the (0 -> s) block
// R = <codespace s| U_c^dagger W(e) U_c |codespace 0> is proportional to a
// Weyl operator, and (R x I)|Omega00> is the corresponding Bell state.
int coset_output_position(const Encoding& enc, const ErrorElement& e, int s) {
    const int d = enc.d();
    ComplexMatrix r(d, d);
    for (int k = 0; k < d; ++k) {
        const auto w = apply_two_copy_error(d, e, enc.codeword(0, k));
        for (int m = 0; m < d; ++m) {
            const auto u = enc.codeword(s, m);
            Complex acc = 0.0;
            for (int i = 0; i < d * d; ++i) acc += std::conj(u[i]) * w[i];
            r(m, k) = acc;
        }
    }
    int best_pos = -1;
    double best_mag = -1.0;
    for (int pos = 0; pos < d * d; ++pos) {
        const auto idx = bell_index_at(d, pos);
        Complex ov = 0.0;
        for (int m = 0; m < d; ++m)
            ov += std::conj(root_of_unity(d, static_cast<long long>(m) * idx.k)) *
                  r(m, (m + idx.l) % d);
        const double mag = std::abs(ov) / d;
        if (mag > best_mag) {
            best_mag = mag;
            best_pos = pos;
        }
    }
    if (best_mag < 1.0 - 1e-6)
        throw std::logic_error("coset_output_position: decode block is not a Weyl operator");
    return best_pos;
}

}  // namespace

StabilizerTable::StabilizerTable(int d) : d_(d) {
    if (!is_prime(d)) throw std::invalid_argument("StabilizerTable: d must be prime");
    generators_ = generator_representatives(d);
    const int n_err = d * d * d * d;
    for (const auto& g : generators_) {
        encodings_.emplace(std::make_pair(g.flat(), false), canonic_encoding(g, false));
        encodings_.emplace(std::make_pair(g.flat(), true), canonic_encoding(g, true));

        std::vector<int> row(n_err);
        for (int flat = 0; flat < n_err; ++flat)
            row[flat] = symplectic_product(d, g.g, error_from_flat(d, flat));
        symplectic_rows_.emplace(g.flat(), std::move(row));
    }
    for (const auto& g : generators_) {
        const auto& enc = encoding(g, false);
        const auto& row = symplectic_row(g);
        for (int s = 0; s < d; ++s) {
            std::map<int, int> cmap;
            std::vector<bool> visited(n_err, false);
            std::vector<bool> taken(d * d, false);
            for (int flat = 0; flat < n_err; ++flat) {
                if (visited[flat] || row[flat] != s) continue;
                ErrorElement cur = error_from_flat(d, flat);
                for (int i = 0; i < d; ++i) {
                    visited[error_flat_index(d, cur)] = true;
                    cur = error_add(d, cur, g.g);
                }
                const int pos = coset_output_position(enc, error_from_flat(d, flat), s);
                if (taken[pos])
                    throw std::logic_error("StabilizerTable: coset output map not bijective");
                taken[pos] = true;
                cmap.emplace(flat, pos);
            }
            if (static_cast<int>(cmap.size()) != d * d)
                throw std::logic_error("StabilizerTable: unexpected coset count");
            coset_maps_.emplace(std::make_pair(g.flat(), s), std::move(cmap));
        }
    }
}

const Encoding& StabilizerTable::encoding(const Generator& g, bool conjugated) const {
    return encodings_.at(std::make_pair(g.flat(), conjugated));
}

const std::map<int, int>& StabilizerTable::coset_output_map(const Generator& g, int s) const {
    return coset_maps_.at(std::make_pair(g.flat(), s));
}

const std::vector<int>& StabilizerTable::symplectic_row(const Generator& g) const {
    return symplectic_rows_.at(g.flat());
}

const StabilizerTable& stabilizer_table(int d) {
    static std::mutex mu;
    static std::map<int, StabilizerTable> tables;
    std::scoped_lock lock(mu);
    auto it = tables.find(d);
    if (it == tables.end()) it = tables.emplace(d, StabilizerTable(d)).first;
    return it->second;
}

}  // namespace distillery
