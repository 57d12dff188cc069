#include "distillery/densmat.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace distillery {

namespace {

// Mixed-radix decomposition of a flat index over the factor dims; factor 0 is
// the most significant digit (matching kron).
void decompose(int flat, const std::vector<int>& dims, std::vector<int>& digits) {
    for (std::size_t f = dims.size(); f-- > 0;) {
        digits[f] = flat % dims[f];
        flat /= dims[f];
    }
}

int compose(const std::vector<int>& digits, const std::vector<int>& dims) {
    int flat = 0;
    for (std::size_t f = 0; f < dims.size(); ++f) flat = flat * dims[f] + digits[f];
    return flat;
}

}  // namespace

int FactorLayout::total_dim() const {
    int n = 1;
    for (int d : dims) n *= d;
    return n;
}

FactorLayout bipartite_layout(int d) { return FactorLayout{{d, d}, {Side::A, Side::B}}; }

FactorLayout two_copy_layout(int d) {
    return FactorLayout{{d, d, d, d}, {Side::A, Side::A, Side::B, Side::B}};
}

PureStateVector::PureStateVector(std::vector<Complex> amplitudes, FactorLayout layout)
    : amp_(std::move(amplitudes)), layout_(std::move(layout)) {
    if (static_cast<int>(amp_.size()) != layout_.total_dim())
        throw std::invalid_argument("PureStateVector: amplitude count does not match factor dims");
    double n = 0.0;
    for (const auto& a : amp_) n += std::norm(a);
    if (std::abs(std::sqrt(n) - 1.0) > kNormTol)
        throw std::invalid_argument("PureStateVector: not normalized within 1e-12");
}

DensityOperator DensityOperator::make_checked(ComplexMatrix m, FactorLayout layout) {
    if (!m.is_square() || static_cast<int>(m.rows()) != layout.total_dim())
        throw std::invalid_argument("DensityOperator: matrix shape does not match factor dims");
    if (hermiticity_defect(m) > kHermitianTol)
        throw std::invalid_argument("DensityOperator: not Hermitian within 1e-10");
    if (std::abs(m.trace() - Complex(1.0)) > kTraceTol)
        throw std::invalid_argument("DensityOperator: trace deviates from 1 by more than 1e-10");
    const auto spec = hermitian_spectrum(m);
    if (spec.front() < -kPsdTol)
        throw std::invalid_argument("DensityOperator: negative eigenvalue below -1e-10");
    return DensityOperator(std::move(m), std::move(layout));
}

DensityOperator DensityOperator::make_unchecked(ComplexMatrix m, FactorLayout layout) {
    return DensityOperator(std::move(m), std::move(layout));
}

DensityOperator pure_to_density(const PureStateVector& psi) {
    const auto& a = psi.amplitudes();
    const std::size_t n = a.size();
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = a[i] * std::conj(a[j]);
    return DensityOperator::make_unchecked(std::move(m), psi.layout());
}

namespace {

ComplexMatrix transpose_factors(const DensityOperator& rho, const std::vector<bool>& flip) {
    const auto& dims = rho.layout().dims;
    const int n = rho.dim();
    ComplexMatrix out(n, n);
    std::vector<int> ri(dims.size()), ci(dims.size());
    for (int i = 0; i < n; ++i) {
        decompose(i, dims, ri);
        for (int j = 0; j < n; ++j) {
            decompose(j, dims, ci);
            std::vector<int> r2 = ri, c2 = ci;
            for (std::size_t f = 0; f < dims.size(); ++f)
                if (flip[f]) std::swap(r2[f], c2[f]);
            out(compose(r2, dims), compose(c2, dims)) = rho.matrix()(i, j);
        }
    }
    return out;
}

}  // namespace

ComplexMatrix partial_transpose(const DensityOperator& rho, std::size_t factor) {
    if (factor >= rho.layout().count())
        throw std::invalid_argument("partial_transpose: invalid factor id");
    std::vector<bool> flip(rho.layout().count(), false);
    flip[factor] = true;
    return transpose_factors(rho, flip);
}

ComplexMatrix partial_transpose_side(const DensityOperator& rho, Side side) {
    std::vector<bool> flip(rho.layout().count(), false);
    for (std::size_t f = 0; f < flip.size(); ++f) flip[f] = (rho.layout().sides[f] == side);
    return transpose_factors(rho, flip);
}

bool is_npt(const DensityOperator& rho, double tol) {
    const auto spec = hermitian_spectrum(partial_transpose_side(rho, Side::B));
    return spec.front() < -tol;
}

double fidelity(const DensityOperator& rho, const PureStateVector& target) {
    if (rho.dim() != target.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
    const auto& a = target.amplitudes();
    Complex acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        Complex row = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) row += rho.matrix()(i, j) * a[j];
        acc += std::conj(a[i]) * row;
    }
    return acc.real();
}

DensityOperator permute_factors(const DensityOperator& rho, const std::vector<std::size_t>& perm) {
    const auto& dims = rho.layout().dims;
    if (perm.size() != dims.size()) throw std::invalid_argument("permute_factors: bad permutation");
    FactorLayout out_layout;
    for (std::size_t f = 0; f < perm.size(); ++f) {
        out_layout.dims.push_back(dims[perm[f]]);
        out_layout.sides.push_back(rho.layout().sides[perm[f]]);
    }
    const int n = rho.dim();
    ComplexMatrix out(n, n);
    std::vector<int> ri(dims.size()), ci(dims.size()), r2(dims.size()), c2(dims.size());
    for (int i = 0; i < n; ++i) {
        decompose(i, dims, ri);
        for (int j = 0; j < n; ++j) {
            decompose(j, dims, ci);
            for (std::size_t f = 0; f < perm.size(); ++f) {
                r2[f] = ri[perm[f]];
                c2[f] = ci[perm[f]];
            }
            out(compose(r2, out_layout.dims), compose(c2, out_layout.dims)) = rho.matrix()(i, j);
        }
    }
    return DensityOperator::make_unchecked(std::move(out), std::move(out_layout));
}

PureStateVector permute_factors(const PureStateVector& psi, const std::vector<std::size_t>& perm) {
    const auto& dims = psi.layout().dims;
    if (perm.size() != dims.size()) throw std::invalid_argument("permute_factors: bad permutation");
    FactorLayout out_layout;
    for (std::size_t f = 0; f < perm.size(); ++f) {
        out_layout.dims.push_back(dims[perm[f]]);
        out_layout.sides.push_back(psi.layout().sides[perm[f]]);
    }
    std::vector<Complex> out(psi.amplitudes().size());
    std::vector<int> digits(dims.size()), d2(dims.size());
    for (int i = 0; i < psi.dim(); ++i) {
        decompose(i, dims, digits);
        for (std::size_t f = 0; f < perm.size(); ++f) d2[f] = digits[perm[f]];
        out[compose(d2, out_layout.dims)] = psi.amplitudes()[i];
    }
    return PureStateVector(std::move(out), std::move(out_layout));
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<bool>& keep) {
    const auto& dims = rho.layout().dims;
    if (keep.size() != dims.size()) throw std::invalid_argument("partial_trace: bad keep mask");
    FactorLayout out_layout;
    std::vector<int> traced_dims;
    for (std::size_t f = 0; f < dims.size(); ++f) {
        if (keep[f]) {
            out_layout.dims.push_back(dims[f]);
            out_layout.sides.push_back(rho.layout().sides[f]);
        } else {
            traced_dims.push_back(dims[f]);
        }
    }
    const int n_out = out_layout.total_dim();
    int n_tr = 1;
    for (int d : traced_dims) n_tr *= d;

    ComplexMatrix out(n_out, n_out);
    std::vector<int> kd(out_layout.dims.size()), ld(out_layout.dims.size()), td(traced_dims.size());
    std::vector<int> full_r(dims.size()), full_c(dims.size());
    for (int i = 0; i < n_out; ++i) {
        decompose(i, out_layout.dims, kd);
        for (int j = 0; j < n_out; ++j) {
            decompose(j, out_layout.dims, ld);
            Complex acc = 0.0;
            for (int t = 0; t < n_tr; ++t) {
                decompose(t, traced_dims, td);
                std::size_t ki = 0, ti = 0;
                for (std::size_t f = 0; f < dims.size(); ++f) {
                    if (keep[f]) {
                        full_r[f] = kd[ki];
                        full_c[f] = ld[ki];
                        ++ki;
                    } else {
                        full_r[f] = td[ti];
                        full_c[f] = td[ti];
                        ++ti;
                    }
                }
                acc += rho.matrix()(compose(full_r, dims), compose(full_c, dims));
            }
            out(i, j) = acc;
        }
    }
    return DensityOperator::make_unchecked(std::move(out), std::move(out_layout));
}

std::string density_to_json(const DensityOperator& rho) {
    nlohmann::ordered_json j;
    j["dims"] = rho.layout().dims;
    std::vector<int> a_side;
    for (std::size_t f = 0; f < rho.layout().count(); ++f)
        if (rho.layout().sides[f] == Side::A) a_side.push_back(static_cast<int>(f));
    j["ab_split"] = a_side;
    const int n = rho.dim();
    std::vector<std::vector<double>> re(n, std::vector<double>(n)), im(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            re[i][k] = rho.matrix()(i, k).real();
            im[i][k] = rho.matrix()(i, k).imag();
        }
    j["re"] = re;
    j["im"] = im;
    return j.dump();
}

DensityOperator density_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    FactorLayout layout;
    layout.dims = j.at("dims").get<std::vector<int>>();
    layout.sides.assign(layout.dims.size(), Side::B);
    for (int f : j.at("ab_split").get<std::vector<int>>()) {
        if (f < 0 || f >= static_cast<int>(layout.dims.size()))
            throw std::invalid_argument("density_from_json: ab_split index out of range");
        layout.sides[f] = Side::A;
    }
    const auto re = j.at("re").get<std::vector<std::vector<double>>>();
    const auto im = j.at("im").get<std::vector<std::vector<double>>>();
    const int n = layout.total_dim();
    if (static_cast<int>(re.size()) != n || static_cast<int>(im.size()) != n)
        throw std::invalid_argument("density_from_json: matrix shape mismatch");
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(re[i].size()) != n || static_cast<int>(im[i].size()) != n)
            throw std::invalid_argument("density_from_json: matrix shape mismatch");
        for (int k = 0; k < n; ++k) m(i, k) = Complex(re[i][k], im[i][k]);
    }
    return DensityOperator::make_checked(std::move(m), std::move(layout));
}

}  // namespace distillery
