#pragma once

// Dense complex matrices and a cyclic Jacobi eigensolver for Hermitian
// matrices. Everything in this project is tiny (dimension <= d^4 = 81 for
// d = 3), so a simple row-major value type beats an external dependency and
// keeps results bit-for-bit reproducible across platforms.

#include <complex>
#include <cstddef>
#include <vector>

namespace distillery {

using Complex = std::complex<double>;

class ComplexMatrix {
public:
    ComplexMatrix() : rows_(0), cols_(0) {}
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix zero(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<Complex>& data() { return data_; }
    const std::vector<Complex>& data() const { return data_; }

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    ComplexMatrix conjugate() const;
    Complex trace() const;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(Complex scalar);

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
    friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

private:
    std::size_t rows_, cols_;
    std::vector<Complex> data_;
};

// Kronecker product; dims multiply, left factor is the most significant index.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Matrix-vector product.
std::vector<Complex> apply(const ComplexMatrix& m, const std::vector<Complex>& v);

// Largest entrywise |a - b|; matrices must have equal shape.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

// Largest entrywise |a(i,j) - conj(a(j,i))|.
double hermiticity_defect(const ComplexMatrix& a);

struct HermitianEigensystem {
    std::vector<double> values;  // ascending
    ComplexMatrix vectors;       // column i pairs with values[i]
};

// Cyclic Jacobi diagonalization of a Hermitian matrix. Deterministic sweep
// order (row-major over the upper triangle), so results are reproducible to
// the last bit for identical inputs. Throws std::invalid_argument if the
// input is not square or deviates from Hermiticity by more than 1e-8.
HermitianEigensystem hermitian_eigensystem(const ComplexMatrix& m);

// Eigenvalues only, ascending.
std::vector<double> hermitian_spectrum(const ComplexMatrix& m);

}  // namespace distillery
