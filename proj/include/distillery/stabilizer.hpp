#pragma once

// Discrete stabilizer machinery over Z_d^2 x Z_d^2 for prime d: generators,
// cosets, symplectic partitions, canonic encodings and the associated
// stabilizer measurement projectors, for both sides of the bipartition.
//
// The canonic encoding is built from products of single-factor Weyl
// eigenvectors. Single-factor eigenvectors have Fourier-type closed forms
// for shift components and are the computational basis for diagonal
// components; they are ordered by eigenvalue phase angle in [0, 2pi).
// Product vectors are ordered lexicographically by factor labels, grouped by
// total eigenvalue into codespaces, and indexed k in construction order
// within each codespace. The eigenspace label x is relative to the
// eigenvalue lambda0 of the first product vector: codespace x carries
// eigenvalue lambda0 * omega^x. This reproduces the reference encoding
// |x>|k> -> |k>|x-k> for the generator W[1,0] x W[1,0] at d = 3.

#include <cstdint>
#include <map>
#include <vector>

#include "distillery/matrix.hpp"
#include "distillery/weyl.hpp"

namespace distillery {

struct Generator {
    int d = 0;
    ErrorElement g;  // canonical projective representative

    // Canonicalizes so that the first nonzero component of (a1, b1, a2, b2)
    // equals 1. Throws if e == 0 or d is not prime.
    static Generator canonical(int d, const ErrorElement& e);

    std::array<int, 4> components() const {
        return {g.first.k, g.first.l, g.second.k, g.second.l};
    }
    int flat() const { return error_flat_index(d, g); }
    // Generators are ordered shift-before-phase per factor, the same
    // shift-major convention as the Bell positions; this makes the reference
    // round select the diagonal-type generator among the tied maximizers.
    int order_key() const {
        return ((g.first.l * d + g.first.k) * d + g.second.l) * d + g.second.k;
    }
    bool operator==(const Generator&) const = default;
    bool operator<(const Generator& other) const { return order_key() < other.order_key(); }
};

// <g, e> = sum_n (b_n k_n - a_n l_n) mod d.
int symplectic_product(int d, const ErrorElement& g, const ErrorElement& e);

struct Coset {
    std::vector<ErrorElement> elements;  // elements[i] = elements[0] + i*g
    const ErrorElement& representative() const { return elements.front(); }
};

// The d-element coset {e + i*g}, listed from its lexicographically smallest
// element.
Coset coset_of(const ErrorElement& e, const Generator& g);

struct SymplecticPartition {
    Generator generator;
    std::vector<std::vector<ErrorElement>> classes;  // classes[s], flat order
};

SymplecticPartition partition_epsilon(const Generator& g);

// One canonical representative per projective class of nonzero elements of
// Z_d^4; count = (d^4 - 1) / (d - 1), in lexicographic order.
std::vector<Generator> generator_representatives(int d);

struct Encoding {
    Generator generator;
    bool conjugated = false;
    ComplexMatrix unitary;  // d^2 x d^2; column x*d + k is codeword |u[x,k]>
    Complex lambda0;        // eigenvalue anchor of codespace 0

    int d() const { return generator.d; }
    // Eigenvalue of codespace x w.r.t. W(g) (or W(g)* when conjugated).
    Complex eigenvalue(int x) const;
    std::vector<Complex> codeword(int x, int k) const;
};

// Canonic encoding for the stabilizer generated by W(g); conjugated = true
// yields the side-B objects (eigenvectors of the entrywise conjugate of
// W(g), with inherited codespace labels).
Encoding canonic_encoding(const Generator& g, bool conjugated);

// Projection-valued measure {P(x)}: P(x) = sum_k |u[x,k]><u[x,k]|.
std::vector<ComplexMatrix> stabilizer_projectors(const Encoding& enc);

// Read-only per-dimension table of generator representatives, encodings and
// the coset -> output-Bell-index maps used by the fast protocol path. Built
// eagerly; safe to share between threads afterwards.
class StabilizerTable {
public:
    explicit StabilizerTable(int d);

    int d() const { return d_; }
    const std::vector<Generator>& generators() const { return generators_; }
    const Encoding& encoding(const Generator& g, bool conjugated) const;

    // For generator g and symplectic value s: maps the flat index of each
    // coset representative in epsilon(s) to the Bell position of the
    // protocol output that coset produces (before the final correction).
    const std::map<int, int>& coset_output_map(const Generator& g, int s) const;

    // Cached symplectic products <g, e> for all flat e.
    const std::vector<int>& symplectic_row(const Generator& g) const;

private:
    int d_;
    std::vector<Generator> generators_;
    std::map<std::pair<int, bool>, Encoding> encodings_;
    std::map<std::pair<int, int>, std::map<int, int>> coset_maps_;
    std::map<int, std::vector<int>> symplectic_rows_;
};

// Shared per-dimension table (built on first use, then immutable).
const StabilizerTable& stabilizer_table(int d);

}  // namespace distillery
