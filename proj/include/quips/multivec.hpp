#pragma once

#include "quips/matrix.hpp"
#include "quips/poly.hpp"
#include "quips/varspace.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace quips {

// Strictly increasing tuple of variable ordinals (the wedge index set).
using IndexTuple = std::vector<std::uint32_t>;

// Polyvector field of homogeneous degree k with polynomial coefficients.
// Antisymmetry is normalized into the coefficients: keys are strictly
// increasing tuples. Degree 0 stores a single Poly under the empty tuple.
class PolyMultiVector {
public:
    PolyMultiVector() : deg_(0) {}
    explicit PolyMultiVector(std::size_t degree) : deg_(degree) {}
    explicit PolyMultiVector(Poly f) : deg_(0) {
        if (!f.is_zero()) terms_[IndexTuple{}] = std::move(f);
    }

    static PolyMultiVector basis(std::uint32_t v) {
        PolyMultiVector m(1);
        m.terms_[IndexTuple{v}] = Poly(Rat(1));
        return m;
    }

    std::size_t degree() const { return deg_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<IndexTuple, Poly>& terms() const { return terms_; }

    void add_term(IndexTuple idx, const Poly& coeff);  // idx may be unsorted; sign fixed here

    PolyMultiVector operator-() const;
    PolyMultiVector& operator+=(const PolyMultiVector& o);
    PolyMultiVector& operator-=(const PolyMultiVector& o);
    friend PolyMultiVector operator+(PolyMultiVector a, const PolyMultiVector& b) { return a += b; }
    friend PolyMultiVector operator-(PolyMultiVector a, const PolyMultiVector& b) { return a -= b; }
    PolyMultiVector scaled(const Rat& c) const;
    PolyMultiVector scaled(const Poly& f) const;

    friend bool operator==(const PolyMultiVector& a, const PolyMultiVector& b) {
        return a.terms_ == b.terms_;
    }

    std::string str(const VarSpace& vs) const;

private:
    std::size_t deg_;
    std::map<IndexTuple, Poly> terms_;
};

// Exterior product.
PolyMultiVector wedge(const PolyMultiVector& a, const PolyMultiVector& b);

// Schouten-Nijenhuis bracket, normalized so that for a bivector P and
// functions f,g,h:  (1/2)[P,P](df,dg,dh) = {{f,g},h} + {{g,h},f} + {{h,f},g}
// with {f,g} = <P, df (x) dg>, and so that on vector fields it is the usual
// Lie bracket. Graded antisymmetry: [A,B] = -(-1)^((k-1)(l-1)) [B,A].
PolyMultiVector schouten(const PolyMultiVector& a, const PolyMultiVector& b);

// <A, df_1 (x) ... (x) df_k> for a degree-k field: determinant pairing.
Poly pair_with_gradients(const PolyMultiVector& a, const std::vector<Poly>& fs);

// P#(alpha) for a bivector P and a covector with Poly components:
// P#(alpha)(dx_l) = <P, alpha (x) dx_l>. Returns a degree-1 field.
PolyMultiVector sharp(const PolyMultiVector& p, const std::vector<Poly>& alpha);

// Bivector evaluated at a point: antisymmetric matrix m[u][v] = <P, dx_u (x) dx_v>.
RatMatrix bivector_matrix(const PolyMultiVector& p, const std::vector<Rat>& point,
                          std::size_t n_vars);

// Degree-1 field evaluated at a point: coordinate components.
std::vector<Rat> vector_field_at(const PolyMultiVector& v, const std::vector<Rat>& point,
                                 std::size_t n_vars);

// Matrix with polyvector entries; products contract with the wedge in place
// of scalar multiplication, so expressions like tr[M dd_a ^ dd_a*] read off
// the page.
class MatVec {
public:
    MatVec() : r_(0), c_(0) {}
    MatVec(std::size_t r, std::size_t c) : r_(r), c_(c), d_(r * c) {}

    // Lift a matrix of polynomials (degree-0 entries).
    static MatVec from_polys(const Mat<Poly>& m);

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    PolyMultiVector& operator()(std::size_t i, std::size_t j) { return d_[i * c_ + j]; }
    const PolyMultiVector& operator()(std::size_t i, std::size_t j) const { return d_[i * c_ + j]; }

    MatVec operator-() const;
    MatVec& operator+=(const MatVec& o);
    MatVec& operator-=(const MatVec& o);
    friend MatVec operator+(MatVec a, const MatVec& b) { return a += b; }
    friend MatVec operator-(MatVec a, const MatVec& b) { return a -= b; }

    // Matrix product with wedge contraction.
    friend MatVec operator*(const MatVec& a, const MatVec& b);

    PolyMultiVector trace() const;

private:
    std::size_t r_, c_;
    std::vector<PolyMultiVector> d_;
};

// Matrix of coordinate functions of a block: entry (i,j) = the (i,j) entry
// of the block as a degree-0 polyvector.
MatVec coord_matvec(const VarSpace& vs, std::size_t block_id);

// Matrix-valued vector field dd with (i,j) entry d/dx_{block[j][i]}; shape is
// the transpose of the block's.
MatVec partial_matvec(const VarSpace& vs, std::size_t block_id);

Mat<Poly> coord_polys(const VarSpace& vs, std::size_t block_id);

} // namespace quips
