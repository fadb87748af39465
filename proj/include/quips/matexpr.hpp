#pragma once

#include "quips/matrix.hpp"
#include "quips/varspace.hpp"

#include <memory>
#include <string>
#include <vector>

namespace quips {

// Evaluatable AST for matrix-valued rational expressions (moment maps and
// everything containing an inverse). Expressions are immutable and shared.
class MatExprNode;
using MatExpr = std::shared_ptr<const MatExprNode>;

class MatExprNode {
public:
    enum class Kind { Coord, Const, Sum, Prod, Scal, Inv, Transpose };

    Kind kind;
    std::size_t rows = 0, cols = 0;

    // Coord
    std::size_t block = 0;
    // Const
    RatMatrix cst;
    // Sum / Prod children; Scal/Inv/Transpose use children[0]
    std::vector<MatExpr> children;
    Rat scal;

    template <class T>
    Mat<T> eval(const VarSpace& vs, const std::vector<T>& point) const {
        switch (kind) {
            case Kind::Coord: {
                Mat<T> m(rows, cols);
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j)
                        m(i, j) = point.at(vs.var(block, i, j));
                return m;
            }
            case Kind::Const: {
                Mat<T> m(rows, cols);
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j)
                        m(i, j) = lift<T>(cst(i, j));
                return m;
            }
            case Kind::Sum: {
                Mat<T> m(rows, cols);
                for (const auto& c : children) m += c->eval(vs, point);
                return m;
            }
            case Kind::Prod: {
                Mat<T> m = children[0]->eval(vs, point);
                for (std::size_t i = 1; i < children.size(); ++i)
                    m = m * children[i]->eval(vs, point);
                return m;
            }
            case Kind::Scal:
                return children[0]->eval(vs, point).scaled(lift<T>(scal));
            case Kind::Inv:
                return children[0]->eval(vs, point).inverse();
            case Kind::Transpose:
                return children[0]->eval(vs, point).transpose();
        }
        throw std::logic_error("unreachable");
    }

private:
    template <class T>
    static T lift(const Rat& c) {
        if constexpr (std::is_same_v<T, Rat>) return c;
        else if constexpr (std::is_same_v<T, Jet>) return Jet(c);
        else return MDual(c);
    }
};

MatExpr mx_coord(const VarSpace& vs, std::size_t block_id);
MatExpr mx_const(RatMatrix m);
MatExpr mx_id(std::size_t n, Rat diag = Rat(1));
MatExpr mx_sum(std::vector<MatExpr> terms);
MatExpr mx_prod(std::vector<MatExpr> factors);
MatExpr mx_scal(Rat c, MatExpr e);
MatExpr mx_inv(MatExpr e);
MatExpr mx_transpose(MatExpr e);
// gamma * Id + product(factors); the workhorse for moment-map factors.
MatExpr mx_affine(Rat gamma, std::vector<MatExpr> factors);

// Arguments of every Inv node (deduplicated by pointer); their determinants
// form the avoid set for sampling.
void collect_inverse_args(const MatExpr& e, std::vector<MatExpr>& out);

// Differential 1/2/3-forms built from traces of products of matrix factors
// and their differentials. A term is coeff * prod_g tr(F_g1 F_g2 ...), each
// factor either M or dM; the form degree is the total number of d-factors.
// Evaluation on tangent tuples antisymmetrizes over the assignments of
// tangents to d-slots with permutation signs; d passes through products by
// the Leibniz rule and through inverses by d(M^-1) = -M^-1 dM M^-1 (both are
// consequences of first-order jet evaluation, not special cases).
struct TraceFactor {
    MatExpr m;
    bool diff = false;
};
using TraceGroup = std::vector<TraceFactor>;

struct TraceTerm {
    Rat coeff;
    std::vector<TraceGroup> groups;
};

class TraceForm {
public:
    TraceForm() : deg_(0) {}
    explicit TraceForm(std::size_t degree) : deg_(degree) {}

    std::size_t degree() const { return deg_; }
    const std::vector<TraceTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    void add_term(Rat coeff, std::vector<TraceGroup> groups);
    void add_single(Rat coeff, TraceGroup group) { add_term(std::move(coeff), {std::move(group)}); }

    TraceForm& operator+=(const TraceForm& o);
    friend TraceForm operator+(TraceForm a, const TraceForm& b) { return a += b; }
    TraceForm scaled(const Rat& c) const;

    // Exact antisymmetrized evaluation on #degree tangent vectors given as
    // coordinate component vectors.
    Rat eval(const VarSpace& vs, const std::vector<Rat>& point,
             const std::vector<std::vector<Rat>>& tangents) const;

    // d(omega)(u,v,w) = u(omega(v,w)) - v(omega(u,w)) + w(omega(u,v)) for a
    // 2-form and constant coordinate tangents.
    Rat exterior_derivative_at(const VarSpace& vs, const std::vector<Rat>& point,
                               const std::vector<std::vector<Rat>>& tangents) const;

    void collect_inverse_args(std::vector<MatExpr>& out) const;

private:
    std::size_t deg_;
    std::vector<TraceTerm> terms_;
};

// tr of a matrix of first-order jets paired against tangent directions is
// used directly by several checks; expose the jet point constructor.
std::vector<Jet> jet_point_all_directions(const std::vector<Rat>& point);
std::vector<MDual> mdual_point(const std::vector<Rat>& point,
                               const std::vector<std::vector<Rat>>& tangents);

} // namespace quips
