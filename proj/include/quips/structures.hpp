#pragma once

#include "quips/matexpr.hpp"
#include "quips/multivec.hpp"
#include "quips/quiver.hpp"
#include "quips/sample.hpp"

#include <map>
#include <utility>
#include <vector>

namespace quips {

// Pencil parameters z_{a,b} over unordered pairs of original arrows, with
// the extension to the double: antisymmetric, z_{a*b} = z_{ab*} = z_{a*b*}
// = z_{ab}.
class PencilParams {
public:
    PencilParams() = default;

    void set(std::size_t a, std::size_t b, Rat v);  // a,b original arrow indices
    // Extended table on the double; arguments are arrow indices in the double.
    Rat extended(const Quiver& q, std::size_t a, std::size_t b) const;
    // Value on an original pair (0 when a == b).
    Rat base(std::size_t a, std::size_t b) const;
    bool empty() const { return z_.empty(); }
    const std::map<std::pair<std::size_t, std::size_t>, Rat>& entries() const { return z_; }

private:
    // keyed by (min_original_index, max_original_index), value for (min,max)
    std::map<std::pair<std::size_t, std::size_t>, Rat> z_;
};

PencilParams pencil_params_from_json(const QuiverModel& m, const std::string& json_text);

// The multiplicative structure on a representation space: quasi-Poisson
// bivector, 2-form, block-diagonal moment map and its partial products.
struct StructureBundle {
    QuiverModel model;
    PolyMultiVector P;
    TraceForm omega;
    std::vector<MatExpr> phi;       // one block per vertex
    std::vector<MatExpr> factors;   // gamma_a Id + X_a X_{a*}, one per arrow of the double
    std::vector<AvoidFn> avoid;     // determinants of all inverse arguments
    ActionData actions;
};

StructureBundle build_vdb(const QuiverModel& m);

// psi_z = sum_{a<b} z_{a,b} A_a(1) ^ A_b(1) and the matching 2-form
// varpi_z = sum z_{a,b} tr[F_a^-1 dF_a] ^ tr[F_b^-1 dF_b].
struct PencilPair {
    PolyMultiVector psi;
    TraceForm varpi;
};
PencilPair build_pencil(const QuiverModel& m, const PencilParams& z);

// Same bivector from the entrywise structure functions
// {X_a_ij, X_b_kl} = eps(a) eps(b) z_ab X_a_ij X_b_kl; equality of the two
// construction routes is a checked invariant.
PolyMultiVector build_pencil_explicit(const QuiverModel& m, const PencilParams& z);

// psi_z for one basis direction z_{ab} = 1.
std::vector<PolyMultiVector> pencil_basis(const QuiverModel& m);

// Character-variety master space: 2g+r invertible n x n matrices
// A_1,A_1*,...,A_g,A_g*,Z_1,...,Z_r under simultaneous conjugation.
struct CharBundle {
    VarSpace vs;
    std::size_t g = 0, r = 0, n = 0;
    std::vector<std::size_t> loop_blocks;  // A_i, A_i* block ids (2g of them)
    std::vector<std::size_t> z_blocks;     // Z_j block ids
    PolyMultiVector P;
    MatExpr phi;
    PolyMultiVector psi;  // from z over loop pairs (i<k)
    ActionData actions;
    std::vector<AvoidFn> avoid;
};

// z is indexed by loop pairs: set(i,k,v) with 0 <= i < k < g.
CharBundle build_char(std::size_t g, std::size_t r, std::size_t n, const PencilParams& z);

// Additive (quiver-variety) structure: P_qv, omega_qv, Lie-algebra valued
// moment map mu (polynomial, one block per vertex) and omega_z.
struct AdditiveBundle {
    QuiverModel model;
    PolyMultiVector P;
    TraceForm omega;
    std::vector<Mat<Poly>> mu;  // per vertex
    PolyMultiVector psi;
    TraceForm omega_z;
    ActionData actions;
};

AdditiveBundle build_additive(const QuiverModel& m, const PencilParams& z);

// The spin RS master space: quiver Q_d (one loop x, d arrows v_alpha from
// the framing vertex), dims (n,1), gamma_x = 0, gamma_alpha = 1, ordering
// x < x* < v_1 < v_1* < ... Both the (V,W) chart (the model coordinates) and
// the (A,B) chart with its change of variables.
struct SpinRSBundle {
    std::size_t n = 0, d = 0;
    StructureBundle vdb;                 // on the (V,W) coordinates

    // block ids in the model space
    std::size_t blk_x, blk_z;
    std::vector<std::size_t> blk_v, blk_w;

    // (A,B) chart
    VarSpace ab_space;
    std::size_t ab_x, ab_z;
    std::vector<std::size_t> ab_a, ab_b;
    MatExpr phi_ab;  // X Z X^-1 (Z + sum A_al B_al)^-1

    // A_alpha, B_alpha as polynomial matrices in the (V,W) coordinates
    Mat<Poly> a_poly(std::size_t alpha) const;
    Mat<Poly> b_poly(std::size_t alpha) const;

    std::vector<Rat> vw_to_ab(const std::vector<Rat>& pt) const;
    std::vector<Rat> ab_to_vw(const std::vector<Rat>& pt) const;
};

SpinRSBundle build_spin_rs(std::size_t n, std::size_t d);

// Model factories used across the test and CLI surface.
QuiverModel one_loop_model(std::size_t n, Rat gamma);
QuiverModel one_arrow_model(std::size_t n1, std::size_t n2, Rat gamma);
QuiverModel spin_quiver_model(std::size_t n, std::size_t d);  // Q_d, dims (n,1)
QuiverModel star_model(const std::vector<std::size_t>& leg_lengths, std::size_t n);

// Poisson bracket of two polynomials with respect to a polynomial bivector.
Poly poly_bracket(const PolyMultiVector& P, const Poly& f, const Poly& g);

} // namespace quips
