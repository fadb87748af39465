#pragma once

#include "quips/multivec.hpp"
#include "quips/rat.hpp"
#include "quips/varspace.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace quips {

// Arrow of the double quiver. Arrows are stored in the total order used for
// moment-map factors and fusion terms, so "a < b" is index comparison.
struct Arrow {
    std::string name;
    std::size_t tail = 0, head = 0;
    std::size_t star = 0;   // index of the reversed arrow
    int epsilon = +1;       // +1 exactly on original arrows
    Rat gamma{1};           // deformation, gamma_{a*} = gamma_a
};

struct Quiver {
    std::vector<std::string> vertices;
    std::vector<Arrow> arrows;  // the double, in the total order

    std::size_t vertex_index(const std::string& name) const;
    std::size_t arrow_index(const std::string& name) const;
    std::size_t n_original() const {
        std::size_t k = 0;
        for (const auto& a : arrows) if (a.epsilon == +1) ++k;
        return k;
    }
    std::vector<std::size_t> original_arrows() const {
        std::vector<std::size_t> v;
        for (std::size_t i = 0; i < arrows.size(); ++i)
            if (arrows[i].epsilon == +1) v.push_back(i);
        return v;
    }
    void validate() const;
};

// Underlying graph is a tree with at most one branching vertex.
bool is_star_shaped(const Quiver& q);

struct ArrowSpec {
    std::string name, tail, head;
    Rat gamma{1};
};

// Builds the double automatically: each original arrow a gets a reversed
// arrow named "a*". If `ordering` lists only original arrows the induced
// order a1 < a1* < a2 < a2* < ... is used; an empty ordering means
// declaration order.
Quiver make_quiver(const std::vector<std::string>& vertices,
                   const std::vector<ArrowSpec>& arrows,
                   const std::vector<std::string>& ordering = {});

// Quiver + dimension vector + the coordinate universe of the representation
// space: one block per arrow of the double, of shape n_tail x n_head.
class QuiverModel {
public:
    QuiverModel() = default;
    QuiverModel(Quiver q, std::vector<std::size_t> dims);

    const Quiver& quiver() const { return q_; }
    const std::vector<std::size_t>& dims() const { return dims_; }
    const VarSpace& space() const { return vs_; }
    std::size_t n_vars() const { return vs_.n_vars(); }

    std::size_t dim_at(std::size_t vertex) const { return dims_.at(vertex); }
    std::size_t n_tail(std::size_t arrow) const { return dims_.at(q_.arrows.at(arrow).tail); }
    std::size_t n_head(std::size_t arrow) const { return dims_.at(q_.arrows.at(arrow).head); }

    // Coordinate block of X_a (shape n_tail x n_head); block id == arrow id.
    std::size_t block(std::size_t arrow) const { return arrow; }

    // gl_n basis bookkeeping: elements (vertex, i, j) <-> flat index.
    struct LieBasisElem { std::size_t vertex, i, j; };
    std::size_t lie_dim() const { return lie_.size(); }
    const LieBasisElem& lie_elem(std::size_t k) const { return lie_.at(k); }
    // Dual under the trace form: E^{(s,i,j)} = E_{(s,j,i)}.
    std::size_t lie_dual(std::size_t k) const {
        const auto& e = lie_.at(k);
        return lie_index(e.vertex, e.j, e.i);
    }
    std::size_t lie_index(std::size_t vertex, std::size_t i, std::size_t j) const;

private:
    Quiver q_;
    std::vector<std::size_t> dims_;
    VarSpace vs_;
    std::vector<LieBasisElem> lie_;
};

// Parse the quiver spec JSON format:
// {"vertices":[...], "arrows":[{"name","tail","head","gamma"}...],
//  "ordering":[...], "dims":{vertex:count}}
QuiverModel model_from_json(const std::string& json_text);
QuiverModel model_from_file(const std::string& path);
std::string model_to_json(const QuiverModel& m);

// (dd_a)_{ij} = d/d(X_a)_{ji}: an n_head x n_tail grid of unit polyvectors.
MatVec partial_matrix(const QuiverModel& m, std::size_t arrow);

// Infinitesimal action of a block-diagonal xi (one matrix per vertex):
// xi_M = sum_a tr[(dd_a X_a - X_a dd_a) xi], so xi_M(X_a) = [X_a, xi].
PolyMultiVector infinitesimal_action(const QuiverModel& m, const std::vector<RatMatrix>& xi);

// Action of the basis element E_{ij} at a vertex.
PolyMultiVector infinitesimal_action_basis(const QuiverModel& m, std::size_t vertex,
                                           std::size_t i, std::size_t j);

// All basis actions, indexed like the model's Lie basis.
std::vector<PolyMultiVector> lie_basis_actions(const QuiverModel& m);

// Global sign of the Cartan trivector, fixed once by requiring the built
// multiplicative bivector to satisfy [P,P] = phi_M on the 1-arrow quiver
// with dims (2,1); see the calibration test.
inline constexpr int kCartanSign = -1;

// phi_M = kCartanSign/12 sum tr(E^a [E^b,E^c]) (E_a)_M ^ (E_b)_M ^ (E_c)_M.
PolyMultiVector cartan_trivector(const QuiverModel& m);

// A_b(1) = tr(X_{b*} dd_{b*} - X_b dd_b): generator of the scaling action
// X_b -> lambda^-1 X_b, X_{b*} -> lambda X_{b*} on functions.
PolyMultiVector cyclic_action_field(const QuiverModel& m, std::size_t arrow);

// Fusion: P - 1/2 sum_k fields1[k] ^ fields2[k], for dual-basis actions of
// the two group factors being glued.
PolyMultiVector fuse(const PolyMultiVector& p, const std::vector<PolyMultiVector>& fields1,
                     const std::vector<PolyMultiVector>& fields2);

// Measured sign s in schouten(xi_M, zeta_M) = s ([xi,zeta])_M; the exp(-t xi)
// convention makes this worth pinning in a test rather than rederiving.
int measure_lie_sign(const QuiverModel& m);

// Everything the checkers need about a group action on a coordinate space:
// the sizes of the GL factors and the infinitesimal fields of the
// elementary-matrix basis, flattened (factor, i, j).
struct ActionData {
    std::vector<std::size_t> factor_dims;
    std::vector<PolyMultiVector> basis_actions;

    std::size_t lie_dim() const { return basis_actions.size(); }
    std::size_t index(std::size_t factor, std::size_t i, std::size_t j) const;
    std::size_t dual(std::size_t k) const;  // E^{(s,i,j)} = E_{(s,j,i)}
    struct Elem { std::size_t factor, i, j; };
    Elem elem(std::size_t k) const;
};

ActionData action_data(const QuiverModel& m);

// phi_M for an arbitrary action, same normalization as cartan_trivector.
PolyMultiVector cartan_from_actions(const ActionData& act);

// tr(X_{a_1} ... X_{a_k}) for a closed composable word of arrows, as a
// polynomial in the coordinates; the idempotent word at a vertex gives the
// constant n_s.
Poly trace_word(const QuiverModel& m, const std::vector<std::size_t>& word);

// Closed composable arrow words of length 1..max_len, as arrow index lists.
std::vector<std::vector<std::size_t>> closed_words(const QuiverModel& m, std::size_t max_len);

} // namespace quips
