#pragma once

#include "quips/quiver.hpp"
#include "quips/structures.hpp"
#include "quips/verify.hpp"

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace quips {

// A path in the double quiver: a composable arrow word (written left to
// right, head of each arrow = tail of the next), or a lone idempotent e_s.
struct NCPath {
    bool idempotent = false;
    std::size_t vertex = 0;              // for idempotents
    std::vector<std::size_t> arrows;     // arrow indices, empty iff idempotent

    static NCPath idem(std::size_t s) { return NCPath{true, s, {}}; }
    static NCPath word(const Quiver& q, std::vector<std::size_t> arrows);

    std::size_t tail(const Quiver& q) const { return idempotent ? vertex : q.arrows[arrows.front()].tail; }
    std::size_t head(const Quiver& q) const { return idempotent ? vertex : q.arrows[arrows.back()].head; }
    bool closed(const Quiver& q) const { return tail(q) == head(q); }

    friend bool operator<(const NCPath& a, const NCPath& b) {
        return std::tie(a.idempotent, a.vertex, a.arrows) <
               std::tie(b.idempotent, b.vertex, b.arrows);
    }
    friend bool operator==(const NCPath& a, const NCPath& b) {
        return a.idempotent == b.idempotent && a.vertex == b.vertex && a.arrows == b.arrows;
    }

    std::string str(const Quiver& q) const;
};

// Product of paths; nullopt encodes 0 (non-composable or clashing idempotent).
std::optional<NCPath> path_mul(const Quiver& q, const NCPath& a, const NCPath& b);

// Rational linear combination of paths.
class NCElement {
public:
    NCElement() = default;
    explicit NCElement(const NCPath& p, Rat c = Rat(1)) { add(p, c); }

    const std::map<NCPath, Rat>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    void add(const NCPath& p, const Rat& c);

    NCElement& operator+=(const NCElement& o);
    friend bool operator==(const NCElement& a, const NCElement& b) { return a.terms_ == b.terms_; }

private:
    std::map<NCPath, Rat> terms_;
};

// Elements of the tensor square / cube, as weighted path tuples.
using Tensor2 = std::map<std::pair<NCPath, NCPath>, Rat>;
using Tensor3 = std::map<std::tuple<NCPath, NCPath, NCPath>, Rat>;

void tensor2_add(Tensor2& t, const NCPath& a, const NCPath& b, const Rat& c);
void tensor3_add(Tensor3& t, const NCPath& a, const NCPath& b, const NCPath& c, const Rat& v);

// Closed path up to cyclic rotation, keyed by the lexicographically minimal
// rotation; the empty necklace at a vertex is tr(e_s).
struct Necklace {
    bool idempotent = false;
    std::size_t vertex = 0;
    std::vector<std::size_t> arrows;  // minimal rotation

    static Necklace of_path(const Quiver& q, const NCPath& p);
    NCPath representative() const {
        return idempotent ? NCPath::idem(vertex) : NCPath{false, 0, arrows};
    }
    friend bool operator<(const Necklace& a, const Necklace& b) {
        return std::tie(a.idempotent, a.vertex, a.arrows) <
               std::tie(b.idempotent, b.vertex, b.arrows);
    }
    friend bool operator==(const Necklace& a, const Necklace& b) {
        return a.idempotent == b.idempotent && a.vertex == b.vertex && a.arrows == b.arrows;
    }
    std::string str(const Quiver& q) const;
};

// Commutative polynomial in necklace symbols.
class NecklacePoly {
public:
    using Mono = std::vector<Necklace>;  // sorted with multiplicity

    NecklacePoly() = default;
    explicit NecklacePoly(Rat c) { if (!c.is_zero()) terms_[{}] = std::move(c); }
    static NecklacePoly symbol(const Necklace& n, Rat c = Rat(1));

    const std::map<Mono, Rat>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    void add(const Mono& m, const Rat& c);

    NecklacePoly operator-() const;
    NecklacePoly& operator+=(const NecklacePoly& o);
    NecklacePoly& operator-=(const NecklacePoly& o);
    friend NecklacePoly operator+(NecklacePoly a, const NecklacePoly& b) { return a += b; }
    friend NecklacePoly operator-(NecklacePoly a, const NecklacePoly& b) { return a -= b; }
    friend NecklacePoly operator*(const NecklacePoly& a, const NecklacePoly& b);
    NecklacePoly scaled(const Rat& c) const;
    friend bool operator==(const NecklacePoly& a, const NecklacePoly& b) {
        return a.terms_ == b.terms_;
    }

    std::string str(const Quiver& q) const;

private:
    std::map<Mono, Rat> terms_;
};

// tr: kills open paths, closes closed ones into necklaces.
NecklacePoly nc_trace(const Quiver& q, const NCElement& e);

// Outer double bracket on generators and its bilinear extension by the
// derivation rules to arbitrary path words.
Tensor2 dbr_outer_gen(const QuiverModel& m, std::size_t a, std::size_t b);
Tensor2 dbr_outer(const QuiverModel& m, const NCElement& f, const NCElement& g);

// Right double bracket <<a,b>>_r = eps(a) eps(b) z_ab a (x) b and its
// extension by the right derivation rules.
Tensor2 dbr_right_gen(const QuiverModel& m, const PencilParams& z, std::size_t a, std::size_t b);
Tensor2 dbr_right(const QuiverModel& m, const PencilParams& z, const NCElement& f,
                  const NCElement& g);

// {tr f, tr g} = tr(m(<<f,g>>_o)) on necklaces; extends to NecklacePoly by
// the Leibniz rule.
NecklacePoly trace_bracket_vdb(const QuiverModel& m, const Necklace& f, const Necklace& g);
NecklacePoly trace_bracket_vdb(const QuiverModel& m, const NecklacePoly& f, const NecklacePoly& g);

// {tr f, tr g}_z = (tr (x) tr)(<<f,g>>_r) = c_{f,g} tr f tr g.
NecklacePoly trace_bracket_z(const QuiverModel& m, const PencilParams& z, const Necklace& f,
                             const Necklace& g);
NecklacePoly trace_bracket_z(const QuiverModel& m, const PencilParams& z, const NecklacePoly& f,
                             const NecklacePoly& g);
// The closed-form coefficient c_{f,g} = sum_{j,k} eps(f_j) eps(g_k) z_{f_j g_k}.
Rat trace_bracket_z_coeff(const QuiverModel& m, const PencilParams& z, const Necklace& f,
                          const Necklace& g);
// The direct route (tr (x) tr) o dbr_right, kept separate as an oracle.
NecklacePoly trace_bracket_z_direct(const QuiverModel& m, const PencilParams& z,
                                    const Necklace& f, const Necklace& g);

// Trilinear map of the right double bracket and the (12)-weak Poisson check
// on all generator triples.
Tensor3 dbr_right_triple(const QuiverModel& m, const PencilParams& z, std::size_t a,
                         std::size_t b, std::size_t c);
CheckReport check_weak_poisson(const QuiverModel& m, const PencilParams& z);

// Jacobi identity of z0 {{.,.}} + {.,.}_z on a NecklacePoly triple, exactly.
CheckReport check_mixed_jacobi(const QuiverModel& m, const PencilParams& z, const Rat& z0,
                               const NecklacePoly& f, const NecklacePoly& g,
                               const NecklacePoly& h);

// Representation morphism: necklace-level bracket vs bivector bracket of the
// trace-word polynomials at sampled points.
CheckReport check_rep_morphism(const QuiverModel& m,
                               const std::vector<std::vector<std::size_t>>& words,
                               const PencilParams& z, const Rat& z0, std::size_t n_points,
                               std::uint64_t seed);

// Image of a necklace polynomial under tr(a_1...a_k) -> tr(X_{a_1}...X_{a_k});
// empty necklaces map to the vertex dimension.
Poly necklace_to_poly(const QuiverModel& m, const NecklacePoly& p);

// Arrow-name word parser for the CLI ("v1 v1* x" -> arrow indices).
std::vector<std::size_t> parse_word(const QuiverModel& m, const std::string& text);

} // namespace quips
