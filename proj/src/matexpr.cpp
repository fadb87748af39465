#include "quips/matexpr.hpp"

#include <algorithm>
#include <set>

namespace quips {

namespace {
std::shared_ptr<MatExprNode> make(MatExprNode::Kind k) {
    auto n = std::make_shared<MatExprNode>();
    n->kind = k;
    return n;
}
} // namespace

MatExpr mx_coord(const VarSpace& vs, std::size_t block_id) {
    auto n = make(MatExprNode::Kind::Coord);
    n->block = block_id;
    n->rows = vs.block(block_id).rows;
    n->cols = vs.block(block_id).cols;
    return n;
}

MatExpr mx_const(RatMatrix m) {
    auto n = make(MatExprNode::Kind::Const);
    n->rows = m.rows();
    n->cols = m.cols();
    n->cst = std::move(m);
    return n;
}

MatExpr mx_id(std::size_t sz, Rat diag) {
    RatMatrix m(sz, sz);
    for (std::size_t i = 0; i < sz; ++i) m(i, i) = diag;
    return mx_const(std::move(m));
}

MatExpr mx_sum(std::vector<MatExpr> terms) {
    if (terms.empty()) throw BadParams("mx_sum: empty sum");
    auto n = make(MatExprNode::Kind::Sum);
    n->rows = terms[0]->rows;
    n->cols = terms[0]->cols;
    for (const auto& t : terms)
        if (t->rows != n->rows || t->cols != n->cols)
            throw DimensionMismatch("mx_sum: incompatible shapes");
    n->children = std::move(terms);
    return n;
}

MatExpr mx_prod(std::vector<MatExpr> factors) {
    if (factors.empty()) throw BadParams("mx_prod: empty product");
    if (factors.size() == 1) return factors[0];
    auto n = make(MatExprNode::Kind::Prod);
    for (std::size_t i = 0; i + 1 < factors.size(); ++i)
        if (factors[i]->cols != factors[i + 1]->rows)
            throw DimensionMismatch("mx_prod: incompatible shapes");
    n->rows = factors.front()->rows;
    n->cols = factors.back()->cols;
    n->children = std::move(factors);
    return n;
}

MatExpr mx_scal(Rat c, MatExpr e) {
    auto n = make(MatExprNode::Kind::Scal);
    n->rows = e->rows;
    n->cols = e->cols;
    n->scal = std::move(c);
    n->children = {std::move(e)};
    return n;
}

MatExpr mx_inv(MatExpr e) {
    if (e->rows != e->cols) throw DimensionMismatch("mx_inv: non-square");
    auto n = make(MatExprNode::Kind::Inv);
    n->rows = e->rows;
    n->cols = e->cols;
    n->children = {std::move(e)};
    return n;
}

MatExpr mx_transpose(MatExpr e) {
    auto n = make(MatExprNode::Kind::Transpose);
    n->rows = e->cols;
    n->cols = e->rows;
    n->children = {std::move(e)};
    return n;
}

MatExpr mx_affine(Rat gamma, std::vector<MatExpr> factors) {
    MatExpr p = mx_prod(std::move(factors));
    return mx_sum({mx_id(p->rows, std::move(gamma)), p});
}

void collect_inverse_args(const MatExpr& e, std::vector<MatExpr>& out) {
    if (e->kind == MatExprNode::Kind::Inv) {
        const MatExpr& arg = e->children[0];
        bool seen = false;
        for (const auto& x : out)
            if (x.get() == arg.get()) { seen = true; break; }
        if (!seen) out.push_back(arg);
    }
    for (const auto& c : e->children) collect_inverse_args(c, out);
}

void TraceForm::add_term(Rat coeff, std::vector<TraceGroup> groups) {
    if (coeff.is_zero()) return;
    std::size_t d = 0;
    for (const auto& g : groups)
        for (const auto& f : g)
            if (f.diff) ++d;
    if (terms_.empty() && deg_ == 0) deg_ = d;
    else if (d != deg_) throw DegreeMismatch("trace term of wrong form degree");
    terms_.push_back(TraceTerm{std::move(coeff), std::move(groups)});
}

TraceForm& TraceForm::operator+=(const TraceForm& o) {
    if (terms_.empty() && deg_ == 0) deg_ = o.deg_;
    else if (!o.terms_.empty() && o.deg_ != deg_)
        throw DegreeMismatch("adding trace forms of different degree");
    for (const auto& t : o.terms_) terms_.push_back(t);
    return *this;
}

TraceForm TraceForm::scaled(const Rat& c) const {
    TraceForm f(deg_);
    if (c.is_zero()) return f;
    for (const auto& t : terms_) {
        TraceTerm s = t;
        s.coeff *= c;
        f.terms_.push_back(std::move(s));
    }
    return f;
}

void TraceForm::collect_inverse_args(std::vector<MatExpr>& out) const {
    for (const auto& t : terms_)
        for (const auto& g : t.groups)
            for (const auto& f : g) quips::collect_inverse_args(f.m, out);
}

std::vector<Jet> jet_point_all_directions(const std::vector<Rat>& point) {
    std::vector<Jet> p;
    p.reserve(point.size());
    for (std::size_t i = 0; i < point.size(); ++i)
        p.push_back(Jet::variable(point[i], point.size(), i));
    return p;
}

std::vector<MDual> mdual_point(const std::vector<Rat>& point,
                               const std::vector<std::vector<Rat>>& tangents) {
    unsigned k = static_cast<unsigned>(tangents.size());
    std::vector<MDual> p;
    p.reserve(point.size());
    for (std::size_t v = 0; v < point.size(); ++v) {
        MDual m(point[v], k);
        for (unsigned j = 0; j < k; ++j) m.comp(std::size_t(1) << j) = tangents[j].at(v);
        p.push_back(std::move(m));
    }
    return p;
}

namespace {

// A term with factors evaluated once at the multidual point; assignments of
// directions to d-slots are then pure component bookkeeping.
struct EvalTerm {
    std::vector<std::vector<Mat<MDual>>> groups;
    std::vector<std::pair<std::size_t, std::size_t>> slots;  // (group, factor)
};

EvalTerm evaluate_factors(const TraceTerm& term, const VarSpace& vs,
                          const std::vector<MDual>& point) {
    EvalTerm et;
    et.groups.resize(term.groups.size());
    for (std::size_t g = 0; g < term.groups.size(); ++g) {
        et.groups[g].reserve(term.groups[g].size());
        for (std::size_t f = 0; f < term.groups[g].size(); ++f) {
            et.groups[g].push_back(term.groups[g][f].m->eval(vs, point));
            if (term.groups[g][f].diff) et.slots.emplace_back(g, f);
        }
    }
    return et;
}

Mat<MDual> shift_matrix(const Mat<MDual>& m, unsigned dir) {
    Mat<MDual> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(i, j) = m(i, j).shift(dir);
    return out;
}

// Product of group traces with each d-slot differentiated along its assigned
// direction.
MDual term_value(const EvalTerm& et, const std::vector<unsigned>& dirs) {
    MDual acc(Rat(1));
    std::size_t slot = 0;
    for (std::size_t g = 0; g < et.groups.size(); ++g) {
        Mat<MDual> prod;
        bool started = false;
        for (std::size_t f = 0; f < et.groups[g].size(); ++f) {
            bool is_slot = slot < et.slots.size() && et.slots[slot] == std::make_pair(g, f);
            Mat<MDual> cur = is_slot ? shift_matrix(et.groups[g][f], dirs[slot])
                                     : et.groups[g][f];
            if (is_slot) ++slot;
            if (!started) { prod = std::move(cur); started = true; }
            else prod = prod * cur;
        }
        acc *= prod.trace();
    }
    return acc;
}

int perm_sign(const std::vector<unsigned>& p) {
    int s = 1;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j)
            if (p[i] > p[j]) s = -s;
    return s;
}

} // namespace

Rat TraceForm::eval(const VarSpace& vs, const std::vector<Rat>& point,
                    const std::vector<std::vector<Rat>>& tangents) const {
    if (tangents.size() != deg_)
        throw DegreeMismatch("eval: tangent count must equal form degree");
    std::vector<MDual> mp = mdual_point(point, tangents);
    Rat total(0);
    std::vector<unsigned> perm(deg_);
    for (const auto& term : terms_) {
        EvalTerm et = evaluate_factors(term, vs, mp);
        for (std::size_t i = 0; i < deg_; ++i) perm[i] = static_cast<unsigned>(i);
        Rat acc(0);
        do {
            MDual v = term_value(et, perm);
            Rat c = v.value();
            if (!c.is_zero()) acc += (perm_sign(perm) == 1) ? c : -c;
        } while (std::next_permutation(perm.begin(), perm.end()));
        total += term.coeff * acc;
    }
    return total;
}

Rat TraceForm::exterior_derivative_at(const VarSpace& vs, const std::vector<Rat>& point,
                                      const std::vector<std::vector<Rat>>& tangents) const {
    if (deg_ != 2 || tangents.size() != 3)
        throw DegreeMismatch("exterior_derivative_at expects a 2-form and 3 tangents");
    std::vector<MDual> mp = mdual_point(point, tangents);
    Rat total(0);
    for (const auto& term : terms_) {
        EvalTerm et = evaluate_factors(term, vs, mp);
        Rat acc(0);
        for (unsigned outer = 0; outer < 3; ++outer) {
            unsigned o1 = (outer == 0) ? 1 : 0;
            unsigned o2 = (outer == 2) ? 1 : 2;
            // outer(omega(o1,o2)) with a sign (-1)^outer
            Rat inner(0);
            inner += term_value(et, {o1, o2}).comp(std::size_t(1) << outer);
            inner -= term_value(et, {o2, o1}).comp(std::size_t(1) << outer);
            if (outer == 1) acc -= inner;
            else acc += inner;
        }
        total += term.coeff * acc;
    }
    return total;
}

} // namespace quips
