#include "quips/multivec.hpp"

#include <algorithm>
#include <sstream>

namespace quips {

namespace {

// Sort an index tuple, returning the permutation sign; 0 on repeats.
int normalize_tuple(IndexTuple& idx) {
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i) {
        std::size_t j = i;
        while (j > 0 && idx[j - 1] > idx[j]) {
            std::swap(idx[j - 1], idx[j]);
            sign = -sign;
            --j;
        }
    }
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i - 1] == idx[i]) return 0;
    return sign;
}

// Merge sign for the concatenation a ++ b of two strictly increasing tuples;
// 0 if they overlap.
int merge_tuples(const IndexTuple& a, const IndexTuple& b, IndexTuple& out) {
    out.clear();
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    long inversions = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return 0;
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else {
            // b[j] jumps over the remaining entries of a
            inversions += static_cast<long>(a.size() - i);
            out.push_back(b[j++]);
        }
    }
    while (i < a.size()) out.push_back(a[i++]);
    while (j < b.size()) out.push_back(b[j++]);
    return (inversions % 2 == 0) ? 1 : -1;
}

} // namespace

void PolyMultiVector::add_term(IndexTuple idx, const Poly& coeff) {
    if (coeff.is_zero()) return;
    int s = normalize_tuple(idx);
    if (s == 0) return;
    Poly c = (s == 1) ? coeff : -coeff;
    auto it = terms_.find(idx);
    if (it == terms_.end()) {
        terms_.emplace(std::move(idx), std::move(c));
    } else {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

PolyMultiVector PolyMultiVector::operator-() const {
    PolyMultiVector m(deg_);
    for (const auto& [i, f] : terms_) m.terms_[i] = -f;
    return m;
}

PolyMultiVector& PolyMultiVector::operator+=(const PolyMultiVector& o) {
    if (terms_.empty()) deg_ = o.deg_;
    else if (!o.terms_.empty() && deg_ != o.deg_)
        throw DegreeMismatch("adding polyvectors of different degree");
    for (const auto& [i, f] : o.terms_) add_term(i, f);
    return *this;
}

PolyMultiVector& PolyMultiVector::operator-=(const PolyMultiVector& o) {
    if (terms_.empty()) deg_ = o.deg_;
    else if (!o.terms_.empty() && deg_ != o.deg_)
        throw DegreeMismatch("subtracting polyvectors of different degree");
    for (const auto& [i, f] : o.terms_) add_term(i, -f);
    return *this;
}

PolyMultiVector PolyMultiVector::scaled(const Rat& c) const {
    PolyMultiVector m(deg_);
    if (c.is_zero()) return m;
    for (const auto& [i, f] : terms_) m.terms_[i] = f.scaled(c);
    return m;
}

PolyMultiVector PolyMultiVector::scaled(const Poly& g) const {
    PolyMultiVector m(deg_);
    if (g.is_zero()) return m;
    for (const auto& [i, f] : terms_) {
        Poly p = f * g;
        if (!p.is_zero()) m.terms_[i] = std::move(p);
    }
    return m;
}

std::string PolyMultiVector::str(const VarSpace& vs) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    auto name = [&vs](std::uint32_t v) { return vs.var_name(v); };
    for (const auto& [i, f] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << f.str(name) << ")";
        for (auto v : i) os << " d/d" << vs.var_name(v);
    }
    return os.str();
}

PolyMultiVector wedge(const PolyMultiVector& a, const PolyMultiVector& b) {
    PolyMultiVector out(a.degree() + b.degree());
    IndexTuple merged;
    for (const auto& [ia, fa] : a.terms()) {
        for (const auto& [ib, fb] : b.terms()) {
            int s = merge_tuples(ia, ib, merged);
            if (s == 0) continue;
            Poly c = fa * fb;
            if (c.is_zero()) continue;
            if (s < 0) c = -c;
            out.add_term(merged, c);
        }
    }
    return out;
}

// BV antibracket on the odd coordinate ring, with left/right theta-derivative
// signs made explicit; the global prefactor (-1)^((a-1)(b-1)) converts it to
// the convention stated in the header.
PolyMultiVector schouten(const PolyMultiVector& a, const PolyMultiVector& b) {
    std::size_t ka = a.degree(), kb = b.degree();
    if (ka + kb == 0) return PolyMultiVector(0);
    PolyMultiVector out(ka + kb - 1);
    int global = (((ka + 1) * (kb + 1)) % 2 == 0) ? 1 : -1;  // (ka-1)(kb-1) parity
    IndexTuple merged, reduced;

    // sum_i R_i(A) * dB/dx_i
    for (const auto& [ia, fa] : a.terms()) {
        for (std::size_t p = 0; p < ia.size(); ++p) {
            std::uint32_t v = ia[p];
            int s_r = ((ia.size() - 1 - p) % 2 == 0) ? 1 : -1;
            reduced.assign(ia.begin(), ia.end());
            reduced.erase(reduced.begin() + static_cast<long>(p));
            for (const auto& [ib, fb] : b.terms()) {
                Poly dg = fb.partial(v);
                if (dg.is_zero()) continue;
                int s = merge_tuples(reduced, ib, merged);
                if (s == 0) continue;
                Poly c = fa * dg;
                if (c.is_zero()) continue;
                int total = global * s_r * s;
                out.add_term(merged, total == 1 ? c : -c);
            }
        }
    }

    // - sum_i dA/dx_i * L_i(B)
    for (const auto& [ib, fb] : b.terms()) {
        for (std::size_t q = 0; q < ib.size(); ++q) {
            std::uint32_t v = ib[q];
            int s_l = (q % 2 == 0) ? 1 : -1;
            reduced.assign(ib.begin(), ib.end());
            reduced.erase(reduced.begin() + static_cast<long>(q));
            for (const auto& [ia, fa] : a.terms()) {
                Poly df = fa.partial(v);
                if (df.is_zero()) continue;
                int s = merge_tuples(ia, reduced, merged);
                if (s == 0) continue;
                Poly c = df * fb;
                if (c.is_zero()) continue;
                int total = -global * s_l * s;
                out.add_term(merged, total == 1 ? c : -c);
            }
        }
    }
    return out;
}

Poly pair_with_gradients(const PolyMultiVector& a, const std::vector<Poly>& fs) {
    if (fs.size() != a.degree())
        throw DegreeMismatch("pairing arity does not match polyvector degree");
    std::size_t k = fs.size();
    Poly out;
    if (k == 0) {
        for (const auto& [i, f] : a.terms()) out += f;
        return out;
    }
    // det over permutations of M[r][c] = d f_r / d x_{I[c]}
    std::vector<std::size_t> perm(k);
    for (const auto& [idx, coeff] : a.terms()) {
        std::vector<std::vector<Poly>> m(k, std::vector<Poly>(k));
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c)
                m[r][c] = fs[r].partial(idx[c]);
        for (std::size_t i = 0; i < k; ++i) perm[i] = i;
        Poly detp;
        do {
            int sign = 1;
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = i + 1; j < k; ++j)
                    if (perm[i] > perm[j]) sign = -sign;
            Poly prod(Rat(1));
            bool zero = false;
            for (std::size_t r = 0; r < k; ++r) {
                prod *= m[r][perm[r]];
                if (prod.is_zero()) { zero = true; break; }
            }
            if (!zero) detp += (sign == 1) ? prod : -prod;
        } while (std::next_permutation(perm.begin(), perm.end()));
        out += coeff * detp;
    }
    return out;
}

PolyMultiVector sharp(const PolyMultiVector& p, const std::vector<Poly>& alpha) {
    if (p.degree() != 2) throw DegreeMismatch("sharp expects a bivector");
    PolyMultiVector out(1);
    for (const auto& [idx, f] : p.terms()) {
        std::uint32_t i = idx[0], j = idx[1];
        if (i < alpha.size() && !alpha[i].is_zero())
            out.add_term(IndexTuple{j}, f * alpha[i]);
        if (j < alpha.size() && !alpha[j].is_zero())
            out.add_term(IndexTuple{i}, -(f * alpha[j]));
    }
    return out;
}

RatMatrix bivector_matrix(const PolyMultiVector& p, const std::vector<Rat>& point,
                          std::size_t n_vars) {
    if (p.degree() != 2 && !p.is_zero())
        throw DegreeMismatch("bivector_matrix expects a bivector");
    RatMatrix m(n_vars, n_vars);
    for (const auto& [idx, f] : p.terms()) {
        Rat v = f.eval(point);
        if (v.is_zero()) continue;
        m(idx[0], idx[1]) += v;
        m(idx[1], idx[0]) -= v;
    }
    return m;
}

std::vector<Rat> vector_field_at(const PolyMultiVector& v, const std::vector<Rat>& point,
                                 std::size_t n_vars) {
    if (v.degree() != 1 && !v.is_zero())
        throw DegreeMismatch("vector_field_at expects a degree-1 field");
    std::vector<Rat> out(n_vars, Rat(0));
    for (const auto& [idx, f] : v.terms()) out[idx[0]] += f.eval(point);
    return out;
}

MatVec MatVec::from_polys(const Mat<Poly>& m) {
    MatVec out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(i, j) = PolyMultiVector(m(i, j));
    return out;
}

MatVec MatVec::operator-() const {
    MatVec m(r_, c_);
    for (std::size_t i = 0; i < d_.size(); ++i) m.d_[i] = -d_[i];
    return m;
}

MatVec& MatVec::operator+=(const MatVec& o) {
    if (r_ != o.r_ || c_ != o.c_) throw DimensionMismatch("MatVec shape mismatch");
    for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
    return *this;
}

MatVec& MatVec::operator-=(const MatVec& o) {
    if (r_ != o.r_ || c_ != o.c_) throw DimensionMismatch("MatVec shape mismatch");
    for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
    return *this;
}

MatVec operator*(const MatVec& a, const MatVec& b) {
    if (a.c_ != b.r_) throw DimensionMismatch("MatVec product shape mismatch");
    MatVec m(a.r_, b.c_);
    for (std::size_t i = 0; i < a.r_; ++i)
        for (std::size_t k = 0; k < a.c_; ++k) {
            const PolyMultiVector& aik = a(i, k);
            if (aik.is_zero()) continue;
            for (std::size_t j = 0; j < b.c_; ++j) {
                const PolyMultiVector& bkj = b(k, j);
                if (bkj.is_zero()) continue;
                m(i, j) += wedge(aik, bkj);
            }
        }
    return m;
}

PolyMultiVector MatVec::trace() const {
    PolyMultiVector t;
    for (std::size_t i = 0; i < r_ && i < c_; ++i) t += (*this)(i, i);
    return t;
}

MatVec coord_matvec(const VarSpace& vs, std::size_t block_id) {
    const auto& b = vs.block(block_id);
    MatVec m(b.rows, b.cols);
    for (std::size_t i = 0; i < b.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j)
            m(i, j) = PolyMultiVector(Poly::var(static_cast<std::uint32_t>(vs.var(block_id, i, j))));
    return m;
}

MatVec partial_matvec(const VarSpace& vs, std::size_t block_id) {
    const auto& b = vs.block(block_id);
    MatVec m(b.cols, b.rows);
    for (std::size_t i = 0; i < b.cols; ++i)
        for (std::size_t j = 0; j < b.rows; ++j)
            m(i, j) = PolyMultiVector::basis(static_cast<std::uint32_t>(vs.var(block_id, j, i)));
    return m;
}

Mat<Poly> coord_polys(const VarSpace& vs, std::size_t block_id) {
    const auto& b = vs.block(block_id);
    Mat<Poly> m(b.rows, b.cols);
    for (std::size_t i = 0; i < b.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j)
            m(i, j) = Poly::var(static_cast<std::uint32_t>(vs.var(block_id, i, j)));
    return m;
}

} // namespace quips
