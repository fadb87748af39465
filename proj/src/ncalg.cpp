#include "quips/ncalg.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace quips {

namespace {
using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}
} // namespace

NCPath NCPath::word(const Quiver& q, std::vector<std::size_t> arrows) {
    if (arrows.empty()) throw BadParams("empty arrow word");
    for (std::size_t k = 0; k + 1 < arrows.size(); ++k)
        if (q.arrows.at(arrows[k]).head != q.arrows.at(arrows[k + 1]).tail)
            throw PathNotClosed("arrow word is not composable");
    return NCPath{false, 0, std::move(arrows)};
}

std::string NCPath::str(const Quiver& q) const {
    if (idempotent) return "e_" + q.vertices[vertex];
    std::string s;
    for (std::size_t k = 0; k < arrows.size(); ++k) {
        if (k) s += " ";
        s += q.arrows[arrows[k]].name;
    }
    return s;
}

std::optional<NCPath> path_mul(const Quiver& q, const NCPath& a, const NCPath& b) {
    if (a.head(q) != b.tail(q)) return std::nullopt;
    if (a.idempotent) return b;
    if (b.idempotent) return a;
    NCPath p = a;
    p.arrows.insert(p.arrows.end(), b.arrows.begin(), b.arrows.end());
    return p;
}

void NCElement::add(const NCPath& p, const Rat& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(p);
    if (it == terms_.end()) { terms_.emplace(p, c); return; }
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
}

NCElement& NCElement::operator+=(const NCElement& o) {
    for (const auto& [p, c] : o.terms_) add(p, c);
    return *this;
}

void tensor2_add(Tensor2& t, const NCPath& a, const NCPath& b, const Rat& c) {
    if (c.is_zero()) return;
    auto key = std::make_pair(a, b);
    auto it = t.find(key);
    if (it == t.end()) { t.emplace(std::move(key), c); return; }
    it->second += c;
    if (it->second.is_zero()) t.erase(it);
}

void tensor3_add(Tensor3& t, const NCPath& a, const NCPath& b, const NCPath& c, const Rat& v) {
    if (v.is_zero()) return;
    auto key = std::make_tuple(a, b, c);
    auto it = t.find(key);
    if (it == t.end()) { t.emplace(std::move(key), v); return; }
    it->second += v;
    if (it->second.is_zero()) t.erase(it);
}

Necklace Necklace::of_path(const Quiver& q, const NCPath& p) {
    if (!p.closed(q)) throw PathNotClosed("necklace of an open path");
    Necklace n;
    if (p.idempotent) {
        n.idempotent = true;
        n.vertex = p.vertex;
        return n;
    }
    // lexicographically minimal rotation
    const auto& w = p.arrows;
    std::vector<std::size_t> best = w;
    std::vector<std::size_t> rot = w;
    for (std::size_t k = 1; k < w.size(); ++k) {
        std::rotate(rot.begin(), rot.begin() + 1, rot.end());
        if (rot < best) best = rot;
    }
    n.arrows = best;
    return n;
}

std::string Necklace::str(const Quiver& q) const {
    return "tr(" + representative().str(q) + ")";
}

NecklacePoly NecklacePoly::symbol(const Necklace& n, Rat c) {
    NecklacePoly p;
    p.add({n}, c);
    return p;
}

void NecklacePoly::add(const Mono& m, const Rat& c) {
    if (c.is_zero()) return;
    Mono key = m;
    std::sort(key.begin(), key.end());
    auto it = terms_.find(key);
    if (it == terms_.end()) { terms_.emplace(std::move(key), c); return; }
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
}

NecklacePoly NecklacePoly::operator-() const {
    NecklacePoly p;
    for (const auto& [m, c] : terms_) p.terms_[m] = -c;
    return p;
}

NecklacePoly& NecklacePoly::operator+=(const NecklacePoly& o) {
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
}

NecklacePoly& NecklacePoly::operator-=(const NecklacePoly& o) {
    for (const auto& [m, c] : o.terms_) add(m, -c);
    return *this;
}

NecklacePoly operator*(const NecklacePoly& a, const NecklacePoly& b) {
    NecklacePoly out;
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) {
            NecklacePoly::Mono m = ma;
            m.insert(m.end(), mb.begin(), mb.end());
            out.add(m, ca * cb);
        }
    return out;
}

NecklacePoly NecklacePoly::scaled(const Rat& c) const {
    NecklacePoly p;
    if (c.is_zero()) return p;
    for (const auto& [m, k] : terms_) p.terms_[m] = k * c;
    return p;
}

std::string NecklacePoly::str(const Quiver& q) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << c.str();
        for (const auto& n : m) os << "*" << n.str(q);
    }
    return os.str();
}

NecklacePoly nc_trace(const Quiver& q, const NCElement& e) {
    NecklacePoly out;
    for (const auto& [p, c] : e.terms()) {
        if (!p.closed(q)) continue;  // tr of an open path is a commutator, hence 0
        out.add({Necklace::of_path(q, p)}, c);
    }
    return out;
}

namespace {

int order_sign(std::size_t a, std::size_t b) {
    // o(a,b) from the total order on the double: +1 if a < b
    if (a == b) return 0;
    return a < b ? +1 : -1;
}

// prefix a_0..a_{i-1} of a word, as a path (idempotent at the tail if empty)
NCPath word_prefix(const Quiver& q, const std::vector<std::size_t>& w, std::size_t i) {
    if (i == 0) return NCPath::idem(q.arrows[w.front()].tail);
    return NCPath{false, 0, std::vector<std::size_t>(w.begin(), w.begin() + static_cast<long>(i))};
}

// suffix a_{i+1}..a_{n-1}, idempotent at the head if empty
NCPath word_suffix(const Quiver& q, const std::vector<std::size_t>& w, std::size_t i) {
    if (i + 1 == w.size()) return NCPath::idem(q.arrows[w.back()].head);
    return NCPath{false, 0, std::vector<std::size_t>(w.begin() + static_cast<long>(i) + 1, w.end())};
}

std::optional<NCPath> mul3(const Quiver& q, const NCPath& a, const NCPath& b, const NCPath& c) {
    auto ab = path_mul(q, a, b);
    if (!ab) return std::nullopt;
    return path_mul(q, *ab, c);
}

} // namespace

Tensor2 dbr_outer_gen(const QuiverModel& m, std::size_t a, std::size_t b) {
    const Quiver& q = m.quiver();
    const Arrow& A = q.arrows.at(a);
    const Arrow& B = q.arrows.at(b);
    Tensor2 out;
    Rat half(1, 2);

    if (b == A.star) {
        Rat eps(A.epsilon);
        // gamma_a e_h (x) e_t + 1/2 ba (x) e_t + 1/2 e_h (x) ab
        tensor2_add(out, NCPath::idem(A.head), NCPath::idem(A.tail), eps * A.gamma);
        NCPath ba{false, 0, {b, a}};  // closed at h(a)
        NCPath ab{false, 0, {a, b}};  // closed at t(a)
        tensor2_add(out, ba, NCPath::idem(A.tail), eps * half);
        tensor2_add(out, NCPath::idem(A.head), ab, eps * half);
    }
    // -1/2 o(a,b) e_{t(b)} a (x) e_{t(a)} b : nonzero iff t(a) = t(b)
    if (A.tail == B.tail && order_sign(a, b) != 0)
        tensor2_add(out, NCPath{false, 0, {a}}, NCPath{false, 0, {b}},
                    Rat(-order_sign(a, b)) * half);
    // -1/2 o(a*,b*) b e_{h(a)} (x) a e_{h(b)} : nonzero iff h(a) = h(b)
    if (A.head == B.head && order_sign(A.star, B.star) != 0)
        tensor2_add(out, NCPath{false, 0, {b}}, NCPath{false, 0, {a}},
                    Rat(-order_sign(A.star, B.star)) * half);
    // +1/2 o(a,b*) ba (x) e_{t(a)} : composable iff h(b) = t(a)
    if (B.head == A.tail && order_sign(a, B.star) != 0)
        tensor2_add(out, NCPath{false, 0, {b, a}}, NCPath::idem(A.tail),
                    Rat(order_sign(a, B.star)) * half);
    // +1/2 o(a*,b) e_{h(a)} (x) ab : composable iff h(a) = t(b)
    if (A.head == B.tail && order_sign(A.star, b) != 0)
        tensor2_add(out, NCPath::idem(A.head), NCPath{false, 0, {a, b}},
                    Rat(order_sign(A.star, b)) * half);
    return out;
}

namespace {

// Shared word-extension of a generator-level double bracket. `outer` picks
// the outer rule (legs dressed across the two words) versus the right rule
// (each leg dressed within its own word).
template <class Gen>
Tensor2 extend_bilinear(const QuiverModel& m, const NCElement& f, const NCElement& g, Gen gen,
                        bool outer) {
    const Quiver& q = m.quiver();
    Tensor2 out;
    for (const auto& [p, cp] : f.terms()) {
        if (p.idempotent) continue;  // B-bilinearity
        for (const auto& [r, cr] : g.terms()) {
            if (r.idempotent) continue;
            Rat c = cp * cr;
            for (std::size_t i = 0; i < p.arrows.size(); ++i) {
                NCPath ppre = word_prefix(q, p.arrows, i);
                NCPath psuf = word_suffix(q, p.arrows, i);
                for (std::size_t j = 0; j < r.arrows.size(); ++j) {
                    Tensor2 genv = gen(p.arrows[i], r.arrows[j]);
                    if (genv.empty()) continue;
                    NCPath rpre = word_prefix(q, r.arrows, j);
                    NCPath rsuf = word_suffix(q, r.arrows, j);
                    for (const auto& [uv, cuv] : genv) {
                        std::optional<NCPath> leg1, leg2;
                        if (outer) {
                            // <<p,r>> = sum r_pre u p_suf (x) p_pre v r_suf
                            leg1 = mul3(q, rpre, uv.first, psuf);
                            leg2 = mul3(q, ppre, uv.second, rsuf);
                        } else {
                            // right rule: p_pre u p_suf (x) r_pre v r_suf
                            leg1 = mul3(q, ppre, uv.first, psuf);
                            leg2 = mul3(q, rpre, uv.second, rsuf);
                        }
                        if (!leg1 || !leg2) continue;
                        tensor2_add(out, *leg1, *leg2, c * cuv);
                    }
                }
            }
        }
    }
    return out;
}

} // namespace

Tensor2 dbr_outer(const QuiverModel& m, const NCElement& f, const NCElement& g) {
    return extend_bilinear(
        m, f, g, [&](std::size_t a, std::size_t b) { return dbr_outer_gen(m, a, b); }, true);
}

Tensor2 dbr_right_gen(const QuiverModel& m, const PencilParams& z, std::size_t a, std::size_t b) {
    const Quiver& q = m.quiver();
    Tensor2 out;
    Rat v = z.extended(q, a, b);
    if (v.is_zero()) return out;
    v *= Rat(q.arrows[a].epsilon * q.arrows[b].epsilon);
    tensor2_add(out, NCPath{false, 0, {a}}, NCPath{false, 0, {b}}, v);
    return out;
}

Tensor2 dbr_right(const QuiverModel& m, const PencilParams& z, const NCElement& f,
                  const NCElement& g) {
    return extend_bilinear(
        m, f, g, [&](std::size_t a, std::size_t b) { return dbr_right_gen(m, z, a, b); }, false);
}

NecklacePoly trace_bracket_vdb(const QuiverModel& m, const Necklace& f, const Necklace& g) {
    const Quiver& q = m.quiver();
    Tensor2 t = dbr_outer(m, NCElement(f.representative()), NCElement(g.representative()));
    NCElement merged;
    for (const auto& [uv, c] : t) {
        auto prod = path_mul(q, uv.first, uv.second);
        if (prod) merged.add(*prod, c);
    }
    return nc_trace(q, merged);
}

namespace {

// Leibniz extension of a generator-level necklace bracket to polynomials.
template <class Br>
NecklacePoly extend_leibniz(const NecklacePoly& f, const NecklacePoly& g, Br br) {
    NecklacePoly out;
    for (const auto& [mf, cf] : f.terms()) {
        for (const auto& [mg, cg] : g.terms()) {
            Rat c = cf * cg;
            for (std::size_t i = 0; i < mf.size(); ++i)
                for (std::size_t j = 0; j < mg.size(); ++j) {
                    NecklacePoly rest(Rat(1));
                    NecklacePoly::Mono others;
                    for (std::size_t k = 0; k < mf.size(); ++k)
                        if (k != i) others.push_back(mf[k]);
                    for (std::size_t k = 0; k < mg.size(); ++k)
                        if (k != j) others.push_back(mg[k]);
                    NecklacePoly piece = br(mf[i], mg[j]);
                    if (piece.is_zero()) continue;
                    NecklacePoly weighted;
                    for (const auto& [mp, cp] : piece.terms()) {
                        NecklacePoly::Mono mono = mp;
                        mono.insert(mono.end(), others.begin(), others.end());
                        weighted.add(mono, cp * c);
                    }
                    out += weighted;
                }
        }
    }
    return out;
}

} // namespace

NecklacePoly trace_bracket_vdb(const QuiverModel& m, const NecklacePoly& f,
                               const NecklacePoly& g) {
    return extend_leibniz(f, g, [&](const Necklace& a, const Necklace& b) {
        return trace_bracket_vdb(m, a, b);
    });
}

Rat trace_bracket_z_coeff(const QuiverModel& m, const PencilParams& z, const Necklace& f,
                          const Necklace& g) {
    const Quiver& q = m.quiver();
    Rat c(0);
    if (f.idempotent || g.idempotent) return c;
    for (auto a : f.arrows)
        for (auto b : g.arrows)
            c += Rat(q.arrows[a].epsilon * q.arrows[b].epsilon) * z.extended(q, a, b);
    return c;
}

NecklacePoly trace_bracket_z(const QuiverModel& m, const PencilParams& z, const Necklace& f,
                             const Necklace& g) {
    Rat c = trace_bracket_z_coeff(m, z, f, g);
    if (c.is_zero()) return NecklacePoly();
    NecklacePoly out;
    out.add({f, g}, c);
    return out;
}

NecklacePoly trace_bracket_z(const QuiverModel& m, const PencilParams& z, const NecklacePoly& f,
                             const NecklacePoly& g) {
    return extend_leibniz(f, g, [&](const Necklace& a, const Necklace& b) {
        return trace_bracket_z(m, z, a, b);
    });
}

NecklacePoly trace_bracket_z_direct(const QuiverModel& m, const PencilParams& z,
                                    const Necklace& f, const Necklace& g) {
    const Quiver& q = m.quiver();
    Tensor2 t = dbr_right(m, z, NCElement(f.representative()), NCElement(g.representative()));
    NecklacePoly out;
    for (const auto& [uv, c] : t) {
        if (!uv.first.closed(q) || !uv.second.closed(q)) continue;
        out.add({Necklace::of_path(q, uv.first), Necklace::of_path(q, uv.second)}, c);
    }
    return out;
}

namespace {

// tensor-leg rotation u1(x)u2(x)u3 -> u3(x)u1(x)u2
Tensor3 cyc_legs(const Tensor3& t, int k) {
    Tensor3 out;
    for (const auto& [key, v] : t) {
        NCPath a = std::get<0>(key), b = std::get<1>(key), c = std::get<2>(key);
        if (k % 3 == 1) tensor3_add(out, c, a, b, v);
        else if (k % 3 == 2) tensor3_add(out, b, c, a, v);
        else tensor3_add(out, a, b, c, v);
    }
    return out;
}

// (<<-,->>_r (x) id) o (id (x) <<-,->>_r) on a path triple
Tensor3 nested_right(const QuiverModel& m, const PencilParams& z, const NCPath& f,
                     const NCPath& g, const NCPath& h) {
    Tensor3 out;
    Tensor2 inner = dbr_right(m, z, NCElement(g), NCElement(h));
    for (const auto& [uv, c] : inner) {
        Tensor2 outer = dbr_right(m, z, NCElement(f), NCElement(uv.first));
        for (const auto& [xy, c2] : outer)
            tensor3_add(out, xy.first, xy.second, uv.second, c * c2);
    }
    return out;
}

} // namespace

Tensor3 dbr_right_triple(const QuiverModel& m, const PencilParams& z, std::size_t a,
                         std::size_t b, std::size_t c) {
    NCPath pa{false, 0, {a}}, pb{false, 0, {b}}, pc{false, 0, {c}};
    Tensor3 total;
    // k = 0: (f,g,h); k = 1: rotate arguments left once, legs right once; k = 2 twice.
    const NCPath* args[3] = {&pa, &pb, &pc};
    for (int k = 0; k < 3; ++k) {
        const NCPath& f = *args[k % 3];
        const NCPath& g = *args[(k + 1) % 3];
        const NCPath& h = *args[(k + 2) % 3];
        Tensor3 part = cyc_legs(nested_right(m, z, f, g, h), k);
        for (const auto& [key, v] : part)
            tensor3_add(total, std::get<0>(key), std::get<1>(key), std::get<2>(key), v);
    }
    return total;
}

CheckReport check_weak_poisson(const QuiverModel& m, const PencilParams& z) {
    auto t0 = Clock::now();
    CheckReport r;
    r.name = "nc: (12)-weak Poisson on all generator triples";
    const Quiver& q = m.quiver();
    std::size_t n = q.arrows.size();
    for (std::size_t a = 0; a < n && r.passed(); ++a)
        for (std::size_t b = 0; b < n && r.passed(); ++b)
            for (std::size_t c = 0; c < n; ++c) {
                Tensor3 lhs = dbr_right_triple(m, z, a, b, c);
                // tau_(12)^-1 o <<...>> o tau_(12): swap the first two
                // arguments, then swap the first two tensor legs back.
                Tensor3 swapped = dbr_right_triple(m, z, b, a, c);
                Tensor3 rhs;
                for (const auto& [key, v] : swapped)
                    tensor3_add(rhs, std::get<1>(key), std::get<0>(key), std::get<2>(key), v);
                if (!(lhs == rhs)) {
                    r.status = CheckReport::Status::Fail;
                    r.witness = "triple (" + q.arrows[a].name + "," + q.arrows[b].name + "," +
                                q.arrows[c].name + ")";
                    break;
                }
            }
    r.note = "exact on " + std::to_string(n * n * n) + " generator triples";
    r.elapsed_ms = ms_since(t0);
    return r;
}

CheckReport check_mixed_jacobi(const QuiverModel& m, const PencilParams& z, const Rat& z0,
                               const NecklacePoly& f, const NecklacePoly& g,
                               const NecklacePoly& h) {
    auto t0 = Clock::now();
    CheckReport r;
    r.name = "nc: Jacobi of z0{{.,.}} + {.,.}_z";
    auto B = [&](const NecklacePoly& x, const NecklacePoly& y) {
        NecklacePoly out = trace_bracket_z(m, z, x, y);
        if (!z0.is_zero()) out += trace_bracket_vdb(m, x, y).scaled(z0);
        return out;
    };
    NecklacePoly jac = B(B(f, g), h);
    jac += B(B(g, h), f);
    jac += B(B(h, f), g);
    if (!jac.is_zero()) {
        r.status = CheckReport::Status::Fail;
        r.witness = "jacobiator = " + jac.str(m.quiver());
    }
    r.note = "exact in Sym(H0)";
    r.elapsed_ms = ms_since(t0);
    return r;
}

Poly necklace_to_poly(const QuiverModel& m, const NecklacePoly& p) {
    Poly out;
    for (const auto& [mono, c] : p.terms()) {
        Poly term(c);
        for (const auto& n : mono) {
            if (n.idempotent) term = term.scaled(Rat(static_cast<long>(m.dims()[n.vertex])));
            else term *= trace_word(m, n.arrows);
        }
        out += term;
    }
    return out;
}

CheckReport check_rep_morphism(const QuiverModel& m,
                               const std::vector<std::vector<std::size_t>>& words,
                               const PencilParams& z, const Rat& z0, std::size_t n_points,
                               std::uint64_t seed) {
    auto t0 = Clock::now();
    CheckReport r;
    r.name = "nc: representation morphism (z0 = " + z0.str() + ")";
    r.samples = n_points;
    const Quiver& q = m.quiver();

    PolyMultiVector P = build_vdb(m).P.scaled(z0) + build_pencil(m, z).psi;

    std::vector<Necklace> necks;
    std::vector<Poly> traces;
    for (const auto& w : words) {
        necks.push_back(Necklace::of_path(q, NCPath::word(q, w)));
        traces.push_back(trace_word(m, w));
    }
    auto pts = sample_points(n_points, seed, m.n_vars(), {});
    for (std::size_t i = 0; i < necks.size() && r.passed(); ++i)
        for (std::size_t j = 0; j < necks.size() && r.passed(); ++j) {
            NecklacePoly lhs_nc = trace_bracket_z(m, z, necks[i], necks[j]);
            if (!z0.is_zero())
                lhs_nc += trace_bracket_vdb(m, necks[i], necks[j]).scaled(z0);
            Poly lhs = necklace_to_poly(m, lhs_nc);
            Poly rhs = poly_bracket(P, traces[i], traces[j]);
            for (const auto& pt : pts) {
                if (lhs.eval<Rat>(pt) != rhs.eval<Rat>(pt)) {
                    r.status = CheckReport::Status::Fail;
                    r.witness = "words (" + necks[i].str(q) + ", " + necks[j].str(q) +
                                ") disagree at a sampled point";
                    break;
                }
            }
        }
    r.note = std::to_string(words.size()) + " words, all ordered pairs, exact per point";
    r.elapsed_ms = ms_since(t0);
    return r;
}

std::vector<std::size_t> parse_word(const QuiverModel& m, const std::string& text) {
    std::vector<std::size_t> w;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) w.push_back(m.quiver().arrow_index(tok));
    if (w.empty()) throw BadParams("empty word '" + text + "'");
    return w;
}

} // namespace quips
