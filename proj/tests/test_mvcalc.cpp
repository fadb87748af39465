#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quips/matexpr.hpp"
#include "quips/multivec.hpp"
#include "quips/sample.hpp"

using namespace quips;

namespace {

PolyMultiVector random_kvector(Rng& rng, std::size_t deg, std::uint32_t nvars,
                               std::size_t nterms, std::uint32_t maxdeg) {
    PolyMultiVector m(deg);
    for (std::size_t t = 0; t < nterms; ++t) {
        IndexTuple idx;
        while (idx.size() < deg) {
            auto v = static_cast<std::uint32_t>(rng.below(nvars));
            bool dup = false;
            for (auto u : idx) dup |= (u == v);
            if (!dup) idx.push_back(v);
        }
        Monomial mono;
        for (std::uint32_t v = 0; v < nvars; ++v) {
            auto e = static_cast<std::uint32_t>(rng.below(maxdeg + 1));
            if (e) mono.emplace_back(v, e);
        }
        Poly c;
        c.add_term(mono, rng.small_rat());
        m.add_term(idx, c);
    }
    return m;
}

Poly random_poly(Rng& rng, std::uint32_t nvars, std::size_t nterms, std::uint32_t maxdeg) {
    Poly p;
    for (std::size_t t = 0; t < nterms; ++t) {
        Monomial m;
        for (std::uint32_t v = 0; v < nvars; ++v) {
            auto e = static_cast<std::uint32_t>(rng.below(maxdeg + 1));
            if (e) m.emplace_back(v, e);
        }
        p.add_term(m, rng.small_rat());
    }
    return p;
}

// {f,g} = <P, df (x) dg>
Poly pbracket(const PolyMultiVector& P, const Poly& f, const Poly& g) {
    return pair_with_gradients(P, {f, g});
}

} // namespace

TEST_CASE("schouten: Lie bracket of vector fields") {
    // [x1^2 d1, d1] = -2 x1 d1
    PolyMultiVector a(1), b(1);
    a.add_term({0}, Poly::var(0) * Poly::var(0));
    b.add_term({0}, Poly(Rat(1)));
    PolyMultiVector expect(1);
    expect.add_term({0}, Poly::var(0).scaled(Rat(-2)));
    CHECK(schouten(a, b) == expect);
}

TEST_CASE("schouten: constant bivector is Poisson") {
    PolyMultiVector p(2);
    p.add_term({0, 1}, Poly(Rat(5)));
    CHECK(schouten(p, p).is_zero());
}

TEST_CASE("schouten: normative Jacobiator convention") {
    // P = x1 x2 d1^d2 + d2^d3: (1/2)[P,P](dx1,dx2,dx3) = x1
    PolyMultiVector p(2);
    p.add_term({0, 1}, Poly::var(0) * Poly::var(1));
    p.add_term({1, 2}, Poly(Rat(1)));
    PolyMultiVector pp = schouten(p, p);
    Poly val = pair_with_gradients(pp, {Poly::var(0), Poly::var(1), Poly::var(2)});
    CHECK(val.scaled(Rat(1, 2)) == Poly::var(0));
}

TEST_CASE("schouten: jacobiator identity equals nested brackets on random data") {
    Rng rng(23);
    for (int t = 0; t < 20; ++t) {
        PolyMultiVector p = random_kvector(rng, 2, 4, 3, 2);
        Poly f = random_poly(rng, 4, 3, 2);
        Poly g = random_poly(rng, 4, 3, 2);
        Poly h = random_poly(rng, 4, 3, 2);
        Poly lhs = pair_with_gradients(schouten(p, p), {f, g, h}).scaled(Rat(1, 2));
        Poly rhs = pbracket(p, pbracket(p, f, g), h) + pbracket(p, pbracket(p, g, h), f) +
                   pbracket(p, pbracket(p, h, f), g);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("schouten: graded antisymmetry") {
    Rng rng(29);
    for (std::size_t ka = 1; ka <= 3; ++ka) {
        for (std::size_t kb = 1; kb <= 3; ++kb) {
            PolyMultiVector a = random_kvector(rng, ka, 5, 3, 2);
            PolyMultiVector b = random_kvector(rng, kb, 5, 3, 2);
            PolyMultiVector lhs = schouten(a, b);
            PolyMultiVector rhs = schouten(b, a);
            int sign = (((ka - 1) * (kb - 1)) % 2 == 0) ? -1 : 1;  // -(-1)^((k-1)(l-1))
            CHECK(lhs == (sign == 1 ? rhs : -rhs));
        }
    }
}

TEST_CASE("schouten: graded Leibniz/Jacobi identity") {
    // [A,[B,C]] = [[A,B],C] + (-1)^((a-1)(b-1)) [B,[A,C]]
    Rng rng(31);
    for (int t = 0; t < 10; ++t) {
        for (std::size_t ka = 1; ka <= 2; ++ka)
            for (std::size_t kb = 1; kb <= 2; ++kb)
                for (std::size_t kc = 1; kc <= 2; ++kc) {
                    PolyMultiVector a = random_kvector(rng, ka, 4, 2, 2);
                    PolyMultiVector b = random_kvector(rng, kb, 4, 2, 2);
                    PolyMultiVector c = random_kvector(rng, kc, 4, 2, 2);
                    PolyMultiVector lhs = schouten(a, schouten(b, c));
                    PolyMultiVector rhs = schouten(schouten(a, b), c);
                    PolyMultiVector mid = schouten(b, schouten(a, c));
                    if (((ka - 1) * (kb - 1)) % 2 == 1) rhs -= mid;
                    else rhs += mid;
                    CHECK(lhs == rhs);
                }
    }
}

TEST_CASE("wedge is associative and graded commutative") {
    Rng rng(37);
    PolyMultiVector a = random_kvector(rng, 1, 4, 3, 2);
    PolyMultiVector b = random_kvector(rng, 2, 4, 3, 2);
    PolyMultiVector c = random_kvector(rng, 1, 4, 3, 2);
    CHECK(wedge(wedge(a, b), c) == wedge(a, wedge(b, c)));
    // a^b = (-1)^{deg a deg b} b^a
    CHECK(wedge(a, b) == wedge(b, a));        // 1*2 even
    CHECK(wedge(a, c) == -wedge(c, a));       // 1*1 odd
}

TEST_CASE("sharp basis cases") {
    PolyMultiVector p(2);
    p.add_term({0, 1}, Poly(Rat(1)));  // d1 ^ d2
    std::vector<Poly> dx1(2), dx2(2);
    dx1[0] = Poly(Rat(1));
    dx2[1] = Poly(Rat(1));
    PolyMultiVector e2(1), e1(1);
    e2.add_term({1}, Poly(Rat(1)));
    e1.add_term({0}, Poly(Rat(1)));
    CHECK(sharp(p, dx1) == e2);
    CHECK(sharp(p, dx2) == -e1);
}

TEST_CASE("sharp: one-arrow moment check at dims (1,1)") {
    // P = (1+ab) da^db ; alpha = b da + a db ; P#(alpha) = (1+ab)(b db - a da)
    Poly a = Poly::var(0), b = Poly::var(1);
    PolyMultiVector P(2);
    P.add_term({0, 1}, Poly(Rat(1)) + a * b);
    std::vector<Poly> alpha{b, a};
    PolyMultiVector expect(1);
    expect.add_term({1}, (Poly(Rat(1)) + a * b) * b);
    expect.add_term({0}, -((Poly(Rat(1)) + a * b) * a));
    CHECK(sharp(P, alpha) == expect);
}

TEST_CASE("trace form: 1-form tr(dX) on unit tangents") {
    VarSpace vs;
    std::size_t bx = vs.add_block("X", 2, 2);
    TraceForm f(1);
    f.add_single(Rat(1), {TraceFactor{mx_coord(vs, bx), true}});
    std::vector<Rat> pt(vs.n_vars(), Rat(0));
    for (std::size_t u = 0; u < 2; ++u)
        for (std::size_t v = 0; v < 2; ++v) {
            std::vector<Rat> tan(vs.n_vars(), Rat(0));
            tan[vs.var(bx, u, v)] = Rat(1);
            CHECK(f.eval(vs, pt, {tan}) == (u == v ? Rat(1) : Rat(0)));
        }
}

TEST_CASE("trace form: tr(dX ^ dY) two-slot alternation") {
    VarSpace vs;
    std::size_t bx = vs.add_block("X", 2, 2);
    std::size_t by = vs.add_block("Y", 2, 2);
    TraceForm f(2);
    f.add_single(Rat(1), {TraceFactor{mx_coord(vs, bx), true}, TraceFactor{mx_coord(vs, by), true}});

    Rng rng(41);
    std::vector<Rat> pt(vs.n_vars());
    for (auto& x : pt) x = rng.small_rat();
    std::vector<Rat> u(vs.n_vars()), v(vs.n_vars());
    for (auto& x : u) x = rng.small_rat();
    for (auto& x : v) x = rng.small_rat();

    auto block_of = [&](const std::vector<Rat>& w, std::size_t blk) {
        RatMatrix m(2, 2);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) m(i, j) = w[vs.var(blk, i, j)];
        return m;
    };
    RatMatrix xu = block_of(u, bx), yv = block_of(v, by);
    RatMatrix xv = block_of(v, bx), yu = block_of(u, by);
    Rat expect = (xu * yv).trace() - (xv * yu).trace();
    CHECK(f.eval(vs, pt, {u, v}) == expect);

    // antisymmetry and bilinearity in the slots
    CHECK(f.eval(vs, pt, {v, u}) == -expect);
}

TEST_CASE("trace form: abelian eta vanishes") {
    // eta-type 3-form on a 1x1 group block: alternation of a symmetric
    // expression is zero.
    VarSpace vs;
    std::size_t bg = vs.add_block("g", 1, 1);
    MatExpr g = mx_coord(vs, bg);
    TraceForm eta(3);
    eta.add_single(Rat(1, 6), {TraceFactor{g, true}, TraceFactor{mx_inv(g), false},
                               TraceFactor{g, true}, TraceFactor{mx_inv(g), false},
                               TraceFactor{g, true}, TraceFactor{mx_inv(g), false}});
    std::vector<Rat> pt{Rat(1)};
    std::vector<Rat> e{Rat(1)}, f2{Rat(2)}, h{Rat(-3)};
    CHECK(eta.eval(vs, pt, {e, f2, h}) == Rat(0));
}

TEST_CASE("exterior derivative: exact and constant forms are closed") {
    VarSpace vs;
    std::size_t bx = vs.add_block("X", 2, 2);
    std::size_t by = vs.add_block("Y", 2, 2);

    // omega = d(tr X) ^ d(tr Y)
    TraceForm omega(2);
    omega.add_term(Rat(1), {TraceGroup{TraceFactor{mx_coord(vs, bx), true}},
                            TraceGroup{TraceFactor{mx_coord(vs, by), true}}});

    Rng rng(43);
    std::vector<Rat> pt(vs.n_vars());
    for (auto& x : pt) x = rng.small_rat();
    std::vector<std::vector<Rat>> tans;
    for (int k = 0; k < 3; ++k) {
        std::vector<Rat> t(vs.n_vars());
        for (auto& x : t) x = rng.small_rat();
        tans.push_back(t);
    }
    CHECK(omega.exterior_derivative_at(vs, pt, tans) == Rat(0));

    // constant-coefficient 2-form
    TraceForm cst(2);
    cst.add_single(Rat(1), {TraceFactor{mx_coord(vs, bx), true}, TraceFactor{mx_coord(vs, by), true}});
    // d of tr(dX ^ dY) is zero as well (coefficients constant)
    CHECK(cst.exterior_derivative_at(vs, pt, tans) == Rat(0));
}

TEST_CASE("exterior derivative: tr(X dX ^ dX) against 3-slot alternation") {
    // omega = tr(X dX ^ dX) on gl_2; d(omega)(u,v,w) should equal the full
    // alternation of tr(dX ^ dX ^ dX).
    VarSpace vs;
    std::size_t bx = vs.add_block("X", 2, 2);
    MatExpr X = mx_coord(vs, bx);
    TraceForm omega(2);
    omega.add_single(Rat(1), {TraceFactor{X, false}, TraceFactor{X, true}, TraceFactor{X, true}});

    TraceForm three(3);
    three.add_single(Rat(1), {TraceFactor{X, true}, TraceFactor{X, true}, TraceFactor{X, true}});

    std::vector<Rat> pt(vs.n_vars(), Rat(0));
    pt[vs.var(bx, 0, 0)] = Rat(1);
    pt[vs.var(bx, 1, 1)] = Rat(1);

    auto unit = [&](std::size_t i, std::size_t j) {
        std::vector<Rat> t(vs.n_vars(), Rat(0));
        t[vs.var(bx, i, j)] = Rat(1);
        return t;
    };
    std::vector<std::vector<Rat>> tans{unit(0, 0), unit(0, 1), unit(1, 0)};
    CHECK(omega.exterior_derivative_at(vs, pt, tans) == three.eval(vs, pt, tans));
}

TEST_CASE("eval_form is multilinear and alternating in slots") {
    VarSpace vs;
    std::size_t bx = vs.add_block("X", 2, 2);
    MatExpr X = mx_coord(vs, bx);
    TraceForm omega(2);
    omega.add_single(Rat(1), {TraceFactor{mx_inv(X), false}, TraceFactor{X, true},
                              TraceFactor{X, true}});
    Rng rng(47);
    std::vector<Rat> pt(vs.n_vars());
    std::vector<AvoidFn> avoid{[&](const std::vector<Rat>& p) {
        RatMatrix m(2, 2);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) m(i, j) = p[vs.var(bx, i, j)];
        return det(m);
    }};
    pt = sample_point(3, vs.n_vars(), avoid);

    auto rnd_tan = [&]() {
        std::vector<Rat> t(vs.n_vars());
        for (auto& x : t) x = rng.small_rat();
        return t;
    };
    auto u = rnd_tan(), v = rnd_tan(), w = rnd_tan();
    CHECK(omega.eval(vs, pt, {u, u}) == Rat(0));
    CHECK(omega.eval(vs, pt, {u, v}) == -omega.eval(vs, pt, {v, u}));
    // linearity in the first slot: omega(u + 3w, v) = omega(u,v) + 3 omega(w,v)
    std::vector<Rat> comb(vs.n_vars());
    for (std::size_t k = 0; k < comb.size(); ++k) comb[k] = u[k] + Rat(3) * w[k];
    CHECK(omega.eval(vs, pt, {comb, v}) ==
          omega.eval(vs, pt, {u, v}) + Rat(3) * omega.eval(vs, pt, {w, v}));
}

TEST_CASE("singular evaluation surfaces as the dedicated error") {
    VarSpace vs;
    std::size_t bx = vs.add_block("X", 2, 2);
    TraceForm omega(1);
    omega.add_single(Rat(1), {TraceFactor{mx_inv(mx_coord(vs, bx)), false},
                              TraceFactor{mx_coord(vs, bx), true}});
    std::vector<Rat> pt(vs.n_vars(), Rat(0));  // X = 0 is singular
    std::vector<Rat> tan(vs.n_vars(), Rat(1));
    CHECK_THROWS_AS((void)omega.eval(vs, pt, {tan}), SingularEvaluation);
}
