#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quips/poly.hpp"
#include "quips/sample.hpp"
#include "quips/varspace.hpp"

using namespace quips;

namespace {

Poly random_poly(Rng& rng, std::uint32_t nvars, std::size_t nterms, std::uint32_t maxdeg) {
    Poly p;
    for (std::size_t t = 0; t < nterms; ++t) {
        Monomial m;
        for (std::uint32_t v = 0; v < nvars; ++v) {
            std::uint32_t e = static_cast<std::uint32_t>(rng.below(maxdeg + 1));
            if (e) m.emplace_back(v, e);
        }
        p.add_term(m, rng.small_rat());
    }
    return p;
}

} // namespace

TEST_CASE("arithmetic canonical forms") {
    Poly x = Poly::var(0), y = Poly::var(1);
    CHECK((x + y) * (x - y) == x * x - y * y);
    CHECK((x * Poly(Rat(0))).is_zero());

    // (x+1)^3 via pow against repeated multiplication
    Poly xp1 = x + Poly(Rat(1));
    CHECK(xp1.pow(3) == xp1 * xp1 * xp1);
    Poly expect = x * x * x + (x * x).scaled(Rat(3)) + x.scaled(Rat(3)) + Poly(Rat(1));
    CHECK(xp1.pow(3) == expect);
}

TEST_CASE("partial derivatives") {
    Poly x = Poly::var(0), y = Poly::var(1);
    CHECK((x * x * y).partial(0) == (x * y).scaled(Rat(2)));
    CHECK(y.partial(0).is_zero());
    // d/dx (x+y)^3 = 3 (x+y)^2
    CHECK((x + y).pow(3).partial(0) == (x + y).pow(2).scaled(Rat(3)));
}

TEST_CASE("evaluation, including jets") {
    Poly x = Poly::var(0), y = Poly::var(1);
    Poly p = x * x * y;
    CHECK(p.eval<Rat>({Rat(2), Rat(3)}) == Rat(12));

    // constant term at the origin
    Poly q = p + Poly(Rat(7));
    CHECK(q.eval<Rat>({Rat(0), Rat(0)}) == Rat(7));

    // x^2 at Jet(3; dx=1) -> (9; 6)
    std::vector<Jet> jp{Jet::variable(Rat(3), 1, 0)};
    Jet r = (Poly::var(0) * Poly::var(0)).eval<Jet>(jp);
    CHECK(r.value() == Rat(9));
    CHECK(r.deriv(0) == Rat(6));
}

TEST_CASE("mixed partials commute on random polynomials") {
    Rng rng(11);
    for (int t = 0; t < 40; ++t) {
        Poly p = random_poly(rng, 4, 6, 3);
        CHECK(p.partial(0).partial(1) == p.partial(1).partial(0));
        CHECK(p.partial(2).partial(3) == p.partial(3).partial(2));
    }
}

TEST_CASE("jet derivative of eval matches symbolic partial") {
    Rng rng(13);
    for (int t = 0; t < 100; ++t) {
        Poly p = random_poly(rng, 3, 5, 3);
        std::vector<Rat> pt{rng.small_rat(), rng.small_rat(), rng.small_rat()};
        std::vector<Rat> dir{rng.small_rat(), rng.small_rat(), rng.small_rat()};
        std::vector<Jet> jp;
        for (std::size_t v = 0; v < 3; ++v) jp.emplace_back(pt[v], std::vector<Rat>{dir[v]});
        Jet jv = p.eval<Jet>(jp);
        CHECK(jv.value() == p.eval<Rat>(pt));
        Rat expect(0);
        for (std::uint32_t v = 0; v < 3; ++v) expect += p.partial(v).eval<Rat>(pt) * dir[v];
        CHECK(jv.deriv(0) == expect);
    }
}

TEST_CASE("ring axioms on random triples") {
    Rng rng(17);
    for (int t = 0; t < 30; ++t) {
        Poly a = random_poly(rng, 3, 4, 2);
        Poly b = random_poly(rng, 3, 4, 2);
        Poly c = random_poly(rng, 3, 4, 2);
        CHECK(a * b == b * a);
        CHECK((a + b) + c == a + (b + c));
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
    }
}

TEST_CASE("variable universe bookkeeping") {
    VarSpace vs;
    std::size_t bx = vs.add_block("X", 2, 3);
    std::size_t by = vs.add_block("Y", 3, 2);
    CHECK(vs.n_vars() == 12);
    CHECK(vs.var(bx, 0, 0) == 0);
    CHECK(vs.var(bx, 1, 2) == 5);
    CHECK(vs.var(by, 0, 0) == 6);
    CHECK(vs.block_by_name("Y") == by);
    auto loc = vs.locate(7);
    CHECK(loc.block == by);
    CHECK(loc.row == 0);
    CHECK(loc.col == 1);
    CHECK(vs.var_name(5) == "X[2,3]");
    CHECK_THROWS_AS(vs.var(bx, 2, 0), DimensionMismatch);
    CHECK_THROWS_AS((void)vs.block_by_name("Z"), UnknownArrow);
}
