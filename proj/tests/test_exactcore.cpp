#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quips/jet.hpp"
#include "quips/matrix.hpp"
#include "quips/rat.hpp"
#include "quips/sample.hpp"

using namespace quips;

TEST_CASE("rational arithmetic basics") {
    Rat a(3, 6);
    CHECK(a == Rat(1, 2));
    CHECK(a.str() == "1/2");
    CHECK(Rat(-4, -8) == Rat(1, 2));
    CHECK(Rat(3, -6) == Rat(-1, 2));
    CHECK(Rat::from_string("7/3") == Rat(7, 3));
    CHECK(Rat::from_string("-5") == Rat(-5));
    CHECK((Rat(1, 2) + Rat(1, 3)) == Rat(5, 6));
    CHECK((Rat(2, 3) * Rat(9, 4)) == Rat(3, 2));
    CHECK(Rat(5, 7).inverse() == Rat(7, 5));
    CHECK(Rat(-2).pow(3) == Rat(-8));
    CHECK_THROWS_AS(Rat(1).operator/=(Rat(0)), SingularEvaluation);
}

TEST_CASE("field axioms on random triples") {
    Rng rng(42);
    for (int k = 0; k < 200; ++k) {
        Rat a = rng.small_rat(), b = rng.small_rat(), c = rng.small_rat();
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
        CHECK((a + b) + c == a + (b + c));
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a + Rat(0) == a);
        CHECK(a * Rat(1) == a);
        if (!a.is_zero()) CHECK(a * a.inverse() == Rat(1));
    }
}

TEST_CASE("jet product and chain rules") {
    // f(x) = x^2 at x=3 with dx=1
    Jet x = Jet::variable(Rat(3), 1, 0);
    Jet f = x * x;
    CHECK(f.value() == Rat(9));
    CHECK(f.deriv(0) == Rat(6));

    // (1/f)' = -f'/f^2
    Jet inv = f.inverse();
    CHECK(inv.value() == Rat(1, 9));
    CHECK(inv.deriv(0) == Rat(-6, 81));

    CHECK_THROWS_AS(Jet(Rat(0), 1).inverse(), SingularEvaluation);
}

TEST_CASE("multidual carries exact mixed partials") {
    // f(x,y) = x^2 y at (3,5): fx = 2xy = 30, fy = x^2 = 9, fxy = 2x = 6
    MDual x = MDual::variable(Rat(3), 2, 0);
    MDual y = MDual::variable(Rat(5), 2, 1);
    MDual f = x * x * y;
    CHECK(f.value() == Rat(45));
    CHECK(f.comp(1) == Rat(30));
    CHECK(f.comp(2) == Rat(9));
    CHECK(f.comp(3) == Rat(6));

    // 1/x at x=3, one direction: value 1/3, deriv -1/9
    MDual g = MDual::variable(Rat(3), 1, 0).inverse();
    CHECK(g.value() == Rat(1, 3));
    CHECK(g.comp(1) == Rat(-1, 9));

    // inverse consistency: f * f^-1 == 1
    MDual h = f * f.inverse();
    CHECK(h.value() == Rat(1));
    CHECK(h.comp(1) == Rat(0));
    CHECK(h.comp(3) == Rat(0));
}

TEST_CASE("rank by fraction-free elimination") {
    RatMatrix id3 = RatMatrix::identity(3, Rat(1));
    CHECK(rank(id3) == 3);

    RatMatrix z(2, 5);
    CHECK(rank(z) == 0);

    RatMatrix m(2, 2);
    m(0, 0) = Rat(1); m(0, 1) = Rat(2);
    m(1, 0) = Rat(2); m(1, 1) = Rat(4);
    CHECK(rank(m) == 1);  // second row is twice the first
}

TEST_CASE("rank equals rank of transpose on random matrices") {
    Rng rng(7);
    for (int t = 0; t < 20; ++t) {
        std::size_t r = 1 + rng.below(5), c = 1 + rng.below(5);
        RatMatrix m(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j)
                m(i, j) = rng.below(3) == 0 ? Rat(0) : rng.small_rat();
        CHECK(rank(m) == rank(m.transpose()));
    }
}

TEST_CASE("determinant and inverse") {
    RatMatrix m(2, 2);
    m(0, 0) = Rat(1, 2); m(0, 1) = Rat(3);
    m(1, 0) = Rat(-1);   m(1, 1) = Rat(4);
    CHECK(det(m) == Rat(5));
    RatMatrix mi = m.inverse();
    CHECK(m * mi == RatMatrix::identity(2, Rat(1)));

    RatMatrix s(2, 2);
    s(0, 0) = Rat(1); s(0, 1) = Rat(2);
    s(1, 0) = Rat(2); s(1, 1) = Rat(4);
    CHECK(det(s) == Rat(0));
    CHECK_THROWS_AS(s.inverse(), SingularEvaluation);
}

TEST_CASE("sample_point determinism and constraint handling") {
    auto p1 = sample_point(1, 2);
    auto p2 = sample_point(1, 2);
    CHECK(p1 == p2);
    CHECK(p1.size() == 2);

    // avoid {x1}: returned x1 != 0
    AvoidFn nonzero0 = [](const std::vector<Rat>& x) { return x[0]; };
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto p = sample_point(s, 2, {nonzero0});
        CHECK(!p[0].is_zero());
    }

    // h_reg-style conditions x1 != x2 and x1 != 5 x2 hold after avoidance
    Rat q(5);
    std::vector<AvoidFn> avoid{
        [](const std::vector<Rat>& x) { return x[0] - x[1]; },
        [q](const std::vector<Rat>& x) { return x[0] - q * x[1]; }};
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto p = sample_point(s, 2, avoid);
        CHECK(p[0] != p[1]);
        CHECK(p[0] != q * p[1]);
    }

    // impossible constraint exhausts the resample budget
    AvoidFn never = [](const std::vector<Rat>&) { return Rat(0); };
    CHECK_THROWS_AS(sample_point(0, 1, {never}, 50), AvoidanceExhausted);
}
