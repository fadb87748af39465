#include "quips/rat.hpp"

#include "quips/errors.hpp"

#include <ostream>

namespace quips {

Rat Rat::from_string(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0)
        throw BadParams("cannot parse rational: '" + s + "'");
    q.canonicalize();
    return Rat(q);
}

Rat& Rat::operator/=(const Rat& o) {
    if (o.is_zero()) throw SingularEvaluation("rational division by zero");
    v_ /= o.v_;
    return *this;
}

Rat Rat::inverse() const {
    if (is_zero()) throw SingularEvaluation("inverse of zero rational");
    return Rat(mpq_class(1) / v_);
}

Rat Rat::pow(unsigned e) const {
    Rat acc(1), base(*this);
    while (e) {
        if (e & 1u) acc *= base;
        base *= base;
        e >>= 1u;
    }
    return acc;
}

std::string Rat::str() const {
    return v_.get_str();
}

std::ostream& operator<<(std::ostream& os, const Rat& r) {
    return os << r.v_;
}

} // namespace quips

// --- exact linear algebra over Q -------------------------------------------

#include "quips/matrix.hpp"

namespace quips {

std::size_t rank(const RatMatrix& m) {
    std::size_t nr = m.rows(), nc = m.cols();
    if (nr == 0 || nc == 0) return 0;
    // Clear denominators row by row, then run Bareiss over the integers.
    std::vector<std::vector<mpz_class>> a(nr, std::vector<mpz_class>(nc));
    for (std::size_t i = 0; i < nr; ++i) {
        mpz_class l(1);
        for (std::size_t j = 0; j < nc; ++j) {
            mpz_class d = m(i, j).den();
            mpz_class g;
            mpz_gcd(g.get_mpz_t(), l.get_mpz_t(), d.get_mpz_t());
            l = l / g * d;
        }
        for (std::size_t j = 0; j < nc; ++j)
            a[i][j] = m(i, j).num() * (l / m(i, j).den());
    }
    mpz_class prev(1);
    std::size_t row = 0;
    for (std::size_t col = 0; col < nc && row < nr; ++col) {
        std::size_t piv = row;
        while (piv < nr && a[piv][col] == 0) ++piv;
        if (piv == nr) continue;
        if (piv != row) std::swap(a[piv], a[row]);
        for (std::size_t i = row + 1; i < nr; ++i) {
            for (std::size_t j = col + 1; j < nc; ++j) {
                mpz_class t = a[row][col] * a[i][j] - a[i][col] * a[row][j];
                mpz_divexact(a[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
            a[i][col] = 0;
        }
        prev = a[row][col];
        ++row;
    }
    return row;
}

Rat det(const RatMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("determinant of non-square matrix");
    std::size_t n = m.rows();
    RatMatrix a(m);
    Rat d(1);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a(piv, col).is_zero()) ++piv;
        if (piv == n) return Rat(0);
        if (piv != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a(piv, k), a(col, k));
            d = -d;
        }
        d *= a(col, col);
        Rat ip = a(col, col).inverse();
        for (std::size_t i = col + 1; i < n; ++i) {
            Rat f = a(i, col) * ip;
            if (f.is_zero()) continue;
            for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
        }
    }
    return d;
}

} // namespace quips
