#pragma once

#include "quips/errors.hpp"
#include "quips/jet.hpp"
#include "quips/rat.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace quips {

namespace detail {
inline bool scalar_invertible(const Rat& x) { return !x.is_zero(); }
inline bool scalar_invertible(const Jet& x) { return !x.value().is_zero(); }
inline bool scalar_invertible(const MDual& x) { return !x.value().is_zero(); }
inline Rat scalar_inverse(const Rat& x) { return x.inverse(); }
inline Jet scalar_inverse(const Jet& x) { return x.inverse(); }
inline MDual scalar_inverse(const MDual& x) { return x.inverse(); }
} // namespace detail

template <class T>
class Mat {
public:
    Mat() : r_(0), c_(0) {}
    Mat(std::size_t r, std::size_t c, T fill = T{}) : r_(r), c_(c), d_(r * c, fill) {}

    static Mat identity(std::size_t n, const T& one) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = one;
        return m;
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    T& operator()(std::size_t i, std::size_t j) { return d_[i * c_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return d_[i * c_ + j]; }

    Mat operator-() const {
        Mat m(r_, c_);
        for (std::size_t i = 0; i < d_.size(); ++i) m.d_[i] = -d_[i];
        return m;
    }
    Mat& operator+=(const Mat& o) {
        check_same(o);
        for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        check_same(o);
        for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
        return *this;
    }
    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }

    friend Mat operator*(const Mat& a, const Mat& b) {
        if (a.c_ != b.r_) throw DimensionMismatch("matrix product shape mismatch");
        Mat m(a.r_, b.c_);
        for (std::size_t i = 0; i < a.r_; ++i)
            for (std::size_t k = 0; k < a.c_; ++k) {
                const T& aik = a(i, k);
                for (std::size_t j = 0; j < b.c_; ++j)
                    m(i, j) += aik * b(k, j);
            }
        return m;
    }

    Mat scaled(const T& s) const {
        Mat m(r_, c_);
        for (std::size_t i = 0; i < d_.size(); ++i) m.d_[i] = d_[i] * s;
        return m;
    }

    Mat transpose() const {
        Mat m(c_, r_);
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = 0; j < c_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }

    T trace() const {
        T t{};
        for (std::size_t i = 0; i < r_ && i < c_; ++i) t += (*this)(i, i);
        return t;
    }

    friend bool operator==(const Mat& a, const Mat& b) {
        return a.r_ == b.r_ && a.c_ == b.c_ && a.d_ == b.d_;
    }

    // Gauss-Jordan; pivots must have invertible value part.
    Mat inverse() const {
        if (r_ != c_) throw DimensionMismatch("inverse of non-square matrix");
        std::size_t n = r_;
        Mat a(*this);
        Mat inv = Mat::identity(n, one_like());
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            while (piv < n && !detail::scalar_invertible(a(piv, col))) ++piv;
            if (piv == n) throw SingularEvaluation("singular matrix in inverse");
            if (piv != col) { a.swap_rows(piv, col); inv.swap_rows(piv, col); }
            T ip = detail::scalar_inverse(a(col, col));
            for (std::size_t j = 0; j < n; ++j) { a(col, j) = a(col, j) * ip; inv(col, j) = inv(col, j) * ip; }
            for (std::size_t i = 0; i < n; ++i) {
                if (i == col) continue;
                T f = a(i, col);
                if (f.is_zero()) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    a(i, j) -= f * a(col, j);
                    inv(i, j) -= f * inv(col, j);
                }
            }
        }
        return inv;
    }

private:
    T one_like() const {
        if constexpr (std::is_same_v<T, Rat>) return Rat(1);
        else if constexpr (std::is_same_v<T, Jet>) return Jet(Rat(1));
        else return MDual(Rat(1));
    }
    void check_same(const Mat& o) const {
        if (r_ != o.r_ || c_ != o.c_) throw DimensionMismatch("matrix shape mismatch");
    }
    void swap_rows(std::size_t i, std::size_t j) {
        for (std::size_t k = 0; k < c_; ++k) std::swap((*this)(i, k), (*this)(j, k));
    }

    std::size_t r_, c_;
    std::vector<T> d_;
};

using RatMatrix = Mat<Rat>;

// Rank over Q by fraction-free (Bareiss) elimination on the cleared
// integer matrix. Deterministic pivoting: first nonzero in column order.
std::size_t rank(const RatMatrix& m);

// Exact determinant over Q (plain rational elimination).
Rat det(const RatMatrix& m);

} // namespace quips
