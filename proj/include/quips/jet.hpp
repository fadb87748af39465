#pragma once

#include "quips/errors.hpp"
#include "quips/rat.hpp"

#include <cstddef>
#include <vector>

namespace quips {

// First-order jet: value plus one derivative slot per active direction.
// Arithmetic implements (fg)' = f'g + fg'; division requires value != 0.
class Jet {
public:
    Jet() = default;
    explicit Jet(Rat v, std::size_t ndirs = 0) : val_(std::move(v)), d_(ndirs) {}
    Jet(Rat v, std::vector<Rat> d) : val_(std::move(v)), d_(std::move(d)) {}

    static Jet variable(Rat v, std::size_t ndirs, std::size_t dir) {
        Jet j(std::move(v), ndirs);
        j.d_[dir] = Rat(1);
        return j;
    }

    const Rat& value() const { return val_; }
    std::size_t dirs() const { return d_.size(); }
    // Derivative in direction i; slots beyond the stored size are zero
    // (a jet built from plain constants carries no slots at all).
    const Rat& deriv(std::size_t i) const { return i < d_.size() ? d_[i] : zero_; }

    bool is_zero() const {
        if (!val_.is_zero()) return false;
        for (const auto& x : d_) if (!x.is_zero()) return false;
        return true;
    }

    Jet operator-() const {
        Jet r(-val_, d_.size());
        for (std::size_t i = 0; i < d_.size(); ++i) r.d_[i] = -d_[i];
        return r;
    }

    Jet& operator+=(const Jet& o) {
        align(o);
        val_ += o.val_;
        for (std::size_t i = 0; i < o.d_.size(); ++i) d_[i] += o.d_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        align(o);
        val_ -= o.val_;
        for (std::size_t i = 0; i < o.d_.size(); ++i) d_[i] -= o.d_[i];
        return *this;
    }
    Jet& operator*=(const Jet& o) { *this = *this * o; return *this; }
    Jet& operator/=(const Jet& o) { *this = *this * o.inverse(); return *this; }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b) {
        std::size_t n = std::max(a.d_.size(), b.d_.size());
        Jet r(a.val_ * b.val_, n);
        for (std::size_t i = 0; i < a.d_.size(); ++i) r.d_[i] += a.d_[i] * b.val_;
        for (std::size_t i = 0; i < b.d_.size(); ++i) r.d_[i] += a.val_ * b.d_[i];
        return r;
    }
    friend Jet operator/(Jet a, const Jet& b) { return a /= b; }

    friend bool operator==(const Jet& a, const Jet& b) {
        Jet d = a; d -= b;
        return d.is_zero();
    }

    // (1/f)' = -f'/f^2, defined only when value != 0.
    Jet inverse() const {
        if (val_.is_zero()) throw SingularEvaluation("jet inverse at zero value");
        Rat iv = val_.inverse();
        Rat m = -(iv * iv);
        Jet r(iv, d_.size());
        for (std::size_t i = 0; i < d_.size(); ++i) r.d_[i] = m * d_[i];
        return r;
    }

private:
    void align(const Jet& o) {
        if (d_.size() < o.d_.size()) d_.resize(o.d_.size());
    }

    inline static const Rat zero_{};
    Rat val_{};
    std::vector<Rat> d_;
};

// Truncated polynomial ring Q[e_1..e_k]/(e_i^2): components indexed by
// direction subsets (bitmask). Carries exact mixed partial derivatives of
// order <= k; used when forms are differentiated along tangents and the
// base point itself moves.
class MDual {
public:
    MDual() : k_(0), c_(1) {}
    explicit MDual(Rat v, unsigned k = 0) : k_(k), c_(std::size_t(1) << k) { c_[0] = std::move(v); }

    static MDual variable(Rat v, unsigned k, unsigned dir) {
        MDual m(std::move(v), k);
        m.c_[std::size_t(1) << dir] = Rat(1);
        return m;
    }

    unsigned dirs() const { return k_; }
    // Component at a direction subset; masks beyond the stored size are zero.
    const Rat& comp(std::size_t mask) const { return mask < c_.size() ? c_[mask] : zero_; }
    Rat& comp(std::size_t mask) { return c_[mask]; }
    const Rat& value() const { return c_[0]; }

    // Derivative extraction along direction j: masks shift down by bit j.
    MDual shift(unsigned j) const {
        MDual r(Rat(0), k_);
        std::size_t bit = std::size_t(1) << j;
        for (std::size_t m = 0; m < c_.size(); ++m)
            if (!(m & bit)) r.c_[m] = comp(m | bit);
        return r;
    }

    bool is_zero() const {
        for (const auto& x : c_) if (!x.is_zero()) return false;
        return true;
    }

    MDual operator-() const {
        MDual r(Rat(0), k_);
        for (std::size_t m = 0; m < c_.size(); ++m) r.c_[m] = -c_[m];
        return r;
    }

    MDual& operator+=(const MDual& o) { align(o); for (std::size_t m = 0; m < o.c_.size(); ++m) c_[m] += o.c_[m]; return *this; }
    MDual& operator-=(const MDual& o) { align(o); for (std::size_t m = 0; m < o.c_.size(); ++m) c_[m] -= o.c_[m]; return *this; }
    MDual& operator*=(const MDual& o) { *this = *this * o; return *this; }
    MDual& operator/=(const MDual& o) { *this = *this * o.inverse(); return *this; }

    friend MDual operator+(MDual a, const MDual& b) { return a += b; }
    friend MDual operator-(MDual a, const MDual& b) { return a -= b; }

    friend MDual operator*(const MDual& a, const MDual& b) {
        unsigned k = std::max(a.k_, b.k_);
        MDual r(Rat(0), k);
        for (std::size_t m1 = 0; m1 < a.c_.size(); ++m1) {
            if (a.c_[m1].is_zero()) continue;
            for (std::size_t m2 = 0; m2 < b.c_.size(); ++m2) {
                if (m1 & m2) continue;
                if (b.c_[m2].is_zero()) continue;
                r.c_[m1 | m2] += a.c_[m1] * b.c_[m2];
            }
        }
        return r;
    }
    friend MDual operator/(MDual a, const MDual& b) { return a /= b; }

    friend bool operator==(const MDual& a, const MDual& b) {
        MDual d = a; d -= b;
        return d.is_zero();
    }

    MDual inverse() const {
        if (c_[0].is_zero()) throw SingularEvaluation("multidual inverse at zero value");
        Rat iv = c_[0].inverse();
        MDual r(iv, k_);
        // masks in increasing popcount order; plain increasing order suffices
        // since every proper submask is smaller.
        for (std::size_t m = 1; m < c_.size(); ++m) {
            Rat acc(0);
            for (std::size_t s = (m - 1) & m;; s = (s - 1) & m) {
                // s runs over proper submasks of m (including 0)
                acc += c_[m & ~s] * r.c_[s];
                if (s == 0) break;
            }
            r.c_[m] = -(iv * acc);
        }
        return r;
    }

private:
    void align(const MDual& o) {
        if (k_ < o.k_) {
            c_.resize(std::size_t(1) << o.k_);
            k_ = o.k_;
        }
    }

    inline static const Rat zero_{};
    unsigned k_;
    std::vector<Rat> c_;
};

} // namespace quips
