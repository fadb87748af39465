#pragma once

#include "quips/jet.hpp"
#include "quips/rat.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace quips {

// Sparse exponent vector, sorted by variable ordinal, no zero exponents.
using Monomial = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

// Sparse multivariate polynomial over Q. Canonical form: ordered monomial
// keys, no zero coefficients stored.
class Poly {
public:
    Poly() = default;
    explicit Poly(Rat c) { if (!c.is_zero()) terms_[Monomial{}] = std::move(c); }

    static Poly var(std::uint32_t v, Rat c = Rat(1)) {
        Poly p;
        if (!c.is_zero()) p.terms_[Monomial{{v, 1}}] = std::move(c);
        return p;
    }

    const std::map<Monomial, Rat>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
    }
    Rat constant_term() const {
        auto it = terms_.find(Monomial{});
        return it == terms_.end() ? Rat(0) : it->second;
    }

    std::size_t degree() const {
        std::size_t d = 0;
        for (const auto& [m, c] : terms_) {
            std::size_t t = 0;
            for (auto& [v, e] : m) t += e;
            if (t > d) d = t;
        }
        return d;
    }

    void add_term(const Monomial& m, const Rat& c) {
        if (c.is_zero()) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) { terms_.emplace(m, c); return; }
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }

    Poly operator-() const {
        Poly p;
        for (const auto& [m, c] : terms_) p.terms_[m] = -c;
        return p;
    }
    Poly& operator+=(const Poly& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);
    Poly& operator*=(const Poly& o) { *this = *this * o; return *this; }

    Poly scaled(const Rat& c) const {
        Poly p;
        if (c.is_zero()) return p;
        for (const auto& [m, k] : terms_) p.terms_[m] = k * c;
        return p;
    }

    Poly pow(unsigned e) const;

    friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }
    bool operator<(const Poly& o) const { return terms_ < o.terms_; }

    // Formal partial derivative with respect to a flat variable ordinal.
    Poly partial(std::uint32_t v) const;

    // Exact evaluation; T is Rat, Jet or MDual.
    template <class T>
    T eval(const std::vector<T>& point) const {
        T acc{};
        for (const auto& [m, c] : terms_) {
            T t = make_one<T>(c);
            for (const auto& [v, e] : m) {
                T p = point.at(v);
                for (std::uint32_t k = 1; k < e; ++k) p *= point.at(v);
                t *= p;
            }
            acc += t;
        }
        return acc;
    }

    std::string str(const std::function<std::string(std::uint32_t)>& name =
                        [](std::uint32_t v) { return "x" + std::to_string(v); }) const;

private:
    template <class T>
    static T make_one(const Rat& c) {
        if constexpr (std::is_same_v<T, Rat>) return c;
        else if constexpr (std::is_same_v<T, Jet>) return Jet(c);
        else return MDual(c);
    }

    std::map<Monomial, Rat> terms_;
};

// First nonzero monomial of p rendered with variable names; empty for 0.
// Used as a failure witness by the checkers.
std::string witness_monomial(const Poly& p,
                             const std::function<std::string(std::uint32_t)>& name);

} // namespace quips
