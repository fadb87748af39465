#include "quips/poly.hpp"

#include <functional>
#include <sstream>

namespace quips {

Poly operator*(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ma, ca] : a.terms()) {
        for (const auto& [mb, cb] : b.terms()) {
            // merge sorted exponent lists
            Monomial m;
            m.reserve(ma.size() + mb.size());
            std::size_t i = 0, j = 0;
            while (i < ma.size() && j < mb.size()) {
                if (ma[i].first == mb[j].first) {
                    m.emplace_back(ma[i].first, ma[i].second + mb[j].second);
                    ++i; ++j;
                } else if (ma[i].first < mb[j].first) {
                    m.push_back(ma[i++]);
                } else {
                    m.push_back(mb[j++]);
                }
            }
            while (i < ma.size()) m.push_back(ma[i++]);
            while (j < mb.size()) m.push_back(mb[j++]);
            out.add_term(m, ca * cb);
        }
    }
    return out;
}

Poly Poly::pow(unsigned e) const {
    Poly acc(Rat(1));
    Poly base(*this);
    while (e) {
        if (e & 1u) acc *= base;
        base *= base;
        e >>= 1u;
    }
    return acc;
}

Poly Poly::partial(std::uint32_t v) const {
    Poly out;
    for (const auto& [m, c] : terms_) {
        for (std::size_t k = 0; k < m.size(); ++k) {
            if (m[k].first != v) continue;
            Monomial dm = m;
            Rat dc = c * Rat(static_cast<long>(m[k].second));
            if (dm[k].second == 1) dm.erase(dm.begin() + static_cast<long>(k));
            else dm[k].second -= 1;
            out.add_term(dm, dc);
            break;
        }
    }
    return out;
}

std::string Poly::str(const std::function<std::string(std::uint32_t)>& name) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << c.str();
        for (const auto& [v, e] : m) {
            os << "*" << name(v);
            if (e > 1) os << "^" << e;
        }
    }
    return os.str();
}

std::string witness_monomial(const Poly& p,
                             const std::function<std::string(std::uint32_t)>& name) {
    if (p.is_zero()) return "";
    const auto& [m, c] = *p.terms().begin();
    std::ostringstream os;
    os << c.str();
    for (const auto& [v, e] : m) {
        os << "*" << name(v);
        if (e > 1) os << "^" << e;
    }
    return os.str();
}

} // namespace quips
