#include "quips/spinrs.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <sstream>

namespace quips {

namespace {
using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <class T>
T lift_rat(const Rat& c) {
    if constexpr (std::is_same_v<T, Rat>) return c;
    else return T(c);
}

int osgn(std::size_t a, std::size_t b) { return a == b ? 0 : (a < b ? +1 : -1); }

// coordinate kinds in the layout
enum class CK { X, A, B };
struct Decoded {
    CK kind;
    std::size_t i, al;
};
Decoded decode(const SpinLayout& lay, std::size_t v) {
    if (v < lay.n) return {CK::X, v, 0};
    v -= lay.n;
    if (v < lay.n * lay.d) return {CK::A, v / lay.d, v % lay.d};
    v -= lay.n * lay.d;
    return {CK::B, v / lay.d, v % lay.d};
}

} // namespace

std::string SpinLayout::name(std::size_t v) const {
    Decoded dc = decode(*this, v);
    std::string base = dc.kind == CK::X ? "x" : (dc.kind == CK::A ? "a" : "b");
    std::string s = base + std::to_string(dc.i + 1);
    if (dc.kind != CK::X) s += "^" + std::to_string(dc.al + 1);
    return s;
}

void SpinRSPoint::validate() const {
    if (x.size() != n || a.size() != n || b.size() != n)
        throw DegeneratePoint("coordinate arrays do not match n");
    for (std::size_t i = 0; i < n; ++i)
        if (a[i].size() != d || b[i].size() != d)
            throw DegeneratePoint("spin arrays do not match d");
    if (q.is_zero() || q == Rat(1)) throw DegeneratePoint("q must satisfy q^k != 1");
    if (q == Rat(-1) && n >= 2) throw DegeneratePoint("q = -1 violates q^k != 1 for k <= n");
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i].is_zero()) throw DegeneratePoint("x_i must be nonzero");
        Rat s(0);
        for (std::size_t al = 0; al < d; ++al) s += a[i][al];
        if (s != Rat(1)) throw DegeneratePoint("sum_al a_i^al != 1");
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (x[i] == x[j]) throw DegeneratePoint("x_i = x_j");
            if (x[i] == q * x[j]) throw DegeneratePoint("x_i = q x_j");
        }
    for (std::size_t al = 0; al + 1 <= d; ++al)
        if (det(calz_matrix(*this, al)).is_zero())
            throw DegeneratePoint("det Z_al = 0 at al = " + std::to_string(al));
    if (det(calz_matrix(*this, d)).is_zero())
        throw DegeneratePoint("det Z_d = 0");
}

SpinBracketTable SpinBracketTable::make(
    Rat z0, std::size_t d,
    const std::vector<std::tuple<std::size_t, std::size_t, Rat>>& entries) {
    SpinBracketTable t;
    t.z0 = std::move(z0);
    t.z = RatMatrix(d, d);
    for (const auto& [al, be, v] : entries) {
        t.z(al, be) = v;
        t.z(be, al) = -v;
    }
    return t;
}

SpinCoords<Rat> coords_of(const SpinRSPoint& p) {
    return SpinCoords<Rat>{p.n, p.d, p.q, p.x, p.a, p.b};
}

SpinCoords<Jet> jet_coords_of(const SpinRSPoint& p) {
    SpinLayout lay{p.n, p.d};
    std::size_t nv = lay.size();
    SpinCoords<Jet> c;
    c.n = p.n;
    c.d = p.d;
    c.q = Jet(p.q);
    c.x.resize(p.n);
    c.a.assign(p.n, std::vector<Jet>(p.d));
    c.b.assign(p.n, std::vector<Jet>(p.d));
    for (std::size_t i = 0; i < p.n; ++i) {
        c.x[i] = Jet::variable(p.x[i], nv, lay.xv(i));
        for (std::size_t al = 0; al < p.d; ++al) {
            c.a[i][al] = Jet::variable(p.a[i][al], nv, lay.av(i, al));
            c.b[i][al] = Jet::variable(p.b[i][al], nv, lay.bv(i, al));
        }
    }
    return c;
}

template <class T>
T spin_z_entry(const SpinCoords<T>& c, std::size_t i, std::size_t j) {
    T f{};
    for (std::size_t be = 0; be < c.d; ++be) f += c.a[i][be] * c.b[j][be];
    return c.q * f / (c.x[i] / c.x[j] - c.q);
}

template Rat spin_z_entry<Rat>(const SpinCoords<Rat>&, std::size_t, std::size_t);
template Jet spin_z_entry<Jet>(const SpinCoords<Jet>&, std::size_t, std::size_t);

RatMatrix z_matrix(const SpinRSPoint& p) {
    SpinCoords<Rat> c = coords_of(p);
    RatMatrix m(p.n, p.n);
    for (std::size_t i = 0; i < p.n; ++i)
        for (std::size_t j = 0; j < p.n; ++j) m(i, j) = spin_z_entry(c, i, j);
    return m;
}

RatMatrix calz_matrix(const SpinRSPoint& p, std::size_t al) {
    RatMatrix m = z_matrix(p);
    for (std::size_t i = 0; i < p.n; ++i)
        for (std::size_t j = 0; j < p.n; ++j)
            for (std::size_t be = 0; be < al; ++be) m(i, j) += p.a[i][be] * p.b[j][be];
    return m;
}

namespace {

// {a_i^al, a_j^be}_0
template <class T>
T brk0_aa(const SpinCoords<T>& c, std::size_t i, std::size_t j, std::size_t al, std::size_t be) {
    T out{};
    T half = lift_rat<T>(Rat(1, 2));
    if (i != j) {
        T cot = (c.x[i] + c.x[j]) / (c.x[i] - c.x[j]);
        out += half * cot *
               (c.a[i][al] * c.a[j][be] + c.a[j][al] * c.a[i][be] - c.a[j][al] * c.a[j][be] -
                c.a[i][al] * c.a[i][be]);
    }
    if (int s = osgn(be, al); s != 0)
        out += half * lift_rat<T>(Rat(s)) * (c.a[i][al] * c.a[j][be] + c.a[j][al] * c.a[i][be]);
    for (std::size_t ga = 0; ga < c.d; ++ga) {
        if (int s = osgn(al, ga); s != 0)
            out += half * lift_rat<T>(Rat(s)) * c.a[j][be] *
                   (c.a[i][al] * c.a[j][ga] + c.a[j][al] * c.a[i][ga]);
        if (int s = osgn(be, ga); s != 0)
            out -= half * lift_rat<T>(Rat(s)) * c.a[i][al] *
                   (c.a[j][be] * c.a[i][ga] + c.a[i][be] * c.a[j][ga]);
    }
    return out;
}

// {a_i^al, b_j^be}_0
template <class T>
T brk0_ab(const SpinCoords<T>& c, std::size_t i, std::size_t j, std::size_t al, std::size_t be) {
    T out{};
    T half = lift_rat<T>(Rat(1, 2));
    T zij = spin_z_entry(c, i, j);
    out += c.a[i][al] * zij;
    if (al == be) out -= zij;
    if (i != j) {
        T cot = (c.x[i] + c.x[j]) / (c.x[i] - c.x[j]);
        out -= half * cot * (c.a[i][al] - c.a[j][al]) * c.b[j][be];
    }
    if (al < be) out += c.a[i][al] * c.b[j][be];
    for (std::size_t ga = 0; ga < be; ++ga) {
        out += c.a[i][al] * c.a[i][ga] * (c.b[j][ga] - c.b[j][be]);
        if (al == be) out -= c.a[i][ga] * c.b[j][ga];
    }
    for (std::size_t ga = 0; ga < c.d; ++ga)
        if (int s = osgn(al, ga); s != 0)
            out -= half * lift_rat<T>(Rat(s)) * c.b[j][be] *
                   (c.a[i][al] * c.a[j][ga] + c.a[j][al] * c.a[i][ga]);
    return out;
}

// {b_i^al, b_j^be}_0
template <class T>
T brk0_bb(const SpinCoords<T>& c, std::size_t i, std::size_t j, std::size_t al, std::size_t be) {
    T out{};
    T half = lift_rat<T>(Rat(1, 2));
    if (i != j) {
        T cot = (c.x[i] + c.x[j]) / (c.x[i] - c.x[j]);
        out += half * cot * (c.b[i][al] * c.b[j][be] + c.b[j][al] * c.b[i][be]);
    }
    out -= c.b[i][al] * spin_z_entry(c, i, j);
    out += c.b[j][be] * spin_z_entry(c, j, i);
    if (int s = osgn(be, al); s != 0)
        out += half * lift_rat<T>(Rat(s)) * (c.b[i][al] * c.b[j][be] - c.b[j][al] * c.b[i][be]);
    for (std::size_t ga = 0; ga < be; ++ga)
        out -= c.b[i][al] * c.a[i][ga] * (c.b[j][ga] - c.b[j][be]);
    for (std::size_t ga = 0; ga < al; ++ga)
        out += c.b[j][be] * c.a[j][ga] * (c.b[i][ga] - c.b[i][al]);
    return out;
}

} // namespace

template <class T>
T bracket0_gen(const SpinCoords<T>& c, const SpinLayout& lay, std::size_t u, std::size_t v) {
    Decoded du = decode(lay, u), dv = decode(lay, v);
    // {x, x} = {x, a} = 0; {x_i, b_j^al} = delta_ij x_i b_j^al
    if (du.kind == CK::X) {
        if (dv.kind == CK::B && du.i == dv.i) return c.x[du.i] * c.b[dv.i][dv.al];
        return T{};
    }
    if (dv.kind == CK::X) {
        if (du.kind == CK::B && du.i == dv.i) return -(c.x[dv.i] * c.b[du.i][du.al]);
        return T{};
    }
    if (du.kind == CK::A && dv.kind == CK::A) return brk0_aa(c, du.i, dv.i, du.al, dv.al);
    if (du.kind == CK::A && dv.kind == CK::B) return brk0_ab(c, du.i, dv.i, du.al, dv.al);
    if (du.kind == CK::B && dv.kind == CK::A) return -brk0_ab(c, dv.i, du.i, dv.al, du.al);
    return brk0_bb(c, du.i, dv.i, du.al, dv.al);
}

template Rat bracket0_gen<Rat>(const SpinCoords<Rat>&, const SpinLayout&, std::size_t, std::size_t);
template Jet bracket0_gen<Jet>(const SpinCoords<Jet>&, const SpinLayout&, std::size_t, std::size_t);

template <class T>
T g_factor(const SpinCoords<T>& c, const RatMatrix& z, std::size_t i, std::size_t j,
           std::size_t al, std::size_t be) {
    T out = lift_rat<T>(z(al, be));
    for (std::size_t mu = 0; mu < c.d; ++mu) {
        if (!z(mu, al).is_zero()) out += lift_rat<T>(z(mu, al)) * c.a[j][mu];
        if (!z(mu, be).is_zero()) out -= lift_rat<T>(z(mu, be)) * c.a[i][mu];
        for (std::size_t nu = 0; nu < c.d; ++nu)
            if (!z(mu, nu).is_zero()) out += lift_rat<T>(z(mu, nu)) * c.a[i][mu] * c.a[j][nu];
    }
    return out;
}

template Rat g_factor<Rat>(const SpinCoords<Rat>&, const RatMatrix&, std::size_t, std::size_t,
                           std::size_t, std::size_t);
template Jet g_factor<Jet>(const SpinCoords<Jet>&, const RatMatrix&, std::size_t, std::size_t,
                           std::size_t, std::size_t);

template <class T>
T psi_loc_gen(const SpinCoords<T>& c, const RatMatrix& z, const SpinLayout& lay, std::size_t u,
              std::size_t v) {
    Decoded du = decode(lay, u), dv = decode(lay, v);
    if (du.kind == CK::X || dv.kind == CK::X) return T{};
    if (du.kind == CK::A && dv.kind == CK::A)
        return g_factor(c, z, du.i, dv.i, du.al, dv.al) * c.a[du.i][du.al] * c.a[dv.i][dv.al];
    if (du.kind == CK::A && dv.kind == CK::B)
        return -(g_factor(c, z, du.i, dv.i, du.al, dv.al) * c.a[du.i][du.al] * c.b[dv.i][dv.al]);
    if (du.kind == CK::B && dv.kind == CK::A)
        return g_factor(c, z, dv.i, du.i, dv.al, du.al) * c.a[dv.i][dv.al] * c.b[du.i][du.al];
    return g_factor(c, z, du.i, dv.i, du.al, dv.al) * c.b[du.i][du.al] * c.b[dv.i][dv.al];
}

template Rat psi_loc_gen<Rat>(const SpinCoords<Rat>&, const RatMatrix&, const SpinLayout&,
                              std::size_t, std::size_t);
template Jet psi_loc_gen<Jet>(const SpinCoords<Jet>&, const RatMatrix&, const SpinLayout&,
                              std::size_t, std::size_t);

namespace {

// AO brackets: sign = -1 takes the lower symbol of -/+ and partial sums over
// gamma < beta; sign = +1 the upper symbol and gamma > beta.
template <class T>
T ao_aa(const SpinCoords<T>& c, int sign, std::size_t i, std::size_t j, std::size_t al,
        std::size_t be) {
    T out{};
    T half = lift_rat<T>(Rat(1, 2));
    T sg = lift_rat<T>(Rat(sign));
    if (i != j) {
        T cot = (c.x[i] + c.x[j]) / (c.x[i] - c.x[j]);
        out += half * cot *
               (c.a[i][al] * c.a[j][be] + c.a[j][al] * c.a[i][be] - c.a[j][al] * c.a[j][be] -
                c.a[i][al] * c.a[i][be]);
    }
    if (int s = osgn(be, al); s != 0)
        out -= sg * half * lift_rat<T>(Rat(s)) * c.a[j][al] * c.a[i][be];
    for (std::size_t ga = 0; ga < c.d; ++ga) {
        if (int s = osgn(al, ga); s != 0)
            out -= sg * half * lift_rat<T>(Rat(s)) * c.a[j][be] * c.a[j][al] * c.a[i][ga];
        if (int s = osgn(be, ga); s != 0)
            out += sg * half * lift_rat<T>(Rat(s)) * c.a[i][al] * c.a[i][be] * c.a[j][ga];
    }
    T cross{};
    for (std::size_t ga = 0; ga < c.d; ++ga)
        for (std::size_t ep = 0; ep < c.d; ++ep)
            if (int s = osgn(ep, ga); s != 0) cross += lift_rat<T>(Rat(s)) * c.a[i][ep] * c.a[j][ga];
    out -= sg * half * cross * c.a[i][al] * c.a[j][be];
    return out;
}

template <class T>
T ao_ab(const SpinCoords<T>& c, int sign, std::size_t i, std::size_t j, std::size_t al,
        std::size_t be) {
    T out{};
    T half = lift_rat<T>(Rat(1, 2));
    T sg = lift_rat<T>(Rat(sign));
    T zij = spin_z_entry(c, i, j);
    out += c.a[i][al] * zij;
    if (al == be) out -= zij;
    if (i != j) {
        T cot = (c.x[i] + c.x[j]) / (c.x[i] - c.x[j]);
        out -= half * cot * (c.a[i][al] - c.a[j][al]) * c.b[j][be];
    }
    // partial sums over gamma < be (minus bracket) or gamma > be (plus)
    T psum{};
    for (std::size_t ga = 0; ga < c.d; ++ga) {
        bool in = (sign < 0) ? (ga < be) : (ga > be);
        if (in) psum += c.a[i][ga] * c.b[j][ga];
    }
    out += c.a[i][al] * psum;
    if (al == be) out -= psum;
    for (std::size_t ga = 0; ga < c.d; ++ga)
        if (int s = osgn(al, ga); s != 0)
            out += sg * half * lift_rat<T>(Rat(s)) * c.b[j][be] * c.a[j][al] * c.a[i][ga];
    T cross{};
    for (std::size_t ga = 0; ga < c.d; ++ga)
        for (std::size_t ep = 0; ep < c.d; ++ep)
            if (int s = osgn(ep, ga); s != 0) cross += lift_rat<T>(Rat(s)) * c.a[i][ep] * c.a[j][ga];
    out += sg * half * cross * c.a[i][al] * c.b[j][be];
    out += half * c.a[i][al] * c.a[i][be] * c.b[j][be];
    if (al == be) out -= half * c.a[i][al] * c.b[j][be];
    return out;
}

template <class T>
T ao_bb(const SpinCoords<T>& c, int sign, std::size_t i, std::size_t j, std::size_t al,
        std::size_t be) {
    T out{};
    T half = lift_rat<T>(Rat(1, 2));
    T sg = lift_rat<T>(Rat(sign));
    if (i != j) {
        T cot = (c.x[i] + c.x[j]) / (c.x[i] - c.x[j]);
        out += half * cot * (c.b[i][al] * c.b[j][be] + c.b[j][al] * c.b[i][be]);
    }
    out -= c.b[i][al] * spin_z_entry(c, i, j);
    out += c.b[j][be] * spin_z_entry(c, j, i);
    if (int s = osgn(be, al); s != 0)
        out += sg * half * lift_rat<T>(Rat(s)) * c.b[j][al] * c.b[i][be];
    T psum_be{}, psum_al{};
    for (std::size_t ga = 0; ga < c.d; ++ga) {
        bool in_be = (sign < 0) ? (ga < be) : (ga > be);
        bool in_al = (sign < 0) ? (ga < al) : (ga > al);
        if (in_be) psum_be += c.a[i][ga] * c.b[j][ga];
        if (in_al) psum_al += c.a[j][ga] * c.b[i][ga];
    }
    out -= c.b[i][al] * psum_be;
    out += c.b[j][be] * psum_al;
    T cross{};
    for (std::size_t ga = 0; ga < c.d; ++ga)
        for (std::size_t ep = 0; ep < c.d; ++ep)
            if (int s = osgn(ep, ga); s != 0) cross += lift_rat<T>(Rat(s)) * c.a[i][ep] * c.a[j][ga];
    out -= sg * half * cross * c.b[i][al] * c.b[j][be];
    out += half * (c.a[j][al] - c.a[i][be]) * c.b[i][al] * c.b[j][be];
    return out;
}

} // namespace

template <class T>
T bracket_ao_gen(const SpinCoords<T>& c, int sign, const SpinLayout& lay, std::size_t u,
                 std::size_t v) {
    Decoded du = decode(lay, u), dv = decode(lay, v);
    if (du.kind == CK::X) {
        if (dv.kind == CK::B && du.i == dv.i) return c.x[du.i] * c.b[dv.i][dv.al];
        return T{};
    }
    if (dv.kind == CK::X) {
        if (du.kind == CK::B && du.i == dv.i) return -(c.x[dv.i] * c.b[du.i][du.al]);
        return T{};
    }
    if (du.kind == CK::A && dv.kind == CK::A) return ao_aa(c, sign, du.i, dv.i, du.al, dv.al);
    if (du.kind == CK::A && dv.kind == CK::B) return ao_ab(c, sign, du.i, dv.i, du.al, dv.al);
    if (du.kind == CK::B && dv.kind == CK::A) return -ao_ab(c, sign, dv.i, du.i, dv.al, du.al);
    return ao_bb(c, sign, du.i, dv.i, du.al, dv.al);
}

template Rat bracket_ao_gen<Rat>(const SpinCoords<Rat>&, int, const SpinLayout&, std::size_t,
                                 std::size_t);
template Jet bracket_ao_gen<Jet>(const SpinCoords<Jet>&, int, const SpinLayout&, std::size_t,
                                 std::size_t);

Rat bracket_full(const SpinRSPoint& p, const SpinBracketTable& t, std::size_t u, std::size_t v) {
    SpinLayout lay{p.n, p.d};
    SpinCoords<Rat> c = coords_of(p);
    Rat out = psi_loc_gen(c, t.z, lay, u, v);
    if (!t.z0.is_zero()) out += t.z0 * bracket0_gen(c, lay, u, v);
    return out;
}

RatMatrix bracket_table(const SpinRSPoint& p, const SpinBracketTable& t) {
    SpinLayout lay{p.n, p.d};
    std::size_t nv = lay.size();
    RatMatrix m(nv, nv);
    SpinCoords<Rat> c = coords_of(p);
    for (std::size_t u = 0; u < nv; ++u)
        for (std::size_t v = u + 1; v < nv; ++v) {
            Rat val = psi_loc_gen(c, t.z, lay, u, v);
            if (!t.z0.is_zero()) val += t.z0 * bracket0_gen(c, lay, u, v);
            m(u, v) = val;
            m(v, u) = -val;
        }
    return m;
}

Mat<Jet> bracket_table_jets(const SpinRSPoint& p, const SpinBracketTable& t) {
    SpinLayout lay{p.n, p.d};
    std::size_t nv = lay.size();
    Mat<Jet> m(nv, nv);
    SpinCoords<Jet> c = jet_coords_of(p);
    for (std::size_t u = 0; u < nv; ++u)
        for (std::size_t v = u + 1; v < nv; ++v) {
            Jet val = psi_loc_gen(c, t.z, lay, u, v);
            if (!t.z0.is_zero()) val += Jet(t.z0) * bracket0_gen(c, lay, u, v);
            m(u, v) = val;
            m(v, u) = -val;
        }
    return m;
}

CheckReport check_jacobi_local(const SpinRSPoint& p, const SpinBracketTable& t,
                               const std::vector<std::array<std::size_t, 3>>& triples) {
    auto t0 = Clock::now();
    CheckReport r;
    r.name = "spinrs: jet Jacobiator of z0{.,.}_0 + psi_z";
    p.validate();
    SpinLayout lay{p.n, p.d};
    std::size_t nv = lay.size();
    Mat<Jet> pi = bracket_table_jets(p, t);

    auto jacobiator = [&](std::size_t u, std::size_t v, std::size_t w) {
        Rat acc(0);
        for (std::size_t s = 0; s < nv; ++s) {
            const Rat& pu = pi(s, u).value();
            const Rat& pv = pi(s, v).value();
            const Rat& pw = pi(s, w).value();
            if (!pu.is_zero()) acc += pu * pi(v, w).deriv(s);
            if (!pv.is_zero()) acc += pv * pi(w, u).deriv(s);
            if (!pw.is_zero()) acc += pw * pi(u, v).deriv(s);
        }
        return acc;
    };

    auto run_triple = [&](std::size_t u, std::size_t v, std::size_t w) {
        Rat jc = jacobiator(u, v, w);
        if (!jc.is_zero()) {
            r.status = CheckReport::Status::Fail;
            r.witness = "jacobiator(" + lay.name(u) + "," + lay.name(v) + "," + lay.name(w) +
                        ") = " + jc.str();
            return false;
        }
        return true;
    };

    std::size_t count = 0;
    if (!triples.empty()) {
        for (const auto& tr : triples) {
            ++count;
            if (!run_triple(tr[0], tr[1], tr[2])) break;
        }
    } else {
        bool go = true;
        for (std::size_t u = 0; u < nv && go; ++u)
            for (std::size_t v = u + 1; v < nv && go; ++v)
                for (std::size_t w = v + 1; w < nv && go; ++w) {
                    ++count;
                    go = run_triple(u, v, w);
                }
    }
    r.samples = count;
    r.note = "exact at the point on " + std::to_string(count) + " coordinate triples";
    r.elapsed_ms = ms_since(t0);
    return r;
}

std::size_t pencil_rank_local(const SpinRSPoint& p) {
    p.validate();
    SpinLayout lay{p.n, p.d};
    std::size_t nv = lay.size();
    SpinCoords<Rat> c = coords_of(p);
    std::size_t nz = p.d * (p.d - 1) / 2;
    RatMatrix m(nz, nv * (nv - 1) / 2);
    std::size_t row = 0;
    for (std::size_t al = 0; al < p.d; ++al)
        for (std::size_t be = al + 1; be < p.d; ++be) {
            RatMatrix z(p.d, p.d);
            z(al, be) = Rat(1);
            z(be, al) = Rat(-1);
            std::size_t col = 0;
            for (std::size_t u = 0; u < nv; ++u)
                for (std::size_t v = u + 1; v < nv; ++v)
                    m(row, col++) = psi_loc_gen(c, z, lay, u, v);
            ++row;
        }
    return rank(m);
}

SpinVelocity trig_rhs(const SpinRSPoint& p) {
    SpinVelocity out;
    out.x.assign(p.n, Rat(0));
    out.a.assign(p.n, std::vector<Rat>(p.d, Rat(0)));
    out.b.assign(p.n, std::vector<Rat>(p.d, Rat(0)));
    auto f = [&](std::size_t i, std::size_t j) {
        Rat s(0);
        for (std::size_t al = 0; al < p.d; ++al) s += p.a[i][al] * p.b[j][al];
        return s;
    };
    auto V = [&](std::size_t i, std::size_t k) {
        return (p.x[i] + p.x[k]) / (p.x[i] - p.x[k]) -
               (p.x[i] + p.q * p.x[k]) / (p.x[i] - p.q * p.x[k]);
    };
    for (std::size_t i = 0; i < p.n; ++i) {
        out.x[i] = Rat(2) * f(i, i) * p.x[i];
        for (std::size_t al = 0; al < p.d; ++al) {
            for (std::size_t k = 0; k < p.n; ++k) {
                if (k == i) continue;
                out.a[i][al] += V(i, k) * f(i, k) * (p.a[k][al] - p.a[i][al]);
                out.b[i][al] += V(i, k) * f(i, k) * p.b[i][al] - V(k, i) * f(k, i) * p.b[k][al];
            }
        }
    }
    return out;
}

SpinVelocity hamiltonian_field(const SpinRSPoint& p, const SpinBracketTable& t) {
    if (t.z0.is_zero()) throw BadParams("hamiltonian_field needs z0 != 0");
    p.validate();
    SpinLayout lay{p.n, p.d};
    std::size_t nv = lay.size();
    // h = 2 sum_i f_ii as a jet function; velocities {z0^-1 h, u}.
    SpinCoords<Jet> c = jet_coords_of(p);
    Jet h;
    for (std::size_t i = 0; i < p.n; ++i)
        for (std::size_t al = 0; al < p.d; ++al) h += c.a[i][al] * c.b[i][al];
    h = h * Jet(Rat(2));

    RatMatrix pi = bracket_table(p, t);
    Rat iz0 = t.z0.inverse();
    // The equations of motion arise as du/dt = {u, h} in this bracket
    // orientation (the structure functions fix the sign).
    std::vector<Rat> vel(nv, Rat(0));
    for (std::size_t u = 0; u < nv; ++u) {
        Rat acc(0);
        for (std::size_t s = 0; s < nv; ++s) {
            const Rat& dh = h.deriv(s);
            if (!dh.is_zero()) acc += dh * pi(u, s);
        }
        vel[u] = iz0 * acc;
    }
    SpinVelocity out;
    out.x.assign(p.n, Rat(0));
    out.a.assign(p.n, std::vector<Rat>(p.d, Rat(0)));
    out.b.assign(p.n, std::vector<Rat>(p.d, Rat(0)));
    for (std::size_t i = 0; i < p.n; ++i) {
        out.x[i] = vel[lay.xv(i)];
        for (std::size_t al = 0; al < p.d; ++al) {
            out.a[i][al] = vel[lay.av(i, al)];
            out.b[i][al] = vel[lay.bv(i, al)];
        }
    }
    return out;
}

namespace {

// double-precision right-hand side of the equations of motion
struct DState {
    std::vector<double> x;
    std::vector<std::vector<double>> a, b;
};

DState rhs(const DState& s, double q, double guard_tol) {
    std::size_t n = s.x.size(), d = s.a[0].size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            if (i == k) continue;
            if (std::abs(s.x[i] - s.x[k]) < guard_tol ||
                std::abs(s.x[i] - q * s.x[k]) < guard_tol)
                throw StepRejected("trajectory approaches x_i = x_j or x_i = q x_j");
        }
    auto f = [&](std::size_t i, std::size_t j) {
        double acc = 0;
        for (std::size_t al = 0; al < d; ++al) acc += s.a[i][al] * s.b[j][al];
        return acc;
    };
    auto V = [&](std::size_t i, std::size_t k) {
        return (s.x[i] + s.x[k]) / (s.x[i] - s.x[k]) -
               (s.x[i] + q * s.x[k]) / (s.x[i] - q * s.x[k]);
    };
    DState out;
    out.x.assign(n, 0.0);
    out.a.assign(n, std::vector<double>(d, 0.0));
    out.b.assign(n, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        out.x[i] = 2.0 * f(i, i) * s.x[i];
        for (std::size_t al = 0; al < d; ++al)
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i) continue;
                out.a[i][al] += V(i, k) * f(i, k) * (s.a[k][al] - s.a[i][al]);
                out.b[i][al] += V(i, k) * f(i, k) * s.b[i][al] - V(k, i) * f(k, i) * s.b[k][al];
            }
    }
    return out;
}

DState axpy(const DState& s, double h, const DState& k) {
    DState out = s;
    std::size_t n = s.x.size(), d = s.a[0].size();
    for (std::size_t i = 0; i < n; ++i) {
        out.x[i] += h * k.x[i];
        for (std::size_t al = 0; al < d; ++al) {
            out.a[i][al] += h * k.a[i][al];
            out.b[i][al] += h * k.b[i][al];
        }
    }
    return out;
}

// conserved quantities: tr(Z^k) and tr(Z_al^k) for k = 1..3
std::vector<double> conserved(const DState& s, double q) {
    std::size_t n = s.x.size(), d = s.a[0].size();
    std::vector<std::vector<double>> Z(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double f = 0;
            for (std::size_t al = 0; al < d; ++al) f += s.a[i][al] * s.b[j][al];
            Z[i][j] = q * f / (s.x[i] / s.x[j] - q);
        }
    std::vector<double> out;
    auto powers = [&](std::vector<std::vector<double>> m) {
        std::vector<std::vector<double>> acc = m;
        for (int k = 1; k <= 3; ++k) {
            double tr = 0;
            for (std::size_t i = 0; i < n; ++i) tr += acc[i][i];
            out.push_back(tr);
            if (k < 3) {
                std::vector<std::vector<double>> nxt(n, std::vector<double>(n, 0.0));
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t l = 0; l < n; ++l)
                        for (std::size_t j = 0; j < n; ++j) nxt[i][j] += acc[i][l] * m[l][j];
                acc = nxt;
            }
        }
    };
    powers(Z);
    for (std::size_t al = 1; al <= d; ++al) {
        std::vector<std::vector<double>> m = Z;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t be = 0; be < al; ++be) m[i][j] += s.a[i][be] * s.b[j][be];
        powers(m);
    }
    return out;
}

} // namespace

FlowResult flow(const SpinRSPoint& p0, double t_end, double dt, double guard_tol) {
    p0.validate();
    if (dt <= 0 || t_end < 0) throw BadParams("flow: need dt > 0 and t_end >= 0");
    double q = p0.q.to_double();
    DState s;
    s.x.resize(p0.n);
    s.a.assign(p0.n, std::vector<double>(p0.d));
    s.b.assign(p0.n, std::vector<double>(p0.d));
    for (std::size_t i = 0; i < p0.n; ++i) {
        s.x[i] = p0.x[i].to_double();
        for (std::size_t al = 0; al < p0.d; ++al) {
            s.a[i][al] = p0.a[i][al].to_double();
            s.b[i][al] = p0.b[i][al].to_double();
        }
    }

    FlowResult res;
    res.conserved_names.push_back("tr(Z^1)");
    res.conserved_names.push_back("tr(Z^2)");
    res.conserved_names.push_back("tr(Z^3)");
    for (std::size_t al = 1; al <= p0.d; ++al)
        for (int k = 1; k <= 3; ++k)
            res.conserved_names.push_back("tr(Z_" + std::to_string(al) + "^" + std::to_string(k) +
                                          ")");
    res.initial_values = conserved(s, q);
    res.max_rel_drift.assign(res.initial_values.size(), 0.0);

    auto record = [&](double t) {
        FlowState st;
        st.t = t;
        st.x = s.x;
        st.a = s.a;
        st.b = s.b;
        res.trajectory.push_back(std::move(st));
        std::vector<double> c = conserved(s, q);
        for (std::size_t k = 0; k < c.size(); ++k) {
            double denom = std::max(std::abs(res.initial_values[k]), 1e-30);
            res.max_rel_drift[k] =
                std::max(res.max_rel_drift[k], std::abs(c[k] - res.initial_values[k]) / denom);
        }
        for (std::size_t i = 0; i < p0.n; ++i) {
            double sum = 0;
            for (std::size_t al = 0; al < p0.d; ++al) sum += s.a[i][al];
            res.constraint_drift = std::max(res.constraint_drift, std::abs(sum - 1.0));
        }
    };

    record(0.0);
    std::size_t nsteps = static_cast<std::size_t>(std::llround(t_end / dt));
    for (std::size_t step = 0; step < nsteps; ++step) {
        DState k1 = rhs(s, q, guard_tol);
        DState k2 = rhs(axpy(s, dt / 2, k1), q, guard_tol);
        DState k3 = rhs(axpy(s, dt / 2, k2), q, guard_tol);
        DState k4 = rhs(axpy(s, dt, k3), q, guard_tol);
        DState sum = axpy(s, dt / 6, k1);
        sum = axpy(sum, dt / 3, k2);
        sum = axpy(sum, dt / 3, k3);
        sum = axpy(sum, dt / 6, k4);
        s = sum;
        record(static_cast<double>(step + 1) * dt);
    }
    return res;
}

namespace {

// tr(Z_al^k) and t_{k;al,be} = B_be Zc_{be-1}^-1 Z^k A_al as jet functions.
template <class T>
Mat<T> spin_z_mat(const SpinCoords<T>& c) {
    Mat<T> z(c.n, c.n);
    for (std::size_t i = 0; i < c.n; ++i)
        for (std::size_t j = 0; j < c.n; ++j) z(i, j) = spin_z_entry(c, i, j);
    return z;
}

template <class T>
Mat<T> spin_calz_mat(const SpinCoords<T>& c, std::size_t al) {
    Mat<T> z = spin_z_mat(c);
    for (std::size_t i = 0; i < c.n; ++i)
        for (std::size_t j = 0; j < c.n; ++j)
            for (std::size_t be = 0; be < al; ++be) z(i, j) += c.a[i][be] * c.b[j][be];
    return z;
}

template <class T>
T trace_pow(const Mat<T>& m, std::size_t k) {
    Mat<T> acc = m;
    for (std::size_t i = 1; i < k; ++i) acc = acc * m;
    return acc.trace();
}

// t_{k;al be} = tr(W_al V_be Z^k) = V_be Z^k W_al with W_al = A_al,
// V_be = B_be Zc_{be-1}^-1.
template <class T>
T t_function(const SpinCoords<T>& c, std::size_t k, std::size_t al, std::size_t be) {
    Mat<T> z = spin_z_mat(c);
    Mat<T> zc = spin_calz_mat(c, be);  // Z + sum_{mu <= be-1} ... = Zc_{be-1} (0-based be)
    Mat<T> zk = Mat<T>::identity(c.n, lift_rat<T>(Rat(1)));
    for (std::size_t i = 0; i < k; ++i) zk = zk * z;
    Mat<T> row(1, c.n), col(c.n, 1);
    for (std::size_t j = 0; j < c.n; ++j) {
        row(0, j) = c.b[j][be];
        col(j, 0) = c.a[j][al];
    }
    Mat<T> res = row * zc.inverse() * zk * col;
    return res(0, 0);
}

} // namespace

CheckReport check_integrability_algebras(const SpinRSPoint& p, const SpinBracketTable& t,
                                         std::size_t k_max) {
    auto t0 = Clock::now();
    CheckReport r;
    r.name = "spinrs: integrability algebras";
    p.validate();
    SpinLayout lay{p.n, p.d};
    std::size_t nv = lay.size();
    SpinCoords<Jet> jc = jet_coords_of(p);
    SpinCoords<Rat> rc = coords_of(p);

    RatMatrix pi_full = bracket_table(p, t);
    RatMatrix pi_psi(nv, nv), pi_zero(nv, nv);
    for (std::size_t u = 0; u < nv; ++u)
        for (std::size_t v = u + 1; v < nv; ++v) {
            Rat pv = psi_loc_gen(rc, t.z, lay, u, v);
            Rat zv = bracket0_gen(rc, lay, u, v);
            pi_psi(u, v) = pv;
            pi_psi(v, u) = -pv;
            pi_zero(u, v) = zv;
            pi_zero(v, u) = -zv;
        }

    auto bracket_of = [&](const Jet& F, const Jet& G, const RatMatrix& pi) {
        Rat acc(0);
        for (std::size_t u = 0; u < nv; ++u) {
            const Rat& fu = F.deriv(u);
            if (fu.is_zero()) continue;
            for (std::size_t v = 0; v < nv; ++v) {
                const Rat& gv = G.deriv(v);
                if (!gv.is_zero()) acc += fu * gv * pi(u, v);
            }
        }
        return acc;
    };

    // h_{k;al} = tr(Zc_al^k), al = 0..d (al = 0 is tr(Z^k))
    std::vector<std::vector<Jet>> h(p.d + 1, std::vector<Jet>(k_max));
    for (std::size_t al = 0; al <= p.d; ++al) {
        Mat<Jet> zc = spin_calz_mat(jc, al);
        for (std::size_t k = 1; k <= k_max; ++k) h[al][k - 1] = trace_pow(zc, k);
    }

    // (i) full-pencil commutation of the h family
    for (std::size_t al = 0; al <= p.d && r.passed(); ++al)
        for (std::size_t be = 0; be <= p.d && r.passed(); ++be)
            for (std::size_t k = 1; k <= k_max && r.passed(); ++k)
                for (std::size_t l = 1; l <= k_max; ++l) {
                    Rat v = bracket_of(h[al][k - 1], h[be][l - 1], pi_full);
                    if (!v.is_zero()) {
                        r.status = CheckReport::Status::Fail;
                        r.witness = "{h_{" + std::to_string(k) + ";" + std::to_string(al) +
                                    "}, h_{" + std::to_string(l) + ";" + std::to_string(be) +
                                    "}} = " + v.str();
                        break;
                    }
                }

    // (ii) psi-part of {t_{k;ge}, t_{l;ab}}
    if (r.passed()) {
        std::vector<Jet> tf(p.d * p.d * k_max);
        auto tidx = [&](std::size_t k, std::size_t al, std::size_t be) {
            return ((k - 1) * p.d + al) * p.d + be;
        };
        for (std::size_t k = 1; k <= k_max; ++k)
            for (std::size_t al = 0; al < p.d; ++al)
                for (std::size_t be = 0; be < p.d; ++be)
                    tf[tidx(k, al, be)] = t_function(jc, k, al, be);
        for (std::size_t k = 1; k <= k_max && r.passed(); ++k)
            for (std::size_t l = 1; l <= k_max && r.passed(); ++l)
                for (std::size_t ga = 0; ga < p.d && r.passed(); ++ga)
                    for (std::size_t ep = 0; ep < p.d && r.passed(); ++ep)
                        for (std::size_t al = 0; al < p.d && r.passed(); ++al)
                            for (std::size_t be = 0; be < p.d; ++be) {
                                const Jet& F = tf[tidx(k, ga, ep)];
                                const Jet& G = tf[tidx(l, al, be)];
                                Rat lhs = bracket_of(F, G, pi_psi);
                                Rat coef = t.z(ga, al) + t.z(ep, be) - t.z(ga, be) - t.z(ep, al);
                                Rat rhs = coef * F.value() * G.value();
                                if (lhs != rhs) {
                                    r.status = CheckReport::Status::Fail;
                                    r.witness = "psi-part of {t_{" + std::to_string(k) + "}, t_{" +
                                                std::to_string(l) + "}} mismatch at (ga,ep,al,be)=(" +
                                                std::to_string(ga + 1) + "," + std::to_string(ep + 1) +
                                                "," + std::to_string(al + 1) + "," +
                                                std::to_string(be + 1) + ")";
                                    break;
                                }
                            }
        // (iii) {tr Z^k, t_{l;al be}}_0 = 0
        for (std::size_t k = 1; k <= k_max && r.passed(); ++k)
            for (std::size_t l = 1; l <= k_max && r.passed(); ++l)
                for (std::size_t al = 0; al < p.d && r.passed(); ++al)
                    for (std::size_t be = 0; be < p.d; ++be) {
                        Rat v = bracket_of(h[0][k - 1], tf[tidx(l, al, be)], pi_zero);
                        if (!v.is_zero()) {
                            r.status = CheckReport::Status::Fail;
                            r.witness = "{h_" + std::to_string(k) + ", t_{" + std::to_string(l) +
                                        ";" + std::to_string(al + 1) + std::to_string(be + 1) +
                                        "}}_0 = " + v.str();
                            break;
                        }
                    }
    }
    r.note = "exact at the point, k_max = " + std::to_string(k_max);
    r.elapsed_ms = ms_since(t0);
    return r;
}

SpinRSPoint sample_hreg(std::uint64_t seed, std::size_t n, std::size_t d, const Rat& q) {
    Rng rng(seed);
    for (std::size_t attempt = 0; attempt < 1000; ++attempt) {
        SpinRSPoint p;
        p.n = n;
        p.d = d;
        p.q = q;
        p.x.resize(n);
        p.a.assign(n, std::vector<Rat>(d));
        p.b.assign(n, std::vector<Rat>(d));
        for (std::size_t i = 0; i < n; ++i) {
            p.x[i] = rng.small_rat();
            for (std::size_t al = 0; al + 1 < d; ++al) p.a[i][al] = rng.small_rat();
            Rat s(0);
            for (std::size_t al = 0; al + 1 < d; ++al) s += p.a[i][al];
            p.a[i][d - 1] = Rat(1) - s;
            for (std::size_t al = 0; al < d; ++al) p.b[i][al] = rng.small_rat();
        }
        try {
            p.validate();
            return p;
        } catch (const DegeneratePoint&) {
            continue;
        }
    }
    throw AvoidanceExhausted("sample_hreg: no valid chart point found");
}

SpinRSPoint special_point(std::uint64_t seed, std::size_t n, std::size_t d, const Rat& q) {
    Rng rng(seed);
    for (std::size_t attempt = 0; attempt < 1000; ++attempt) {
        SpinRSPoint p;
        p.n = n;
        p.d = d;
        p.q = q;
        p.x.resize(n);
        p.a.assign(n, std::vector<Rat>(d, Rat(0)));
        p.b.assign(n, std::vector<Rat>(d));
        for (std::size_t i = 0; i < n; ++i) {
            p.x[i] = rng.small_rat();
            p.a[i][0] = Rat(1);  // a_i^al = delta_{al,1}
            for (std::size_t al = 0; al < d; ++al) {
                p.b[i][al] = rng.small_rat();
                if (p.b[i][al].is_zero()) p.b[i][al] = Rat(1, 3);
            }
        }
        try {
            p.validate();
            return p;
        } catch (const DegeneratePoint&) {
            continue;
        }
    }
    throw AvoidanceExhausted("special_point: no valid chart point found");
}

} // namespace quips
