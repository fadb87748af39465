#pragma once

#include "quips/matrix.hpp"
#include "quips/structures.hpp"
#include "quips/verify.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace quips {

// A point of the local chart: n particle positions x_i and spin variables
// a_i^al, b_i^al with sum_al a_i^al = 1, subject to the regularity conditions
// x_i != x_j, x_i != q x_j, det Z_al != 0.
struct SpinRSPoint {
    std::size_t n = 0, d = 0;
    Rat q;
    std::vector<Rat> x;                  // n
    std::vector<std::vector<Rat>> a, b;  // n x d

    void validate() const;  // throws DegeneratePoint
};

// Local coordinate layout: x_0..x_{n-1}, then a_i^al (i major), then b_i^al.
struct SpinLayout {
    std::size_t n = 0, d = 0;
    std::size_t size() const { return n + 2 * n * d; }
    std::size_t xv(std::size_t i) const { return i; }
    std::size_t av(std::size_t i, std::size_t al) const { return n + i * d + al; }
    std::size_t bv(std::size_t i, std::size_t al) const { return n + n * d + i * d + al; }
    std::string name(std::size_t v) const;
};

// z0 {.,.}_0 + psi_z^loc; z antisymmetric d x d.
struct SpinBracketTable {
    Rat z0;
    RatMatrix z;  // d x d, antisymmetric

    Rat zval(std::size_t al, std::size_t be) const { return z(al, be); }
    static SpinBracketTable make(Rat z0, std::size_t d,
                                 const std::vector<std::tuple<std::size_t, std::size_t, Rat>>& entries);
};

// Coordinates over a scalar ring (Rat for values, Jet for derivatives of the
// structure functions).
template <class T>
struct SpinCoords {
    std::size_t n = 0, d = 0;
    T q;
    std::vector<T> x;
    std::vector<std::vector<T>> a, b;
};

SpinCoords<Rat> coords_of(const SpinRSPoint& p);
// All-direction jet coordinates (one slot per local coordinate).
SpinCoords<Jet> jet_coords_of(const SpinRSPoint& p);

// Z_ij = q f_ij / (x_i/x_j - q) with f_ij = sum_be a_i^be b_j^be.
template <class T>
T spin_z_entry(const SpinCoords<T>& c, std::size_t i, std::size_t j);

RatMatrix z_matrix(const SpinRSPoint& p);
// Z_al = Z + sum_{be <= al} A_be B_be (al = 0 gives Z itself).
RatMatrix calz_matrix(const SpinRSPoint& p, std::size_t al);

// Generator brackets, extended to all coordinate pairs of the layout.
template <class T>
T bracket0_gen(const SpinCoords<T>& c, const SpinLayout& lay, std::size_t u, std::size_t v);

// G_z(i,j;al,be) = z_ab + sum_mu (z_{mu al} a_j^mu - z_{mu be} a_i^mu)
//               + sum_{mu nu} z_{mu nu} a_i^mu a_j^nu.
template <class T>
T g_factor(const SpinCoords<T>& c, const RatMatrix& z, std::size_t i, std::size_t j,
           std::size_t al, std::size_t be);

template <class T>
T psi_loc_gen(const SpinCoords<T>& c, const RatMatrix& z, const SpinLayout& lay, std::size_t u,
              std::size_t v);

// Arutyunov-Olivucci brackets; sign = -1 for the minus bracket (partial sums
// run over gamma < beta), sign = +1 for the plus bracket (gamma > beta).
template <class T>
T bracket_ao_gen(const SpinCoords<T>& c, int sign, const SpinLayout& lay, std::size_t u,
                 std::size_t v);

// Full pencil structure function z0 {u,v}_0 + psi_z(u,v).
Rat bracket_full(const SpinRSPoint& p, const SpinBracketTable& t, std::size_t u, std::size_t v);

// Structure table and its jet version (value + all first derivatives) at p.
RatMatrix bracket_table(const SpinRSPoint& p, const SpinBracketTable& t);
Mat<Jet> bracket_table_jets(const SpinRSPoint& p, const SpinBracketTable& t);

// Jacobiator sum_t (pi^{tu} d_t pi^{vw} + cyc) on the given coordinate
// triples (all triples when empty); exact at the point.
CheckReport check_jacobi_local(const SpinRSPoint& p, const SpinBracketTable& t,
                               const std::vector<std::array<std::size_t, 3>>& triples = {});

// Rank of z -> (psi_z^loc structure table at p) over the d(d-1)/2 z-basis.
std::size_t pencil_rank_local(const SpinRSPoint& p);

// Velocities of (x, a, b) under d/dt = {z0^-1 h, -} with h = 2 sum_i f_ii.
struct SpinVelocity {
    std::vector<Rat> x;
    std::vector<std::vector<Rat>> a, b;
};
SpinVelocity hamiltonian_field(const SpinRSPoint& p, const SpinBracketTable& t);
// Closed-form right-hand side: dx_i = 2 f_ii x_i, da_i^al = sum_{k!=i}
// V_ik f_ik (a_k^al - a_i^al), db_i^al = sum_{k!=i} (V_ik f_ik b_i^al -
// V_ki f_ki b_k^al).
SpinVelocity trig_rhs(const SpinRSPoint& p);

// Fixed-step RK4 flow of the equations of motion in double precision, with
// conservation tracking of tr(Z^k), tr(Z_al^k) (k <= 3) and the spin
// constraint sum_al a_i^al - 1.
struct FlowState {
    double t = 0;
    std::vector<double> x;
    std::vector<std::vector<double>> a, b;
};

struct FlowResult {
    std::vector<FlowState> trajectory;  // includes t = 0 and t = t_end
    std::vector<std::string> conserved_names;
    std::vector<double> initial_values;
    std::vector<double> max_rel_drift;  // per conserved quantity
    double constraint_drift = 0;        // max |sum_al a_i^al - 1|
};

FlowResult flow(const SpinRSPoint& p0, double t_end, double dt, double guard_tol = 1e-10);

// Poisson algebra checks of the conserved families at a point:
//  (i) full-bracket commutation of tr(Z_al^k), k <= k_max;
//  (ii) psi-part of {t_{k;ge}, t_{l;ab}} = (z_ga + z_eb - z_gb - z_ea) t t;
//  (iii) {tr Z^k, t_{l;ab}}_0 = 0 (the center condition).
CheckReport check_integrability_algebras(const SpinRSPoint& p, const SpinBracketTable& t,
                                         std::size_t k_max);

// Deterministic sampling of valid chart points.
SpinRSPoint sample_hreg(std::uint64_t seed, std::size_t n, std::size_t d, const Rat& q);

// Special point a_i^al = delta_{al,1} used by the rank statements.
SpinRSPoint special_point(std::uint64_t seed, std::size_t n, std::size_t d, const Rat& q);

} // namespace quips
