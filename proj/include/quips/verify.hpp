#pragma once

#include "quips/structures.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace quips {

// Outcome of one identity check. A fail always carries a witness (offending
// monomial, point, or matrix entry).
struct CheckReport {
    enum class Status { Pass, Fail, Skipped };

    std::string name;
    Status status = Status::Pass;
    std::string witness;
    std::size_t samples = 0;
    double elapsed_ms = 0;
    std::string note;  // e.g. the Schwartz-Zippel context of a sampled pass

    bool passed() const { return status == Status::Pass; }
};

std::string status_str(CheckReport::Status s);

// Renders {"checks":[...], "model":..., "seed":...}; elapsed_ms is emitted
// as written in the reports (the CLI zeroes it unless asked, to keep reports
// byte-identical across runs).
std::string report_json(const std::vector<CheckReport>& checks, const std::string& model_echo,
                        std::uint64_t seed);

// Exact symbolic check [P,P] = phi_M.
CheckReport check_quasi_poisson(const std::string& name, const PolyMultiVector& P,
                                const VarSpace& vs, const ActionData& act);

// Exact GL-invariance: schouten(xi_M, P) = 0 for every basis xi.
CheckReport check_invariance(const std::string& name, const PolyMultiVector& P,
                             const VarSpace& vs, const ActionData& act);

// Exact pencil laws: [P0, psi_j] = 0 and [psi_j, psi_k] = 0.
CheckReport check_pencil(const std::string& name, const PolyMultiVector& P0,
                         const std::vector<PolyMultiVector>& psis, const VarSpace& vs);

// Sampled moment-map identity P#(d Phi_uv) = 1/2 sum_a (E_a Phi + Phi E_a)_uv (E^a)_M
// for every block entry, exact at each sampled point.
CheckReport check_moment_map(const std::string& name, const PolyMultiVector& P,
                             const std::vector<MatExpr>& phi, const VarSpace& vs,
                             const ActionData& act, const std::vector<AvoidFn>& avoid,
                             std::size_t n_points, std::uint64_t seed);

// Sampled check that psi#(d Phi_uv) = 0 (the pencil directions do not move
// the moment map).
CheckReport check_moment_annihilated(const std::string& name, const PolyMultiVector& psi,
                                     const std::vector<MatExpr>& phi, const VarSpace& vs,
                                     const std::vector<AvoidFn>& avoid, std::size_t n_points,
                                     std::uint64_t seed);

// Sampled correspondence P# o omega_flat = Id - 1/4 sum_a (E_a)_M (x)
// tr(E^a (Phi^-1 dPhi - dPhi Phi^-1)) as linear maps on the tangent space.
CheckReport check_correspondence(const std::string& name, const PolyMultiVector& P,
                                 const TraceForm& omega, const std::vector<MatExpr>& phi,
                                 const VarSpace& vs, const ActionData& act,
                                 const std::vector<AvoidFn>& avoid, std::size_t n_points,
                                 std::uint64_t seed);

// Sampled quasi-Hamiltonian axioms: (B1) d omega = Phi^* eta on all
// coordinate triples, (B2) omega_flat(xi_M) = 1/2 tr(xi (Phi^-1 dPhi + dPhi Phi^-1)),
// (B3) X -> (omega_flat(X), <X, Phi^* theta^L>) injective.
CheckReport check_qham_axioms(const std::string& name, const TraceForm& omega,
                              const std::vector<MatExpr>& phi, const VarSpace& vs,
                              const ActionData& act, const std::vector<AvoidFn>& avoid,
                              std::size_t n_points, std::uint64_t seed);

// Rank of the span of the given bivectors inside Lambda^2 T_x at a point.
std::size_t pencil_order_at(const std::vector<PolyMultiVector>& bivectors,
                            const std::vector<Rat>& point, std::size_t n_vars);

// Non-degeneracy: [P# on the covector basis | all basis xi_M] has full rank
// at the point.
CheckReport check_nondegenerate(const std::string& name, const PolyMultiVector& P,
                                const VarSpace& vs, const ActionData& act,
                                const std::vector<Rat>& point);

// Exact: psi_z applied to pairs of closed-path trace functions vanishes
// (star-shaped quivers act trivially on invariants).
CheckReport check_star_triviality(const std::string& name, const QuiverModel& m,
                                  const PolyMultiVector& psi,
                                  const std::vector<std::vector<std::size_t>>& words);

// Additive suite: exact symplectic inverse (P# o omega_flat = Id), exact
// Hamiltonian condition xi_M = P#(d(mu,xi)), closedness of omega(+omega_z)
// at sampled points, and pencil laws.
CheckReport check_additive_symplectic(const std::string& name, const AdditiveBundle& b,
                                      std::size_t n_points, std::uint64_t seed);
CheckReport check_additive_moment(const std::string& name, const AdditiveBundle& b);
CheckReport check_additive_closed(const std::string& name, const AdditiveBundle& b,
                                  std::size_t n_points, std::uint64_t seed);

// Deliberately corrupted inputs; each entry passes iff the underlying check
// fails with a witness.
std::vector<CheckReport> run_negative_controls(std::uint64_t seed);

// Deterministic sampled points against an avoid set; seed k gives point k.
std::vector<std::vector<Rat>> sample_points(std::size_t n_points, std::uint64_t seed,
                                            std::size_t n_vars,
                                            const std::vector<AvoidFn>& avoid);

// Index-sharded deterministic parallel map; results identical to the serial
// loop regardless of thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace quips
