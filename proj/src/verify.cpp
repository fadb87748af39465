#include "quips/verify.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

namespace quips {

namespace {

using Clock = std::chrono::steady_clock;

struct Timer {
    Clock::time_point t0 = Clock::now();
    double ms() const { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }
};

std::string point_str(const std::vector<Rat>& pt) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < pt.size(); ++i) {
        if (i) os << ",";
        os << pt[i].str();
    }
    os << ")";
    return os.str();
}

std::string sz_note(std::size_t n_points) {
    std::ostringstream os;
    os << "Schwartz-Zippel: low-degree rational identities tested at " << n_points
       << " independent points with entries from a 201x16-value grid";
    return os.str();
}

// Values and all-direction gradients of every moment-map block at a point.
struct PhiAtPoint {
    std::vector<RatMatrix> value;
    std::vector<Mat<Jet>> jets;
};

PhiAtPoint eval_phi(const std::vector<MatExpr>& phi, const VarSpace& vs,
                    const std::vector<Rat>& pt) {
    PhiAtPoint out;
    std::vector<Jet> jp = jet_point_all_directions(pt);
    for (const auto& block : phi) {
        Mat<Jet> jm = block->eval(vs, jp);
        RatMatrix vm(jm.rows(), jm.cols());
        for (std::size_t i = 0; i < jm.rows(); ++i)
            for (std::size_t j = 0; j < jm.cols(); ++j) vm(i, j) = jm(i, j).value();
        out.jets.push_back(std::move(jm));
        out.value.push_back(std::move(vm));
    }
    return out;
}

RatMatrix deriv_matrix(const Mat<Jet>& jm, std::size_t dir) {
    RatMatrix m(jm.rows(), jm.cols());
    for (std::size_t i = 0; i < jm.rows(); ++i)
        for (std::size_t j = 0; j < jm.cols(); ++j) m(i, j) = jm(i, j).deriv(dir);
    return m;
}

// Values of all basis vector fields at a point.
std::vector<std::vector<Rat>> actions_at(const ActionData& act, const std::vector<Rat>& pt,
                                         std::size_t n_vars) {
    std::vector<std::vector<Rat>> out(act.lie_dim());
    for (std::size_t k = 0; k < act.lie_dim(); ++k)
        out[k] = vector_field_at(act.basis_actions[k], pt, n_vars);
    return out;
}

// omega on the coordinate tangents: omat(j,k) = omega(e_j, e_k).
RatMatrix omega_matrix(const TraceForm& omega, const VarSpace& vs, const std::vector<Rat>& pt) {
    std::size_t n = vs.n_vars();
    RatMatrix m(n, n);
    std::vector<std::vector<Rat>> units(n, std::vector<Rat>(n, Rat(0)));
    for (std::size_t j = 0; j < n; ++j) units[j][j] = Rat(1);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
            Rat v = omega.eval(vs, pt, {units[j], units[k]});
            m(j, k) = v;
            m(k, j) = -v;
        }
    return m;
}

} // namespace

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t nthreads = std::min<std::size_t>(hw ? hw : 1, n);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

std::vector<std::vector<Rat>> sample_points(std::size_t n_points, std::uint64_t seed,
                                            std::size_t n_vars,
                                            const std::vector<AvoidFn>& avoid) {
    std::vector<std::vector<Rat>> pts;
    pts.reserve(n_points);
    for (std::size_t k = 0; k < n_points; ++k)
        pts.push_back(sample_point(seed + 0x51ab5eedull * (k + 1), n_vars, avoid));
    return pts;
}

std::string status_str(CheckReport::Status s) {
    switch (s) {
        case CheckReport::Status::Pass: return "pass";
        case CheckReport::Status::Fail: return "fail";
        case CheckReport::Status::Skipped: return "skipped";
    }
    return "?";
}

std::string report_json(const std::vector<CheckReport>& checks, const std::string& model_echo,
                        std::uint64_t seed) {
    nlohmann::json j;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json e;
        e["name"] = c.name;
        e["status"] = status_str(c.status);
        e["witness"] = c.witness;
        e["samples"] = c.samples;
        e["elapsed_ms"] = c.elapsed_ms;
        if (!c.note.empty()) e["note"] = c.note;
        j["checks"].push_back(std::move(e));
    }
    if (!model_echo.empty()) {
        nlohmann::json echo = nlohmann::json::parse(model_echo, nullptr, false);
        j["model"] = echo.is_discarded() ? nlohmann::json(model_echo) : echo;
    }
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

CheckReport check_quasi_poisson(const std::string& name, const PolyMultiVector& P,
                                const VarSpace& vs, const ActionData& act) {
    Timer t;
    CheckReport r;
    r.name = name;
    PolyMultiVector residual = schouten(P, P) - cartan_from_actions(act);
    if (!residual.is_zero()) {
        r.status = CheckReport::Status::Fail;
        r.witness = "[P,P]-phi_M has term " +
                    residual.terms().begin()->second.str(
                        [&vs](std::uint32_t v) { return vs.var_name(v); });
    }
    r.note = "exact symbolic";
    r.elapsed_ms = t.ms();
    return r;
}

CheckReport check_invariance(const std::string& name, const PolyMultiVector& P,
                             const VarSpace& vs, const ActionData& act) {
    Timer t;
    CheckReport r;
    r.name = name;
    for (std::size_t k = 0; k < act.lie_dim(); ++k) {
        PolyMultiVector br = schouten(act.basis_actions[k], P);
        if (!br.is_zero()) {
            auto e = act.elem(k);
            r.status = CheckReport::Status::Fail;
            r.witness = "[xi_M, P] != 0 for basis E(" + std::to_string(e.factor) + ";" +
                        std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) + "), term " +
                        br.terms().begin()->second.str(
                            [&vs](std::uint32_t v) { return vs.var_name(v); });
            break;
        }
    }
    r.note = "exact symbolic";
    r.elapsed_ms = t.ms();
    return r;
}

CheckReport check_pencil(const std::string& name, const PolyMultiVector& P0,
                         const std::vector<PolyMultiVector>& psis, const VarSpace& vs) {
    Timer t;
    CheckReport r;
    r.name = name;
    auto fail_with = [&](const PolyMultiVector& res, const std::string& what) {
        r.status = CheckReport::Status::Fail;
        r.witness = what + " has term " +
                    res.terms().begin()->second.str(
                        [&vs](std::uint32_t v) { return vs.var_name(v); });
    };
    for (std::size_t j = 0; j < psis.size() && r.passed(); ++j) {
        PolyMultiVector br = schouten(P0, psis[j]);
        if (!br.is_zero()) fail_with(br, "[P0,psi_" + std::to_string(j) + "]");
    }
    for (std::size_t j = 0; j < psis.size() && r.passed(); ++j)
        for (std::size_t k = j; k < psis.size() && r.passed(); ++k) {
            PolyMultiVector br = schouten(psis[j], psis[k]);
            if (!br.is_zero())
                fail_with(br, "[psi_" + std::to_string(j) + ",psi_" + std::to_string(k) + "]");
        }
    r.note = "exact symbolic; vanishing brackets certify every linear combination";
    r.elapsed_ms = t.ms();
    return r;
}

CheckReport check_moment_map(const std::string& name, const PolyMultiVector& P,
                             const std::vector<MatExpr>& phi, const VarSpace& vs,
                             const ActionData& act, const std::vector<AvoidFn>& avoid,
                             std::size_t n_points, std::uint64_t seed) {
    Timer t;
    CheckReport r;
    r.name = name;
    r.samples = n_points;
    std::size_t n = vs.n_vars();
    auto pts = sample_points(n_points, seed, n, avoid);
    std::vector<std::string> fails(n_points);
    parallel_for(n_points, [&](std::size_t pi) {
        const auto& pt = pts[pi];
        RatMatrix pmat = bivector_matrix(P, pt, n);
        auto actv = actions_at(act, pt, n);
        PhiAtPoint ph = eval_phi(phi, vs, pt);
        for (std::size_t s = 0; s < phi.size(); ++s) {
            std::size_t ns = ph.value[s].rows();
            for (std::size_t u = 0; u < ns; ++u)
                for (std::size_t v = 0; v < ns; ++v) {
                    std::vector<Rat> lhs(n, Rat(0));
                    const Jet& entry = ph.jets[s](u, v);
                    for (std::size_t k = 0; k < n; ++k) {
                        const Rat& g = entry.deriv(k);
                        if (g.is_zero()) continue;
                        for (std::size_t l = 0; l < n; ++l)
                            if (!pmat(k, l).is_zero()) lhs[l] += g * pmat(k, l);
                    }
                    // RHS = 1/2 sum_{(i,j)} (E_ij Phi + Phi E_ij)_{uv} (E_ji)_M
                    std::vector<Rat> rhs(n, Rat(0));
                    for (std::size_t i = 0; i < ns; ++i)
                        for (std::size_t j = 0; j < ns; ++j) {
                            Rat c(0);
                            if (u == i) c += ph.value[s](j, v);
                            if (v == j) c += ph.value[s](u, i);
                            if (c.is_zero()) continue;
                            c *= Rat(1, 2);
                            const auto& f = actv[act.index(s, j, i)];
                            for (std::size_t l = 0; l < n; ++l)
                                if (!f[l].is_zero()) rhs[l] += c * f[l];
                        }
                    for (std::size_t l = 0; l < n; ++l)
                        if (lhs[l] != rhs[l]) {
                            fails[pi] = "block " + std::to_string(s) + " entry (" +
                                        std::to_string(u + 1) + "," + std::to_string(v + 1) +
                                        ") component " + vs.var_name(l) + " at point " +
                                        point_str(pt);
                            return;
                        }
                }
        }
    });
    for (const auto& f : fails)
        if (!f.empty()) {
            r.status = CheckReport::Status::Fail;
            r.witness = f;
            break;
        }
    r.note = sz_note(n_points);
    r.elapsed_ms = t.ms();
    return r;
}

CheckReport check_moment_annihilated(const std::string& name, const PolyMultiVector& psi,
                                     const std::vector<MatExpr>& phi, const VarSpace& vs,
                                     const std::vector<AvoidFn>& avoid, std::size_t n_points,
                                     std::uint64_t seed) {
    Timer t;
    CheckReport r;
    r.name = name;
    r.samples = n_points;
    std::size_t n = vs.n_vars();
    auto pts = sample_points(n_points, seed, n, avoid);
    std::vector<std::string> fails(n_points);
    parallel_for(n_points, [&](std::size_t pi) {
        const auto& pt = pts[pi];
        RatMatrix pmat = bivector_matrix(psi, pt, n);
        PhiAtPoint ph = eval_phi(phi, vs, pt);
        for (std::size_t s = 0; s < phi.size(); ++s) {
            std::size_t ns = ph.value[s].rows();
            for (std::size_t u = 0; u < ns; ++u)
                for (std::size_t v = 0; v < ns; ++v) {
                    const Jet& entry = ph.jets[s](u, v);
                    for (std::size_t l = 0; l < n; ++l) {
                        Rat acc(0);
                        for (std::size_t k = 0; k < n; ++k) {
                            const Rat& g = entry.deriv(k);
                            if (!g.is_zero()) acc += g * pmat(k, l);
                        }
                        if (!acc.is_zero()) {
                            fails[pi] = "psi#(dPhi) != 0 at block " + std::to_string(s) +
                                        " entry (" + std::to_string(u + 1) + "," +
                                        std::to_string(v + 1) + ") at point " + point_str(pt);
                            return;
                        }
                    }
                }
        }
    });
    for (const auto& f : fails)
        if (!f.empty()) {
            r.status = CheckReport::Status::Fail;
            r.witness = f;
            break;
        }
    r.note = sz_note(n_points);
    r.elapsed_ms = t.ms();
    return r;
}

CheckReport check_correspondence(const std::string& name, const PolyMultiVector& P,
                                 const TraceForm& omega, const std::vector<MatExpr>& phi,
                                 const VarSpace& vs, const ActionData& act,
                                 const std::vector<AvoidFn>& avoid, std::size_t n_points,
                                 std::uint64_t seed) {
    Timer t;
    CheckReport r;
    r.name = name;
    r.samples = n_points;
    std::size_t n = vs.n_vars();
    auto pts = sample_points(n_points, seed, n, avoid);
    std::vector<std::string> fails(n_points);
    parallel_for(n_points, [&](std::size_t pi) {
        const auto& pt = pts[pi];
        RatMatrix pmat = bivector_matrix(P, pt, n);
        RatMatrix omat = omega_matrix(omega, vs, pt);
        auto actv = actions_at(act, pt, n);
        PhiAtPoint ph = eval_phi(phi, vs, pt);
        std::vector<RatMatrix> phinv;
        phinv.reserve(phi.size());
        for (const auto& v : ph.value) phinv.push_back(v.inverse());

        for (std::size_t j = 0; j < n; ++j) {
            std::vector<Rat> lhs(n, Rat(0));
            for (std::size_t k = 0; k < n; ++k) {
                const Rat& a = omat(j, k);
                if (a.is_zero()) continue;
                for (std::size_t l = 0; l < n; ++l) lhs[l] += a * pmat(k, l);
            }
            std::vector<Rat> rhs(n, Rat(0));
            rhs[j] = Rat(1);
            for (std::size_t s = 0; s < phi.size(); ++s) {
                std::size_t ns = ph.value[s].rows();
                if (ns == 0) continue;
                RatMatrix dphi = deriv_matrix(ph.jets[s], j);
                RatMatrix mtx = phinv[s] * dphi - dphi * phinv[s];
                for (std::size_t i = 0; i < ns; ++i)
                    for (std::size_t jj = 0; jj < ns; ++jj) {
                        const Rat& c = mtx(i, jj);  // tr(E_{jj,i} mtx) pairs E_{i,jj}
                        if (c.is_zero()) continue;
                        const auto& f = actv[act.index(s, i, jj)];
                        Rat w = Rat(-1, 4) * c;
                        for (std::size_t l = 0; l < n; ++l)
                            if (!f[l].is_zero()) rhs[l] += w * f[l];
                    }
            }
            for (std::size_t l = 0; l < n; ++l)
                if (lhs[l] != rhs[l]) {
                    fails[pi] = "P# o omega_flat mismatch in column " + vs.var_name(j) +
                                " component " + vs.var_name(l) + " at point " + point_str(pt);
                    return;
                }
        }
    });
    for (const auto& f : fails)
        if (!f.empty()) {
            r.status = CheckReport::Status::Fail;
            r.witness = f;
            break;
        }
    r.note = sz_note(n_points);
    r.elapsed_ms = t.ms();
    return r;
}

CheckReport check_qham_axioms(const std::string& name, const TraceForm& omega,
                              const std::vector<MatExpr>& phi, const VarSpace& vs,
                              const ActionData& act, const std::vector<AvoidFn>& avoid,
                              std::size_t n_points, std::uint64_t seed) {
    Timer t;
    CheckReport r;
    r.name = name;
    r.samples = n_points;
    std::size_t n = vs.n_vars();
    auto pts = sample_points(n_points, seed, n, avoid);

    // Phi^* eta = 1/6 tr(dPhi Phi^-1 dPhi Phi^-1 dPhi Phi^-1), per block.
    TraceForm phieta(3);
    for (const auto& block : phi) {
        if (block->rows == 0) continue;
        MatExpr inv = mx_inv(block);
        phieta.add_single(Rat(1, 6),
                          {TraceFactor{block, true}, TraceFactor{inv, false},
                           TraceFactor{block, true}, TraceFactor{inv, false},
                           TraceFactor{block, true}, TraceFactor{inv, false}});
    }

    std::vector<std::string> fails(n_points);
    parallel_for(n_points, [&](std::size_t pi) {
        const auto& pt = pts[pi];
        std::vector<std::vector<Rat>> units(n, std::vector<Rat>(n, Rat(0)));
        for (std::size_t j = 0; j < n; ++j) units[j][j] = Rat(1);

        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                for (std::size_t c = b + 1; c < n; ++c) {
                    std::vector<std::vector<Rat>> tans{units[a], units[b], units[c]};
                    Rat lhs = omega.exterior_derivative_at(vs, pt, tans);
                    Rat rhs = phieta.eval(vs, pt, tans);
                    if (lhs != rhs) {
                        fails[pi] = "(B1) d(omega) != Phi*eta on triple (" + vs.var_name(a) +
                                    "," + vs.var_name(b) + "," + vs.var_name(c) + ") at point " +
                                    point_str(pt);
                        return;
                    }
                }

        auto actv = actions_at(act, pt, n);
        PhiAtPoint ph = eval_phi(phi, vs, pt);
        std::vector<RatMatrix> phinv;
        for (const auto& v : ph.value) phinv.push_back(v.inverse());
        RatMatrix omat = omega_matrix(omega, vs, pt);
        for (std::size_t kk = 0; kk < act.lie_dim(); ++kk) {
            auto e = act.elem(kk);
            const auto& xi_at = actv[kk];
            for (std::size_t k = 0; k < n; ++k) {
                Rat lhs(0);
                for (std::size_t j = 0; j < n; ++j)
                    if (!xi_at[j].is_zero()) lhs += xi_at[j] * omat(j, k);
                RatMatrix dphi = deriv_matrix(ph.jets[e.factor], k);
                RatMatrix m = phinv[e.factor] * dphi + dphi * phinv[e.factor];
                Rat rhs = Rat(1, 2) * m(e.j, e.i);  // tr(E_ij m) = m(j,i)
                if (lhs != rhs) {
                    fails[pi] = "(B2) fails for basis E(" + std::to_string(e.factor) + ";" +
                                std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) +
                                ") direction " + vs.var_name(k) + " at point " + point_str(pt);
                    return;
                }
            }
        }

        std::size_t gdim = act.lie_dim();
        RatMatrix big(n + gdim, n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) big(k, j) = omat(j, k);
        std::size_t row = n;
        for (std::size_t s = 0; s < phi.size(); ++s) {
            std::size_t ns = ph.value[s].rows();
            std::vector<RatMatrix> pre(n);
            for (std::size_t j = 0; j < n; ++j)
                pre[j] = phinv[s] * deriv_matrix(ph.jets[s], j);
            for (std::size_t i = 0; i < ns; ++i)
                for (std::size_t jj = 0; jj < ns; ++jj) {
                    for (std::size_t j = 0; j < n; ++j) big(row, j) = pre[j](i, jj);
                    ++row;
                }
        }
        if (rank(big) != n) {
            fails[pi] = "(B3) kernel is nonzero at point " + point_str(pt);
            return;
        }
    });
    for (const auto& f : fails)
        if (!f.empty()) {
            r.status = CheckReport::Status::Fail;
            r.witness = f;
            break;
        }
    r.note = sz_note(n_points);
    r.elapsed_ms = t.ms();
    return r;
}

std::size_t pencil_order_at(const std::vector<PolyMultiVector>& bivectors,
                            const std::vector<Rat>& point, std::size_t n_vars) {
    std::size_t ncols = n_vars * (n_vars - 1) / 2;
    RatMatrix m(bivectors.size(), ncols);
    for (std::size_t b = 0; b < bivectors.size(); ++b) {
        RatMatrix pm = bivector_matrix(bivectors[b], point, n_vars);
        std::size_t c = 0;
        for (std::size_t i = 0; i < n_vars; ++i)
            for (std::size_t j = i + 1; j < n_vars; ++j) m(b, c++) = pm(i, j);
    }
    return rank(m);
}

CheckReport check_nondegenerate(const std::string& name, const PolyMultiVector& P,
                                const VarSpace& vs, const ActionData& act,
                                const std::vector<Rat>& point) {
    Timer t;
    CheckReport r;
    r.name = name;
    r.samples = 1;
    std::size_t n = vs.n_vars();
    RatMatrix pmat = bivector_matrix(P, point, n);
    std::size_t g = act.lie_dim();
    RatMatrix big(n, n + g);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) big(l, k) = pmat(k, l);
    for (std::size_t a = 0; a < g; ++a) {
        auto f = vector_field_at(act.basis_actions[a], point, n);
        for (std::size_t l = 0; l < n; ++l) big(l, n + a) = f[l];
    }
    if (rank(big) != n) {
        r.status = CheckReport::Status::Fail;
        r.witness = "map (alpha,xi) -> P#alpha + xi_M not surjective at " + point_str(point);
    }
    r.elapsed_ms = t.ms();
    return r;
}

CheckReport check_star_triviality(const std::string& name, const QuiverModel& m,
                                  const PolyMultiVector& psi,
                                  const std::vector<std::vector<std::size_t>>& words) {
    Timer t;
    CheckReport r;
    r.name = name;
    if (!is_star_shaped(m.quiver())) {
        r.status = CheckReport::Status::Skipped;
        r.note = "model is not star-shaped";
        r.elapsed_ms = t.ms();
        return r;
    }
    std::vector<Poly> traces;
    traces.reserve(words.size());
    for (const auto& w : words) traces.push_back(trace_word(m, w));
    for (std::size_t i = 0; i < traces.size() && r.passed(); ++i)
        for (std::size_t j = i; j < traces.size(); ++j) {
            Poly br = poly_bracket(psi, traces[i], traces[j]);
            if (!br.is_zero()) {
                r.status = CheckReport::Status::Fail;
                r.witness = "psi(tr w" + std::to_string(i) + ", tr w" + std::to_string(j) +
                            ") != 0, term " +
                            witness_monomial(br, [&](std::uint32_t v) {
                                return m.space().var_name(v);
                            });
                break;
            }
        }
    r.note = "exact symbolic on " + std::to_string(words.size()) + " closed words";
    r.elapsed_ms = t.ms();
    return r;
}

CheckReport check_additive_symplectic(const std::string& name, const AdditiveBundle& b,
                                      std::size_t n_points, std::uint64_t seed) {
    Timer t;
    CheckReport r;
    r.name = name;
    r.samples = n_points;
    const VarSpace& vs = b.model.space();
    std::size_t n = vs.n_vars();
    auto pts = sample_points(n_points, seed, n, {});
    for (const auto& pt : pts) {
        RatMatrix pmat = bivector_matrix(b.P, pt, n);
        RatMatrix omat = omega_matrix(b.omega, vs, pt);
        for (std::size_t j = 0; j < n && r.passed(); ++j)
            for (std::size_t l = 0; l < n; ++l) {
                Rat acc(0);
                for (std::size_t k = 0; k < n; ++k) acc += omat(j, k) * pmat(k, l);
                if (acc != (j == l ? Rat(1) : Rat(0))) {
                    r.status = CheckReport::Status::Fail;
                    r.witness = "P# o omega_flat != Id at entry (" + vs.var_name(j) + "," +
                                vs.var_name(l) + ") at point " + point_str(pt);
                    break;
                }
            }
        if (!r.passed()) break;
    }
    r.note = "symplectic inverse pair, checked entrywise";
    r.elapsed_ms = t.ms();
    return r;
}

CheckReport check_additive_moment(const std::string& name, const AdditiveBundle& b) {
    Timer t;
    CheckReport r;
    r.name = name;
    const QuiverModel& m = b.model;
    for (std::size_t k = 0; k < b.actions.lie_dim() && r.passed(); ++k) {
        auto e = b.actions.elem(k);
        Poly f = b.mu[e.factor](e.j, e.i);  // tr(mu E_ij) = (mu)_{ji}
        std::vector<Poly> alpha(m.n_vars());
        for (std::uint32_t v = 0; v < m.n_vars(); ++v) alpha[v] = f.partial(v);
        PolyMultiVector lhs = sharp(b.P, alpha);
        if (!(lhs == b.actions.basis_actions[k])) {
            r.status = CheckReport::Status::Fail;
            r.witness = "xi_M != P#(d(mu,xi)) for basis E(" + std::to_string(e.factor) + ";" +
                        std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) + ")";
        }
    }
    r.note = "exact symbolic";
    r.elapsed_ms = t.ms();
    return r;
}

CheckReport check_additive_closed(const std::string& name, const AdditiveBundle& b,
                                  std::size_t n_points, std::uint64_t seed) {
    Timer t;
    CheckReport r;
    r.name = name;
    r.samples = n_points;
    const VarSpace& vs = b.model.space();
    std::size_t n = vs.n_vars();
    if (n < 3) {
        r.status = CheckReport::Status::Skipped;
        r.note = "fewer than 3 coordinates";
        r.elapsed_ms = t.ms();
        return r;
    }
    auto pts = sample_points(n_points, seed, n, {});
    TraceForm total = b.omega;
    total += b.omega_z;
    std::vector<std::vector<Rat>> units(n, std::vector<Rat>(n, Rat(0)));
    for (std::size_t j = 0; j < n; ++j) units[j][j] = Rat(1);
    for (const auto& pt : pts) {
        for (std::size_t a = 0; a < n && r.passed(); ++a)
            for (std::size_t bb = a + 1; bb < n && r.passed(); ++bb)
                for (std::size_t c = bb + 1; c < n; ++c) {
                    Rat v = total.exterior_derivative_at(vs, pt, {units[a], units[bb], units[c]});
                    if (!v.is_zero()) {
                        r.status = CheckReport::Status::Fail;
                        r.witness = "d(omega+omega_z) != 0 on (" + vs.var_name(a) + "," +
                                    vs.var_name(bb) + "," + vs.var_name(c) + ") at " +
                                    point_str(pt);
                        break;
                    }
                }
        if (!r.passed()) break;
    }
    r.note = sz_note(n_points);
    r.elapsed_ms = t.ms();
    return r;
}

std::vector<CheckReport> run_negative_controls(std::uint64_t seed) {
    std::vector<CheckReport> out;
    auto expect_fail = [](const std::string& name, const CheckReport& inner) {
        CheckReport r;
        r.name = name;
        r.samples = inner.samples;
        r.elapsed_ms = inner.elapsed_ms;
        if (inner.status == CheckReport::Status::Fail && !inner.witness.empty()) {
            r.witness = inner.witness;
            r.note = "corrupted input failed as required";
        } else {
            r.status = CheckReport::Status::Fail;
            r.witness = "corrupted input passed or returned no witness";
        }
        return r;
    };

    {
        // P + A_x(1) ^ xi_M for non-central xi breaks [P,P] = phi_M.
        QuiverModel m = one_loop_model(2, Rat(1));
        StructureBundle b = build_vdb(m);
        PolyMultiVector bad =
            b.P + wedge(cyclic_action_field(m, 0), infinitesimal_action_basis(m, 0, 0, 1));
        out.push_back(expect_fail(
            "control: corrupted bivector fails the quasi-Poisson axiom",
            check_quasi_poisson("inner", bad, m.space(), b.actions)));
    }
    {
        // Phi^2 is not a moment map for P.
        QuiverModel m = one_arrow_model(2, 1, Rat(1));
        StructureBundle b = build_vdb(m);
        std::vector<MatExpr> phisq;
        for (const auto& p : b.phi) phisq.push_back(mx_prod({p, p}));
        out.push_back(expect_fail(
            "control: squared moment map fails the moment identity",
            check_moment_map("inner", b.P, phisq, m.space(), b.actions, b.avoid, 4, seed)));
    }
    return out;
}

} // namespace quips
