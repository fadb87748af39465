#include "quips/structures.hpp"

#include <json.hpp>

#include <algorithm>

namespace quips {

void PencilParams::set(std::size_t a, std::size_t b, Rat v) {
    if (a == b) throw BadParams("pencil parameter needs two distinct arrows");
    if (a < b) z_[{a, b}] = std::move(v);
    else z_[{b, a}] = -v;
}

Rat PencilParams::base(std::size_t a, std::size_t b) const {
    if (a == b) return Rat(0);
    auto it = z_.find(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    if (it == z_.end()) return Rat(0);
    return a < b ? it->second : -it->second;
}

Rat PencilParams::extended(const Quiver& q, std::size_t a, std::size_t b) const {
    std::size_t oa = q.arrows.at(a).epsilon == +1 ? a : q.arrows.at(a).star;
    std::size_t ob = q.arrows.at(b).epsilon == +1 ? b : q.arrows.at(b).star;
    return base(oa, ob);
}

PencilParams pencil_params_from_json(const QuiverModel& m, const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    PencilParams z;
    for (const auto& e : j) {
        std::size_t a = m.quiver().arrow_index(e.at("a").get<std::string>());
        std::size_t b = m.quiver().arrow_index(e.at("b").get<std::string>());
        z.set(a, b, Rat::from_string(e.at("value").get<std::string>()));
    }
    return z;
}

namespace {

// det of a coordinate-space matrix expression, for the avoid set.
AvoidFn det_avoid(const VarSpace& vs, MatExpr e) {
    return [&vs, e = std::move(e)](const std::vector<Rat>& pt) -> Rat {
        try {
            return det(e->eval<Rat>(vs, pt));
        } catch (const SingularEvaluation&) {
            return Rat(0);
        }
    };
}

} // namespace

StructureBundle build_vdb(const QuiverModel& m) {
    StructureBundle b;
    b.model = m;
    const QuiverModel& mm = b.model;
    const VarSpace& vs = mm.space();
    const auto& arrows = mm.quiver().arrows;
    std::size_t n_arr = arrows.size();

    // P = 1/2 sum_a eps(a) tr[(gamma_a Id + X_{a*} X_a) dd_a ^ dd_{a*}]
    //   - 1/2 sum_{a<b, t(a)=t(b)} tr[(dd_{a*} X_{a*} - X_a dd_a) ^ (dd_{b*} X_{b*} - X_b dd_b)]
    PolyMultiVector P(2);
    std::vector<MatVec> gauge(n_arr);  // dd_{a*} X_{a*} - X_a dd_a, at vertex t(a)
    for (std::size_t a = 0; a < n_arr; ++a) {
        std::size_t as = arrows[a].star;
        MatVec da = partial_matvec(vs, mm.block(a));
        MatVec das = partial_matvec(vs, mm.block(as));
        MatVec xa = coord_matvec(vs, mm.block(a));
        MatVec xas = coord_matvec(vs, mm.block(as));

        std::size_t nh = mm.n_head(a);
        MatVec coeff = MatVec::from_polys(coord_polys(vs, mm.block(as))) * xa;  // X_{a*} X_a
        for (std::size_t i = 0; i < nh; ++i)
            coeff(i, i) += PolyMultiVector(Poly(arrows[a].gamma));
        P += (coeff * (da * das)).trace().scaled(Rat(arrows[a].epsilon, 2));

        gauge[a] = das * xas - xa * da;
    }
    for (std::size_t a = 0; a < n_arr; ++a)
        for (std::size_t c = a + 1; c < n_arr; ++c) {
            if (arrows[a].tail != arrows[c].tail) continue;  // cross-vertex traces vanish
            P -= (gauge[a] * gauge[c]).trace().scaled(Rat(1, 2));
        }
    b.P = std::move(P);

    // moment-map factors and per-vertex ordered products
    b.factors.resize(n_arr);
    for (std::size_t a = 0; a < n_arr; ++a) {
        std::size_t as = arrows[a].star;
        b.factors[a] = mx_affine(arrows[a].gamma,
                                 {mx_coord(vs, mm.block(a)), mx_coord(vs, mm.block(as))});
    }
    std::size_t nv = mm.quiver().vertices.size();
    b.phi.resize(nv);
    std::vector<std::vector<MatExpr>> partial(nv);  // factors of Phi_a at each vertex, in order
    std::vector<std::vector<MatExpr>> full(nv);
    for (std::size_t a = 0; a < n_arr; ++a) {
        std::size_t s = arrows[a].tail;
        MatExpr f = arrows[a].epsilon == +1 ? b.factors[a] : mx_inv(b.factors[a]);
        full[s].push_back(f);
    }
    for (std::size_t s = 0; s < nv; ++s) {
        if (mm.dims()[s] == 0) { b.phi[s] = mx_id(0); continue; }
        b.phi[s] = full[s].empty() ? mx_id(mm.dims()[s]) : mx_prod(full[s]);
    }

    // omega = -1/2 sum_a eps(a) tr[(gamma_a Id + X_a X_{a*})^-1 dX_a ^ dX_{a*}]
    //         -1/2 sum_a tr[Phi_a^-1 dPhi_a ^ d(F_a^eps) F_a^-eps]
    TraceForm omega(2);
    std::vector<std::vector<MatExpr>> sofar(nv);
    for (std::size_t a = 0; a < n_arr; ++a) {
        std::size_t as = arrows[a].star;
        std::size_t s = arrows[a].tail;
        MatExpr fa = b.factors[a];
        omega.add_single(Rat(-arrows[a].epsilon, 2),
                         {TraceFactor{mx_inv(fa), false},
                          TraceFactor{mx_coord(vs, mm.block(a)), true},
                          TraceFactor{mx_coord(vs, mm.block(as)), true}});
        if (!sofar[s].empty()) {
            MatExpr phia = mx_prod(sofar[s]);
            MatExpr ga = arrows[a].epsilon == +1 ? fa : mx_inv(fa);
            MatExpr ha = arrows[a].epsilon == +1 ? mx_inv(fa) : fa;
            omega.add_single(Rat(-1, 2), {TraceFactor{mx_inv(phia), false},
                                          TraceFactor{phia, true},
                                          TraceFactor{ga, true},
                                          TraceFactor{ha, false}});
        }
        sofar[s].push_back(arrows[a].epsilon == +1 ? fa : mx_inv(fa));
    }
    b.omega = std::move(omega);

    for (std::size_t a = 0; a < n_arr; ++a)
        b.avoid.push_back(det_avoid(vs, b.factors[a]));

    b.actions = action_data(mm);
    return b;
}

PencilPair build_pencil(const QuiverModel& m, const PencilParams& z) {
    PencilPair out;
    out.psi = PolyMultiVector(2);
    out.varpi = TraceForm(2);
    auto orig = m.quiver().original_arrows();
    for (std::size_t i = 0; i < orig.size(); ++i) {
        for (std::size_t j = i + 1; j < orig.size(); ++j) {
            std::size_t a = orig[i], c = orig[j];
            std::size_t lo = std::min(a, c), hi = std::max(a, c);
            Rat v = z.base(lo, hi);
            if (v.is_zero()) continue;
            out.psi += wedge(cyclic_action_field(m, lo), cyclic_action_field(m, hi)).scaled(v);

            const auto& arr = m.quiver().arrows;
            MatExpr fa = mx_affine(arr[lo].gamma, {mx_coord(m.space(), m.block(lo)),
                                                   mx_coord(m.space(), m.block(arr[lo].star))});
            MatExpr fc = mx_affine(arr[hi].gamma, {mx_coord(m.space(), m.block(hi)),
                                                   mx_coord(m.space(), m.block(arr[hi].star))});
            out.varpi.add_term(v, {TraceGroup{TraceFactor{mx_inv(fa), false}, TraceFactor{fa, true}},
                                   TraceGroup{TraceFactor{mx_inv(fc), false}, TraceFactor{fc, true}}});
        }
    }
    return out;
}

PolyMultiVector build_pencil_explicit(const QuiverModel& m, const PencilParams& z) {
    PolyMultiVector psi(2);
    const auto& arrows = m.quiver().arrows;
    for (std::size_t a = 0; a < arrows.size(); ++a) {
        for (std::size_t c = a + 1; c < arrows.size(); ++c) {
            Rat v = z.extended(m.quiver(), a, c);
            if (v.is_zero()) continue;
            v *= Rat(arrows[a].epsilon * arrows[c].epsilon);
            const auto& ba = m.space().block(m.block(a));
            const auto& bc = m.space().block(m.block(c));
            for (std::size_t i = 0; i < ba.rows * ba.cols; ++i)
                for (std::size_t j = 0; j < bc.rows * bc.cols; ++j) {
                    auto u = static_cast<std::uint32_t>(ba.base + i);
                    auto w = static_cast<std::uint32_t>(bc.base + j);
                    psi.add_term(IndexTuple{u, w},
                                 (Poly::var(u) * Poly::var(w)).scaled(v));
                }
        }
    }
    return psi;
}

std::vector<PolyMultiVector> pencil_basis(const QuiverModel& m) {
    std::vector<PolyMultiVector> out;
    auto orig = m.quiver().original_arrows();
    for (std::size_t i = 0; i < orig.size(); ++i)
        for (std::size_t j = i + 1; j < orig.size(); ++j)
            out.push_back(wedge(cyclic_action_field(m, orig[i]), cyclic_action_field(m, orig[j])));
    return out;
}

CharBundle build_char(std::size_t g, std::size_t r, std::size_t n, const PencilParams& z) {
    if (g + r == 0) throw BadParams("build_char: need g + r > 0");
    if (n == 0) throw BadParams("build_char: need n >= 1");
    CharBundle b;
    b.g = g; b.r = r; b.n = n;
    for (std::size_t i = 0; i < g; ++i) {
        b.loop_blocks.push_back(b.vs.add_block("A" + std::to_string(i + 1), n, n));
        b.loop_blocks.push_back(b.vs.add_block("A" + std::to_string(i + 1) + "*", n, n));
    }
    for (std::size_t j = 0; j < r; ++j)
        b.z_blocks.push_back(b.vs.add_block("Z" + std::to_string(j + 1), n, n));

    auto dd = [&](std::size_t blk) { return partial_matvec(b.vs, blk); };
    auto xx = [&](std::size_t blk) { return coord_matvec(b.vs, blk); };

    PolyMultiVector P(2);
    for (std::size_t i = 0; i < g; ++i) {
        std::size_t A = b.loop_blocks[2 * i], As = b.loop_blocks[2 * i + 1];
        // 1/2 tr[A* A dd_A ^ dd_A* - A A* dd_A* ^ dd_A]
        P += (MatVec::from_polys(coord_polys(b.vs, As)) * xx(A) * (dd(A) * dd(As))).trace()
                 .scaled(Rat(1, 2));
        P -= (MatVec::from_polys(coord_polys(b.vs, A)) * xx(As) * (dd(As) * dd(A))).trace()
                 .scaled(Rat(1, 2));
        // -1/2 tr[(dd_A* A* - A dd_A) ^ (dd_A A - A* dd_A*)]
        MatVec ga = dd(As) * xx(As) - xx(A) * dd(A);
        MatVec gas = dd(A) * xx(A) - xx(As) * dd(As);
        P -= (ga * gas).trace().scaled(Rat(1, 2));
    }
    for (std::size_t j = 0; j < r; ++j) {
        std::size_t Z = b.z_blocks[j];
        P += (xx(Z) * xx(Z) * (dd(Z) * dd(Z))).trace().scaled(Rat(1, 2));
    }
    // cross terms: loops x loops (i<k, all four C choices), loops x Z, Z x Z
    std::vector<std::vector<std::size_t>> groups;  // per fused factor, its gauge blocks
    for (std::size_t i = 0; i < g; ++i)
        groups.push_back({b.loop_blocks[2 * i], b.loop_blocks[2 * i + 1]});
    for (std::size_t j = 0; j < r; ++j) groups.push_back({b.z_blocks[j]});
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        for (std::size_t gk = gi + 1; gk < groups.size(); ++gk) {
            for (std::size_t ci : groups[gi]) {
                for (std::size_t ck : groups[gk]) {
                    // (dd_{C*} C* - C dd_C) with C* the conjugate within a loop
                    // pair, and C* = C itself for a Z block.
                    auto term = [&](std::size_t blk, const std::vector<std::size_t>& grp) {
                        std::size_t partner = grp.size() == 2
                                                  ? (blk == grp[0] ? grp[1] : grp[0])
                                                  : blk;
                        return dd(partner) * xx(partner) - xx(blk) * dd(blk);
                    };
                    P -= (term(ci, groups[gi]) * term(ck, groups[gk])).trace().scaled(Rat(1, 2));
                }
            }
        }
    }
    b.P = std::move(P);

    // Phi = prod_i A_i A_i* A_i^-1 A_i*^-1 . Z_1 ... Z_r
    std::vector<MatExpr> factors;
    for (std::size_t i = 0; i < g; ++i) {
        MatExpr A = mx_coord(b.vs, b.loop_blocks[2 * i]);
        MatExpr As = mx_coord(b.vs, b.loop_blocks[2 * i + 1]);
        factors.push_back(A);
        factors.push_back(As);
        factors.push_back(mx_inv(A));
        factors.push_back(mx_inv(As));
    }
    for (std::size_t j = 0; j < r; ++j) factors.push_back(mx_coord(b.vs, b.z_blocks[j]));
    b.phi = mx_prod(std::move(factors));

    // psi over loop pairs: tr[A_i* dd_{A_i*} - A_i dd_{A_i}] ^ (same for k)
    auto scaling_field = [&](std::size_t i) {
        PolyMultiVector f(1);
        auto euler = [&](std::size_t blk, int sgn) {
            const auto& blkd = b.vs.block(blk);
            for (std::size_t u = 0; u < blkd.rows * blkd.cols; ++u) {
                auto v = static_cast<std::uint32_t>(blkd.base + u);
                f.add_term(IndexTuple{v}, Poly::var(v, Rat(sgn)));
            }
        };
        euler(b.loop_blocks[2 * i + 1], +1);
        euler(b.loop_blocks[2 * i], -1);
        return f;
    };
    PolyMultiVector psi(2);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t k = i + 1; k < g; ++k) {
            Rat v = z.base(i, k);
            if (v.is_zero()) continue;
            psi += wedge(scaling_field(i), scaling_field(k)).scaled(v);
        }
    b.psi = std::move(psi);

    // conjugation action of gl_n on every block
    b.actions.factor_dims = {n};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            PolyMultiVector f(1);
            RatMatrix e(n, n);
            e(i, j) = Rat(1);
            for (std::size_t blk = 0; blk < b.vs.n_blocks(); ++blk) {
                MatVec lift(n, n);
                for (std::size_t u = 0; u < n; ++u)
                    for (std::size_t w = 0; w < n; ++w)
                        lift(u, w) = PolyMultiVector(Poly(e(u, w)));
                f += (dd(blk) * xx(blk) * lift).trace();
                f -= (xx(blk) * dd(blk) * lift).trace();
            }
            b.actions.basis_actions.push_back(std::move(f));
        }

    for (std::size_t blk = 0; blk < b.vs.n_blocks(); ++blk)
        b.avoid.push_back(det_avoid(b.vs, mx_coord(b.vs, blk)));
    return b;
}

AdditiveBundle build_additive(const QuiverModel& m, const PencilParams& z) {
    AdditiveBundle b;
    b.model = m;
    const QuiverModel& mm = b.model;
    const VarSpace& vs = mm.space();
    auto orig = mm.quiver().original_arrows();

    PolyMultiVector P(2);
    TraceForm omega(2);
    for (std::size_t a : orig) {
        std::size_t as = mm.quiver().arrows[a].star;
        P += (partial_matvec(vs, mm.block(a)) * partial_matvec(vs, mm.block(as))).trace();
        omega.add_single(Rat(-1), {TraceFactor{mx_coord(vs, mm.block(a)), true},
                                   TraceFactor{mx_coord(vs, mm.block(as)), true}});
    }
    b.P = std::move(P);
    b.omega = std::move(omega);

    std::size_t nv = mm.quiver().vertices.size();
    b.mu.resize(nv);
    for (std::size_t s = 0; s < nv; ++s)
        b.mu[s] = Mat<Poly>(mm.dims()[s], mm.dims()[s]);
    for (std::size_t a : orig) {
        std::size_t as = mm.quiver().arrows[a].star;
        std::size_t t = mm.quiver().arrows[a].tail, h = mm.quiver().arrows[a].head;
        Mat<Poly> xa = coord_polys(vs, mm.block(a));
        Mat<Poly> xas = coord_polys(vs, mm.block(as));
        b.mu[t] += xa * xas;
        b.mu[h] -= xas * xa;
    }

    PencilPair pp = build_pencil(mm, z);
    b.psi = std::move(pp.psi);

    TraceForm omz(2);
    for (std::size_t i = 0; i < orig.size(); ++i)
        for (std::size_t j = i + 1; j < orig.size(); ++j) {
            std::size_t a = orig[i], c = orig[j];
            Rat v = z.base(a, c);
            if (v.is_zero()) continue;
            MatExpr pa = mx_prod({mx_coord(vs, mm.block(a)),
                                  mx_coord(vs, mm.block(mm.quiver().arrows[a].star))});
            MatExpr pc = mx_prod({mx_coord(vs, mm.block(c)),
                                  mx_coord(vs, mm.block(mm.quiver().arrows[c].star))});
            omz.add_term(v, {TraceGroup{TraceFactor{pa, true}},
                             TraceGroup{TraceFactor{pc, true}}});
        }
    b.omega_z = std::move(omz);

    b.actions = action_data(mm);
    return b;
}

QuiverModel one_loop_model(std::size_t n, Rat gamma) {
    Quiver q = make_quiver({"0"}, {{"x", "0", "0", gamma}});
    return QuiverModel(std::move(q), {n});
}

QuiverModel one_arrow_model(std::size_t n1, std::size_t n2, Rat gamma) {
    Quiver q = make_quiver({"1", "2"}, {{"a", "1", "2", gamma}});
    return QuiverModel(std::move(q), {n1, n2});
}

QuiverModel spin_quiver_model(std::size_t n, std::size_t d) {
    std::vector<ArrowSpec> arrows;
    arrows.push_back({"x", "0", "0", Rat(0)});
    for (std::size_t al = 1; al <= d; ++al)
        arrows.push_back({"v" + std::to_string(al), "inf", "0", Rat(1)});
    Quiver q = make_quiver({"0", "inf"}, arrows);
    return QuiverModel(std::move(q), {n, 1});
}

QuiverModel star_model(const std::vector<std::size_t>& leg_lengths, std::size_t n) {
    std::vector<std::string> vertices{"0"};
    std::vector<ArrowSpec> arrows;
    for (std::size_t k = 0; k < leg_lengths.size(); ++k) {
        std::string prev = "0";
        for (std::size_t l = 1; l <= leg_lengths[k]; ++l) {
            std::string v = "v" + std::to_string(k + 1) + "_" + std::to_string(l);
            vertices.push_back(v);
            arrows.push_back({"a" + std::to_string(k + 1) + "_" + std::to_string(l), v, prev, Rat(1)});
            prev = v;
        }
    }
    Quiver q = make_quiver(vertices, arrows);
    return QuiverModel(std::move(q), std::vector<std::size_t>(vertices.size(), n));
}

Poly poly_bracket(const PolyMultiVector& P, const Poly& f, const Poly& g) {
    Poly out;
    for (const auto& [idx, c] : P.terms()) {
        std::uint32_t i = idx[0], j = idx[1];
        out += c * (f.partial(i) * g.partial(j) - f.partial(j) * g.partial(i));
    }
    return out;
}

// --- spin RS ----------------------------------------------------------------

Mat<Poly> SpinRSBundle::a_poly(std::size_t alpha) const {
    return coord_polys(vdb.model.space(), blk_w.at(alpha));
}

Mat<Poly> SpinRSBundle::b_poly(std::size_t alpha) const {
    const VarSpace& vs = vdb.model.space();
    Mat<Poly> m = Mat<Poly>::identity(n, Poly(Rat(1)));
    for (std::size_t beta = alpha; beta-- > 0;) {
        // Id + W_beta V_beta
        Mat<Poly> wv = coord_polys(vs, blk_w[beta]) * coord_polys(vs, blk_v[beta]);
        m = m * (Mat<Poly>::identity(n, Poly(Rat(1))) + wv);
    }
    return coord_polys(vs, blk_v[alpha]) * m * coord_polys(vs, blk_z);
}

std::vector<Rat> SpinRSBundle::vw_to_ab(const std::vector<Rat>& pt) const {
    const VarSpace& vs = vdb.model.space();
    auto read = [&](std::size_t blk) {
        const auto& bb = vs.block(blk);
        RatMatrix m(bb.rows, bb.cols);
        for (std::size_t i = 0; i < bb.rows; ++i)
            for (std::size_t j = 0; j < bb.cols; ++j) m(i, j) = pt.at(vs.var(blk, i, j));
        return m;
    };
    RatMatrix X = read(blk_x), Z = read(blk_z);
    std::vector<Rat> out(ab_space.n_vars(), Rat(0));
    auto write = [&](std::size_t blk, const RatMatrix& m) {
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) out.at(ab_space.var(blk, i, j)) = m(i, j);
    };
    write(ab_x, X);
    write(ab_z, Z);
    RatMatrix cum = RatMatrix::identity(n, Rat(1));  // (Id+W_{al-1}V_{al-1})...(Id+W_1V_1)
    for (std::size_t al = 0; al < d; ++al) {
        RatMatrix V = read(blk_v[al]), W = read(blk_w[al]);
        write(ab_a[al], W);
        write(ab_b[al], V * cum * Z);
        cum = (RatMatrix::identity(n, Rat(1)) + W * V) * cum;
    }
    return out;
}

std::vector<Rat> SpinRSBundle::ab_to_vw(const std::vector<Rat>& pt) const {
    auto read = [&](std::size_t blk) {
        const auto& bb = ab_space.block(blk);
        RatMatrix m(bb.rows, bb.cols);
        for (std::size_t i = 0; i < bb.rows; ++i)
            for (std::size_t j = 0; j < bb.cols; ++j) m(i, j) = pt.at(ab_space.var(blk, i, j));
        return m;
    };
    RatMatrix X = read(ab_x), Z = read(ab_z);
    const VarSpace& vs = vdb.model.space();
    std::vector<Rat> out(vs.n_vars(), Rat(0));
    auto write = [&](std::size_t blk, const RatMatrix& m) {
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) out.at(vs.var(blk, i, j)) = m(i, j);
    };
    write(blk_x, X);
    write(blk_z, Z);
    RatMatrix zc = Z;  // Z_{alpha-1} cumulative
    for (std::size_t al = 0; al < d; ++al) {
        RatMatrix A = read(ab_a[al]), B = read(ab_b[al]);
        write(blk_w[al], A);
        write(blk_v[al], B * zc.inverse());
        zc += A * B;
    }
    return out;
}

SpinRSBundle build_spin_rs(std::size_t n, std::size_t d) {
    if (d < 2) throw BadParams("build_spin_rs: need d >= 2");
    if (n < 1) throw BadParams("build_spin_rs: need n >= 1");
    SpinRSBundle b;
    b.n = n;
    b.d = d;
    QuiverModel m = spin_quiver_model(n, d);
    b.vdb = build_vdb(m);
    const Quiver& q = b.vdb.model.quiver();
    b.blk_x = q.arrow_index("x");
    b.blk_z = q.arrow_index("x*");
    for (std::size_t al = 1; al <= d; ++al) {
        b.blk_v.push_back(q.arrow_index("v" + std::to_string(al)));
        b.blk_w.push_back(q.arrow_index("v" + std::to_string(al) + "*"));
    }

    // avoid set per the chart: det X, det Z, det(Id + W_al V_al)
    // (det X, det Z already arise from the gamma_x = 0 loop factor det(XZ))
    b.ab_x = b.ab_space.add_block("X", n, n);
    b.ab_z = b.ab_space.add_block("Z", n, n);
    for (std::size_t al = 1; al <= d; ++al) {
        b.ab_a.push_back(b.ab_space.add_block("A" + std::to_string(al), n, 1));
        b.ab_b.push_back(b.ab_space.add_block("B" + std::to_string(al), 1, n));
    }
    MatExpr X = mx_coord(b.ab_space, b.ab_x);
    MatExpr Z = mx_coord(b.ab_space, b.ab_z);
    std::vector<MatExpr> zsum{Z};
    for (std::size_t al = 0; al < d; ++al)
        zsum.push_back(mx_prod({mx_coord(b.ab_space, b.ab_a[al]),
                                mx_coord(b.ab_space, b.ab_b[al])}));
    b.phi_ab = mx_prod({X, Z, mx_inv(X), mx_inv(mx_sum(zsum))});
    return b;
}

} // namespace quips
