#include "quips/quiver.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace quips {

std::size_t Quiver::vertex_index(const std::string& name) const {
    for (std::size_t i = 0; i < vertices.size(); ++i)
        if (vertices[i] == name) return i;
    throw UnknownArrow("unknown vertex '" + name + "'");
}

std::size_t Quiver::arrow_index(const std::string& name) const {
    for (std::size_t i = 0; i < arrows.size(); ++i)
        if (arrows[i].name == name) return i;
    throw UnknownArrow("unknown arrow '" + name + "'");
}

void Quiver::validate() const {
    for (std::size_t i = 0; i < arrows.size(); ++i) {
        const Arrow& a = arrows[i];
        const Arrow& s = arrows.at(a.star);
        if (s.star != i) throw BadParams("star is not an involution");
        if (s.tail != a.head || s.head != a.tail)
            throw BadParams("star does not reverse tail/head");
        if (s.epsilon != -a.epsilon) throw BadParams("epsilon(a*) != -epsilon(a)");
        if (!(s.gamma == a.gamma)) throw BadParams("gamma not symmetric under star");
        if (a.tail >= vertices.size() || a.head >= vertices.size())
            throw BadParams("arrow endpoint out of range");
    }
}

bool is_star_shaped(const Quiver& q) {
    std::size_t nv = q.vertices.size();
    // undirected multigraph on original arrows
    std::vector<std::size_t> deg(nv, 0);
    std::size_t ne = 0;
    std::vector<std::vector<std::size_t>> adj(nv);
    for (const auto& a : q.arrows) {
        if (a.epsilon != +1) continue;
        ++ne;
        deg[a.tail]++;
        deg[a.head]++;
        adj[a.tail].push_back(a.head);
        adj[a.head].push_back(a.tail);
        if (a.tail == a.head) return false;  // loop
    }
    if (nv == 0) return false;
    if (ne + 1 != nv) return false;  // not a tree (assuming connected)
    // connectivity
    std::vector<char> seen(nv, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t cnt = 0;
    while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        ++cnt;
        for (auto w : adj[v])
            if (!seen[w]) { seen[w] = 1; stack.push_back(w); }
    }
    if (cnt != nv) return false;
    std::size_t branch = 0;
    for (auto d : deg)
        if (d >= 3) ++branch;
    return branch <= 1;
}

Quiver make_quiver(const std::vector<std::string>& vertices,
                   const std::vector<ArrowSpec>& arrows,
                   const std::vector<std::string>& ordering) {
    Quiver q;
    q.vertices = vertices;

    struct Raw { std::string name; std::size_t tail, head; Rat gamma; bool original; };
    std::vector<Raw> raw;
    for (const auto& s : arrows) {
        std::size_t t = q.vertex_index(s.tail), h = q.vertex_index(s.head);
        raw.push_back({s.name, t, h, s.gamma, true});
        raw.push_back({s.name + "*", h, t, s.gamma, false});
    }

    // Resolve the total order on the double. A partial list naming only the
    // originals induces a < a* immediately after a.
    std::vector<std::string> order;
    if (ordering.empty()) {
        for (const auto& s : arrows) {
            order.push_back(s.name);
            order.push_back(s.name + "*");
        }
    } else {
        bool has_star = false;
        for (const auto& n : ordering)
            if (!n.empty() && n.back() == '*') has_star = true;
        if (has_star) {
            order = ordering;
        } else {
            for (const auto& n : ordering) {
                order.push_back(n);
                order.push_back(n + "*");
            }
        }
    }
    if (order.size() != raw.size()) throw BadParams("ordering does not cover the double");

    for (const auto& name : order) {
        auto it = std::find_if(raw.begin(), raw.end(), [&](const Raw& r) { return r.name == name; });
        if (it == raw.end()) throw UnknownArrow("ordering names unknown arrow '" + name + "'");
        Arrow a;
        a.name = it->name;
        a.tail = it->tail;
        a.head = it->head;
        a.epsilon = it->original ? +1 : -1;
        a.gamma = it->gamma;
        q.arrows.push_back(std::move(a));
    }
    // link stars
    for (std::size_t i = 0; i < q.arrows.size(); ++i) {
        const std::string& n = q.arrows[i].name;
        std::string partner = (!n.empty() && n.back() == '*') ? n.substr(0, n.size() - 1) : n + "*";
        q.arrows[i].star = q.arrow_index(partner);
    }
    q.validate();
    return q;
}

QuiverModel::QuiverModel(Quiver q, std::vector<std::size_t> dims)
    : q_(std::move(q)), dims_(std::move(dims)) {
    if (dims_.size() != q_.vertices.size())
        throw DimensionMismatch("dimension vector length != vertex count");
    for (std::size_t i = 0; i < q_.arrows.size(); ++i) {
        const Arrow& a = q_.arrows[i];
        vs_.add_block(a.name, dims_[a.tail], dims_[a.head]);
    }
    for (std::size_t s = 0; s < dims_.size(); ++s)
        for (std::size_t i = 0; i < dims_[s]; ++i)
            for (std::size_t j = 0; j < dims_[s]; ++j)
                lie_.push_back({s, i, j});
}

std::size_t QuiverModel::lie_index(std::size_t vertex, std::size_t i, std::size_t j) const {
    std::size_t base = 0;
    for (std::size_t s = 0; s < vertex; ++s) base += dims_[s] * dims_[s];
    return base + i * dims_[vertex] + j;
}

QuiverModel model_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    if (!j.contains("vertices")) throw BadParams("spec missing 'vertices'");
    if (!j.contains("arrows")) throw BadParams("spec missing 'arrows'");
    if (!j.contains("dims")) throw BadParams("spec missing 'dims'");

    std::vector<std::string> vertices;
    for (const auto& v : j.at("vertices")) vertices.push_back(v.get<std::string>());

    std::vector<ArrowSpec> arrows;
    for (const auto& a : j.at("arrows")) {
        ArrowSpec s;
        s.name = a.at("name").get<std::string>();
        s.tail = a.at("tail").get<std::string>();
        s.head = a.at("head").get<std::string>();
        if (a.contains("gamma")) s.gamma = Rat::from_string(a.at("gamma").get<std::string>());
        arrows.push_back(std::move(s));
    }

    std::vector<std::string> ordering;
    if (j.contains("ordering"))
        for (const auto& n : j.at("ordering")) ordering.push_back(n.get<std::string>());

    Quiver q = make_quiver(vertices, arrows, ordering);

    std::vector<std::size_t> dims(vertices.size(), 0);
    for (const auto& [k, v] : j.at("dims").items())
        dims.at(q.vertex_index(k)) = v.get<std::size_t>();

    return QuiverModel(std::move(q), std::move(dims));
}

QuiverModel model_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadParams("cannot open spec file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

std::string model_to_json(const QuiverModel& m) {
    nlohmann::json j;
    j["vertices"] = m.quiver().vertices;
    nlohmann::json arr = nlohmann::json::array();
    nlohmann::json ord = nlohmann::json::array();
    for (const auto& a : m.quiver().arrows) {
        ord.push_back(a.name);
        if (a.epsilon != +1) continue;
        arr.push_back({{"name", a.name},
                       {"tail", m.quiver().vertices[a.tail]},
                       {"head", m.quiver().vertices[a.head]},
                       {"gamma", a.gamma.str()}});
    }
    j["arrows"] = arr;
    j["ordering"] = ord;
    nlohmann::json dims;
    for (std::size_t s = 0; s < m.dims().size(); ++s)
        dims[m.quiver().vertices[s]] = m.dims()[s];
    j["dims"] = dims;
    return j.dump();
}

MatVec partial_matrix(const QuiverModel& m, std::size_t arrow) {
    if (arrow >= m.quiver().arrows.size()) throw UnknownArrow("arrow index out of range");
    return partial_matvec(m.space(), m.block(arrow));
}

PolyMultiVector infinitesimal_action(const QuiverModel& m, const std::vector<RatMatrix>& xi) {
    if (xi.size() != m.dims().size())
        throw DimensionMismatch("xi must have one block per vertex");
    for (std::size_t s = 0; s < xi.size(); ++s)
        if (xi[s].rows() != m.dims()[s] || xi[s].cols() != m.dims()[s])
            throw DimensionMismatch("xi block shape mismatch");
    PolyMultiVector out(1);
    for (std::size_t a = 0; a < m.quiver().arrows.size(); ++a) {
        const Arrow& ar = m.quiver().arrows[a];
        MatVec da = partial_matvec(m.space(), m.block(a));
        MatVec xa = coord_matvec(m.space(), m.block(a));
        // tr(dd_a X_a xi_h): coefficient of dd/d(X_a)_{ji} is (X_a xi_h)_{ji}
        const RatMatrix& xh = xi[ar.head];
        const RatMatrix& xt = xi[ar.tail];
        MatVec lifth(xh.rows(), xh.cols()), liftt(xt.rows(), xt.cols());
        for (std::size_t i = 0; i < xh.rows(); ++i)
            for (std::size_t j = 0; j < xh.cols(); ++j)
                lifth(i, j) = PolyMultiVector(Poly(xh(i, j)));
        for (std::size_t i = 0; i < xt.rows(); ++i)
            for (std::size_t j = 0; j < xt.cols(); ++j)
                liftt(i, j) = PolyMultiVector(Poly(xt(i, j)));
        out += (da * xa * lifth).trace();
        out -= (xa * da * liftt).trace();
    }
    return out;
}

PolyMultiVector infinitesimal_action_basis(const QuiverModel& m, std::size_t vertex,
                                           std::size_t i, std::size_t j) {
    std::vector<RatMatrix> xi;
    for (std::size_t s = 0; s < m.dims().size(); ++s)
        xi.emplace_back(m.dims()[s], m.dims()[s]);
    xi[vertex](i, j) = Rat(1);
    return infinitesimal_action(m, xi);
}

std::vector<PolyMultiVector> lie_basis_actions(const QuiverModel& m) {
    std::vector<PolyMultiVector> out;
    out.reserve(m.lie_dim());
    for (std::size_t k = 0; k < m.lie_dim(); ++k) {
        const auto& e = m.lie_elem(k);
        out.push_back(infinitesimal_action_basis(m, e.vertex, e.i, e.j));
    }
    return out;
}

std::size_t ActionData::index(std::size_t factor, std::size_t i, std::size_t j) const {
    std::size_t base = 0;
    for (std::size_t s = 0; s < factor; ++s) base += factor_dims[s] * factor_dims[s];
    return base + i * factor_dims[factor] + j;
}

std::size_t ActionData::dual(std::size_t k) const {
    Elem e = elem(k);
    return index(e.factor, e.j, e.i);
}

ActionData::Elem ActionData::elem(std::size_t k) const {
    for (std::size_t s = 0; s < factor_dims.size(); ++s) {
        std::size_t sz = factor_dims[s] * factor_dims[s];
        if (k < sz) return {s, k / factor_dims[s], k % factor_dims[s]};
        k -= sz;
    }
    throw DimensionMismatch("Lie basis index out of range");
}

ActionData action_data(const QuiverModel& m) {
    ActionData a;
    a.factor_dims = m.dims();
    a.basis_actions = lie_basis_actions(m);
    return a;
}

PolyMultiVector cartan_from_actions(const ActionData& act) {
    PolyMultiVector phi(3);
    // Only same-factor triples contribute: brackets of different blocks
    // vanish and the trace form pairs blocks diagonally.
    for (std::size_t s = 0; s < act.factor_dims.size(); ++s) {
        std::size_t n = act.factor_dims[s];
        if (n == 0) continue;
        auto dual_mat = [&](std::size_t i, std::size_t j) {
            // E^{(i,j)} = E_{ji}
            RatMatrix e(n, n);
            e(j, i) = Rat(1);
            return e;
        };
        for (std::size_t ai = 0; ai < n; ++ai) for (std::size_t aj = 0; aj < n; ++aj)
        for (std::size_t bi = 0; bi < n; ++bi) for (std::size_t bj = 0; bj < n; ++bj)
        for (std::size_t ci = 0; ci < n; ++ci) for (std::size_t cj = 0; cj < n; ++cj) {
            RatMatrix ea = dual_mat(ai, aj), eb = dual_mat(bi, bj), ec = dual_mat(ci, cj);
            Rat c = (ea * (eb * ec - ec * eb)).trace();
            if (c.is_zero()) continue;
            const auto& fa = act.basis_actions[act.index(s, ai, aj)];
            const auto& fb = act.basis_actions[act.index(s, bi, bj)];
            const auto& fc = act.basis_actions[act.index(s, ci, cj)];
            phi += wedge(wedge(fa, fb), fc).scaled(c * Rat(kCartanSign, 12));
        }
    }
    return phi;
}

PolyMultiVector cartan_trivector(const QuiverModel& m) {
    return cartan_from_actions(action_data(m));
}

PolyMultiVector cyclic_action_field(const QuiverModel& m, std::size_t arrow) {
    if (arrow >= m.quiver().arrows.size()) throw UnknownArrow("arrow index out of range");
    std::size_t star = m.quiver().arrows[arrow].star;
    PolyMultiVector out(1);
    auto euler = [&](std::size_t blk, int sign) {
        const auto& b = m.space().block(blk);
        for (std::size_t i = 0; i < b.rows; ++i)
            for (std::size_t j = 0; j < b.cols; ++j) {
                auto v = static_cast<std::uint32_t>(m.space().var(blk, i, j));
                out.add_term(IndexTuple{v}, Poly::var(v, Rat(sign)));
            }
    };
    euler(m.block(star), +1);
    euler(m.block(arrow), -1);
    return out;
}

PolyMultiVector fuse(const PolyMultiVector& p, const std::vector<PolyMultiVector>& fields1,
                     const std::vector<PolyMultiVector>& fields2) {
    if (fields1.size() != fields2.size())
        throw DimensionMismatch("fuse: dual basis lists of different length");
    PolyMultiVector psi(2);
    for (std::size_t k = 0; k < fields1.size(); ++k)
        psi += wedge(fields1[k], fields2[k]);
    return p - psi.scaled(Rat(1, 2));
}

int measure_lie_sign(const QuiverModel& m) {
    // gl_2 block needed; compare on E_12, E_21 whose bracket is E_11 - E_22.
    for (std::size_t s = 0; s < m.dims().size(); ++s) {
        if (m.dims()[s] < 2) continue;
        PolyMultiVector x12 = infinitesimal_action_basis(m, s, 0, 1);
        PolyMultiVector x21 = infinitesimal_action_basis(m, s, 1, 0);
        PolyMultiVector lhs = schouten(x12, x21);
        PolyMultiVector rhs = infinitesimal_action_basis(m, s, 0, 0) -
                              infinitesimal_action_basis(m, s, 1, 1);
        if (lhs == rhs) return +1;
        if (lhs == -rhs) return -1;
        throw BadParams("schouten(xi_M, zeta_M) is not proportional to [xi,zeta]_M");
    }
    throw BadParams("measure_lie_sign needs a vertex with n >= 2");
}

Poly trace_word(const QuiverModel& m, const std::vector<std::size_t>& word) {
    if (word.empty()) throw BadParams("trace_word: empty word");
    const auto& arrows = m.quiver().arrows;
    for (std::size_t k = 0; k + 1 < word.size(); ++k)
        if (arrows.at(word[k]).head != arrows.at(word[k + 1]).tail)
            throw PathNotClosed("word is not composable");
    if (arrows.at(word.back()).head != arrows.at(word.front()).tail)
        throw PathNotClosed("word is not a closed path");
    Mat<Poly> prod = coord_polys(m.space(), m.block(word[0]));
    for (std::size_t k = 1; k < word.size(); ++k)
        prod = prod * coord_polys(m.space(), m.block(word[k]));
    Poly tr;
    for (std::size_t i = 0; i < prod.rows(); ++i) tr += prod(i, i);
    return tr;
}

std::vector<std::vector<std::size_t>> closed_words(const QuiverModel& m, std::size_t max_len) {
    std::vector<std::vector<std::size_t>> out;
    const auto& arrows = m.quiver().arrows;
    std::vector<std::size_t> cur;
    std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t start_vertex,
                                                            std::size_t at_vertex) {
        if (!cur.empty() && at_vertex == start_vertex) out.push_back(cur);
        if (cur.size() == max_len) return;
        for (std::size_t a = 0; a < arrows.size(); ++a) {
            if (arrows[a].tail != at_vertex) continue;
            cur.push_back(a);
            dfs(start_vertex, arrows[a].head);
            cur.pop_back();
        }
    };
    for (std::size_t s = 0; s < m.quiver().vertices.size(); ++s) dfs(s, s);
    return out;
}

} // namespace quips
