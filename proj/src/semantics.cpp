#include "dbc/semantics.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace dbc {

bool operator<(const Move& a, const Move& b) {
    if (int c = compare(a.act, b.act)) return c < 0;
    return compare(a.target, b.target) < 0;
}

namespace {

template <class T>
struct NodeCache {
    std::unordered_map<const Node*, T> map;
    T* find(Expr e) {
        auto it = map.find(e.node());
        return it == map.end() ? nullptr : &it->second;
    }
    const T& put(Expr e, T v) {
        return map.insert_or_assign(e.node(), std::move(v)).first->second;
    }
};

void normalize(std::vector<Move>& ms) {
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
}

}  // namespace

const std::vector<Move>& step(Expr e) {
    thread_local NodeCache<std::vector<Move>> cache;
    if (auto* hit = cache.find(e)) return *hit;
    std::vector<Move> out;
    switch (e.kind()) {
        case Kind::Nil:
        case Kind::Var: break;
        case Kind::Prefix: out.push_back({e.act(), e.body()}); break;
        case Kind::Sum: {
            std::vector<Move> l = step(e.left());
            const auto& r = step(e.right());
            out = std::move(l);
            out.insert(out.end(), r.begin(), r.end());
            normalize(out);
            break;
        }
        case Kind::Rec: {
            std::vector<Move> inner = step(e.body());
            for (auto& m : inner) out.push_back({m.act, substitute(m.target, e.binder(), e)});
            normalize(out);
            break;
        }
    }
    return cache.put(e, std::move(out));
}

const std::vector<Symbol>& exposes(Expr e) {
    thread_local NodeCache<std::vector<Symbol>> cache;
    if (auto* hit = cache.find(e)) return *hit;
    std::vector<Symbol> out;
    switch (e.kind()) {
        case Kind::Nil:
        case Kind::Prefix: break;
        case Kind::Var: out.push_back(e.var_name()); break;
        case Kind::Sum: {
            std::vector<Symbol> l = exposes(e.left());
            const auto& r = exposes(e.right());
            std::set_union(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(out));
            break;
        }
        case Kind::Rec: {
            out = exposes(e.body());
            out.erase(std::remove(out.begin(), out.end(), e.binder()), out.end());
            break;
        }
    }
    return cache.put(e, std::move(out));
}

std::vector<std::vector<std::pair<Action, std::uint32_t>>> Lts::out() const {
    std::vector<std::vector<std::pair<Action, std::uint32_t>>> o(num_states);
    for (auto& t : transitions) o[t.src].emplace_back(t.act, t.dst);
    return o;
}

Lts Lts::from_edges(std::size_t n, std::vector<Transition> ts, std::vector<std::vector<Symbol>> exposure,
                    std::vector<std::uint32_t> roots) {
    Lts l;
    l.num_states = n;
    std::stable_sort(ts.begin(), ts.end(), [](const Transition& a, const Transition& b) { return a.src < b.src; });
    l.transitions = std::move(ts);
    exposure.resize(n);
    for (auto& e : exposure) {
        std::sort(e.begin(), e.end());
        e.erase(std::unique(e.begin(), e.end()), e.end());
    }
    l.exposure = std::move(exposure);
    l.roots = std::move(roots);
    return l;
}

Lts build_lts(const std::vector<Expr>& es, std::size_t budget) {
    Lts l;
    std::unordered_map<Expr, std::uint32_t, ExprHash> index;
    std::deque<std::uint32_t> queue;
    auto visit = [&](Expr e) {
        auto [it, added] = index.emplace(e, static_cast<std::uint32_t>(l.exprs.size()));
        if (added) {
            if (l.exprs.size() >= budget) throw BudgetExceeded(budget);
            l.exprs.push_back(e);
            queue.push_back(it->second);
        }
        return it->second;
    };
    for (Expr e : es) l.roots.push_back(visit(e));
    while (!queue.empty()) {
        std::uint32_t s = queue.front();
        queue.pop_front();
        for (const Move& m : step(l.exprs[s])) {
            std::uint32_t d = visit(m.target);
            l.transitions.push_back({s, m.act, d});
        }
    }
    l.num_states = l.exprs.size();
    std::stable_sort(l.transitions.begin(), l.transitions.end(),
                     [](const Transition& a, const Transition& b) { return a.src < b.src; });
    l.exposure.reserve(l.num_states);
    for (Expr e : l.exprs) l.exposure.push_back(exposes(e));
    return l;
}

Lts build_lts(Expr e, std::size_t budget) { return build_lts(std::vector<Expr>{e}, budget); }

bool tau_exposes(Symbol x, Expr e, std::size_t budget) {
    std::unordered_map<Expr, bool, ExprHash> seen;
    std::vector<Expr> todo{e};
    seen.emplace(e, true);
    while (!todo.empty()) {
        Expr cur = todo.back();
        todo.pop_back();
        const auto& ex = exposes(cur);
        if (std::binary_search(ex.begin(), ex.end(), x)) return true;
        for (const Move& m : step(cur)) {
            if (!m.act.is_tau()) continue;
            if (seen.emplace(m.target, true).second) {
                if (seen.size() > budget) throw BudgetExceeded(budget);
                todo.push_back(m.target);
            }
        }
    }
    return false;
}

std::vector<bool> divergent(const Lts& lts) {
    const std::size_t n = lts.num_states;
    std::vector<std::vector<std::uint32_t>> succ(n), pred(n);
    for (auto& t : lts.transitions) {
        if (!t.act.is_tau()) continue;
        succ[t.src].push_back(t.dst);
        pred[t.dst].push_back(t.src);
    }
    // Iterative Tarjan over the tau subgraph.
    std::vector<int> idx(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false), cyclic(n, false);
    std::vector<std::uint32_t> stack;
    int counter = 0;
    for (std::uint32_t s0 = 0; s0 < n; ++s0) {
        if (idx[s0] != -1) continue;
        std::vector<std::pair<std::uint32_t, std::size_t>> frames{{s0, 0}};
        idx[s0] = low[s0] = counter++;
        stack.push_back(s0);
        on_stack[s0] = true;
        while (!frames.empty()) {
            auto& [v, i] = frames.back();
            if (i < succ[v].size()) {
                std::uint32_t w = succ[v][i++];
                if (idx[w] == -1) {
                    idx[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], idx[w]);
                }
                continue;
            }
            if (low[v] == idx[v]) {
                std::vector<std::uint32_t> comp;
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                bool cyc = comp.size() > 1 ||
                           std::find(succ[v].begin(), succ[v].end(), v) != succ[v].end();
                if (cyc)
                    for (auto c : comp) cyclic[c] = true;
            }
            std::uint32_t done = v;
            frames.pop_back();
            if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
        }
    }
    std::vector<bool> div = cyclic;
    std::vector<std::uint32_t> todo;
    for (std::uint32_t s = 0; s < n; ++s)
        if (div[s]) todo.push_back(s);
    while (!todo.empty()) {
        std::uint32_t s = todo.back();
        todo.pop_back();
        for (auto p : pred[s])
            if (!div[p]) {
                div[p] = true;
                todo.push_back(p);
            }
    }
    return div;
}

std::string to_aut(const Lts& lts) {
    std::string out = "des (" + std::to_string(lts.roots.empty() ? 0 : lts.root()) + "," +
                      std::to_string(lts.transitions.size()) + "," + std::to_string(lts.num_states) + ")\n";
    for (auto& t : lts.transitions)
        out += "(" + std::to_string(t.src) + ",\"" + t.act.name() + "\"," + std::to_string(t.dst) + ")\n";
    for (std::size_t s = 0; s < lts.exposure.size(); ++s)
        for (Symbol x : lts.exposure[s]) out += "exp (" + std::to_string(s) + ",\"" + name_of(x) + "\")\n";
    return out;
}

}  // namespace dbc
