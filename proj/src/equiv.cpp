#include "dbc/equiv.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace dbc {

// ---------------------------------------------------------------- bitsets

Bitset::Bitset(std::size_t n, bool value) : n_(n), w_((n + 63) / 64, value ? ~std::uint64_t{0} : 0) {
    if (value && (n & 63)) w_.back() = (std::uint64_t{1} << (n & 63)) - 1;
}

bool Bitset::any() const {
    return std::any_of(w_.begin(), w_.end(), [](std::uint64_t w) { return w != 0; });
}

bool Bitset::intersects(const Bitset& b) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
        if (w_[i] & b.w_[i]) return true;
    return false;
}

bool Bitset::intersects(const Bitset& b, const Bitset& c) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
        if (w_[i] & b.w_[i] & c.w_[i]) return true;
    return false;
}

bool Bitset::intersects(const Bitset& b, const Bitset& c, const Bitset& d) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
        if (w_[i] & b.w_[i] & c.w_[i] & d.w_[i]) return true;
    return false;
}

Bitset& Bitset::operator|=(const Bitset& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
}

Bitset& Bitset::operator&=(const Bitset& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
}

// ---------------------------------------------------------------- relations

PairRelation::PairRelation(std::size_t n, bool full) : rows_(n, Bitset(n, full)) {}

std::size_t PairRelation::count() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < states(); ++i)
        for (std::size_t j = 0; j < states(); ++j) c += contains(i, j);
    return c;
}

bool PairRelation::subset_of(const PairRelation& o) const {
    for (std::size_t i = 0; i < states(); ++i) {
        Bitset r = rows_[i];
        r &= o.rows_[i];
        if (!(r == rows_[i])) return false;
    }
    return true;
}

PairRelation PairRelation::transpose() const {
    PairRelation t(states());
    for (std::size_t i = 0; i < states(); ++i)
        for (std::size_t j = 0; j < states(); ++j)
            if (contains(i, j)) t.insert(j, i);
    return t;
}

PairRelation PairRelation::symmetric_core() const { return intersect(transpose()); }

PairRelation PairRelation::intersect(const PairRelation& o) const {
    PairRelation r = *this;
    for (std::size_t i = 0; i < states(); ++i) r.rows_[i] &= o.rows_[i];
    return r;
}

PairRelation PairRelation::identity(std::size_t n) {
    PairRelation r(n);
    for (std::size_t i = 0; i < n; ++i) r.insert(i, i);
    return r;
}

const char* kind_name(EquivKind k) {
    switch (k) {
        case EquivKind::Strong: return "strong";
        case EquivKind::Branching: return "branching";
        case EquivKind::Dpbb: return "dpbb";
    }
    return "?";
}

PairRelation Partition::relation() const {
    PairRelation r(class_of.size());
    for (std::size_t i = 0; i < class_of.size(); ++i)
        for (std::size_t j = 0; j < class_of.size(); ++j)
            if (class_of[i] == class_of[j]) r.insert(i, j);
    return r;
}

Partition Partition::from_relation(const PairRelation& r) {
    const std::size_t n = r.states();
    Partition p;
    p.class_of.assign(n, UINT32_MAX);
    for (std::size_t i = 0; i < n; ++i) {
        if (p.class_of[i] != UINT32_MAX) continue;
        auto c = static_cast<std::uint32_t>(p.num_classes++);
        for (std::size_t j = i; j < n; ++j)
            if (p.class_of[j] == UINT32_MAX && r.contains(i, j)) p.class_of[j] = c;
    }
    return p;
}

// ---------------------------------------------------------------- functionals

TauClosure::TauClosure(const Lts& lts) {
    const std::size_t n = lts.num_states;
    std::vector<std::vector<std::uint32_t>> succ(n);
    for (auto& t : lts.transitions)
        if (t.act.is_tau()) succ[t.src].push_back(t.dst);
    star.assign(n, Bitset(n));
    plus.assign(n, Bitset(n));
    for (std::uint32_t s = 0; s < n; ++s) {
        std::vector<std::uint32_t> todo(succ[s].begin(), succ[s].end());
        for (auto t : todo) plus[s].set(t);
        while (!todo.empty()) {
            auto u = todo.back();
            todo.pop_back();
            for (auto v : succ[u])
                if (!plus[s].test(v)) {
                    plus[s].set(v);
                    todo.push_back(v);
                }
        }
        star[s] = plus[s];
        star[s].set(s);
    }
}

namespace {

struct Context {
    const Lts& lts;
    std::vector<std::vector<std::pair<Action, std::uint32_t>>> out;
    TauClosure tc;
    std::map<Symbol, Bitset> exposing;  // states exposing X

    explicit Context(const Lts& l) : lts(l), out(l.out()), tc(l) {
        for (std::size_t s = 0; s < l.num_states; ++s)
            for (Symbol x : l.exposure[s]) {
                auto it = exposing.try_emplace(x, Bitset(l.num_states)).first;
                it->second.set(s);
            }
    }

    // { t | t -a-> u with u in target }
    Bitset pre(Action a, const Bitset& target) const {
        Bitset b(lts.num_states);
        for (auto& t : lts.transitions)
            if (t.act == a && target.test(t.dst)) b.set(t.src);
        return b;
    }
};

bool exposure_subset(const std::vector<Symbol>& a, const std::vector<Symbol>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

PairRelation strong(const Context& c, const PairRelation& r) {
    const std::size_t n = c.lts.num_states;
    PairRelation out(n);
    for (std::size_t e = 0; e < n; ++e)
        for (std::size_t f = 0; f < n; ++f) {
            bool ok = exposure_subset(c.lts.exposure[e], c.lts.exposure[f]);
            for (auto& [a, e2] : c.out[e]) {
                if (!ok) break;
                ok = std::any_of(c.out[f].begin(), c.out[f].end(),
                                 [&](auto& m) { return m.first == a && r.contains(e2, m.second); });
            }
            if (ok) out.insert(e, f);
        }
    return out;
}

// Clause 2 of the branching functionals; progressing selects -tau->=> for the tau alternative.
PairRelation branching(const Context& c, const PairRelation& r, bool progressing) {
    const std::size_t n = c.lts.num_states;
    PairRelation out(n);
    for (std::size_t e = 0; e < n; ++e) {
        std::vector<Bitset> pres;
        pres.reserve(c.out[e].size());
        for (auto& [a, e2] : c.out[e]) pres.push_back(c.pre(a, r.row(e2)));
        for (std::size_t f = 0; f < n; ++f) {
            const Bitset& reach = c.tc.star[f];
            const Bitset& tau_reach = progressing ? c.tc.plus[f] : c.tc.star[f];
            bool ok = true;
            for (std::size_t k = 0; ok && k < c.out[e].size(); ++k) {
                auto [a, e2] = c.out[e][k];
                bool m = a.is_tau() && tau_reach.intersects(r.row(e), r.row(e2));
                ok = m || reach.intersects(r.row(e), pres[k]);
            }
            for (std::size_t k = 0; ok && k < c.lts.exposure[e].size(); ++k)
                ok = reach.intersects(r.row(e), c.exposing.at(c.lts.exposure[e][k]));
            if (ok) out.insert(e, f);
        }
    }
    return out;
}

// Non-masked states that start an infinite tau-run avoiding masked states.
std::vector<bool> diverge_outside(const Context& c, const Bitset& masked) {
    const std::size_t n = c.lts.num_states;
    std::vector<int> degree(n, 0);
    std::vector<std::vector<std::uint32_t>> pred(n);
    std::vector<bool> alive(n);
    for (std::size_t s = 0; s < n; ++s) alive[s] = !masked.test(s);
    for (auto& t : c.lts.transitions)
        if (t.act.is_tau() && alive[t.src] && alive[t.dst]) {
            ++degree[t.src];
            pred[t.dst].push_back(t.src);
        }
    std::vector<std::uint32_t> todo;
    for (std::uint32_t s = 0; s < n; ++s)
        if (alive[s] && degree[s] == 0) todo.push_back(s);
    while (!todo.empty()) {
        auto s = todo.back();
        todo.pop_back();
        alive[s] = false;
        for (auto p : pred[s])
            if (alive[p] && --degree[p] == 0) todo.push_back(p);
    }
    return alive;
}

PairRelation divergence_clause(const Context& c, const PairRelation& r) {
    const std::size_t n = c.lts.num_states;
    PairRelation rt = r.transpose();
    PairRelation out(n);
    for (std::size_t f = 0; f < n; ++f) {
        Bitset g(n);
        for (std::size_t f2 = 0; f2 < n; ++f2)
            if (c.tc.plus[f].test(f2)) g |= rt.row(f2);
        auto bad = diverge_outside(c, g);
        for (std::size_t e = 0; e < n; ++e)
            if (!bad[e]) out.insert(e, f);
    }
    return out;
}

}  // namespace

PairRelation functional_S(const Lts& lts, const PairRelation& r) { return strong(Context(lts), r); }

PairRelation functional_B(const Lts& lts, const PairRelation& r) {
    return branching(Context(lts), r, false);
}

PairRelation functional_Bp(const Lts& lts, const PairRelation& r) {
    return branching(Context(lts), r, true);
}

PairRelation functional_Bd(const Lts& lts, const PairRelation& r) {
    Context c(lts);
    return branching(c, r, false).intersect(divergence_clause(c, r));
}

PairRelation functional(EquivKind k, const Lts& lts, const PairRelation& r) {
    switch (k) {
        case EquivKind::Strong: return functional_S(lts, r);
        case EquivKind::Branching: return functional_B(lts, r);
        case EquivKind::Dpbb: return functional_Bd(lts, r);
    }
    return r;
}

Partition bisimilarity(const Lts& lts, EquivKind kind) {
    Context c(lts);
    PairRelation r(lts.num_states, true);
    for (;;) {
        PairRelation f;
        switch (kind) {
            case EquivKind::Strong: f = strong(c, r); break;
            case EquivKind::Branching: f = branching(c, r, false); break;
            case EquivKind::Dpbb: f = branching(c, r, false).intersect(divergence_clause(c, r)); break;
        }
        PairRelation next = r.intersect(f).symmetric_core();
        if (next == r) break;
        r = std::move(next);
    }
    return Partition::from_relation(r);
}

Partition brute_oracle(const Lts& lts, EquivKind kind) {
    const std::size_t n = lts.num_states;
    if (n > 8) throw std::invalid_argument("brute_oracle: more than 8 states");
    PairRelation acc(n);
    // Restricted growth strings enumerate the set partitions.
    std::vector<std::uint32_t> rgs(n, 0);
    auto next = [&] {
        for (std::size_t i = n; i-- > 1;) {
            std::uint32_t mx = *std::max_element(rgs.begin(), rgs.begin() + static_cast<long>(i));
            if (rgs[i] <= mx) {
                ++rgs[i];
                std::fill(rgs.begin() + static_cast<long>(i) + 1, rgs.end(), 0);
                return true;
            }
        }
        return false;
    };
    do {
        Partition p;
        p.class_of = rgs;
        PairRelation r = p.relation();
        if (r.subset_of(functional(kind, lts, r)))
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (r.contains(i, j)) acc.insert(i, j);
    } while (next());
    return Partition::from_relation(acc);
}

RootedResult rooted_equal(Expr e, Expr f, std::size_t budget) {
    Lts lts = build_lts({e, f}, budget);
    Partition p = bisimilarity(lts, EquivKind::Dpbb);
    auto out = lts.out();
    std::uint32_t re = lts.roots[0], rf = lts.roots[1];
    auto unmatched = [&](std::uint32_t a, std::uint32_t b) -> std::optional<std::pair<Action, std::uint32_t>> {
        for (auto& [act, t] : out[a]) {
            bool ok = std::any_of(out[b].begin(), out[b].end(),
                                  [&](auto& m) { return m.first == act && p.same(t, m.second); });
            if (!ok) return std::make_pair(act, t);
        }
        return std::nullopt;
    };
    RootedResult res;
    if (auto m = unmatched(re, rf)) {
        res.equal = false;
        res.clause = "move-left";
        res.detail = m->first.name() + " -> " + print(lts.exprs[m->second]);
    } else if (auto m2 = unmatched(rf, re)) {
        res.equal = false;
        res.clause = "move-right";
        res.detail = m2->first.name() + " -> " + print(lts.exprs[m2->second]);
    } else if (lts.exposure[re] != lts.exposure[rf]) {
        res.equal = false;
        res.clause = "exposure";
        auto name = [](const std::vector<Symbol>& xs) {
            std::string s = "{";
            for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + name_of(xs[i]);
            return s + "}";
        };
        res.detail = name(lts.exposure[re]) + " vs " + name(lts.exposure[rf]);
    }
    return res;
}

bool equivalent(Expr e, Expr f, EquivKind kind, std::size_t budget) {
    if (e == f) return true;
    Lts lts = build_lts({e, f}, budget);
    return bisimilarity(lts, kind).same(lts.roots[0], lts.roots[1]);
}

std::vector<bool> in_class_divergent(const Lts& lts, const Partition& p) {
    std::vector<int> degree(lts.num_states, 0);
    std::vector<std::vector<std::uint32_t>> pred(lts.num_states);
    for (auto& t : lts.transitions)
        if (t.act.is_tau() && p.same(t.src, t.dst)) {
            ++degree[t.src];
            pred[t.dst].push_back(t.src);
        }
    std::vector<bool> alive(lts.num_states, true);
    std::vector<std::uint32_t> todo;
    for (std::uint32_t s = 0; s < lts.num_states; ++s)
        if (degree[s] == 0) todo.push_back(s);
    while (!todo.empty()) {
        auto s = todo.back();
        todo.pop_back();
        alive[s] = false;
        for (auto q : pred[s])
            if (alive[q] && --degree[q] == 0) todo.push_back(q);
    }
    return alive;
}

Lts minimize(const Lts& lts) {
    Partition p = bisimilarity(lts, EquivKind::Dpbb);
    std::vector<bool> in_class_div = in_class_divergent(lts, p);
    std::set<std::tuple<std::uint32_t, std::string, std::uint32_t>> seen;
    std::vector<Transition> ts;
    auto add = [&](std::uint32_t a, Action act, std::uint32_t b) {
        if (seen.emplace(a, act.name(), b).second) ts.push_back({a, act, b});
    };
    for (auto& t : lts.transitions) {
        std::uint32_t a = p.class_of[t.src], b = p.class_of[t.dst];
        if (!t.act.is_tau() || a != b) add(a, t.act, b);
    }
    for (std::uint32_t s = 0; s < lts.num_states; ++s)
        if (in_class_div[s]) add(p.class_of[s], Action::tau(), p.class_of[s]);
    std::vector<std::vector<Symbol>> exp(p.num_classes);
    for (std::uint32_t s = 0; s < lts.num_states; ++s)
        exp[p.class_of[s]].insert(exp[p.class_of[s]].end(), lts.exposure[s].begin(), lts.exposure[s].end());
    std::vector<std::uint32_t> roots;
    for (auto r : lts.roots) roots.push_back(p.class_of[r]);
    return Lts::from_edges(p.num_classes, std::move(ts), std::move(exp), std::move(roots));
}

}  // namespace dbc
