#include "dbc/ses.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_map>

#include "dbc/standardize.hpp"

namespace dbc {

namespace {

constexpr CongPos kPre = CongPos::Prefix;
constexpr CongPos kL = CongPos::SumL;
constexpr CongPos kR = CongPos::SumR;
constexpr CongPos kRec = CongPos::RecBody;

Expr tau(Expr e) { return Expr::prefix(Action::tau(), e); }
Expr sum(Expr a, Expr b) { return Expr::sum(a, b); }
Expr literal_loop(Symbol z, Expr body) { return Expr::rec(z, sum(tau(Expr::var(z)), body)); }

void expect(bool ok, const std::string& what) {
    if (!ok) throw ProofError(what);
}

SumView view_of(Expr e) {
    auto v = as_standard_sum(e);
    expect(v.has_value(), "not a simple sum: " + print(e));
    return *v;
}

SumView merge(const SumView& a, const SumView& b) { return view_of(sum(a.to_expr(), b.to_expr())); }

Subst without(Subst s, Symbol x) {
    s.erase(x);
    return s;
}

// a.Y -> a.tau.Y' for every formal Y under the given values.
Prover::Ref insert_taus(Prover& p, Expr t, const std::vector<Symbol>& formals, const Subst& plain,
                        const Subst& tau_values, const std::function<bool(Symbol)>& is_formal) {
    auto hook = [&](Expr node) -> std::optional<Prover::Ref> {
        if (node.is_prefix() && node.body().is_var() && is_formal(node.body().var_name()))
            return p.symm(prove_T1(p, node.act(), plain.at(node.body().var_name())));
        return std::nullopt;
    };
    return p.rewrite_template(t, plain, tau_values, formals, hook);
}

}  // namespace

// ---------------------------------------------------------------- systems

std::vector<Symbol> EqSystem::unguarded_successors(Symbol x) const {
    std::vector<Symbol> out;
    Expr r = rhs.at(x);
    for (Symbol y : r.free_vars())
        if (is_formal(y) && occurs_unguarded(y, r)) out.push_back(y);
    return out;
}

bool EqSystem::guarded() const {
    enum : int { kNew, kActive, kDone };
    std::map<Symbol, int> state;
    std::function<bool(Symbol)> acyclic = [&](Symbol x) {
        int& s = state[x];
        if (s == kActive) return false;
        if (s == kDone) return true;
        s = kActive;
        for (Symbol y : unguarded_successors(x))
            if (!acyclic(y)) return false;
        state[x] = kDone;
        return true;
    };
    return std::all_of(formals.begin(), formals.end(), acyclic);
}

Expr SesEquation::rhs() const { return loop ? literal_loop(binder, sum.to_expr()) : sum.to_expr(); }

EqSystem SesSystem::system() const {
    EqSystem s;
    s.formals = formals;
    for (Symbol x : formals) s.rhs[x] = eqs.at(x).rhs();
    return s;
}

EqSystem tau_transform(const EqSystem& s) {
    EqSystem t = s;
    for (auto& [x, r] : t.rhs) r = tau(r);
    return t;
}

// ---------------------------------------------------------------- elimination

namespace {

// Dependencies first, so that early closed terms mention few formals.
std::vector<Symbol> default_order(const EqSystem& s) {
    std::vector<Symbol> order;
    std::set<Symbol> seen;
    std::function<void(Symbol)> visit = [&](Symbol x) {
        if (!seen.insert(x).second) return;
        for (Symbol y : s.rhs.at(x).free_vars())
            if (s.is_formal(y)) visit(y);
        order.push_back(x);
    };
    for (Symbol x : s.formals) visit(x);
    return order;
}

}  // namespace

Elimination::Elimination(const EqSystem& s, std::vector<Symbol> order) : s_(s), order_(std::move(order)) {
    if (order_.empty()) order_ = default_order(s_);
    if (order_.size() != s_.formals.size() || std::set<Symbol>(order_.begin(), order_.end()).size() != order_.size())
        throw std::invalid_argument("elimination order must list every formal once");
    for (Symbol x : order_)
        if (!s_.is_formal(x)) throw std::invalid_argument("elimination order names a non-formal");
    std::map<Symbol, Expr> cur;
    for (Symbol x : order_) cur[x] = s_.rhs.at(x);
    for (Symbol x : order_) {
        stage_.push_back(cur);
        Expr closed = Expr::rec(x, cur.at(x));
        closed_.push_back(closed);
        cur.erase(x);
        for (auto& [y, g] : cur)
            if (g.has_free(x)) g = substitute(g, x, closed);
    }
    for (std::size_t k = order_.size(); k-- > 0;) {
        Subst later;
        for (std::size_t j = k + 1; j < order_.size(); ++j)
            if (closed_[k].has_free(order_[j])) later[order_[j]] = solution_.at(order_[j]);
        solution_[order_[k]] = substitute(closed_[k], later);
    }
}

SolutionFamily Elimination::prove_solution(Prover& p) const {
    SolutionFamily fam;
    fam.value = solution_;
    for (std::size_t k = 0; k < order_.size(); ++k) {
        Symbol x = order_[k];
        Expr g = substitute(stage_[k].at(x), without(solution_, x));
        expect(Expr::rec(x, g) == solution_.at(x), "elimination renamed a binder of " + name_of(x));
        Prover::Ref r = p.axiom(AxiomId::R1, Meta().e("E", g).x("X", x));
        expect(p.rhs(r) == substitute(s_.rhs.at(x), solution_), "elimination does not compose at " + name_of(x));
        fam.proof[x] = r;
    }
    return fam;
}

std::map<Symbol, Prover::Ref> Elimination::prove_unique(Prover& p, const SolutionFamily& family) const {
    const Subst& d = family.value;
    std::map<Symbol, Prover::Ref> cur;
    for (Symbol x : order_) {
        Prover::Ref r = family.proof.at(x);
        expect(p.lhs(r) == d.at(x) && p.rhs(r) == substitute(s_.rhs.at(x), d),
               "family does not solve the equation of " + name_of(x));
        cur[x] = r;
    }
    const std::size_t n = order_.size();
    std::vector<Prover::Ref> folded(n);
    for (std::size_t k = 0; k < n; ++k) {
        Symbol x = order_[k];
        Subst rest = without(d, x);
        Expr g = substitute(stage_[k].at(x), rest);
        Prover::Ref prem = cur.at(x);
        expect(p.rhs(prem) == substitute(g, x, d.at(x)), "uniqueness premise mismatch at " + name_of(x));
        Prover::Ref r2 = p.axiom(AxiomId::R2, Meta().e("E", g).e("F", d.at(x)).x("X", x), prem);
        folded[k] = r2;
        Subst right = d;
        right[x] = p.rhs(r2);
        auto hook = [&](Expr node) -> std::optional<Prover::Ref> {
            if (node.is_var() && node.var_name() == x) return r2;
            return std::nullopt;
        };
        for (std::size_t i = k + 1; i < n; ++i) {
            Symbol y = order_[i];
            Expr t = stage_[k].at(y);
            if (!t.has_free(x)) continue;
            Prover::Ref step = p.rewrite_template(t, d, right, {x}, hook);
            expect(p.rhs(step) == substitute(stage_[k + 1].at(y), without(d, x)),
                   "uniqueness stage does not compose at " + name_of(y));
            cur[y] = p.trans(cur.at(y), step);
        }
    }
    std::map<Symbol, Prover::Ref> out;
    for (std::size_t k = n; k-- > 0;) {
        Symbol x = order_[k];
        std::vector<Symbol> holes;
        for (std::size_t j = k + 1; j < n; ++j)
            if (closed_[k].has_free(order_[j])) holes.push_back(order_[j]);
        auto hook = [&](Expr node) -> std::optional<Prover::Ref> {
            if (node.is_var() && out.count(node.var_name())) return out.at(node.var_name());
            return std::nullopt;
        };
        Prover::Ref back = p.rewrite_template(closed_[k], d, solution_, holes, hook);
        expect(p.lhs(back) == p.rhs(folded[k]), "uniqueness fold mismatch at " + name_of(x));
        expect(p.rhs(back) == solution_.at(x), "uniqueness back-substitution mismatch at " + name_of(x));
        out[x] = p.trans(folded[k], back);
    }
    return out;
}

Solved solve_system(const EqSystem& s, Symbol x, std::vector<Symbol> order) {
    if (!s.is_formal(x)) throw std::invalid_argument(name_of(x) + " is not a formal of the system");
    if (!s.guarded()) throw NotGuarded("equation system is not guarded");
    Elimination el(s, std::move(order));
    Prover p;
    SolutionFamily fam = el.prove_solution(p);
    Solved out;
    out.value = fam.value.at(x);
    out.proof = std::move(p.d);
    for (auto& [y, r] : fam.proof) out.step[y] = r;
    return out;
}

// ---------------------------------------------------------------- extraction

namespace {

// e = e' with every binder renamed to a fresh name and loops in literal shape.
// Repeated closed subterms are cleaned once, so they stay shared.
class Cleaner {
public:
    Cleaner(Prover& p, NameSupply& names) : p_(p), names_(names) {}

    Prover::Ref operator()(Expr e) {
        bool closed = e.free_vars().empty();
        if (closed) {
            if (auto it = memo_.find(e.node()); it != memo_.end()) return it->second;
        }
        Prover::Ref r = run(e);
        if (closed) memo_.emplace(e.node(), r);
        return r;
    }

private:
    Prover::Ref run(Expr e) {
        switch (e.kind()) {
            case Kind::Nil:
            case Kind::Var: return p_.refl(e);
            case Kind::Prefix: return p_.at(e, {kPre}, (*this)(e.body()));
            case Kind::Sum: {
                Chain c(p_, e);
                c.then_at({kL}, (*this)(e.left()));
                c.then_at({kR}, (*this)(e.right()));
                return c.done();
            }
            case Kind::Rec: {
                Chain c(p_, e);
                c.then(rename_binder(p_, e, names_.fresh()));
                c.then_at({kRec}, (*this)(c.current().body()));
                Expr cur = c.current();
                if (auto parts = as_loop(cur); parts && !is_literal_loop(cur))
                    c.ac_at({kRec}, sum(tau(Expr::var(cur.binder())), parts->rest));
                return c.done();
            }
        }
        throw ProofError("unreachable");
    }

    Prover& p_;
    NameSupply& names_;
    std::unordered_map<const Node*, Prover::Ref> memo_;
};

class Extractor {
public:
    Extractor(Prover& p, NameSupply& names) : p_(p), names_(names) {}

    SesSystem sys;
    SolutionFamily fam;

    struct Out {
        Symbol x;
        Prover::Ref anchor;  // e{theta} = value[x]
    };

    Out run(Expr e, const Subst& theta) {
        // A closed subterm is its own instance, so one set of formals serves
        // every occurrence.
        bool closed = e.free_vars().empty();
        if (closed) {
            if (auto it = closed_.find(e.node()); it != closed_.end()) return it->second;
        }
        Out out = run_fresh(e, theta);
        if (closed) closed_.emplace(e.node(), out);
        return out;
    }

private:
    Out run_fresh(Expr e, const Subst& theta) {
        switch (e.kind()) {
            case Kind::Nil: {
                Expr v = Expr::nil();
                return {add(SesEquation{}, v, p_.refl(v)), p_.refl(v)};
            }
            case Kind::Var: {
                Symbol w = e.var_name();
                Expr v = theta.count(w) ? theta.at(w) : e;
                SesEquation eq;
                eq.sum.vars.push_back(w);
                return {add(eq, v, p_.refl(v)), p_.refl(v)};
            }
            case Kind::Prefix: {
                Out c = run(e.body(), theta);
                Expr v = Expr::prefix(e.act(), p_.lhs(c.anchor));
                SesEquation eq;
                eq.sum.prefixed.push_back({e.act(), Expr::var(c.x)});
                return {add(eq, v, p_.at(v, {kPre}, c.anchor)), p_.refl(v)};
            }
            case Kind::Sum: return run_sum(e, theta);
            case Kind::Rec:
                if (is_literal_loop(e)) return run_loop(e, theta);
                if (is_loop(e)) throw ProofError("extraction expects literal loops: " + print(e));
                if (!is_guarded_in(e.binder(), e.body())) throw NotGuarded("unguarded recursion in " + print(e));
                return run_rec(e, theta);
        }
        throw ProofError("unreachable");
    }

    Symbol add(const SesEquation& eq, Expr value, Prover::Ref proof) {
        Symbol x = names_.fresh();
        sys.formals.push_back(x);
        sys.eqs[x] = eq;
        fam.value[x] = value;
        env_[x] = value;
        fam.proof[x] = proof;
        expect(p_.lhs(proof) == value && p_.rhs(proof) == instance(x), "extraction invariant at " + name_of(x));
        return x;
    }

    Expr instance(Symbol x) const { return substitute(sys.eqs.at(x).rhs(), env_); }

    // value[x] = the summands of rhs_x{env}, a loop contributing tau.value[x] + body.
    std::pair<SumView, Prover::Ref> unfold(Symbol x) {
        const SesEquation& eq = sys.eqs.at(x);
        Prover::Ref r = fam.proof.at(x);
        if (!eq.loop) return {eq.sum, r};
        Chain c(p_, fam.value.at(x));
        c.then(r).then(prove_D1_loop(p_, p_.rhs(r))).then_at({kL, kPre}, p_.symm(r));
        SumView flat = merge(SumView{{{Action::tau(), Expr::var(x)}}, {}}, eq.sum);
        c.ac(substitute(flat.to_expr(), env_));
        return {flat, c.done()};
    }

    Out run_sum(Expr e, const Subst& theta) {
        Out a = run(e.left(), theta);
        Out b = run(e.right(), theta);
        Expr v = sum(p_.lhs(a.anchor), p_.lhs(b.anchor));
        auto [va, ra] = unfold(a.x);
        auto [vb, rb] = unfold(b.x);
        SesEquation eq;
        eq.sum = merge(va, vb);
        Chain c(p_, v);
        c.then_at({kL}, a.anchor).then_at({kR}, b.anchor).then_at({kL}, ra).then_at({kR}, rb);
        c.ac(substitute(eq.rhs(), env_));
        return {add(eq, v, c.done()), p_.refl(v)};
    }

    Out run_loop(Expr e, const Subst& theta) {
        Out c0 = run(e.body().right(), theta);
        Expr v = literal_loop(e.binder(), p_.lhs(c0.anchor));
        expect(v == substitute(e, theta), "loop instance renamed a binder");
        const SesEquation inner = sys.eqs.at(c0.x);
        SesEquation eq;
        eq.loop = true;
        eq.binder = names_.fresh();
        eq.sum = inner.sum;
        Expr target = substitute(eq.rhs(), env_);
        Chain c(p_, v);
        c.then_at({kRec, kR}, c0.anchor).then_at({kRec, kR}, fam.proof.at(c0.x));
        if (inner.loop) {
            Expr k = substitute(inner.sum.to_expr(), env_);
            c.then(p_.ac_alpha(c.current(), loop(loop(k))));
            c.then(prove_D6(p_, k));
        }
        c.then(p_.ac_alpha(c.current(), target));
        return {add(eq, v, c.done()), p_.refl(v)};
    }

    Out run_rec(Expr e, const Subst& theta) {
        Symbol w = e.binder();
        Expr m = substitute(e, theta);
        expect(m.is_rec() && m.binder() == w, "recursion instance renamed a binder");
        Subst inner = theta;
        inner[w] = m;
        env_[w] = m;
        Out c0 = run(e.body(), inner);
        Symbol x = c0.x;
        Prover::Ref r1 = p_.axiom(AxiomId::R1, Meta().e("E", m.body()).x("X", w));
        expect(p_.rhs(r1) == p_.lhs(c0.anchor), "unfolding does not match the body instance");
        const SesEquation head = sys.eqs.at(x);
        expect(std::find(head.sum.vars.begin(), head.sum.vars.end(), w) == head.sum.vars.end(),
               "guarded binder exposed by its body");

        // m = replacement{env} where the replacement stands for w in every equation.
        Chain k(p_, m);
        k.then(r1).then(c0.anchor);
        auto [repl, unfolded] = unfold(x);
        k.then(unfolded);
        Prover::Ref kr = k.done();
        expect(p_.rhs(kr) == substitute(repl.to_expr(), env_), "replacement instance mismatch");

        Subst right = env_;
        right[w] = p_.rhs(kr);
        auto hook = [&](Expr node) -> std::optional<Prover::Ref> {
            if (node.is_var() && node.var_name() == w) return kr;
            return std::nullopt;
        };
        for (Symbol y : sys.formals) {
            SesEquation& eq = sys.eqs.at(y);
            auto it = std::find(eq.sum.vars.begin(), eq.sum.vars.end(), w);
            if (it == eq.sum.vars.end()) continue;
            Expr old_rhs = eq.rhs();
            eq.sum.vars.erase(it);
            eq.sum = merge(eq.sum, repl);
            Prover::Ref step = p_.rewrite_template(old_rhs, env_, right, {w}, hook);
            Prover::Ref tidy = p_.ac_alpha(p_.rhs(step), instance(y));
            fam.proof[y] = p_.trans({fam.proof.at(y), step, tidy});
        }
        return {x, p_.trans(r1, c0.anchor)};
    }

    Prover& p_;
    NameSupply& names_;
    Subst env_;  // formals to values, recursion binders to their instances
    std::unordered_map<const Node*, Out> closed_;
};

}  // namespace

SesBuild prove_ses(Prover& p, NameSupply& names, Expr e) {
    if (!is_guarded_expr(e)) throw NotGuarded("not a guarded expression: " + print(e));
    names.reserve(e);
    Prover::Ref cleaned = Cleaner(p, names)(e);
    Extractor ex(p, names);
    auto out = ex.run(p.rhs(cleaned), {});
    SesBuild b;
    b.system = std::move(ex.sys);
    b.root = out.x;
    b.family = std::move(ex.fam);
    b.anchor = p.trans(cleaned, out.anchor);
    for (Symbol x : b.system.formals) {
        Prover::Ref r = b.family.proof.at(x);
        expect(p.lhs(r) == b.family.value.at(x) &&
                   p.rhs(r) == substitute(b.system.eqs.at(x).rhs(), b.family.value),
               "extracted family does not solve " + name_of(x));
    }
    expect(b.system.system().guarded(), "extracted system is not guarded");
    return b;
}

SesExtraction extract_ses(Expr e) {
    Prover p;
    NameSupply names;
    SesBuild b = prove_ses(p, names, e);
    SesExtraction out;
    out.system = std::move(b.system);
    out.root = b.root;
    out.solution = std::move(b.family.value);
    for (auto& [x, r] : b.family.proof) out.step[x] = r;
    out.anchor = b.anchor;
    out.proof = std::move(p.d);
    return out;
}

// ---------------------------------------------------------------- quotienting

Lts ses_semantics(const SesSystem& s) {
    std::map<Symbol, std::uint32_t> index;
    for (std::size_t i = 0; i < s.formals.size(); ++i) index[s.formals[i]] = std::uint32_t(i);
    std::vector<Transition> ts;
    std::vector<std::vector<Symbol>> exposure(s.formals.size());
    for (std::size_t i = 0; i < s.formals.size(); ++i) {
        const SesEquation& eq = s.eqs.at(s.formals[i]);
        std::uint32_t src = std::uint32_t(i);
        if (eq.loop) ts.push_back({src, Action::tau(), src});
        for (auto& [a, body] : eq.sum.prefixed) ts.push_back({src, a, index.at(body.var_name())});
        exposure[i] = eq.sum.vars;
        std::sort(exposure[i].begin(), exposure[i].end());
    }
    return Lts::from_edges(s.formals.size(), std::move(ts), std::move(exposure), {0});
}

Partition formal_classes(const SesSystem& s) { return bisimilarity(ses_semantics(s), EquivKind::Dpbb); }

namespace {

std::map<Symbol, std::uint32_t> class_map(const SesSystem& s, const Partition& classes) {
    std::map<Symbol, std::uint32_t> m;
    for (std::size_t i = 0; i < s.formals.size(); ++i) m[s.formals[i]] = classes.class_of[i];
    return m;
}

}  // namespace

Derivatives derivatives(const SesSystem& s, const Partition& classes, Symbol x) {
    auto cls = class_map(s, classes);
    Derivatives d;
    const SesEquation& eq = s.eqs.at(x);
    for (auto& [a, body] : eq.sum.prefixed) {
        if (a.is_tau() && cls.at(body.var_name()) == cls.at(x))
            d.inner.push_back(body.var_name());
        else
            d.outer.prefixed.push_back({a, body});
    }
    d.outer.vars = eq.sum.vars;
    return d;
}

std::vector<Symbol> bottom_variables(const SesSystem& s, const Partition& classes) {
    std::vector<Symbol> out;
    for (Symbol x : s.formals)
        if (derivatives(s, classes, x).inner.empty()) out.push_back(x);
    return out;
}

SolutionFamily prove_quotient(Prover& p, NameSupply& names, const SesSystem& s) {
    Partition classes = formal_classes(s);
    auto cls = class_map(s, classes);
    std::vector<Symbol> bottoms = bottom_variables(s, classes);
    std::vector<std::optional<Symbol>> rep(classes.num_classes);
    for (Symbol x : bottoms)
        if (!rep[cls.at(x)]) rep[cls.at(x)] = x;

    EqSystem q;
    std::vector<Symbol> z(classes.num_classes);
    Subst to_z;
    for (std::size_t c = 0; c < classes.num_classes; ++c) {
        expect(rep[c].has_value(), "class without a bottom variable");
        z[c] = names.fresh();
        q.formals.push_back(z[c]);
    }
    for (Symbol x : s.formals) to_z[x] = Expr::var(z[cls.at(x)]);
    for (std::size_t c = 0; c < classes.num_classes; ++c) q.rhs[z[c]] = substitute(s.eqs.at(*rep[c]).rhs(), to_z);

    Elimination el(q);
    SolutionFamily qs = el.prove_solution(p);
    Subst beta;
    for (Symbol x : s.formals) beta[x] = qs.value.at(z[cls.at(x)]);
    auto inst = [&](Symbol x) { return substitute(s.eqs.at(x).rhs(), beta); };
    // two[c]: B_c = rhs_{rep c}{beta}
    std::vector<Prover::Ref> two(classes.num_classes);
    for (std::size_t c = 0; c < classes.num_classes; ++c) {
        two[c] = qs.proof.at(z[c]);
        expect(p.rhs(two[c]) == inst(*rep[c]), "quotient solution does not compose");
    }
    auto outer_atoms = [&](Symbol x) {
        return canonical_atoms(substitute(derivatives(s, classes, x).outer.to_expr(), beta));
    };

    // tau.rhs_x{beta} = tau.rhs_{rep}{beta}
    auto same_class_step = [&](Symbol x) -> Prover::Ref {
        std::uint32_t c = cls.at(x);
        Symbol r = *rep[c];
        Expr fx = inst(x), fr = inst(r);
        if (x == r) return p.refl(tau(fx));
        const SesEquation& ex = s.eqs.at(x);
        const SesEquation& er = s.eqs.at(r);
        Chain ch(p, tau(fx));
        if (derivatives(s, classes, x).inner.empty()) {
            expect(ex.loop == er.loop, "loop shape differs between bottom variables of a class");
            ch.then_at({kPre}, p.ac_alpha(fx, fr));
            return ch.done();
        }
        Expr bc = qs.value.at(z[c]);
        Expr q_atoms = sum_of(outer_atoms(x));
        if (!ex.loop) {
            ch.ac_at({kPre}, sum(tau(bc), q_atoms));
            ch.then_at({kPre, kL, kPre}, two[c]);
            // fr = fr + its outer summands, then B absorbs the outer summands of x.
            std::optional<Prover::Ref> d2;
            Expr wide = fr;
            if (er.loop) {
                d2 = prove_D2_loop(p, fr);
                ch.then_at({kPre, kL, kPre}, *d2);
                wide = p.rhs(*d2);
            }
            ch.ac_at({kPre, kL, kPre}, sum(wide, q_atoms));
            ch.then(p.axiom(AxiomId::B, Meta().e("E", wide).e("F", q_atoms).a(Action::tau())));
            ch.ac_at({kPre}, wide);
            if (d2) ch.then_at({kPre}, p.symm(*d2));
            return ch.done();
        }
        expect(er.loop, "loop equation in a class whose bottom variable is not a loop");
        Expr e5 = sum_of(outer_atoms(r));
        Expr pp = sum(e5, q_atoms);
        const Path inner_b = {kPre, kRec, kR, kL, kPre};
        ch.then_at({kPre}, p.ac_alpha(fx, loop(sum(tau(bc), q_atoms))));
        ch.then_at(inner_b, two[c]);
        ch.then_at(inner_b, p.ac_alpha(fr, loop(pp)));
        ch.then_at({kPre}, prove_D5(p, e5, q_atoms));
        Prover::Ref d2 = prove_D2(p, pp);
        ch.then_at({kPre, kL, kPre}, d2);
        Expr eb = sum(loop(pp), e5);
        ch.ac_at({kPre, kL, kPre}, sum(eb, q_atoms));
        ch.then(p.axiom(AxiomId::B, Meta().e("E", eb).e("F", q_atoms).a(Action::tau())));
        ch.ac_at({kPre}, sum(loop(pp), pp));
        ch.then_at({kPre}, p.symm(d2));
        ch.then_at({kPre}, p.ac_alpha(loop(pp), fr));
        return ch.done();
    };

    SolutionFamily out;
    Subst tau_beta;
    for (Symbol x : s.formals) tau_beta[x] = tau(beta.at(x));
    auto is_formal = [&](Symbol y) { return s.is_formal(y); };
    for (Symbol x : s.formals) {
        std::uint32_t c = cls.at(x);
        Chain ch(p, tau(beta.at(x)));
        ch.then_at({kPre}, two[c]);
        ch.then(p.symm(same_class_step(x)));
        ch.then_at({kPre}, insert_taus(p, s.eqs.at(x).rhs(), s.formals, beta, tau_beta, is_formal));
        out.value[x] = tau_beta.at(x);
        out.proof[x] = ch.done();
    }
    return out;
}

// ---------------------------------------------------------------- completeness

Prover::Ref prove_promote(Prover& p, Expr e, Expr f) {
    if (e == f) return p.refl(tau(e));
    NameSupply names;
    names.reserve(e);
    names.reserve(f);
    SesBuild be = prove_ses(p, names, e);
    SesBuild bf = prove_ses(p, names, f);
    SesSystem s = be.system;
    for (Symbol x : bf.system.formals) {
        s.formals.push_back(x);
        s.eqs[x] = bf.system.eqs.at(x);
    }
    SolutionFamily fam = be.family;
    for (auto& [x, v] : bf.family.value) fam.value[x] = v;
    for (auto& [x, r] : bf.family.proof) fam.proof[x] = r;

    Partition classes = formal_classes(s);
    auto idx = [&](Symbol x) { return std::size_t(std::find(s.formals.begin(), s.formals.end(), x) - s.formals.begin()); };
    if (!classes.same(idx(be.root), idx(bf.root)))
        throw NotEquivalent(print(e) + " and " + print(f) + " are not dpbb-equivalent");

    EqSystem t = tau_transform(s.system());
    if (!t.guarded()) throw NotGuarded("promotion system is not guarded");

    // tau.value solves tau(S).
    SolutionFamily lifted;
    Subst tau_values;
    for (auto& [x, v] : fam.value) tau_values[x] = tau(v);
    auto is_formal = [&](Symbol y) { return s.is_formal(y); };
    for (Symbol x : s.formals) {
        Chain ch(p, tau(fam.value.at(x)));
        ch.then_at({kPre}, fam.proof.at(x));
        ch.then_at({kPre}, insert_taus(p, s.eqs.at(x).rhs(), s.formals, fam.value, tau_values, is_formal));
        lifted.value[x] = tau_values.at(x);
        lifted.proof[x] = ch.done();
    }
    SolutionFamily quotient = prove_quotient(p, names, s);
    expect(quotient.value.at(be.root) == quotient.value.at(bf.root), "quotient separates the roots");

    Elimination el(t);
    auto ul = el.prove_unique(p, lifted);
    auto uq = el.prove_unique(p, quotient);
    Chain ch(p, tau(e));
    ch.then_at({kPre}, be.anchor);
    ch.then(ul.at(be.root)).then(p.symm(uq.at(be.root))).then(uq.at(bf.root)).then(p.symm(ul.at(bf.root)));
    ch.then_at({kPre}, p.symm(bf.anchor));
    return ch.done();
}

namespace {

struct PairHash {
    std::size_t operator()(const std::pair<const Node*, const Node*>& k) const {
        return std::hash<const void*>()(k.first) * 31 + std::hash<const void*>()(k.second);
    }
};

class Absorber {
public:
    Absorber(Prover& p, std::size_t budget) : p_(p), budget_(budget) {}

    // from + into = into, for standard sums whose summands all occur in into up to dpbb.
    Prover::Ref absorb(Expr from, Expr into) {
        std::vector<Expr> atoms = summands(from);
        Expr nest = into;
        for (Expr a : atoms) nest = sum(nest, a);
        Chain c(p_, sum(from, into));
        c.ac(nest);
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            Path path(atoms.size() - 1 - i, kL);
            c.then_at(path, p_.symm(add_summand(into, atoms[i])));
        }
        return c.done();
    }

private:
    // into = into + atom
    Prover::Ref add_summand(Expr into, Expr atom) {
        if (atom.is_var()) return prove_summand(p_, into, atom.var_name());
        Action a = atom.act();
        Expr body = atom.body();
        for (const Move& m : step(into)) {
            if (m.act != a || !equivalent(m.target, body, EquivKind::Dpbb, budget_)) continue;
            Chain c(p_, into);
            c.then(prove_summand(p_, into, a, m.target));
            if (m.target != body) {
                Chain inner(p_, Expr::prefix(a, m.target));
                inner.then(p_.symm(prove_T1(p_, a, m.target)));
                inner.then_at({kPre}, promote(m.target, body));
                inner.then(prove_T1(p_, a, body));
                c.then_at({kR}, inner.done());
            }
            return c.done();
        }
        throw NotEquivalent("no matching move for " + print(atom));
    }

    Prover::Ref promote(Expr a, Expr b) {
        auto key = std::make_pair(a.node(), b.node());
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (auto it = memo_.find({b.node(), a.node()}); it != memo_.end()) return p_.symm(it->second);
        Prover::Ref r = prove_promote(p_, a, b);
        memo_.emplace(key, r);
        return r;
    }

    Prover& p_;
    std::size_t budget_;
    std::unordered_map<std::pair<const Node*, const Node*>, Prover::Ref, PairHash> memo_;
};

}  // namespace

Prover::Ref prove_congruent(Prover& p, Expr e, Expr f, std::size_t budget) {
    if (e == f) return p.refl(e);
    RootedResult rr = rooted_equal(e, f, budget);
    if (!rr.equal) throw NotEquivalent(rr.clause + " " + rr.detail);
    Prover::Ref se = prove_standard(p, e);
    Prover::Ref sf = prove_standard(p, f);
    Expr es = p.rhs(se), fs = p.rhs(sf);
    Absorber ab(p, budget);
    Prover::Ref e_into_f = ab.absorb(es, fs);
    Prover::Ref f_into_e = ab.absorb(fs, es);
    Chain c(p, e);
    c.then(se).then(p.symm(f_into_e)).ac(sum(es, fs)).then(e_into_f).then(p.symm(sf));
    return c.done();
}

CongruenceResult prove_congruent(Expr e, Expr f, std::size_t budget) {
    CongruenceResult out;
    out.refutation = rooted_equal(e, f, budget);
    if (!out.refutation.equal) return out;
    Prover p;
    out.equal = true;
    out.proof = p.finish(prove_congruent(p, e, f, budget));
    return out;
}

}  // namespace dbc
