#include "dbc/prover.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "dbc/semantics.hpp"

namespace dbc {

namespace {

Expr tau(Expr e) { return Expr::prefix(Action::tau(), e); }

Expr child(Expr e, CongPos pos) {
    switch (pos) {
        case CongPos::Prefix:
            if (e.is_prefix()) return e.body();
            break;
        case CongPos::SumL:
            if (e.is_sum()) return e.left();
            break;
        case CongPos::SumR:
            if (e.is_sum()) return e.right();
            break;
        case CongPos::RecBody:
            if (e.is_rec()) return e.body();
            break;
    }
    throw ProofError(std::string("path step ") + pos_name(pos) + " does not apply to " + print(e));
}

}  // namespace

Expr subterm(Expr e, const Path& path) {
    for (CongPos p : path) e = child(e, p);
    return e;
}

Expr replace_at(Expr e, const Path& path, Expr by) {
    if (path.empty()) return by;
    Path rest(path.begin() + 1, path.end());
    return plug(make_context(e, path[0]), path[0], replace_at(child(e, path[0]), rest, by));
}

// ---------------------------------------------------------------- Prover

Prover::Ref Prover::push(Expr l, Expr r, Just j) {
    d.steps.push_back({l, r, std::move(j)});
    return d.steps.size() - 1;
}

Prover::Ref Prover::refl(Expr e) { return push(e, e, Just{}); }

Prover::Ref Prover::symm(Ref r) {
    if (trivial(r)) return r;
    const Just& j = d.steps[r].just;
    if (j.kind == JustKind::Symm) return j.a;
    Just s;
    s.kind = JustKind::Symm;
    s.a = r;
    return push(rhs(r), lhs(r), s);
}

Prover::Ref Prover::trans(Ref a, Ref b) {
    if (rhs(a) != lhs(b))
        throw ProofError("trans mismatch: " + print(rhs(a)) + "  vs  " + print(lhs(b)));
    if (trivial(a)) return b;
    if (trivial(b)) return a;
    if (lhs(a) == rhs(b)) return refl(lhs(a));
    Just t;
    t.kind = JustKind::Trans;
    t.a = a;
    t.b = b;
    return push(lhs(a), rhs(b), t);
}

Prover::Ref Prover::trans(std::initializer_list<Ref> rs) {
    auto it = rs.begin();
    Ref acc = *it++;
    for (; it != rs.end(); ++it) acc = trans(acc, *it);
    return acc;
}

Prover::Ref Prover::axiom(AxiomId id, Meta meta, std::optional<Ref> premise) {
    Equation eq;
    try {
        eq = instantiate_axiom(id, meta);
    } catch (const std::exception& ex) {
        throw ProofError(ex.what());
    }
    if (id == AxiomId::R2) {
        if (!premise) throw ProofError("R2 without premise");
        Expr f = meta.exprs.at("F");
        if (lhs(*premise) != f || rhs(*premise) != substitute(meta.exprs.at("E"), meta.names.at("X"), f))
            throw ProofError("R2 premise has the wrong shape");
    }
    Just j;
    j.kind = JustKind::Axiom;
    j.axiom = id;
    j.meta = std::move(meta);
    j.premise = premise;
    return push(eq.lhs, eq.rhs, std::move(j));
}

Prover::Ref Prover::cong(CongPos pos, Ref inner, Expr context) {
    Expr l = plug(context, pos, lhs(inner));
    if (trivial(inner)) return refl(l);
    Just j;
    j.kind = JustKind::Cong;
    j.pos = pos;
    j.a = inner;
    j.context = context;
    return push(l, plug(context, pos, rhs(inner)), std::move(j));
}

Prover::Ref Prover::at(Expr whole, const Path& path, Ref inner) {
    if (subterm(whole, path) != lhs(inner))
        throw ProofError("subterm at path is " + print(subterm(whole, path)) + ", proof is about " +
                         print(lhs(inner)));
    if (trivial(inner)) return refl(whole);
    std::vector<Expr> spine{whole};
    for (CongPos p : path) spine.push_back(child(spine.back(), p));
    Ref r = inner;
    for (std::size_t i = path.size(); i-- > 0;) r = cong(path[i], r, make_context(spine[i], path[i]));
    return r;
}

Derivation Prover::finish(Ref r) const {
    Derivation out = d;
    if (r + 1 != out.steps.size()) {
        Just t;
        t.kind = JustKind::Trans;
        out.steps.push_back({lhs(r), lhs(r), Just{}});
        t.a = out.steps.size() - 1;
        t.b = r;
        out.steps.push_back({lhs(r), rhs(r), t});
    }
    return out;
}

// ---------------------------------------------------------------- AC

// Canonical forms are left-associated sums of strictly increasing atoms.
Prover::Ref Prover::insert(Expr canon, Expr atom) {
    Expr whole = Expr::sum(canon, atom);
    if (canon.is_nil()) {
        Ref s1 = axiom(AxiomId::S1, Meta().e("E", canon).e("F", atom));
        return trans(s1, axiom(AxiomId::S4, Meta().e("E", atom)));
    }
    if (!canon.is_sum()) {
        int c = compare(atom, canon);
        if (c == 0) return axiom(AxiomId::S3, Meta().e("E", atom));
        if (c > 0) return refl(whole);
        return axiom(AxiomId::S1, Meta().e("E", canon).e("F", atom));
    }
    Expr p = canon.left(), last = canon.right();
    int c = compare(atom, last);
    if (c > 0) return refl(whole);
    // (P + c) + a = P + (c + a)
    Ref assoc = symm(axiom(AxiomId::S2, Meta().e("E", p).e("F", last).e("G", atom)));
    Expr mid = rhs(assoc);
    if (c == 0) return trans(assoc, at(mid, {CongPos::SumR}, axiom(AxiomId::S3, Meta().e("E", atom))));
    Ref swap = at(mid, {CongPos::SumR}, axiom(AxiomId::S1, Meta().e("E", last).e("F", atom)));
    Ref back = axiom(AxiomId::S2, Meta().e("E", p).e("F", atom).e("G", last));
    Ref r = trans({assoc, swap, back});
    Ref rest = insert(p, atom);
    return trans(r, at(rhs(r), {CongPos::SumL}, rest));
}

Prover::Ref Prover::merge(Expr l, Expr r) {
    if (r.is_nil()) return axiom(AxiomId::S4, Meta().e("E", l));
    if (l.is_nil()) {
        Ref s1 = axiom(AxiomId::S1, Meta().e("E", l).e("F", r));
        return trans(s1, axiom(AxiomId::S4, Meta().e("E", r)));
    }
    if (!r.is_sum()) return insert(l, r);
    // L + (R' + c) = (L + R') + c
    Ref assoc = axiom(AxiomId::S2, Meta().e("E", l).e("F", r.left()).e("G", r.right()));
    Ref inner = merge(l, r.left());
    Ref lifted = at(rhs(assoc), {CongPos::SumL}, inner);
    Ref done = trans(assoc, lifted);
    return trans(done, insert(rhs(inner), r.right()));
}

Prover::Ref Prover::normalize(Expr e) {
    if (!e.is_sum()) return refl(e);
    Ref l = normalize(e.left());
    Ref r = normalize(e.right());
    Ref both = trans(at(e, {CongPos::SumL}, l), at(Expr::sum(rhs(l), e.right()), {CongPos::SumR}, r));
    return trans(both, merge(rhs(l), rhs(r)));
}

Prover::Ref Prover::ac(Expr from, Expr to) {
    if (from == to) return refl(from);
    Ref a = normalize(from);
    Ref b = normalize(to);
    if (rhs(a) != rhs(b))
        throw ProofError("ac: summands differ between " + print(from) + "  and  " + print(to));
    return trans(a, symm(b));
}

Path sum_path(std::size_t n, std::size_t i) {
    Path path(n - 1 - (i == 0 ? 0 : i), CongPos::SumL);
    if (i > 0) path.push_back(CongPos::SumR);
    return path;
}

namespace {

Expr ac_alpha_form_at(Expr e, std::uint32_t depth, std::unordered_map<const Node*, Expr>& memo) {
    auto it = memo.find(e.node());
    if (it != memo.end()) return it->second;
    Expr out = e;
    switch (e.kind()) {
        case Kind::Nil:
        case Kind::Var: break;
        case Kind::Prefix: out = Expr::prefix(e.act(), ac_alpha_form_at(e.body(), depth, memo)); break;
        case Kind::Sum: {
            std::vector<Expr> atoms;
            for (Expr s : summands(e)) atoms.push_back(ac_alpha_form_at(s, depth, memo));
            std::sort(atoms.begin(), atoms.end(), ExprLess{});
            atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
            out = sum_of(atoms);
            break;
        }
        case Kind::Rec: {
            Symbol z = intern("%" + std::to_string(depth));
            std::unordered_map<const Node*, Expr> inner;
            Expr body = substitute(e.body(), e.binder(), Expr::var(z));
            out = Expr::rec(z, ac_alpha_form_at(body, depth + 1, inner));
            break;
        }
    }
    memo.emplace(e.node(), out);
    return out;
}

}  // namespace

Expr ac_alpha_form(Expr e) {
    std::unordered_map<const Node*, Expr> memo;
    return ac_alpha_form_at(e, 0, memo);
}

Prover::Ref Prover::ac_alpha(Expr a, Expr b) {
    if (a == b) return refl(a);
    if (a.is_rec() && b.is_rec()) {
        Ref r = refl(a);
        if (a.binder() != b.binder()) {
            if (a.has_free(b.binder())) throw ProofError("ac_alpha: binder clash in " + print(a));
            r = axiom(AxiomId::R0, Meta().e("E", a.body()).x("X", a.binder()).x("Y", b.binder()));
        }
        Expr renamed = rhs(r);
        return trans(r, at(renamed, {CongPos::RecBody}, ac_alpha(renamed.body(), b.body())));
    }
    if (a.is_prefix() && b.is_prefix() && a.act() == b.act())
        return at(a, {CongPos::Prefix}, ac_alpha(a.body(), b.body()));
    if (!a.is_sum() && !b.is_sum() && !(a.is_nil() || b.is_nil()))
        throw ProofError("ac_alpha: " + print(a) + "  vs  " + print(b));
    // Rewrite the atoms of both sides to shared representatives, then use AC.
    std::vector<Expr> atoms_b = summands(b);
    std::vector<Expr> forms_b;
    for (Expr y : atoms_b) forms_b.push_back(ac_alpha_form(y));
    auto representative = [&](Expr x) {
        Expr f = ac_alpha_form(x);
        for (std::size_t j = 0; j < atoms_b.size(); ++j)
            if (forms_b[j] == f) return atoms_b[j];
        throw ProofError("ac_alpha: no counterpart for " + print(x));
    };
    auto to_representatives = [&](Expr e) {
        std::vector<Expr> atoms = summands(e), reps;
        for (Expr x : atoms) reps.push_back(representative(x));
        Expr flat = sum_of(atoms);
        Ref r = ac(e, flat);
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (atoms[i] != reps[i]) r = trans(r, at(rhs(r), sum_path(atoms.size(), i), ac_alpha(atoms[i], reps[i])));
        return r;
    };
    Ref ra = to_representatives(a);
    Ref rb = to_representatives(b);
    return trans({ra, ac(rhs(ra), rhs(rb)), symm(rb)});
}

// ---------------------------------------------------------------- templates

namespace {

struct TemplateResult {
    Expr l, r;
    std::optional<Prover::Ref> proof;
};

class TemplateRewriter {
public:
    TemplateRewriter(Prover& p, const Subst& left, const Subst& right, std::vector<Symbol> holes,
                     const Prover::Hook& hook)
        : p_(p), left_(left), right_(right), holes_(std::move(holes)), hook_(hook) {}

    TemplateResult go(Expr t) {
        if (!has_hole(t)) {
            Expr l = substitute(t, left_);
            return {l, l, std::nullopt};
        }
        auto it = memo_.find(t.node());
        if (it != memo_.end()) return it->second;
        TemplateResult res = compute(t);
        memo_.emplace(t.node(), res);
        return res;
    }

private:
    bool has_hole(Expr t) const {
        return std::any_of(holes_.begin(), holes_.end(), [&](Symbol h) { return t.has_free(h); });
    }

    TemplateResult compute(Expr t) {
        if (auto r = hook_(t)) return {p_.lhs(*r), p_.rhs(*r), r};
        switch (t.kind()) {
            case Kind::Nil:
            case Kind::Var: throw ProofError("template hole " + print(t) + " has no proof");
            case Kind::Prefix: {
                auto c = go(t.body());
                Expr ctx = Expr::prefix(t.act(), hole());
                Prover::Ref r = p_.cong(CongPos::Prefix, *c.proof, ctx);
                return {p_.lhs(r), p_.rhs(r), r};
            }
            case Kind::Sum: {
                auto a = go(t.left());
                auto b = go(t.right());
                std::optional<Prover::Ref> acc;
                if (a.proof) acc = p_.cong(CongPos::SumL, *a.proof, Expr::sum(hole(), b.l));
                if (b.proof) {
                    Prover::Ref rr = p_.cong(CongPos::SumR, *b.proof, Expr::sum(a.r, hole()));
                    acc = acc ? p_.trans(*acc, rr) : rr;
                }
                return {Expr::sum(a.l, b.l), Expr::sum(a.r, b.r), acc};
            }
            case Kind::Rec: {
                Symbol y = t.binder();
                for (const Subst* s : {&left_, &right_})
                    for (Symbol v : t.body().free_vars())
                        if (v != y && s->count(v) && s->at(v).has_free(y))
                            throw ProofError("template substitution would capture " + name_of(y));
                TemplateResult c;
                if (left_.count(y) || right_.count(y)) {
                    Subst l = left_, r = right_;
                    l.erase(y);
                    r.erase(y);
                    std::vector<Symbol> hs;
                    for (Symbol h : holes_)
                        if (h != y) hs.push_back(h);
                    TemplateRewriter inner(p_, l, r, hs, hook_);
                    c = inner.go(t.body());
                } else {
                    c = go(t.body());
                }
                if (!c.proof) return {Expr::rec(y, c.l), Expr::rec(y, c.r), std::nullopt};
                Prover::Ref r = p_.cong(CongPos::RecBody, *c.proof, Expr::rec(y, hole()));
                return {p_.lhs(r), p_.rhs(r), r};
            }
        }
        throw ProofError("unreachable");
    }

    Prover& p_;
    const Subst& left_;
    const Subst& right_;
    std::vector<Symbol> holes_;
    const Prover::Hook& hook_;
    std::unordered_map<const Node*, TemplateResult> memo_;
};

}  // namespace

Prover::Ref Prover::rewrite_template(Expr t, const Subst& left, const Subst& right,
                                     const std::vector<Symbol>& holes, const Hook& hook) {
    TemplateRewriter rw(*this, left, right, holes, hook);
    TemplateResult res = rw.go(t);
    Ref r = res.proof ? *res.proof : refl(res.l);
    Expr want_l = substitute(t, left), want_r = substitute(t, right);
    if (lhs(r) != want_l || rhs(r) != want_r) throw ProofError("template rewrite endpoints differ");
    return r;
}

// ---------------------------------------------------------------- Chain

Chain& Chain::then(Prover::Ref r) {
    if (p_.lhs(r) != cur_)
        throw ProofError("chain expected " + print(cur_) + "  got  " + print(p_.lhs(r)));
    acc_ = acc_ ? p_.trans(*acc_, r) : r;
    cur_ = p_.rhs(r);
    return *this;
}

Chain& Chain::then_at(const Path& path, Prover::Ref r) { return then(p_.at(cur_, path, r)); }

Chain& Chain::ac(Expr target) { return then(p_.ac(cur_, target)); }

Chain& Chain::ac_at(const Path& path, Expr target_sub) {
    return then_at(path, p_.ac(subterm(cur_, path), target_sub));
}

Prover::Ref Chain::done() {
    if (!acc_) acc_ = p_.refl(cur_);
    return *acc_;
}

// ---------------------------------------------------------------- T1

Prover::Ref prove_T1(Prover& p, Action a, Expr e) {
    Expr nil = Expr::nil();
    Expr e0 = Expr::sum(e, nil);
    Chain c(p, Expr::prefix(a, tau(e)));
    c.then_at({CongPos::Prefix, CongPos::Prefix}, p.symm(p.axiom(AxiomId::S4, Meta().e("E", e))));
    c.then_at({CongPos::Prefix}, p.symm(p.axiom(AxiomId::S4, Meta().e("E", tau(e0)))));
    c.then(p.axiom(AxiomId::B, Meta().e("E", e).e("F", nil).a(a)));
    c.then_at({CongPos::Prefix}, p.axiom(AxiomId::S4, Meta().e("E", e)));
    return c.done();
}

Derivation derive_T1(Action a, Expr e) {
    Prover p;
    return p.finish(prove_T1(p, a, e));
}

// ---------------------------------------------------------------- Summand

namespace {

bool has_move(Expr e, Action a, Expr t) {
    const auto& ms = step(e);
    return std::binary_search(ms.begin(), ms.end(), Move{a, t});
}

bool has_exposure(Expr e, Symbol x) {
    const auto& xs = exposes(e);
    return std::binary_search(xs.begin(), xs.end(), x);
}

// Proves B{σ} = B{σ} + a.M{σ} for a move B -a-> M by recursion on the derivation of the move.
Prover::Ref summand_move(Prover& p, Expr b, const Subst& sigma, Action a, Expr m) {
    Expr c = substitute(b, sigma);
    Expr t = Expr::prefix(a, substitute(m, sigma));
    switch (b.kind()) {
        case Kind::Prefix: return p.symm(p.axiom(AxiomId::S3, Meta().e("E", c)));
        case Kind::Sum: {
            bool left = has_move(b.left(), a, m);
            Expr side = left ? b.left() : b.right();
            Prover::Ref s = summand_move(p, side, sigma, a, m);
            Chain ch(p, c);
            ch.then_at({left ? CongPos::SumL : CongPos::SumR}, s);
            ch.ac(Expr::sum(c, t));
            return ch.done();
        }
        case Kind::Rec: {
            Symbol z = c.binder();
            Expr body = c.body();
            Prover::Ref r1 = p.axiom(AxiomId::R1, Meta().e("E", body).x("X", z));
            Expr target = substitute(m, sigma);
            for (const Move& mv : step(body)) {
                if (mv.act != a || substitute(mv.target, z, c) != target) continue;
                Prover::Ref s = summand_move(p, body, Subst{{z, c}}, a, mv.target);
                Chain ch(p, c);
                ch.then(r1).then(s).then_at({CongPos::SumL}, p.symm(r1));
                return ch.done();
            }
            throw ProofError("summand: lost track of move under " + print(c));
        }
        default: throw ProofError("summand: no move");
    }
}

Prover::Ref summand_exposure(Prover& p, Expr b, const Subst& sigma, Symbol x) {
    Expr c = substitute(b, sigma);
    switch (b.kind()) {
        case Kind::Var: return p.symm(p.axiom(AxiomId::S3, Meta().e("E", c)));
        case Kind::Sum: {
            bool left = has_exposure(b.left(), x);
            Prover::Ref s = summand_exposure(p, left ? b.left() : b.right(), sigma, x);
            Chain ch(p, c);
            ch.then_at({left ? CongPos::SumL : CongPos::SumR}, s);
            ch.ac(Expr::sum(c, Expr::var(x)));
            return ch.done();
        }
        case Kind::Rec: {
            Symbol z = c.binder();
            Prover::Ref r1 = p.axiom(AxiomId::R1, Meta().e("E", c.body()).x("X", z));
            Prover::Ref s = summand_exposure(p, c.body(), Subst{{z, c}}, x);
            Chain ch(p, c);
            ch.then(r1).then(s).then_at({CongPos::SumL}, p.symm(r1));
            return ch.done();
        }
        default: throw ProofError("summand: no exposure");
    }
}

}  // namespace

Prover::Ref prove_summand(Prover& p, Expr e, Action a, Expr target) {
    if (!has_move(e, a, target)) throw MoveNotPresent("no move " + a.name() + " -> " + print(target));
    return summand_move(p, e, {}, a, target);
}

Prover::Ref prove_summand(Prover& p, Expr e, Symbol x) {
    if (!has_exposure(e, x)) throw MoveNotPresent(print(e) + " does not expose " + name_of(x));
    return summand_exposure(p, e, {}, x);
}

Derivation derive_summand_absorption(Expr e, Action a, Expr target) {
    Prover p;
    return p.finish(prove_summand(p, e, a, target));
}

Derivation derive_summand_absorption(Expr e, Symbol x) {
    Prover p;
    return p.finish(prove_summand(p, e, x));
}

// ---------------------------------------------------------------- D0

namespace {

// Shortest tau-path from e to a state exposing x.
std::vector<Expr> tau_path(Expr e, Symbol x) {
    std::unordered_map<Expr, Expr, ExprHash> parent;
    std::deque<Expr> queue{e};
    parent.emplace(e, e);
    while (!queue.empty()) {
        Expr cur = queue.front();
        queue.pop_front();
        if (has_exposure(cur, x)) {
            std::vector<Expr> path{cur};
            while (path.back() != e) path.push_back(parent.at(path.back()));
            std::reverse(path.begin(), path.end());
            return path;
        }
        for (const Move& m : step(cur))
            if (m.act.is_tau() && parent.emplace(m.target, cur).second) {
                if (parent.size() > kDefaultBudget) throw BudgetExceeded(kDefaultBudget);
                queue.push_back(m.target);
            }
    }
    return {};
}

}  // namespace

Prover::Ref prove_D0(Prover& p, Expr e, Expr f, Symbol x) {
    std::vector<Expr> path = tau_path(e, x);
    if (path.empty()) throw ProofError("D0: " + print(e) + " does not tau-expose " + name_of(x));
    const Expr X = Expr::var(x);
    const Path body{CongPos::RecBody, CongPos::SumL, CongPos::Prefix};
    auto whole = [&](Expr inner) { return Expr::rec(x, Expr::sum(tau(inner), f)); };
    auto r4 = [&](Expr ee, Expr ff) {
        return p.axiom(AxiomId::R4, Meta().e("E", ee).e("F", ff).e("G", f).x("X", x));
    };
    const std::size_t n = path.size() - 1;
    Chain c(p, whole(e));
    // acc_i = E_i + acc_{i-1}, acc_0 = E_0
    std::vector<Expr> acc{path[0]};
    for (std::size_t i = 1; i <= n; ++i) {
        Path where = body;
        if (i > 1) where.push_back(CongPos::SumL);
        c.then_at(where, prove_summand(p, path[i - 1], Action::tau(), path[i]));
        c.ac_at(body, Expr::sum(tau(path[i]), acc.back()));
        c.then(r4(path[i], acc.back()));
        acc.push_back(Expr::sum(path[i], acc.back()));
    }
    {
        Path where = body;
        if (n > 0) where.push_back(CongPos::SumL);
        c.then_at(where, prove_summand(p, path[n], x));
    }
    // Remove E_n, ..., E_1 again.
    for (std::size_t i = n; i >= 1; --i) {
        Expr rest = Expr::sum(X, acc[i - 1]);
        c.ac_at(body, Expr::sum(path[i], rest));
        c.then(p.symm(r4(path[i], rest)));
        Expr absorbed = Expr::sum(path[i - 1], tau(path[i]));
        Expr lower = i == 1 ? absorbed : Expr::sum(absorbed, acc[i - 2]);
        Expr target = Expr::sum(X, lower);
        c.ac_at(body, target);
        Path where = body;
        where.push_back(CongPos::SumR);
        if (i > 1) where.push_back(CongPos::SumL);
        c.then_at(where, p.symm(prove_summand(p, path[i - 1], Action::tau(), path[i])));
    }
    c.ac_at(body, Expr::sum(X, e));
    return c.done();
}

Derivation derive_D0(Expr e, Expr f, Symbol x) {
    Prover p;
    return p.finish(prove_D0(p, e, f, x));
}

}  // namespace dbc
