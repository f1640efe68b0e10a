#include "dbc/standardize.hpp"

#include <algorithm>

#include "dbc/semantics.hpp"

namespace dbc {

namespace {

Expr tau(Expr e) { return Expr::prefix(Action::tau(), e); }
Expr var(Symbol x) { return Expr::var(x); }
Expr sum(Expr a, Expr b) { return Expr::sum(a, b); }

constexpr CongPos kRec = CongPos::RecBody;
constexpr CongPos kL = CongPos::SumL;
constexpr CongPos kR = CongPos::SumR;
constexpr CongPos kPre = CongPos::Prefix;

Symbol fresh_avoiding(std::initializer_list<Expr> es, std::initializer_list<Symbol> extra) {
    std::set<Symbol> avoid(extra);
    for (Expr e : es)
        for (Symbol s : e.free_vars()) avoid.insert(s);
    return fresh_symbol(avoid);
}

Prover::Ref r1(Prover& p, Symbol x, Expr body) { return p.axiom(AxiomId::R1, Meta().e("E", body).x("X", x)); }

// Rec Y.B = B when Y is not free in B.
Prover::Ref drop_vacuous(Prover& p, Expr rec) { return r1(p, rec.binder(), rec.body()); }

// Rec Y.B with the body brought to tau.Y + rest by S1-S4.
Prover::Ref literal_loop(Prover& p, Expr l) {
    auto parts = as_loop(l);
    if (!parts) throw ProofError("not a loop: " + print(l));
    Expr lit = Expr::rec(parts->binder, sum(tau(var(parts->binder)), parts->rest));
    return p.at(l, {kRec}, p.ac(l.body(), lit.body()));
}

}  // namespace

Prover::Ref rename_binder(Prover& p, Expr rec, Symbol z) {
    if (rec.binder() == z) return p.refl(rec);
    return p.axiom(AxiomId::R0, Meta().e("E", rec.body()).x("X", rec.binder()).x("Y", z));
}

Prover::Ref prove_D1_loop(Prover& p, Expr l) {
    if (!is_literal_loop(l)) throw ProofError("D1 needs a literal loop: " + print(l));
    return r1(p, l.binder(), l.body());
}

Prover::Ref prove_D2_loop(Prover& p, Expr l) {
    Prover::Ref d1 = prove_D1_loop(p, l);
    Expr e = l.body().right();
    Chain c(p, l);
    c.then(d1).ac(sum(sum(tau(l), e), e)).then_at({kL}, p.symm(d1));
    return c.done();
}

Prover::Ref prove_D1(Prover& p, Expr e) { return prove_D1_loop(p, loop(e)); }
Prover::Ref prove_D2(Prover& p, Expr e) { return prove_D2_loop(p, loop(e)); }

Prover::Ref prove_D3(Prover& p, Symbol x, Expr e, Expr f) {
    const Expr X = var(x);
    const Expr ef = sum(e, f);
    const Expr target_loop = loop(ef);
    Symbol y = target_loop.binder();
    if (y == x) y = fresh_avoiding({e, f}, {x});
    const Expr Y = var(y);

    Chain c(p, Expr::rec(x, sum(tau(sum(X, e)), f)));
    // Vacuous Rec Y around the body, then R8 moves the tau-summand onto Y.
    Expr body0 = c.current().body();
    c.then_at({kRec}, p.symm(r1(p, y, body0)));
    c.then(p.axiom(AxiomId::R8, Meta().e("E", e).e("F", f).x("X", x).x("Y", y)));
    c.then_at({kRec}, p.symm(p.axiom(AxiomId::R4, Meta().e("E", Y).e("F", e).e("G", f).x("X", y))));
    Expr b4 = sum(tau(sum(tau(Y), e)), f);
    c.then_at({kRec}, r1(p, y, b4));
    // tau.Rec Y.(tau.(tau.Y+E)+F) = Rec Y.tau.(tau.(Y+E)+F)
    const Path inner{kRec, kL, kPre, kL};
    c.then_at(inner, p.symm(p.axiom(AxiomId::R6, Meta().e("E", sum(tau(sum(Y, e)), f)).x("X", y))));
    {
        Expr n = subterm(c.current(), inner);
        Chain m(p, n);
        m.then_at({kRec}, p.symm(p.axiom(AxiomId::S4, Meta().e("E", n.body()))));
        m.then(p.axiom(AxiomId::R4, Meta().e("E", sum(Y, e)).e("F", f).e("G", Expr::nil()).x("X", y)));
        m.then_at({kRec}, p.axiom(AxiomId::S4, Meta().e("E", tau(sum(sum(Y, e), f)))));
        m.then(p.axiom(AxiomId::R6, Meta().e("E", sum(sum(Y, e), f)).x("X", y)));
        m.ac_at({kPre, kRec}, sum(tau(Y), ef));
        m.then_at({kPre}, rename_binder(p, m.current().body(), target_loop.binder()));
        c.then_at(inner, m.done());
    }
    // Absorb with D2 and B, then undo D2.
    const Expr l = target_loop;
    Prover::Ref d2 = prove_D2_loop(p, l);
    c.then_at({kRec, kL, kPre, kL, kPre}, d2);
    c.ac_at({kRec, kL, kPre, kL, kPre}, sum(sum(l, f), e));
    c.then_at({kRec, kL}, p.axiom(AxiomId::B, Meta().e("E", sum(l, f)).e("F", e).a(Action::tau())));
    c.ac_at({kRec, kL, kPre}, sum(l, ef));
    c.then_at({kRec, kL, kPre}, p.symm(d2));
    return c.done();
}

Prover::Ref prove_D4(Prover& p, Symbol x, Expr e, Expr f, Expr g) {
    const Expr X = var(x);
    auto r5_r1 = [&](Chain& c, Expr body, Expr rest) {
        // Rec X.(tau.tau*body + rest) = Rec X.(tau.body + rest)
        Expr l = loop(body);
        c.then(p.axiom(AxiomId::R5, Meta().e("E", body).e("F", rest).x("X", x).x("Y", l.binder())));
        c.then_at({kRec, kL, kPre}, drop_vacuous(p, Expr::rec(l.binder(), body)));
    };
    Chain c(p, Expr::rec(x, sum(sum(tau(sum(X, e)), tau(sum(X, f))), g)));
    const Expr h = sum(tau(sum(X, f)), g);
    c.ac_at({kRec}, sum(tau(sum(X, e)), h));
    c.then(prove_D3(p, x, e, h));
    r5_r1(c, sum(e, h), h);
    c.ac_at({kRec, kL, kPre}, sum(tau(sum(X, f)), sum(e, g)));
    c.then(p.axiom(AxiomId::R4, Meta().e("E", sum(X, f)).e("F", sum(e, g)).e("G", h).x("X", x)));
    const Expr k = sum(sum(X, f), sum(e, g));
    const Expr h2 = sum(tau(k), g);
    c.ac_at({kRec}, sum(tau(sum(X, f)), h2));
    c.then(prove_D3(p, x, f, h2));
    r5_r1(c, sum(f, h2), h2);
    c.ac_at({kRec, kL, kPre}, sum(tau(k), sum(f, g)));
    c.then(p.axiom(AxiomId::R4, Meta().e("E", k).e("F", sum(f, g)).e("G", h2).x("X", x)));
    const Expr e3 = sum(sum(e, f), g);
    c.ac_at({kRec, kL, kPre}, sum(X, e3));
    c.ac_at({kRec, kR, kL, kPre}, sum(X, e3));
    c.ac_at({kRec}, sum(tau(sum(X, e3)), g));
    c.then(prove_D3(p, x, e3, g));
    const Expr l = loop(sum(sum(e, f), g));
    c.ac_at({kRec, kL, kPre, kRec}, l.body());
    c.then(p.symm(prove_D3(p, x, sum(e, f), g)));
    c.ac_at({kRec, kL, kPre}, sum(sum(X, e), f));
    return c.done();
}

Prover::Ref prove_D5(Prover& p, Expr e, Expr f) {
    const Expr l = loop(sum(e, f));
    const Expr lhs = loop(sum(tau(l), f));
    const Symbol x = lhs.binder();
    const Symbol y = fresh_avoiding({e, f}, {x});
    const Expr Y = var(y);
    const Expr inner = sum(tau(l), f);

    // Rec Y.(tau.(Y+E)+F) = Rec Y.(tau.Y + (tau.(Y+E)+F))
    Chain q(p, Expr::rec(y, sum(tau(sum(Y, e)), f)));
    q.ac_at({kRec, kL, kPre}, sum(sum(Y, Expr::nil()), e));
    q.then(p.symm(prove_D4(p, y, Expr::nil(), e, f)));
    q.then_at({kRec, kL, kL, kPre}, p.axiom(AxiomId::S4, Meta().e("E", Y)));
    q.ac_at({kRec}, sum(tau(Y), sum(tau(sum(Y, e)), f)));
    Prover::Ref widen = q.done();

    Chain c(p, lhs);
    c.then_at({kRec, kR}, p.symm(r1(p, y, inner)));
    c.then_at({kRec, kR}, p.symm(prove_D3(p, y, e, f)));
    c.then_at({kRec, kR}, widen);
    c.then(p.axiom(AxiomId::R7, Meta().e("E", sum(tau(sum(Y, e)), f)).x("X", x).x("Y", y)));
    c.then_at({kRec}, p.symm(widen));
    c.then_at({kRec}, prove_D3(p, y, e, f));
    c.then_at({kRec}, r1(p, y, inner));
    c.then(r1(p, x, inner));
    return c.done();
}

Prover::Ref prove_D6(Prover& p, Expr e) {
    const Expr l = loop(e);
    const Expr l0 = loop(sum(Expr::nil(), e));
    Chain c(p, loop(l));
    Prover::Ref d1 = prove_D1_loop(p, l);
    c.then_at({kRec, kR}, d1);
    c.ac_at({kRec, kR, kL, kPre, kRec}, l0.body());
    c.then(prove_D5(p, Expr::nil(), e));
    c.ac_at({kL, kPre, kRec}, l.body());
    c.then(p.symm(d1));
    return c.done();
}

Derivation derive_D(int k, const std::vector<Expr>& ops, Symbol x) {
    static const int arity[] = {0, 1, 1, 2, 3, 2, 1};
    if (k < 1 || k > 6) throw std::invalid_argument("derived rule index must be 1..6");
    if (int(ops.size()) != arity[k])
        throw std::invalid_argument("D" + std::to_string(k) + " takes " + std::to_string(arity[k]) + " operands");
    Prover p;
    Prover::Ref r = 0;
    switch (k) {
        case 1: r = prove_D1(p, ops[0]); break;
        case 2: r = prove_D2(p, ops[0]); break;
        case 3: r = prove_D3(p, x, ops[0], ops[1]); break;
        case 4: r = prove_D4(p, x, ops[0], ops[1], ops[2]); break;
        case 5: r = prove_D5(p, ops[0], ops[1]); break;
        case 6: r = prove_D6(p, ops[0]); break;
    }
    return p.finish(r);
}

// ---------------------------------------------------------------- exposure

Prover::Ref prove_fully_exposed(Prover& p, Symbol x, Expr e) {
    if (!e.has_free(x) || is_fully_exposed(x, e)) return p.refl(e);
    switch (e.kind()) {
        case Kind::Nil:
        case Kind::Var: return p.refl(e);
        case Kind::Prefix:
            return p.cong(kPre, prove_fully_exposed(p, x, e.body()), make_context(e, kPre));
        case Kind::Sum: {
            Prover::Ref l = prove_fully_exposed(p, x, e.left());
            Chain c(p, e);
            c.then_at({kL}, l);
            c.then_at({kR}, prove_fully_exposed(p, x, e.right()));
            return c.done();
        }
        case Kind::Rec: {
            Symbol y = e.binder();
            if (auto parts = as_loop(e)) {
                Chain c(p, e);
                c.then(literal_loop(p, e));
                c.then_at({kRec, kR}, prove_fully_exposed(p, x, parts->rest));
                return c.done();
            }
            if (!is_guarded_in(y, e.body())) throw NotGuarded("unguarded recursion " + print(e));
            Chain c(p, e);
            c.then_at({kRec}, prove_fully_exposed(p, x, e.body()));
            c.then(r1(p, y, c.current().body()));
            return c.done();
        }
    }
    throw ProofError("unreachable");
}

Rewritten fully_expose(Symbol x, Expr e) {
    if (!is_guarded_expr(e)) throw NotGuarded(print(e) + " is not a guarded expression");
    Prover p;
    Prover::Ref r = prove_fully_exposed(p, x, e);
    return {p.rhs(r), p.finish(r)};
}

std::pair<Expr, Prover::Ref> prove_exposed(Prover& p, Symbol x, Expr e, Expr f) {
    const Expr X = var(x);
    const Expr start = Expr::rec(x, sum(tau(e), f));
    switch (e.kind()) {
        case Kind::Var: {
            if (e.var_name() != x) break;
            Chain c(p, start);
            c.then_at({kRec, kL, kPre}, p.symm(p.axiom(AxiomId::S4, Meta().e("E", X))));
            return {Expr::nil(), c.done()};
        }
        case Kind::Prefix: {
            if (!e.act().is_tau()) break;
            Chain c(p, start);
            c.then_at({kRec, kL}, prove_T1(p, Action::tau(), e.body()));
            auto [e1, r] = prove_exposed(p, x, e.body(), f);
            c.then(r);
            return {e1, c.done()};
        }
        case Kind::Sum: {
            Expr a = e.left(), b = e.right();
            Chain c(p, start);
            c.then(prove_D0(p, e, f, x));
            c.ac_at({kRec, kL, kPre}, sum(sum(X, a), b));
            c.then(p.symm(prove_D4(p, x, a, b, f)));
            // Expose each side that still has an unguarded x.
            Expr sides[2] = {a, b};
            for (int i = 0; i < 2; ++i) {
                if (!occurs_unguarded(x, sides[i])) continue;
                Expr other = tau(sum(X, sides[1 - i]));
                Expr rest = sum(other, f);
                c.ac_at({kRec}, sum(tau(sum(X, sides[i])), rest));
                c.then(p.symm(prove_D0(p, sides[i], rest, x)));
                auto [e1, r] = prove_exposed(p, x, sides[i], rest);
                c.then(r);
                sides[i] = e1;
                c.ac_at({kRec}, sum(sum(tau(sum(X, sides[0])), tau(sum(X, sides[1]))), f));
            }
            c.then(prove_D4(p, x, sides[0], sides[1], f));
            Expr e1 = sum(sides[0], sides[1]);
            c.ac_at({kRec, kL, kPre}, sum(X, e1));
            return {e1, c.done()};
        }
        case Kind::Rec: {
            auto parts = as_loop(e);
            if (!parts) break;
            Chain c(p, start);
            c.then_at({kRec, kL, kPre}, literal_loop(p, e));
            c.then(p.axiom(AxiomId::R5, Meta().e("E", parts->rest).e("F", f).x("X", x).x("Y", parts->binder)));
            c.then_at({kRec, kL, kPre}, drop_vacuous(p, Expr::rec(parts->binder, parts->rest)));
            auto [e1, r] = prove_exposed(p, x, parts->rest, f);
            c.then(r);
            return {e1, c.done()};
        }
        case Kind::Nil: break;
    }
    throw ProofError("exposed: " + print(e) + " does not expose " + name_of(x) + " fully");
}

Rewritten expose_to_summand(Symbol x, Expr e, Expr f) {
    if (!is_guarded_expr(e)) throw NotGuarded(print(e) + " is not a guarded expression");
    if (!tau_exposes(x, e)) throw ProofError(print(e) + " does not tau-expose " + name_of(x));
    if (!is_fully_exposed(x, e)) throw ProofError(name_of(x) + " is not fully exposed in " + print(e));
    Prover p;
    auto [e1, r] = prove_exposed(p, x, e, f);
    return {e1, p.finish(r)};
}

// ---------------------------------------------------------------- standard sums

namespace {

Expr canonical_standard(Expr e) {
    auto view = as_standard_sum(e);
    if (!view) throw ProofError("not a standard sum: " + print(e));
    return view->to_expr();
}

Prover::Ref standard_rec(Prover& p, Expr e) {
    const Symbol x = e.binder();
    const Expr X = var(x);
    Chain c(p, e);
    c.then_at({kRec}, prove_standard(p, e.body()));

    std::vector<Expr> exposed, rest;
    bool has_x = false;
    for (Expr s : summands(c.current().body())) {
        if (s.is_var()) {
            if (s.var_name() == x) has_x = true;
            else rest.push_back(s);
        } else if (occurs_unguarded(x, s)) {
            exposed.push_back(s.body());
        } else {
            rest.push_back(s);
        }
    }
    Expr g = sum_of(rest);
    std::vector<Expr> items;
    for (Expr f : exposed) items.push_back(tau(f));
    Expr body = items.empty() ? g : sum(sum_of(items), g);
    if (has_x) {
        c.ac_at({kRec}, sum(X, body));
        c.then(p.axiom(AxiomId::R3, Meta().e("E", body).x("X", x)));
    } else {
        c.ac_at({kRec}, body);
    }
    if (items.empty()) {
        c.then(r1(p, x, body));
        c.ac(canonical_standard(c.current()));
        return c.done();
    }

    const std::size_t k = items.size();
    auto current_body = [&] { return sum(sum_of(items), g); };
    auto all_but = [&](std::size_t i) {
        std::vector<Expr> others;
        for (std::size_t j = 0; j < k; ++j)
            if (j != i) others.push_back(items[j]);
        return sum(sum_of(others), g);
    };
    for (std::size_t i = 0; i < k; ++i) {
        Prover::Ref fe = prove_fully_exposed(p, x, items[i].body());
        if (p.trivial(fe)) continue;
        c.ac_at({kRec}, sum(items[i], all_but(i)));
        c.then_at({kRec, kL, kPre}, fe);
        items[i] = tau(p.rhs(fe));
        c.ac_at({kRec}, current_body());
    }
    std::vector<Expr> exposed_bodies;
    for (std::size_t i = 0; i < k; ++i) {
        Expr others_rest = all_but(i);
        c.ac_at({kRec}, sum(items[i], others_rest));
        auto [e1, r] = prove_exposed(p, x, items[i].body(), others_rest);
        c.then(r);
        items[i] = tau(sum(X, e1));
        exposed_bodies.push_back(e1);
        c.ac_at({kRec}, current_body());
    }
    Expr acc = exposed_bodies[0];
    for (std::size_t j = 1; j < k; ++j) {
        std::vector<Expr> later(items.begin() + j + 1, items.end());
        Expr tail = sum(sum_of(later), g);
        c.ac_at({kRec}, sum(sum(tau(sum(X, acc)), items[j]), tail));
        c.then(prove_D4(p, x, acc, exposed_bodies[j], tail));
        acc = sum(acc, exposed_bodies[j]);
        c.ac_at({kRec, kL, kPre}, sum(X, acc));
    }
    c.ac_at({kRec}, sum(tau(sum(X, acc)), g));
    c.then(prove_D3(p, x, acc, g));
    c.then(r1(p, x, c.current().body()));
    c.ac(canonical_standard(c.current()));
    return c.done();
}

}  // namespace

Prover::Ref prove_standard(Prover& p, Expr e) {
    switch (e.kind()) {
        case Kind::Nil:
        case Kind::Var: return p.refl(e);
        case Kind::Prefix:
            if (is_guarded_expr(e.body())) return p.refl(e);
            return p.cong(kPre, prove_standard(p, e.body()), make_context(e, kPre));
        case Kind::Sum: {
            Chain c(p, e);
            c.then_at({kL}, prove_standard(p, e.left()));
            c.then_at({kR}, prove_standard(p, e.right()));
            c.ac(canonical_standard(c.current()));
            return c.done();
        }
        case Kind::Rec: return standard_rec(p, e);
    }
    throw ProofError("unreachable");
}

Standardized standardize(Expr e) {
    Prover p;
    Prover::Ref r = prove_standard(p, e);
    auto view = as_standard_sum(p.rhs(r));
    if (!view) throw ProofError("standardization produced " + print(p.rhs(r)));
    return {*view, p.finish(r)};
}

}  // namespace dbc
