#include <catch_amalgamated.hpp>

#include "dbc/equiv.hpp"
#include "dbc/proof.hpp"
#include "dbc/prover.hpp"
#include "gen.hpp"

using namespace dbc;
using dbc::testing::Gen;
using dbc::testing::GenConfig;

namespace {

void require_valid(const Derivation& d, Expr l, Expr r) {
    CheckResult res = check(d);
    INFO("step " << res.step << ": " << res.reason);
    REQUIRE(res.ok);
    REQUIRE(d.conclusion().lhs == l);
    REQUIRE(d.conclusion().rhs == r);
}

}  // namespace

TEST_CASE("axiom B instance", "[proof]") {
    Meta m = Meta().e("E", parse("a.0")).e("F", parse("b.0")).a(Action::visible("c"));
    Equation eq = instantiate_axiom(AxiomId::B, m);
    CHECK(eq.lhs == parse("c.(tau.(a.0 + b.0) + b.0)"));
    CHECK(eq.rhs == parse("c.(a.0 + b.0)"));
}

TEST_CASE("axiom R3 instance", "[proof]") {
    Equation eq = instantiate_axiom(AxiomId::R3, Meta().e("E", parse("a.0")).x("X", intern("X")));
    CHECK(eq.lhs == parse("rec X. (X + a.0)"));
    CHECK(eq.rhs == parse("rec X. a.0"));
}

TEST_CASE("side conditions are enforced", "[proof]") {
    Symbol x = intern("X");
    CHECK_THROWS_AS(instantiate_axiom(AxiomId::R0, Meta().e("E", parse("a.Y")).x("X", x).x("Y", intern("Y"))),
                    SideCondition);
    CHECK_THROWS_AS(instantiate_axiom(AxiomId::R4, Meta().e("E", parse("a.X")).e("F", parse("0")).e("G", parse("0")).x("X", x)),
                    SideCondition);
    CHECK_THROWS_AS(instantiate_axiom(AxiomId::S1, Meta().e("E", parse("0"))), MissingMeta);

    Derivation d;
    Expr e = parse("tau.X");
    Expr f = parse("rec X. tau.X");
    d.steps.push_back({f, substitute(e, x, f), Just{}});
    Just j;
    j.kind = JustKind::Axiom;
    j.axiom = AxiomId::R2;
    j.meta = Meta().e("E", e).e("F", f).x("X", x);
    j.premise = 0;
    d.steps.push_back({f, Expr::rec(x, e), j});
    CHECK_FALSE(check(d).ok);
}

TEST_CASE("checker rejects broken steps", "[proof]") {
    Derivation t1 = derive_T1(Action::visible("a"), parse("b.0"));
    REQUIRE(check(t1).ok);

    SECTION("swapped axiom sides") {
        for (auto& s : t1.steps)
            if (s.just.kind == JustKind::Axiom) {
                std::swap(s.lhs, s.rhs);
                break;
            }
        CHECK_FALSE(check(t1).ok);
    }
    SECTION("trans endpoints mismatch") {
        Derivation d;
        d.steps.push_back({parse("a.0"), parse("a.0"), Just{}});
        d.steps.push_back({parse("b.0"), parse("b.0"), Just{}});
        Just j;
        j.kind = JustKind::Trans;
        j.a = 0;
        j.b = 1;
        d.steps.push_back({parse("a.0"), parse("b.0"), j});
        CheckResult r = check(d);
        CHECK_FALSE(r.ok);
        CHECK(r.step == 2);
    }
}

TEST_CASE("T1 chain", "[proof][derived]") {
    Expr e = parse("b.0 + X");
    Derivation d = derive_T1(Action::visible("a"), e);
    require_valid(d, parse("a.tau.(b.0 + X)"), parse("a.(b.0 + X)"));
    Derivation dt = derive_T1(Action::tau(), e);
    require_valid(dt, parse("tau.tau.(b.0 + X)"), parse("tau.(b.0 + X)"));
}

TEST_CASE("certificate text round trip", "[proof]") {
    Derivation d = derive_D0(parse("tau.X + b.0"), parse("a.0"), intern("X"));
    std::string text = write_certificate(d);
    Derivation back = read_certificate(text);
    REQUIRE(back.steps.size() == d.steps.size());
    CHECK(check(back).ok);
    CHECK(write_certificate(back) == text);
}

TEST_CASE("summand absorption", "[proof][derived]") {
    Expr e = parse("a.0 + b.0");
    require_valid(derive_summand_absorption(e, Action::visible("a"), parse("0")), e, parse("a.0 + b.0 + a.0"));
    Expr x = parse("X");
    require_valid(derive_summand_absorption(x, intern("X")), x, parse("X + X"));
    CHECK_THROWS_AS(derive_summand_absorption(parse("rec X. (a.0 + X)"), intern("X")), MoveNotPresent);

    Expr r = parse("rec Y. (a.Y + rec Z. (b.Y + tau.Z + W))");
    for (const Move& m : step(r)) {
        Derivation d = derive_summand_absorption(r, m.act, m.target);
        require_valid(d, r, Expr::sum(r, Expr::prefix(m.act, m.target)));
    }
    require_valid(derive_summand_absorption(r, intern("W")), r, Expr::sum(r, parse("W")));
}

TEST_CASE("D0", "[proof][derived]") {
    Symbol x = intern("X");
    require_valid(derive_D0(parse("X"), parse("0"), x), parse("rec X. (tau.X + 0)"), parse("rec X. (tau.(X + X) + 0)"));
    Expr e = parse("tau.X + b.0");
    require_valid(derive_D0(e, parse("a.0"), x), parse("rec X. (tau.(tau.X + b.0) + a.0)"),
                  parse("rec X. (tau.(X + (tau.X + b.0)) + a.0)"));
    CHECK_THROWS_AS(derive_D0(parse("a.X"), parse("0"), x), ProofError);
}

TEST_CASE("ac normalization", "[proof]") {
    Gen g(7, GenConfig{.max_size = 10});
    for (int i = 0; i < 200; ++i) {
        std::vector<Expr> atoms;
        int n = g.uniform(1, 6);
        for (int k = 0; k < n; ++k) atoms.push_back(g.coin(0.2) ? Expr::nil() : g.expr());
        std::vector<Expr> shuffled = atoms;
        std::shuffle(shuffled.begin(), shuffled.end(), g.rng());
        if (g.coin(0.5)) shuffled.push_back(atoms[0]);
        auto build = [&](const std::vector<Expr>& xs) {
            Expr acc = xs[0];
            for (std::size_t k = 1; k < xs.size(); ++k) acc = g.coin(0.5) ? Expr::sum(acc, xs[k]) : Expr::sum(xs[k], acc);
            return acc;
        };
        Expr from = build(atoms), to = build(shuffled);
        if (canonical_atoms(from) != canonical_atoms(to)) continue;
        Prover p;
        Prover::Ref r = p.ac(from, to);
        require_valid(p.finish(r), from, to);
    }
}

TEST_CASE("random derived rules are sound", "[proof][property]") {
    Gen g(11, GenConfig{.max_size = 8});
    for (int i = 0; i < 60; ++i) {
        Expr e = g.expr();
        Action a = g.action();
        Derivation d = derive_T1(a, e);
        REQUIRE(check(d).ok);
        CHECK(rooted_equal(d.conclusion().lhs, d.conclusion().rhs).equal);
        for (const Move& m : step(e)) {
            Derivation s = derive_summand_absorption(e, m.act, m.target);
            REQUIRE(check(s).ok);
        }
        Symbol x = intern("W");
        if (tau_exposes(x, e)) {
            Derivation d0 = derive_D0(e, g.expr(), x);
            REQUIRE(check(d0).ok);
            CHECK(rooted_equal(d0.conclusion().lhs, d0.conclusion().rhs).equal);
        }
    }
}
