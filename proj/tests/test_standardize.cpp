#include <catch_amalgamated.hpp>

#include "dbc/equiv.hpp"
#include "dbc/standardize.hpp"
#include "gen.hpp"

using namespace dbc;
using dbc::testing::Gen;
using dbc::testing::GenConfig;

namespace {

void require_valid(const Derivation& d) {
    CheckResult res = check(d);
    INFO("step " << res.step << ": " << res.reason);
    REQUIRE(res.ok);
}

void require_sound(const Derivation& d) {
    require_valid(d);
    RootedResult r = rooted_equal(d.conclusion().lhs, d.conclusion().rhs);
    INFO(print(d.conclusion().lhs) << "  =  " << print(d.conclusion().rhs) << "  " << r.detail);
    REQUIRE(r.equal);
}

}  // namespace

TEST_CASE("D1 and D6 on a.0", "[standardize][derived]") {
    Expr a0 = parse("a.0");
    Derivation d1 = derive_D(1, {a0}, intern("X"));
    require_valid(d1);
    CHECK(d1.conclusion().lhs == parse("tau* a.0"));
    CHECK(d1.conclusion().rhs == parse("tau.tau* a.0 + a.0"));
    Derivation d6 = derive_D(6, {a0}, intern("X"));
    require_valid(d6);
    CHECK(d6.conclusion().lhs == parse("tau* tau* a.0"));
    CHECK(d6.conclusion().rhs == parse("tau* a.0"));
}

TEST_CASE("D2 to D5 on fixed operands", "[standardize][derived]") {
    Symbol x = intern("X");
    Expr e = parse("a.X"), f = parse("b.0 + W"), g = parse("tau.c.0");
    Derivation d2 = derive_D(2, {e}, x);
    require_sound(d2);
    Derivation d3 = derive_D(3, {e, f}, x);
    require_sound(d3);
    CHECK(d3.conclusion().lhs == parse("rec X. (tau.(X + a.X) + (b.0 + W))"));
    CHECK(d3.conclusion().rhs == Expr::rec(x, Expr::sum(Expr::prefix(Action::tau(), loop(Expr::sum(e, f))), f)));
    require_sound(derive_D(4, {e, f, g}, x));
    require_sound(derive_D(5, {e, f}, x));
    CHECK_THROWS(derive_D(4, {e}, x));
}

TEST_CASE("full exposure unfolds guarded recursions", "[standardize]") {
    Symbol x = intern("X");
    Expr e = parse("tau.rec Y. (tau.X + a.Y)");
    Rewritten r = fully_expose(x, e);
    require_sound(r.proof);
    CHECK(r.result == parse("tau.(tau.X + a.rec Y. (tau.X + a.Y))"));
    CHECK(is_fully_exposed(x, r.result));

    Expr closed = parse("a.0 + tau.b.0");
    Rewritten same = fully_expose(x, closed);
    CHECK(same.result == closed);
}

TEST_CASE("exposed lemma cases", "[standardize]") {
    Symbol x = intern("X");
    Expr f = parse("a.0");
    Rewritten v = expose_to_summand(x, parse("X"), f);
    CHECK(v.result == Expr::nil());
    require_sound(v.proof);
    Rewritten t = expose_to_summand(x, parse("tau.X"), f);
    require_sound(t.proof);
    CHECK(is_guarded_in(x, t.result));
    Rewritten s = expose_to_summand(x, parse("tau.(X + b.X) + c.X + tau* (X + d.0)"), f);
    require_sound(s.proof);
    CHECK(is_guarded_in(x, s.result));
    CHECK_THROWS(expose_to_summand(x, parse("a.X"), f));
}

TEST_CASE("standardize small cases", "[standardize]") {
    Standardized a = standardize(parse("a.0"));
    CHECK(a.sum.to_expr() == parse("a.0"));
    Standardized x = standardize(parse("X"));
    CHECK(x.sum.vars == std::vector<Symbol>{intern("X")});
    Expr l = parse("rec X. (tau.X + a.0)");
    Standardized s = standardize(l);
    require_sound(s.proof);
    CHECK(s.proof.conclusion().lhs == l);
}

TEST_CASE("derived rules on random operands", "[standardize][property]") {
    Gen g(21, GenConfig{.max_size = 6});
    Symbol x = intern("X");
    for (int i = 0; i < 25; ++i) {
        Expr e = g.expr(), f = g.expr(), h = g.expr();
        for (int k = 1; k <= 6; ++k) {
            std::vector<Expr> ops;
            if (k == 1 || k == 2 || k == 6) ops = {e};
            else if (k == 4) ops = {e, f, h};
            else ops = {e, f};
            require_sound(derive_D(k, ops, x));
        }
    }
}

TEST_CASE("standardize random expressions", "[standardize][property]") {
    Gen g(5, GenConfig{.max_size = 14});
    for (int i = 0; i < 120; ++i) {
        Expr e = g.expr();
        INFO(print(e));
        Standardized s = standardize(e);
        require_sound(s.proof);
        CHECK(s.proof.conclusion().lhs == e);
        CHECK(as_standard_sum(s.proof.conclusion().rhs).has_value());
    }
}
