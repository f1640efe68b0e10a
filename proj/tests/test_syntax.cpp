#include <catch_amalgamated.hpp>

#include "dbc/syntax.hpp"
#include "gen.hpp"

using namespace dbc;
using dbc::testing::Gen;
using dbc::testing::GenConfig;

TEST_CASE("parser builds the expected trees", "[syntax]") {
    Expr a0 = Expr::prefix(Action::visible("a"), Expr::nil());
    Expr b0 = Expr::prefix(Action::visible("b"), Expr::nil());
    CHECK(parse("0") == Expr::nil());
    CHECK(parse("a.0") == a0);
    CHECK(parse("a.0 + b.0 + W") == Expr::sum(Expr::sum(a0, b0), Expr::var("W")));
    CHECK(parse("tau.a.0") == Expr::prefix(Action::tau(), a0));
    CHECK(parse("tau* a.0") == loop(a0));
    CHECK(parse("rec X. a.X + b.0") == Expr::rec(intern("X"), parse("a.X + b.0")));
    CHECK(parse("(rec X. a.X) + b.0") == Expr::sum(parse("rec X. a.X"), b0));
    CHECK(parse("a.(b.0 + W)") == Expr::prefix(Action::visible("a"), Expr::sum(b0, Expr::var("W"))));
    CHECK(parse("  a.0 # trailing comment\n") == a0);
}

TEST_CASE("parser rejects malformed input", "[syntax]") {
    for (const char* bad : {"", "a.", "(a.0", "a.0 b.0", "rec a. 0", "rec X a.X", "a + 0", "a.0)"})
        CHECK_THROWS_AS(parse(bad), ParseError);
}

TEST_CASE("hash consing identifies equal trees", "[syntax]") {
    CHECK(parse("rec X.(a.X + tau.W)") == parse("rec X. (a.X + tau.W)"));
    CHECK(parse("a.0 + b.0") != parse("b.0 + a.0"));
    CHECK(parse("rec X.a.X") != parse("rec Y.a.Y"));
}

TEST_CASE("print then parse is the identity", "[syntax][random]") {
    Gen g(1, GenConfig{.max_size = 25, .free_vars = 2});
    for (int i = 0; i < 500; ++i) {
        Expr e = g.expr();
        INFO(print(e));
        CHECK(parse(print(e)) == e);
    }
}

TEST_CASE("free variables and substitution", "[syntax]") {
    Expr e = parse("rec X.(a.X + Y) + W");
    CHECK(free_vars(e) == std::set<Symbol>{intern("W"), intern("Y")});
    CHECK(substitute(e, intern("W"), parse("b.0")) == parse("rec X.(a.X + Y) + b.0"));
    // Substituting X for Y must not be captured by rec X.
    Expr s = substitute(parse("rec X.(a.X + Y)"), intern("Y"), Expr::var("X"));
    REQUIRE(s.is_rec());
    CHECK(s.binder() != intern("X"));
    CHECK(s.has_free(intern("X")));
    CHECK(substitute(parse("rec X.a.X"), intern("X"), parse("b.0")) == parse("rec X.a.X"));
}

TEST_CASE("loop recognition", "[syntax]") {
    CHECK(is_literal_loop(parse("rec Z.(tau.Z + a.0)")));
    CHECK_FALSE(is_literal_loop(parse("rec Z.(a.0 + tau.Z)")));
    CHECK(is_loop(parse("rec Z.(tau.Z + a.0 + b.0)")));
    CHECK_FALSE(is_loop(parse("rec Z.(tau.Z + a.Z)")));
    auto parts = as_loop(parse("rec Z.((tau.Z + a.0) + b.0)"));
    REQUIRE(parts);
    CHECK(parts->rest == parse("a.0 + b.0"));
}

TEST_CASE("guardedness", "[syntax]") {
    CHECK(is_guarded_in(intern("X"), parse("a.X")));
    CHECK_FALSE(is_guarded_in(intern("X"), parse("tau.X")));
    CHECK_FALSE(is_guarded_in(intern("X"), parse("b.0 + X")));
    CHECK(is_guarded_in(intern("X"), parse("rec X. X")));
    CHECK(is_guarded_expr(parse("rec X.a.X")));
    CHECK(is_guarded_expr(parse("tau* a.0")));
    CHECK_FALSE(is_guarded_expr(parse("rec X.(tau.X + a.X)")));
    CHECK_FALSE(is_guarded_expr(parse("rec X. X")));
}

TEST_CASE("standard sums", "[syntax]") {
    auto v = as_standard_sum(parse("b.0 + W + a.rec X.a.X + W"));
    REQUIRE(v);
    CHECK(v->vars == std::vector<Symbol>{intern("W")});
    CHECK(v->prefixed.size() == 2);
    CHECK(as_standard_sum(v->to_expr()) == v);
    CHECK_FALSE(as_standard_sum(parse("rec X.a.X")));
    CHECK_FALSE(as_standard_sum(parse("a.rec X.(tau.X + a.X)")));
    CHECK(as_standard_sum(parse("0"))->prefixed.empty());
}

TEST_CASE("name supply avoids reserved names", "[syntax]") {
    NameSupply ns;
    ns.reserve(parse("rec _g0. a._g0 + _g1"));
    Symbol a = ns.fresh(), b = ns.fresh();
    CHECK(a != b);
    for (Symbol s : {a, b}) CHECK((s != intern("_g0") && s != intern("_g1")));
}
