#include <catch_amalgamated.hpp>

#include "dbc/semantics.hpp"
#include "gen.hpp"

using namespace dbc;
using dbc::testing::Gen;
using dbc::testing::GenConfig;

TEST_CASE("moves of small terms", "[semantics]") {
    const auto& m = step(parse("a.0 + b.W + a.0"));
    REQUIRE(m.size() == 2);
    CHECK(m[0] == Move{Action::visible("a"), Expr::nil()});
    CHECK(m[1] == Move{Action::visible("b"), Expr::var("W")});
    CHECK(step(Expr::var("W")).empty());
    CHECK(step(Expr::nil()).empty());
    Expr l = parse("tau* a.0");
    CHECK(step(l) == std::vector<Move>{{Action::tau(), l}, {Action::visible("a"), Expr::nil()}});
}

TEST_CASE("recursion steps like its unfolding", "[semantics][random]") {
    Gen g(3, GenConfig{.max_size = 16});
    for (int i = 0; i < 400; ++i) {
        Expr e = g.expr();
        if (!e.is_rec()) continue;
        Expr u = substitute(e.body(), e.binder(), e);
        INFO(print(e));
        CHECK(step(e) == step(u));
        CHECK(exposes(e) == exposes(u));
    }
}

TEST_CASE("exposure", "[semantics]") {
    CHECK(exposes(parse("W + a.V")) == std::vector<Symbol>{intern("W")});
    CHECK(exposes(parse("rec X.(a.X + W)")) == std::vector<Symbol>{intern("W")});
    CHECK(exposes(parse("tau.W")).empty());
    CHECK(tau_exposes(intern("W"), parse("tau.tau.W")));
    CHECK_FALSE(tau_exposes(intern("W"), parse("a.W")));
}

TEST_CASE("transition systems", "[semantics]") {
    Lts lts = build_lts(parse("rec X.a.X"));
    CHECK(lts.num_states == 1);
    CHECK(lts.transitions == std::vector<Transition>{{0, Action::visible("a"), 0}});
    Lts joint = build_lts({parse("a.b.0"), parse("b.0")});
    CHECK(joint.num_states == 3);
    CHECK(joint.roots.size() == 2);
    CHECK(joint.exprs[joint.roots[1]] == parse("b.0"));
    CHECK_THROWS_AS(build_lts(parse("a.b.c.0"), 2), BudgetExceeded);
}

TEST_CASE("divergence", "[semantics]") {
    Lts lts = build_lts(parse("a.tau* b.0 + tau.c.0"));
    auto div = divergent(lts);
    for (std::size_t s = 0; s < lts.num_states; ++s) CHECK(div[s] == is_loop(lts.exprs[s]));
}

TEST_CASE("Aldebaran output", "[semantics]") {
    Lts lts = build_lts(parse("a.W + tau.0"));
    std::string aut = to_aut(lts);
    CHECK(aut.rfind("des (0,2,3)\n", 0) == 0);
    CHECK(aut.find("(0,\"tau\",") != std::string::npos);
    CHECK(aut.find("exp (") != std::string::npos);
}
