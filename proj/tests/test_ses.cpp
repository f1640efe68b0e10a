#include <catch_amalgamated.hpp>

#include "dbc/ses.hpp"
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

void require_extraction(Expr e) {
    INFO(print(e));
    SesExtraction x = extract_ses(e);
    require_valid(x.proof);
    REQUIRE(x.system.system().guarded());
    CHECK(x.proof.steps[x.anchor].lhs == e);
    CHECK(x.proof.steps[x.anchor].rhs == x.solution.at(x.root));
    for (Symbol f : x.system.formals) {
        const ProofStep& s = x.proof.steps[x.step.at(f)];
        CHECK(s.lhs == x.solution.at(f));
        CHECK(s.rhs == substitute(x.system.eqs.at(f).rhs(), x.solution));
    }
}

}  // namespace

TEST_CASE("extraction of small terms", "[ses]") {
    for (const char* src : {"0", "W", "a.0", "a.0 + b.W", "tau* a.0", "tau* tau* a.0", "rec X.a.X",
                            "rec X.(a.X + tau* b.X)", "tau.(a.0 + tau* (b.0 + W))", "rec X.tau* (a.X + tau.b.X)",
                            "rec X.(tau.(a.X + tau* c.0) + b.rec Y.(a.Y + b.X))"})
        require_extraction(parse(src));
}

TEST_CASE("extraction rejects unguarded recursion", "[ses]") {
    CHECK_THROWS_AS(extract_ses(parse("rec X.(tau.X + a.X)")), NotGuarded);
}

TEST_CASE("equation system guardedness", "[ses]") {
    EqSystem s;
    Symbol x = intern("X");
    s.formals = {x};
    s.rhs[x] = parse("tau.X");
    CHECK_FALSE(s.guarded());
    CHECK_THROWS_AS(solve_system(s, x), NotGuarded);
    s.rhs[x] = parse("a.X");
    CHECK(s.guarded());
    Solved sol = solve_system(s, x);
    require_valid(sol.proof);
    CHECK(sol.value == parse("rec X.a.X"));
}

TEST_CASE("solutions in two orders are provably equal", "[ses]") {
    EqSystem s;
    Symbol x = intern("X"), y = intern("Y");
    s.formals = {x, y};
    s.rhs[x] = parse("a.Y + tau.Y");
    s.rhs[y] = parse("b.X + W");
    Solved s1 = solve_system(s, x, {x, y});
    Solved s2 = solve_system(s, x, {y, x});
    require_valid(s1.proof);
    require_valid(s2.proof);
    CHECK(s1.value != s2.value);
    CongruenceResult c = prove_congruent(s1.value, s2.value);
    REQUIRE(c.equal);
    require_valid(c.proof);
}

TEST_CASE("semantics and bottom variables of a system", "[ses]") {
    SesExtraction x = extract_ses(parse("tau.a.0 + a.0"));
    Partition cl = formal_classes(x.system);
    Lts lts = ses_semantics(x.system);
    CHECK(lts.num_states == x.system.formals.size());
    auto bottoms = bottom_variables(x.system, cl);
    CHECK_FALSE(bottoms.empty());
    for (Symbol b : bottoms) CHECK(derivatives(x.system, cl, b).inner.empty());
}

TEST_CASE("promotion of dpbb-equivalent terms", "[ses]") {
    for (auto [l, r] : {std::pair{"a.0", "tau.a.0"}, {"tau* a.0", "a.0 + tau.tau* a.0"},
                        {"rec X.a.X", "rec X.a.tau.X"}, {"tau.(a.0 + b.0) + b.0", "a.0 + b.0"}}) {
        Prover p;
        Prover::Ref ref = prove_promote(p, parse(l), parse(r));
        Derivation d = p.finish(ref);
        INFO(l << "  vs  " << r);
        require_valid(d);
        CHECK(d.conclusion().lhs == Expr::prefix(Action::tau(), parse(l)));
        CHECK(d.conclusion().rhs == Expr::prefix(Action::tau(), parse(r)));
    }
}

TEST_CASE("congruence proofs and refutations", "[ses]") {
    CongruenceResult ok = prove_congruent(parse("a.tau.b.0"), parse("a.b.0"));
    REQUIRE(ok.equal);
    require_valid(ok.proof);
    CongruenceResult no = prove_congruent(parse("a.0"), parse("tau.a.0"));
    CHECK_FALSE(no.equal);
    CHECK_FALSE(no.refutation.clause.empty());
}

TEST_CASE("random extractions", "[ses][random]") {
    Gen g(7, GenConfig{.max_size = 18, .guarded = true});
    for (int i = 0; i < 150; ++i) require_extraction(g.expr());
}

TEST_CASE("random congruent pairs", "[ses][random]") {
    Gen g(11, GenConfig{.max_size = 10, .guarded = true});
    for (int i = 0; i < 60; ++i) {
        Expr e = g.expr();
        Expr f = g.mutate(e, 3);
        INFO(print(e) << "  vs  " << print(f));
        CongruenceResult c = prove_congruent(e, f);
        REQUIRE(c.equal);
        require_valid(c.proof);
        CHECK(c.proof.conclusion().lhs == e);
        CHECK(c.proof.conclusion().rhs == f);
    }
}
