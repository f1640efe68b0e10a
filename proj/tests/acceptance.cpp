#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "dbc/equiv.hpp"
#include "dbc/ses.hpp"
#include "dbc/standardize.hpp"
#include "gen.hpp"

using namespace dbc;
using dbc::testing::Gen;
using dbc::testing::GenConfig;

namespace {

constexpr int kLoopSubsumption = 20;
constexpr int kOracleLts = 500;
constexpr int kOracleStates = 6;
constexpr int kAxiomInstances = 1000;
constexpr int kRelations = 100;
constexpr int kDerivedOperands = 50;
constexpr int kStandardize = 300;
constexpr int kStandardizeSize = 25;
constexpr int kSes = 200;
constexpr int kSesSize = 15;
constexpr int kPairs = 200;
constexpr int kPairSize = 15;
constexpr std::size_t kPairStates = 200;

struct Outcome {
    int checked = 0;
    int failed = 0;
    std::string first;
    std::string note;

    void expect(bool ok, const std::string& what) {
        ++checked;
        if (ok) return;
        if (failed++ == 0) first = what;
    }
    template <class F>
    void guard(const std::string& what, F&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            expect(false, what + ": " + e.what());
        }
    }
};

bool sound(const Derivation& d, Expr lhs, Expr rhs) {
    if (d.empty() || !check(d).ok) return false;
    Equation c = d.conclusion();
    return c.lhs == lhs && c.rhs == rhs && rooted_equal(lhs, rhs).equal;
}

bool sound(const Derivation& d) { return !d.empty() && sound(d, d.conclusion().lhs, d.conclusion().rhs); }

std::string show(Expr e, Expr f) { return print(e) + "  vs  " + print(f); }

std::vector<Lts> oracle_corpus() {
    Gen g(101, GenConfig{.tau_bias = 0.5});
    std::vector<Lts> out;
    for (int i = 0; i < kOracleLts; ++i) out.push_back(g.lts(g.uniform(1, kOracleStates), 10));
    return out;
}

const std::vector<EquivKind> kKinds = {EquivKind::Strong, EquivKind::Branching, EquivKind::Dpbb};

Outcome landmark_examples() {
    Outcome o;
    Expr l = parse("rec X.(tau.X + a.0)"), r = parse("tau.a.0");
    o.expect(equivalent(l, r, EquivKind::Branching), "divergent loop not branching equivalent");
    o.expect(!equivalent(l, r, EquivKind::Dpbb), "divergent loop dpbb equivalent");
    o.expect(equivalent(parse("a.0"), parse("tau.a.0"), EquivKind::Dpbb), "a.0 vs tau.a.0 not dpbb");
    o.expect(!rooted_equal(parse("a.0"), parse("tau.a.0")).equal, "a.0 vs tau.a.0 rooted equal");
    o.expect(!equivalent(parse("a.0 + b.0"), parse("tau.a.0 + b.0"), EquivKind::Dpbb), "a.0+b.0 vs tau.a.0+b.0 dpbb");
    Gen g(103, GenConfig{.max_size = 8});
    for (int i = 0; i < kLoopSubsumption; ++i) {
        Expr e = g.expr(), f = g.expr();
        Expr lhs = Expr::sum(Expr::prefix(Action::tau(), Expr::sum(e, f)), f);
        o.guard(show(e, f), [&] { o.expect(equivalent(lhs, Expr::sum(e, f), EquivKind::Dpbb), show(e, f)); });
    }
    return o;
}

Outcome oracle_agreement(const std::vector<Lts>& corpus) {
    Outcome o;
    for (const Lts& lts : corpus)
        for (EquivKind k : kKinds)
            o.expect(bisimilarity(lts, k) == brute_oracle(lts, k), std::string(kind_name(k)) + "\n" + to_aut(lts));
    return o;
}

Outcome axiom_soundness() {
    Outcome o;
    Gen g(107, GenConfig{.max_size = 6});
    for (int i = 0; i < kAxiomInstances; ++i) {
        AxiomId id = AxiomId(i % 14);
        o.guard(axiom_name(id), [&] {
            Equation eq = g.axiom_instance(id);
            o.expect(rooted_equal(eq.lhs, eq.rhs).equal, std::string(axiom_name(id)) + ": " + show(eq.lhs, eq.rhs));
        });
    }
    return o;
}

Outcome hierarchy(const std::vector<Lts>& corpus) {
    Outcome o;
    for (const Lts& lts : corpus) {
        PairRelation s = bisimilarity(lts, EquivKind::Strong).relation();
        PairRelation d = bisimilarity(lts, EquivKind::Dpbb).relation();
        PairRelation b = bisimilarity(lts, EquivKind::Branching).relation();
        o.expect(s.subset_of(d) && d.subset_of(b), "hierarchy\n" + to_aut(lts));
    }
    Gen g(109, GenConfig{.tau_bias = 0.5});
    for (int i = 0; i < kRelations; ++i) {
        Lts lts = g.lts(g.uniform(1, kOracleStates), 10);
        PairRelation r(lts.num_states);
        double density = g.uniform(1, 9) / 10.0;
        for (std::size_t a = 0; a < lts.num_states; ++a)
            for (std::size_t b = 0; b < lts.num_states; ++b)
                if (g.coin(density)) r.insert(a, b);
        PairRelation s = functional_S(lts, r), bp = functional_Bp(lts, r);
        PairRelation bd = functional_Bd(lts, r), b = functional_B(lts, r);
        o.expect(s.intersect(r).subset_of(bp) && bp.subset_of(bd) && bd.subset_of(b), "functionals\n" + to_aut(lts));
    }
    return o;
}

Outcome derived_rules() {
    Outcome o;
    Gen g(113, GenConfig{.max_size = 6});
    Symbol x = intern("X");
    for (int i = 0; i < kDerivedOperands; ++i) {
        Expr e = g.expr(), f = g.expr(), h = g.expr();
        Action a = g.action();
        o.guard("T1 " + print(e), [&] { o.expect(sound(derive_T1(a, e)), "T1 " + print(e)); });
        Expr exposing = g.coin(0.5) ? Expr::sum(e, Expr::var(x)) : Expr::sum(Expr::prefix(Action::tau(), Expr::var(x)), e);
        o.guard("D0 " + show(exposing, f), [&] { o.expect(sound(derive_D0(exposing, f, x)), "D0 " + show(exposing, f)); });
        for (int k = 1; k <= 6; ++k) {
            std::vector<Expr> ops = k == 4 ? std::vector<Expr>{e, f, h}
                                  : (k == 3 || k == 5) ? std::vector<Expr>{e, f}
                                                       : std::vector<Expr>{e};
            std::string what = "D" + std::to_string(k) + " " + show(e, f);
            o.guard(what, [&] { o.expect(sound(derive_D(k, ops, x)), what); });
        }
    }
    return o;
}

Outcome standard_forms() {
    Outcome o;
    Gen g(127, GenConfig{.max_size = kStandardizeSize});
    for (int i = 0; i < kStandardize; ++i) {
        Expr e = g.expr();
        o.guard(print(e), [&] {
            Standardized s = standardize(e);
            Expr r = s.sum.to_expr();
            o.expect(sound(s.proof, e, r) && as_standard_sum(r).has_value(), print(e));
        });
    }
    return o;
}

Outcome equation_systems() {
    Outcome o;
    Gen g(131, GenConfig{.max_size = kSesSize, .guarded = true});
    for (int i = 0; i < kSes; ++i) {
        Expr e = g.expr();
        o.guard(print(e), [&] {
            SesExtraction x = extract_ses(e);
            bool ok = check(x.proof).ok && x.proof.steps[x.anchor].lhs == e &&
                      x.proof.steps[x.anchor].rhs == x.solution.at(x.root);
            EqSystem sys = x.system.system();
            std::vector<Symbol> order = Elimination(sys).order();
            Solved s1 = solve_system(sys, x.root, order);
            std::reverse(order.begin(), order.end());
            Solved s2 = solve_system(sys, x.root, order);
            ok = ok && check(s1.proof).ok && check(s2.proof).ok;
            CongruenceResult c = prove_congruent(s1.value, s2.value);
            ok = ok && c.equal && sound(c.proof, s1.value, s2.value);
            o.expect(ok, print(e));
        });
    }
    return o;
}

Outcome congruence() {
    Outcome o;
    Gen g(137, GenConfig{.max_size = kPairSize});
    int made = 0, congruent = 0;
    while (made < kPairs) {
        Expr e = g.expr();
        Expr f = g.coin(0.5) ? g.mutate(e, g.uniform(1, 4)) : g.expr();
        Lts lts;
        try {
            lts = build_lts({e, f}, kPairStates);
        } catch (const BudgetExceeded&) {
            continue;
        }
        ++made;
        o.guard(show(e, f), [&] {
            bool rooted = rooted_equal(e, f).equal;
            CongruenceResult c = prove_congruent(e, f);
            congruent += c.equal;
            bool ok = c.equal == rooted && (!c.equal || sound(c.proof, e, f));
            Partition p = bisimilarity(lts, EquivKind::Dpbb);
            std::vector<bool> div = in_class_divergent(lts, p);
            for (std::size_t s = 0; s < lts.num_states; ++s)
                for (std::size_t t = s + 1; t < lts.num_states; ++t)
                    if (p.same(s, t) && div[s] != div[t]) ok = false;
            o.expect(ok, show(e, f));
        });
    }
    o.note = std::to_string(congruent) + " congruent";
    return o;
}

}  // namespace

int main() {
    std::vector<Lts> corpus = oracle_corpus();
    struct Criterion {
        int id;
        std::string name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> criteria = {
        {1, "landmark examples, " + std::to_string(kLoopSubsumption) + " random loop subsumptions", landmark_examples},
        {2, std::to_string(kOracleLts) + " LTSs agree with the partition oracle", [&] { return oracle_agreement(corpus); }},
        {3, std::to_string(kAxiomInstances) + " axiom instances rooted equal", axiom_soundness},
        {4, "strong <= dpbb <= branching, " + std::to_string(kRelations) + " functional inclusions",
         [&] { return hierarchy(corpus); }},
        {5, "T1, D0-D6 on " + std::to_string(kDerivedOperands) + " operand sets", derived_rules},
        {6, std::to_string(kStandardize) + " standardizations", standard_forms},
        {7, std::to_string(kSes) + " equation systems solved two ways", equation_systems},
        {8, std::to_string(kPairs) + " pairs decided and certified", congruence},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o = c.run();
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool pass = o.failed == 0 && o.checked > 0;
        failures += !pass;
        std::printf("%s %d %s (%d/%d%s%s, %.2fs)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    o.checked - o.failed, o.checked, o.note.empty() ? "" : ", ", o.note.c_str(), secs);
        if (!pass) std::printf("  first failure: %s\n", o.first.c_str());
    }
    return failures == 0 ? 0 : 1;
}
