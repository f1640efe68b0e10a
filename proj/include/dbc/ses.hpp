#pragma once

#include <map>
#include <optional>
#include <vector>

#include "dbc/equiv.hpp"
#include "dbc/prover.hpp"

namespace dbc {

// Formals X_i = rhs_i over the formals and further free variables.
struct EqSystem {
    std::vector<Symbol> formals;
    std::map<Symbol, Expr> rhs;

    bool is_formal(Symbol x) const { return rhs.count(x) != 0; }
    // Formals occurring unguarded in the right-hand side of x.
    std::vector<Symbol> unguarded_successors(Symbol x) const;
    // No formal reaches itself through unguarded occurrences.
    bool guarded() const;
};

// Right-hand side of a standard equation: a simple standard sum, or a loop
// Rec Z.(tau.Z + sum) around one. Prefixed bodies are formals.
struct SesEquation {
    bool loop = false;
    Symbol binder = 0;
    SumView sum;

    Expr rhs() const;
};

struct SesSystem {
    std::vector<Symbol> formals;
    std::map<Symbol, SesEquation> eqs;

    bool is_formal(Symbol x) const { return eqs.count(x) != 0; }
    EqSystem system() const;
};

// Every formal X_i = tau.rhs_i.
EqSystem tau_transform(const EqSystem& s);

// Values for the formals with proofs of value[X] = rhs_X{value}.
struct SolutionFamily {
    std::map<Symbol, Expr> value;
    std::map<Symbol, Prover::Ref> proof;
};

// Elimination of the formals in the given order (default: dependencies first).
// Each formal X_k becomes Rec X_k.G_k after the earlier ones are substituted;
// the values are the back-substituted closed terms.
class Elimination {
public:
    Elimination(const EqSystem& s, std::vector<Symbol> order = {});

    const EqSystem& system() const { return s_; }
    const std::vector<Symbol>& order() const { return order_; }
    const std::map<Symbol, Expr>& solution() const { return solution_; }

    // Proofs by R1 that the solution solves the system.
    SolutionFamily prove_solution(Prover& p) const;
    // For a guarded system and any family solving it, proofs by R2 of
    // family[X] = solution[X] for every formal.
    std::map<Symbol, Prover::Ref> prove_unique(Prover& p, const SolutionFamily& family) const;

private:
    EqSystem s_;
    std::vector<Symbol> order_;
    std::vector<std::map<Symbol, Expr>> stage_;  // stage_[k][X_i] for i >= k
    std::vector<Expr> closed_;                   // Rec X_k.stage_[k][X_k]
    std::map<Symbol, Expr> solution_;
};

struct Solved {
    Expr value;
    Derivation proof;  // one concluding step value[X] = rhs_X{value} per formal
    std::map<Symbol, std::size_t> step;
};
// Throws NotGuarded for an unguarded system.
Solved solve_system(const EqSystem& s, Symbol x, std::vector<Symbol> order = {});

// A standard system whose family solves it, with value[root] provably equal
// to the source expression.
struct SesBuild {
    SesSystem system;
    Symbol root = 0;
    SolutionFamily family;
    Prover::Ref anchor = 0;  // source = value[root]
};

// Throws NotGuarded unless e is a guarded expression.
SesBuild prove_ses(Prover& p, NameSupply& names, Expr e);

struct SesExtraction {
    SesSystem system;
    Symbol root = 0;
    std::map<Symbol, Expr> solution;
    Derivation proof;
    std::map<Symbol, std::size_t> step;  // solution[X] = rhs_X{solution}
    std::size_t anchor = 0;              // e = solution[root]
};
SesExtraction extract_ses(Expr e);

// The system read as a transition system: state i is formals[i], a.Y gives
// an a-edge, a loop adds a tau self-loop, and variable summands are exposures.
Lts ses_semantics(const SesSystem& s);
// dpbb classes of the formals, indexed like formals.
Partition formal_classes(const SesSystem& s);

// Formals with no unguarded successor in their own class.
std::vector<Symbol> bottom_variables(const SesSystem& s, const Partition& classes);

struct Derivatives {
    std::vector<Symbol> inner;  // tau-successors in the same class
    SumView outer;              // remaining summands
};
Derivatives derivatives(const SesSystem& s, const Partition& classes, Symbol x);

// Values B with proofs of tau.B[X] = tau.rhs_X{tau.B}, i.e. a family solving
// tau(S), equal on every class of formal_classes.
SolutionFamily prove_quotient(Prover& p, NameSupply& names, const SesSystem& s);

// tau.e = tau.f for guarded dpbb-equivalent e and f.
Prover::Ref prove_promote(Prover& p, Expr e, Expr f);

class NotEquivalent : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// e = f when rooted equal, by standardising both sides and absorbing summands.
Prover::Ref prove_congruent(Prover& p, Expr e, Expr f, std::size_t budget = kDefaultBudget);

struct CongruenceResult {
    bool equal = false;
    Derivation proof;         // set when equal
    RootedResult refutation;  // set otherwise
};
CongruenceResult prove_congruent(Expr e, Expr f, std::size_t budget = kDefaultBudget);

}  // namespace dbc
