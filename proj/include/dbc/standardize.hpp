#pragma once

#include <utility>
#include <vector>

#include "dbc/prover.hpp"

namespace dbc {

// Loop expressions below are written tau*E = loop(E) unless a literal loop is passed.

// tau*E = tau.tau*E + E, for a literal loop l = Rec Z.(tau.Z + E).
Prover::Ref prove_D1_loop(Prover& p, Expr l);
// tau*E = tau*E + E, for a literal loop.
Prover::Ref prove_D2_loop(Prover& p, Expr l);
Prover::Ref prove_D1(Prover& p, Expr e);
Prover::Ref prove_D2(Prover& p, Expr e);
// Rec X.(tau.(X+E) + F) = Rec X.(tau.tau*(E+F) + F)
Prover::Ref prove_D3(Prover& p, Symbol x, Expr e, Expr f);
// Rec X.((tau.(X+E) + tau.(X+F)) + G) = Rec X.(tau.((X+E)+F) + G)
Prover::Ref prove_D4(Prover& p, Symbol x, Expr e, Expr f, Expr g);
// tau*(tau.tau*(E+F) + F) = tau.tau*(E+F) + F
Prover::Ref prove_D5(Prover& p, Expr e, Expr f);
// tau*(tau*E) = tau*E
Prover::Ref prove_D6(Prover& p, Expr e);

// Operands: D1, D2, D6 take {E}; D3 {E, F}; D4 {E, F, G}; D5 {E, F}. x names the
// recursion variable of D3 and D4.
Derivation derive_D(int k, const std::vector<Expr>& operands, Symbol x);

// Rec Y.B = Rec Z.B{Z/Y}, or refl when the binders agree.
Prover::Ref rename_binder(Prover& p, Expr rec, Symbol z);

class NotGuarded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Rewritten {
    Expr result;
    Derivation proof;
};

// e = e' with x fully exposed in e'; e' stays a guarded expression.
Prover::Ref prove_fully_exposed(Prover& p, Symbol x, Expr e);
Rewritten fully_expose(Symbol x, Expr e);

// Rec X.(tau.e + f) = Rec X.(tau.(X + e1) + f) with x guarded in e1.
std::pair<Expr, Prover::Ref> prove_exposed(Prover& p, Symbol x, Expr e, Expr f);
Rewritten expose_to_summand(Symbol x, Expr e, Expr f);

// e = s with s a standard sum in canonical summand order.
Prover::Ref prove_standard(Prover& p, Expr e);

struct Standardized {
    SumView sum;
    Derivation proof;
};
Standardized standardize(Expr e);

}  // namespace dbc
