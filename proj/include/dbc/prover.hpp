#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dbc/proof.hpp"

namespace dbc {

// Positions from the root down to a subterm.
using Path = std::vector<CongPos>;

Expr subterm(Expr e, const Path& path);
// Path of atom i in the left-associated sum of n atoms.
Path sum_path(std::size_t n, std::size_t i);
// Normal form modulo S1-S4 and bound names; equal forms are ac_alpha-provable.
Expr ac_alpha_form(Expr e);
Expr replace_at(Expr e, const Path& path, Expr by);

class ProofError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Appends justified steps to a derivation and hands out step indices.
// Every method checks the shape of what it is given and throws ProofError
// when a generator asks for something that does not hold.
class Prover {
public:
    using Ref = std::size_t;

    Derivation d;

    Expr lhs(Ref r) const { return d.steps.at(r).lhs; }
    Expr rhs(Ref r) const { return d.steps.at(r).rhs; }
    bool trivial(Ref r) const { return lhs(r) == rhs(r); }

    Ref refl(Expr e);
    Ref symm(Ref r);
    Ref trans(Ref a, Ref b);
    Ref trans(std::initializer_list<Ref> rs);
    Ref axiom(AxiomId id, Meta meta, std::optional<Ref> premise = std::nullopt);
    Ref cong(CongPos pos, Ref inner, Expr context);
    // Lifts a proof of sub = sub' to whole = whole[path := sub'].
    Ref at(Expr whole, const Path& path, Ref inner);

    // ⊢ from = to by S1-S4, provided both have the same set of summand atoms.
    Ref ac(Expr from, Expr to);
    // ⊢ e = canonical sum of its atoms.
    Ref normalize(Expr e);
    // ⊢ a = b by S1-S4 and R0, for terms equal up to summand order,
    // duplicate and 0 summands, and bound names.
    Ref ac_alpha(Expr a, Expr b);

    // ⊢ T{left} = T{right} where hook supplies proofs for chosen subterms of T
    // (before substitution). Subterms without a hook proof are rebuilt from
    // their children; subterms free of holes are substituted directly.
    using Hook = std::function<std::optional<Ref>(Expr node)>;
    Ref rewrite_template(Expr t, const Subst& left, const Subst& right, const std::vector<Symbol>& holes,
                         const Hook& hook);

    // Derivation whose final step concludes lhs(r) = rhs(r).
    Derivation finish(Ref r) const;

private:
    Ref push(Expr l, Expr r, Just j);
    Ref insert(Expr canon, Expr atom);
    Ref merge(Expr l, Expr r);
};

// Builds ⊢ start = ... by successive steps.
class Chain {
public:
    Chain(Prover& p, Expr start) : p_(p), cur_(start) {}

    Chain& then(Prover::Ref r);
    Chain& then_at(const Path& path, Prover::Ref r);
    Chain& ac(Expr target);
    Chain& ac_at(const Path& path, Expr target_sub);
    Expr current() const { return cur_; }
    Prover::Ref done();

private:
    Prover& p_;
    Expr cur_;
    std::optional<Prover::Ref> acc_;
};

// a.tau.e = a.e
Prover::Ref prove_T1(Prover& p, Action a, Expr e);
Derivation derive_T1(Action a, Expr e);

class MoveNotPresent : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// e = e + a.target, for a move of e.
Prover::Ref prove_summand(Prover& p, Expr e, Action a, Expr target);
// e = e + X, for an exposure of e.
Prover::Ref prove_summand(Prover& p, Expr e, Symbol x);
Derivation derive_summand_absorption(Expr e, Action a, Expr target);
Derivation derive_summand_absorption(Expr e, Symbol x);

// μX.(τ.e + f) = μX.(τ.(X + e) + f), provided e tau-exposes X.
Prover::Ref prove_D0(Prover& p, Expr e, Expr f, Symbol x);
Derivation derive_D0(Expr e, Expr f, Symbol x);

}  // namespace dbc
