#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dbc/syntax.hpp"

namespace dbc {

struct Move {
    Action act;
    Expr target;
    friend bool operator==(const Move&, const Move&) = default;
};

// (Action, Expr) order used for deterministic state numbering.
bool operator<(const Move& a, const Move& b);

// SOS derivatives, sorted and duplicate free. Rec uses the one-step unfolding
// characterisation, so the recursion is structural.
const std::vector<Move>& step(Expr e);
// { X | e exposes X }, sorted.
const std::vector<Symbol>& exposes(Expr e);

constexpr std::size_t kDefaultBudget = 100000;

class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(std::size_t budget)
        : std::runtime_error("state budget of " + std::to_string(budget) + " exceeded") {}
};

struct Transition {
    std::uint32_t src;
    Action act;
    std::uint32_t dst;
    friend bool operator==(const Transition&, const Transition&) = default;
};

struct Lts {
    std::size_t num_states = 0;
    // Per-state expression when built from expressions; empty otherwise.
    std::vector<Expr> exprs;
    // Grouped by source, in discovery order of the children.
    std::vector<Transition> transitions;
    std::vector<std::vector<Symbol>> exposure;
    std::vector<std::uint32_t> roots;

    std::uint32_t root() const { return roots.at(0); }

    // Outgoing (action, target) per state.
    std::vector<std::vector<std::pair<Action, std::uint32_t>>> out() const;

    static Lts from_edges(std::size_t n, std::vector<Transition> ts,
                          std::vector<std::vector<Symbol>> exposure, std::vector<std::uint32_t> roots);
};

// States reachable from e, numbered breadth first.
Lts build_lts(Expr e, std::size_t budget = kDefaultBudget);
// Joint LTS; roots[i] is the state of es[i]. Shared states are merged.
Lts build_lts(const std::vector<Expr>& es, std::size_t budget = kDefaultBudget);

bool tau_exposes(Symbol x, Expr e, std::size_t budget = kDefaultBudget);

// States with an infinite tau-run.
std::vector<bool> divergent(const Lts& lts);

// Aldebaran text, with exposures as extra "exp (state, "X")" lines.
std::string to_aut(const Lts& lts);

}  // namespace dbc
