#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dbc {

// Interned identifier. Index 0 is reserved for "tau".
using Symbol = std::uint32_t;

Symbol intern(std::string_view name);
const std::string& name_of(Symbol s);

constexpr Symbol kTau = 0;

struct Action {
    Symbol sym = kTau;

    static Action tau() { return Action{kTau}; }
    static Action visible(std::string_view n);
    bool is_tau() const { return sym == kTau; }
    const std::string& name() const { return name_of(sym); }

    friend bool operator==(Action a, Action b) { return a.sym == b.sym; }
    friend bool operator!=(Action a, Action b) { return a.sym != b.sym; }
};

// tau first, then visible names lexicographically.
int compare(Action a, Action b);
inline bool operator<(Action a, Action b) { return compare(a, b) < 0; }

enum class Kind : std::uint8_t { Nil, Var, Prefix, Sum, Rec };

struct Node;

// Hash-consed immutable expression. Two Exprs are syntactically identical
// (raw trees, no alpha-equivalence) iff their node pointers are equal.
class Expr {
public:
    Expr();

    static Expr nil();
    static Expr var(Symbol x);
    static Expr var(std::string_view x) { return var(intern(x)); }
    static Expr prefix(Action a, Expr body);
    static Expr sum(Expr l, Expr r);
    static Expr rec(Symbol x, Expr body);

    Kind kind() const;
    bool is_nil() const { return kind() == Kind::Nil; }
    bool is_var() const { return kind() == Kind::Var; }
    bool is_prefix() const { return kind() == Kind::Prefix; }
    bool is_sum() const { return kind() == Kind::Sum; }
    bool is_rec() const { return kind() == Kind::Rec; }

    Symbol var_name() const;  // Var
    Symbol binder() const;    // Rec
    Action act() const;       // Prefix
    Expr body() const;        // Prefix, Rec
    Expr left() const;        // Sum
    Expr right() const;       // Sum

    std::size_t hash() const;
    // Tree size, saturating.
    std::uint64_t size() const;
    // Sorted, duplicate free.
    const std::vector<Symbol>& free_vars() const;
    bool has_free(Symbol x) const;

    const Node* node() const { return n_; }

    friend bool operator==(Expr a, Expr b) { return a.n_ == b.n_; }
    friend bool operator!=(Expr a, Expr b) { return a.n_ != b.n_; }

private:
    explicit Expr(const Node* n) : n_(n) {}
    const Node* n_;
    friend struct ExprFactory;
};

struct ExprHash {
    std::size_t operator()(Expr e) const { return e.hash(); }
};

// Structural total order: constructor tag, then fields.
int compare(Expr a, Expr b);
struct ExprLess {
    bool operator()(Expr a, Expr b) const { return compare(a, b) < 0; }
};

std::set<Symbol> free_vars(Expr e);

using Subst = std::map<Symbol, Expr>;

// Simultaneous capture-free substitution. A binder is renamed to the lowest
// unused _gN only when capture would occur.
Expr substitute(Expr e, const Subst& s);
inline Expr substitute(Expr e, Symbol x, Expr f) { return substitute(e, Subst{{x, f}}); }

// Lowest _gN not in the given set.
Symbol fresh_symbol(const std::set<Symbol>& avoid);
bool is_reserved_name(std::string_view n);

// Rec X.(tau.X + e) with X = fresh_symbol(FV(e)).
Expr loop(Expr e);
Expr loop(Symbol x, Expr e);

struct LoopParts {
    Symbol binder;
    Expr rest;  // summands after tau.X, re-associated to the left; 0 if none
};
// Recognizes Rec X.body whose left spine flattens to tau.X, r1, ..., rk with X not free in any ri.
std::optional<LoopParts> as_loop(Expr e);
inline bool is_loop(Expr e) { return as_loop(e).has_value(); }
// Literal shape Rec X.(tau.X + E) with X not free in E.
bool is_literal_loop(Expr e);

bool is_guarded_in(Symbol x, Expr e);
bool occurs_unguarded(Symbol x, Expr e);
bool is_guarded_expr(Expr e);
bool is_fully_exposed(Symbol x, Expr e);

// Flattening of nested sums with 0 dropped, in left-to-right order.
std::vector<Expr> summands(Expr e);
// Left-associated sum of the given atoms; 0 when empty.
Expr sum_of(const std::vector<Expr>& atoms);

struct SumView {
    std::vector<std::pair<Action, Expr>> prefixed;
    std::vector<Symbol> vars;

    Expr to_expr() const;
    friend bool operator==(const SumView&, const SumView&) = default;
};

// Sorted and deduplicated; nullopt when e is not a standard sum.
std::optional<SumView> as_standard_sum(Expr e);

// Canonical atom list: sorted by the total order, deduplicated.
std::vector<Expr> canonical_atoms(Expr e);

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Expr parse(std::string_view text);
// Parses an expression starting at pos; pos is left at the first unconsumed token.
Expr parse_prefix(std::string_view text, std::size_t& pos);
std::string print(Expr e);

// The certificate hole, a variable named "◻".
Symbol hole_symbol();
Expr hole();

// Every identifier (free or bound) occurring in e.
void collect_names(Expr e, std::set<Symbol>& out);

// Generates globally unused _gN names for proof pipelines.
class NameSupply {
public:
    NameSupply() = default;
    void reserve(Expr e) { collect_names(e, used_); }
    void reserve(Symbol s) { used_.insert(s); }
    Symbol fresh();

private:
    std::set<Symbol> used_;
    std::uint32_t next_ = 0;
};

}  // namespace dbc
