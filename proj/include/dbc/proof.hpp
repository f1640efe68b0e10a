#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbc/syntax.hpp"

namespace dbc {

enum class AxiomId { S1, S2, S3, S4, B, R0, R1, R2, R3, R4, R5, R6, R7, R8 };

const char* axiom_name(AxiomId id);
std::optional<AxiomId> axiom_from_name(std::string_view n);

// Metavariable instantiation. Expression metavariables are E, F, G; binder
// metavariables X, Y; the action metavariable of B is a.
struct Meta {
    std::map<std::string, Expr> exprs;
    std::map<std::string, Symbol> names;
    std::optional<Action> act;

    Meta& e(const std::string& k, Expr v) {
        exprs[k] = v;
        return *this;
    }
    Meta& x(const std::string& k, Symbol v) {
        names[k] = v;
        return *this;
    }
    Meta& a(Action v) {
        act = v;
        return *this;
    }
    friend bool operator==(const Meta&, const Meta&) = default;
};

class SideCondition : public std::runtime_error {
public:
    SideCondition(AxiomId id, const std::string& detail)
        : std::runtime_error(std::string("side condition of ") + axiom_name(id) + ": " + detail) {}
};

class MissingMeta : public std::runtime_error {
public:
    MissingMeta(AxiomId id, const std::string& var)
        : std::runtime_error(std::string(axiom_name(id)) + " needs metavariable " + var) {}
};

struct Equation {
    Expr lhs, rhs;
    friend bool operator==(const Equation&, const Equation&) = default;
};

// Schema sides under meta. For R2 the result is the conclusion F = μX.E;
// its premise and guardedness are checked by check().
Equation instantiate_axiom(AxiomId id, const Meta& meta);

enum class JustKind { Refl, Symm, Trans, Axiom, Cong };
enum class CongPos { Prefix, SumL, SumR, RecBody };

const char* pos_name(CongPos p);

struct Just {
    JustKind kind = JustKind::Refl;
    std::size_t a = 0;  // Symm, Trans (first), Cong (inner)
    std::size_t b = 0;  // Trans (second)
    AxiomId axiom = AxiomId::S1;
    Meta meta;
    std::optional<std::size_t> premise;  // R2
    CongPos pos = CongPos::Prefix;
    Expr context;  // one-hole context for Cong
};

struct ProofStep {
    Expr lhs, rhs;
    Just just;
};

struct Derivation {
    std::vector<ProofStep> steps;

    bool empty() const { return steps.empty(); }
    Equation conclusion() const { return {steps.back().lhs, steps.back().rhs}; }
};

// Context with the hole at pos: a.◻, ◻ + G, G + ◻ or μX.◻.
Expr make_context(Expr whole, CongPos pos);
// Fill the hole of a context built for pos; throws on shape mismatch.
Expr plug(Expr context, CongPos pos, Expr filler);

struct CheckResult {
    bool ok = true;
    std::size_t step = 0;
    std::string reason;
};

CheckResult check_step(const Derivation& d, std::size_t i);
CheckResult check(const Derivation& d);

// Certificate text: one "step <n> <lhs> = <rhs> by <just>" line per step.
std::string write_certificate(const Derivation& d);
Derivation read_certificate(std::string_view text);

}  // namespace dbc
