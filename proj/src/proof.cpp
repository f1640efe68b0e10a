#include "dbc/proof.hpp"

#include <array>
#include <cctype>
#include <sstream>

#include "dbc/semantics.hpp"

namespace dbc {

namespace {

constexpr std::array<const char*, 14> kAxiomNames = {"S1", "S2", "S3", "S4", "B",  "R0", "R1",
                                                     "R2", "R3", "R4", "R5", "R6", "R7", "R8"};

Expr tau(Expr e) { return Expr::prefix(Action::tau(), e); }
Expr var(Symbol x) { return Expr::var(x); }
Expr operator+(Expr a, Expr b) { return Expr::sum(a, b); }

struct Schema {
    AxiomId id;
    const Meta& m;

    Expr e(const char* k) const {
        auto it = m.exprs.find(k);
        if (it == m.exprs.end()) throw MissingMeta(id, k);
        return it->second;
    }
    Symbol x(const char* k) const {
        auto it = m.names.find(k);
        if (it == m.names.end()) throw MissingMeta(id, k);
        return it->second;
    }
    Action a() const {
        if (!m.act) throw MissingMeta(id, "a");
        return *m.act;
    }
};

}  // namespace

const char* axiom_name(AxiomId id) { return kAxiomNames[static_cast<std::size_t>(id)]; }

std::optional<AxiomId> axiom_from_name(std::string_view n) {
    for (std::size_t i = 0; i < kAxiomNames.size(); ++i)
        if (n == kAxiomNames[i]) return static_cast<AxiomId>(i);
    return std::nullopt;
}

const char* pos_name(CongPos p) {
    switch (p) {
        case CongPos::Prefix: return "Prefix";
        case CongPos::SumL: return "SumL";
        case CongPos::SumR: return "SumR";
        case CongPos::RecBody: return "RecBody";
    }
    return "?";
}

Equation instantiate_axiom(AxiomId id, const Meta& meta) {
    Schema s{id, meta};
    switch (id) {
        case AxiomId::S1: return {s.e("E") + s.e("F"), s.e("F") + s.e("E")};
        case AxiomId::S2: {
            Expr e = s.e("E"), f = s.e("F"), g = s.e("G");
            return {e + (f + g), (e + f) + g};
        }
        case AxiomId::S3: return {s.e("E") + s.e("E"), s.e("E")};
        case AxiomId::S4: return {s.e("E") + Expr::nil(), s.e("E")};
        case AxiomId::B: {
            Expr e = s.e("E"), f = s.e("F");
            Action a = s.a();
            return {Expr::prefix(a, tau(e + f) + f), Expr::prefix(a, e + f)};
        }
        case AxiomId::R0: {
            Symbol x = s.x("X"), y = s.x("Y");
            Expr body = s.e("E");
            Expr lhs = Expr::rec(x, body);
            if (lhs.has_free(y)) throw SideCondition(id, name_of(y) + " is free in the recursion");
            return {lhs, Expr::rec(y, substitute(body, x, var(y)))};
        }
        case AxiomId::R1: {
            Expr lhs = Expr::rec(s.x("X"), s.e("E"));
            return {lhs, substitute(s.e("E"), s.x("X"), lhs)};
        }
        case AxiomId::R2: {
            Symbol x = s.x("X");
            Expr e = s.e("E");
            if (!is_guarded_in(x, e)) throw SideCondition(id, name_of(x) + " is not guarded");
            return {s.e("F"), Expr::rec(x, e)};
        }
        case AxiomId::R3: {
            Symbol x = s.x("X");
            return {Expr::rec(x, var(x) + s.e("E")), Expr::rec(x, s.e("E"))};
        }
        case AxiomId::R4: {
            Symbol x = s.x("X");
            Expr e = s.e("E"), f = s.e("F"), g = s.e("G");
            if (!tau_exposes(x, e)) throw SideCondition(id, "E does not tau-expose " + name_of(x));
            return {Expr::rec(x, tau(tau(e) + f) + g), Expr::rec(x, tau(e + f) + g)};
        }
        case AxiomId::R5: {
            Symbol x = s.x("X"), y = s.x("Y");
            Expr e = s.e("E"), f = s.e("F");
            if (x == y) throw SideCondition(id, "X and Y must differ");
            if (!tau_exposes(x, e)) throw SideCondition(id, "E does not tau-expose " + name_of(x));
            return {Expr::rec(x, tau(Expr::rec(y, tau(var(y)) + e)) + f),
                    Expr::rec(x, tau(Expr::rec(y, e)) + f)};
        }
        case AxiomId::R6: {
            Symbol x = s.x("X");
            Expr e = s.e("E");
            return {Expr::rec(x, tau(e)), tau(Expr::rec(x, substitute(e, x, tau(var(x)))))};
        }
        case AxiomId::R7: {
            Symbol x = s.x("X"), y = s.x("Y");
            Expr inner = Expr::rec(y, tau(var(y)) + s.e("E"));
            return {Expr::rec(x, tau(var(x)) + inner), Expr::rec(x, inner)};
        }
        case AxiomId::R8: {
            Symbol x = s.x("X"), y = s.x("Y");
            Expr e = s.e("E"), f = s.e("F");
            return {Expr::rec(x, Expr::rec(y, tau(var(x) + e) + f)),
                    Expr::rec(x, Expr::rec(y, tau(var(y) + e) + f))};
        }
    }
    throw std::logic_error("unknown axiom");
}

Expr make_context(Expr whole, CongPos pos) {
    switch (pos) {
        case CongPos::Prefix:
            if (whole.is_prefix()) return Expr::prefix(whole.act(), hole());
            break;
        case CongPos::SumL:
            if (whole.is_sum()) return Expr::sum(hole(), whole.right());
            break;
        case CongPos::SumR:
            if (whole.is_sum()) return Expr::sum(whole.left(), hole());
            break;
        case CongPos::RecBody:
            if (whole.is_rec()) return Expr::rec(whole.binder(), hole());
            break;
    }
    throw std::invalid_argument(std::string("no ") + pos_name(pos) + " position in " + print(whole));
}

Expr plug(Expr context, CongPos pos, Expr filler) {
    const Expr h = hole();
    switch (pos) {
        case CongPos::Prefix:
            if (context.is_prefix() && context.body() == h) return Expr::prefix(context.act(), filler);
            break;
        case CongPos::SumL:
            if (context.is_sum() && context.left() == h && !context.right().has_free(hole_symbol()))
                return Expr::sum(filler, context.right());
            break;
        case CongPos::SumR:
            if (context.is_sum() && context.right() == h && !context.left().has_free(hole_symbol()))
                return Expr::sum(context.left(), filler);
            break;
        case CongPos::RecBody:
            if (context.is_rec() && context.body() == h) return Expr::rec(context.binder(), filler);
            break;
    }
    throw std::invalid_argument(std::string("context does not match position ") + pos_name(pos));
}

CheckResult check_step(const Derivation& d, std::size_t i) {
    const ProofStep& st = d.steps[i];
    auto fail = [&](const std::string& why) { return CheckResult{false, i, why}; };
    auto ref_ok = [&](std::size_t r) { return r < i; };
    const Just& j = st.just;
    switch (j.kind) {
        case JustKind::Refl:
            if (st.lhs != st.rhs) return fail("refl with different sides");
            break;
        case JustKind::Symm:
            if (!ref_ok(j.a)) return fail("symm refers to a later step");
            if (st.lhs != d.steps[j.a].rhs || st.rhs != d.steps[j.a].lhs) return fail("symm endpoints mismatch");
            break;
        case JustKind::Trans:
            if (!ref_ok(j.a) || !ref_ok(j.b)) return fail("trans refers to a later step");
            if (d.steps[j.a].rhs != d.steps[j.b].lhs) return fail("trans middle terms differ");
            if (st.lhs != d.steps[j.a].lhs || st.rhs != d.steps[j.b].rhs) return fail("trans endpoints mismatch");
            break;
        case JustKind::Axiom: {
            Equation eq;
            try {
                eq = instantiate_axiom(j.axiom, j.meta);
            } catch (const std::exception& ex) {
                return fail(ex.what());
            }
            if (j.axiom == AxiomId::R2) {
                if (!j.premise || !ref_ok(*j.premise)) return fail("R2 needs an earlier premise");
                const ProofStep& p = d.steps[*j.premise];
                Expr f = j.meta.exprs.at("F");
                Symbol x = j.meta.names.at("X");
                if (p.lhs != f || p.rhs != substitute(j.meta.exprs.at("E"), x, f))
                    return fail("R2 premise does not prove F = E{F/X}");
            } else if (j.premise) {
                return fail("premise attached to a non-R2 axiom");
            }
            if (st.lhs != eq.lhs || st.rhs != eq.rhs)
                return fail(std::string(axiom_name(j.axiom)) + " instance does not match the step");
            break;
        }
        case JustKind::Cong: {
            if (!ref_ok(j.a)) return fail("cong refers to a later step");
            try {
                if (st.lhs != plug(j.context, j.pos, d.steps[j.a].lhs) ||
                    st.rhs != plug(j.context, j.pos, d.steps[j.a].rhs))
                    return fail("cong endpoints mismatch");
            } catch (const std::exception& ex) {
                return fail(ex.what());
            }
            break;
        }
    }
    return {};
}

CheckResult check(const Derivation& d) {
    if (d.steps.empty()) return {false, 0, "empty derivation"};
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
        CheckResult r = check_step(d, i);
        if (!r.ok) return r;
    }
    return {};
}

// ---------------------------------------------------------------- certificates

namespace {

std::string write_meta(const Meta& m) {
    std::string out = "{";
    bool first = true;
    auto sep = [&] {
        if (!first) out += ", ";
        first = false;
    };
    for (auto& [k, v] : m.exprs) {
        sep();
        out += k + ":=" + print(v);
    }
    for (auto& [k, v] : m.names) {
        sep();
        out += k + ":=" + name_of(v);
    }
    if (m.act) {
        sep();
        out += "a:=" + m.act->name();
    }
    return out + "}";
}

class LineReader {
public:
    LineReader(std::string_view line, std::size_t lineno) : s_(line), lineno_(lineno) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("certificate line " + std::to_string(lineno_) + ": " + msg);
    }
    void skip() {
        while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
    }
    bool at_end() {
        skip();
        return p_ >= s_.size();
    }
    std::string word() {
        skip();
        std::size_t b = p_;
        while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_' ||
                                  s_[p_] == '\''))
            ++p_;
        if (b == p_) fail("expected a word");
        return std::string(s_.substr(b, p_ - b));
    }
    std::size_t number() {
        std::string w = word();
        if (!std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(c); })) fail("expected a number");
        return std::stoul(w);
    }
    void expect(std::string_view tok) {
        skip();
        if (s_.substr(p_, tok.size()) != tok) fail("expected '" + std::string(tok) + "'");
        p_ += tok.size();
    }
    bool peek(std::string_view tok) {
        skip();
        return s_.substr(p_, tok.size()) == tok;
    }
    Expr expr() {
        try {
            return parse_prefix(s_, p_);
        } catch (const ParseError& e) {
            fail(e.what());
        }
    }

private:
    std::string_view s_;
    std::size_t p_ = 0;
    std::size_t lineno_;
};

CongPos pos_from_name(LineReader& r, const std::string& w) {
    for (CongPos p : {CongPos::Prefix, CongPos::SumL, CongPos::SumR, CongPos::RecBody})
        if (w == pos_name(p)) return p;
    r.fail("unknown congruence position " + w);
}

}  // namespace

std::string write_certificate(const Derivation& d) {
    std::string out;
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
        const ProofStep& st = d.steps[i];
        out += "step " + std::to_string(i) + " " + print(st.lhs) + " = " + print(st.rhs) + " by ";
        const Just& j = st.just;
        switch (j.kind) {
            case JustKind::Refl: out += "refl"; break;
            case JustKind::Symm: out += "symm " + std::to_string(j.a); break;
            case JustKind::Trans: out += "trans " + std::to_string(j.a) + " " + std::to_string(j.b); break;
            case JustKind::Axiom:
                out += std::string("axiom ") + axiom_name(j.axiom) + " " + write_meta(j.meta);
                if (j.premise) out += " premise " + std::to_string(*j.premise);
                break;
            case JustKind::Cong:
                out += std::string("cong ") + pos_name(j.pos) + " " + std::to_string(j.a) + " in " + print(j.context);
                break;
        }
        out += '\n';
    }
    return out;
}

Derivation read_certificate(std::string_view text) {
    Derivation d;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        LineReader r(line, lineno);
        if (r.at_end() || r.peek("#")) continue;
        if (r.word() != "step") r.fail("expected 'step'");
        if (r.number() != d.steps.size()) r.fail("steps must be numbered consecutively from 0");
        ProofStep st;
        st.lhs = r.expr();
        r.expect("=");
        st.rhs = r.expr();
        if (r.word() != "by") r.fail("expected 'by'");
        std::string kind = r.word();
        Just& j = st.just;
        if (kind == "refl") {
            j.kind = JustKind::Refl;
        } else if (kind == "symm") {
            j.kind = JustKind::Symm;
            j.a = r.number();
        } else if (kind == "trans") {
            j.kind = JustKind::Trans;
            j.a = r.number();
            j.b = r.number();
        } else if (kind == "axiom") {
            j.kind = JustKind::Axiom;
            std::string id = r.word();
            auto ax = axiom_from_name(id);
            if (!ax) r.fail("unknown axiom " + id);
            j.axiom = *ax;
            r.expect("{");
            while (!r.peek("}")) {
                std::string key = r.word();
                r.expect(":=");
                if (key == "a") {
                    std::string a = r.word();
                    j.meta.act = a == "tau" ? Action::tau() : Action::visible(a);
                } else if (key == "X" || key == "Y") {
                    Expr v = r.expr();
                    if (!v.is_var()) r.fail("binder metavariable needs a variable");
                    j.meta.names[key] = v.var_name();
                } else if (key == "E" || key == "F" || key == "G") {
                    j.meta.exprs[key] = r.expr();
                } else {
                    r.fail("unknown metavariable " + key);
                }
                if (!r.peek("}")) r.expect(",");
            }
            r.expect("}");
            if (!r.at_end() && r.peek("premise")) {
                r.word();
                j.premise = r.number();
            }
        } else if (kind == "cong") {
            j.kind = JustKind::Cong;
            j.pos = pos_from_name(r, r.word());
            j.a = r.number();
            if (r.word() != "in") r.fail("expected 'in'");
            j.context = r.expr();
        } else {
            r.fail("unknown justification " + kind);
        }
        if (!r.at_end()) r.fail("trailing text");
        d.steps.push_back(std::move(st));
    }
    return d;
}

}  // namespace dbc
