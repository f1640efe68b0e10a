#include "dbc/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

namespace dbc {

// ---------------------------------------------------------------- symbols

namespace {

struct SymbolTable {
    std::mutex mu;
    std::deque<std::string> names;
    std::unordered_map<std::string_view, Symbol> index;

    SymbolTable() { add("tau"); }

    Symbol add(std::string_view n) {
        auto it = index.find(n);
        if (it != index.end()) return it->second;
        names.emplace_back(n);
        auto id = static_cast<Symbol>(names.size() - 1);
        index.emplace(names.back(), id);
        return id;
    }
};

SymbolTable& symbols() {
    static SymbolTable t;
    return t;
}

}  // namespace

Symbol intern(std::string_view name) {
    auto& t = symbols();
    std::lock_guard lock(t.mu);
    return t.add(name);
}

const std::string& name_of(Symbol s) {
    auto& t = symbols();
    std::lock_guard lock(t.mu);
    return t.names.at(s);
}

Action Action::visible(std::string_view n) {
    if (n == "tau") throw std::invalid_argument("tau is not a visible action");
    return Action{intern(n)};
}

int compare(Action a, Action b) {
    if (a.sym == b.sym) return 0;
    if (a.is_tau()) return -1;
    if (b.is_tau()) return 1;
    return a.name().compare(b.name()) < 0 ? -1 : 1;
}

// ---------------------------------------------------------------- nodes

struct Node {
    Kind kind;
    Symbol sym;
    const Node* a;
    const Node* b;
    std::size_t hash;
    std::uint64_t size;
    std::vector<Symbol> fv;
};

struct ExprFactory {
    struct Key {
        Kind kind;
        Symbol sym;
        const Node* a;
        const Node* b;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = static_cast<std::size_t>(k.kind) * 0x9e3779b97f4a7c15ULL;
            h ^= (k.sym + 0x632be59bd9b4e019ULL) + (h << 6) + (h >> 2);
            h ^= (k.a ? k.a->hash : 17) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h ^= (k.b ? k.b->hash : 31) + 0x94d049bb133111ebULL + (h << 6) + (h >> 2);
            return h;
        }
    };

    std::mutex mu;
    std::unordered_map<Key, const Node*, KeyHash> table;

    static ExprFactory& get() {
        static ExprFactory f;
        return f;
    }

    Expr make(Kind kind, Symbol sym, const Node* a, const Node* b) {
        Key k{kind, sym, a, b};
        std::lock_guard lock(mu);
        auto it = table.find(k);
        if (it != table.end()) return Expr(it->second);
        auto* n = new Node{kind, sym, a, b, KeyHash{}(k), 1, {}};
        auto add = [](std::uint64_t x, std::uint64_t y) {
            std::uint64_t s = x + y;
            return s < x ? UINT64_MAX : s;
        };
        switch (kind) {
            case Kind::Nil: break;
            case Kind::Var: n->fv = {sym}; break;
            case Kind::Prefix:
                n->size = add(1, a->size);
                n->fv = a->fv;
                break;
            case Kind::Sum:
                n->size = add(add(1, a->size), b->size);
                std::set_union(a->fv.begin(), a->fv.end(), b->fv.begin(), b->fv.end(),
                               std::back_inserter(n->fv));
                break;
            case Kind::Rec:
                n->size = add(1, a->size);
                n->fv = a->fv;
                n->fv.erase(std::remove(n->fv.begin(), n->fv.end(), sym), n->fv.end());
                break;
        }
        table.emplace(k, n);
        return Expr(n);
    }
};

Expr::Expr() : n_(ExprFactory::get().make(Kind::Nil, 0, nullptr, nullptr).n_) {}

Expr Expr::nil() { return Expr(); }
Expr Expr::var(Symbol x) { return ExprFactory::get().make(Kind::Var, x, nullptr, nullptr); }
Expr Expr::prefix(Action a, Expr body) {
    return ExprFactory::get().make(Kind::Prefix, a.sym, body.n_, nullptr);
}
Expr Expr::sum(Expr l, Expr r) { return ExprFactory::get().make(Kind::Sum, 0, l.n_, r.n_); }
Expr Expr::rec(Symbol x, Expr body) {
    return ExprFactory::get().make(Kind::Rec, x, body.n_, nullptr);
}

Kind Expr::kind() const { return n_->kind; }
Symbol Expr::var_name() const { return n_->sym; }
Symbol Expr::binder() const { return n_->sym; }
Action Expr::act() const { return Action{n_->sym}; }
Expr Expr::body() const { return Expr(n_->a); }
Expr Expr::left() const { return Expr(n_->a); }
Expr Expr::right() const { return Expr(n_->b); }
std::size_t Expr::hash() const { return n_->hash; }
std::uint64_t Expr::size() const { return n_->size; }
const std::vector<Symbol>& Expr::free_vars() const { return n_->fv; }
bool Expr::has_free(Symbol x) const {
    return std::binary_search(n_->fv.begin(), n_->fv.end(), x);
}

static int compare_names(Symbol a, Symbol b) {
    if (a == b) return 0;
    return name_of(a).compare(name_of(b)) < 0 ? -1 : 1;
}

int compare(Expr a, Expr b) {
    while (a != b) {
        if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
        switch (a.kind()) {
            case Kind::Nil: return 0;
            case Kind::Var: return compare_names(a.var_name(), b.var_name());
            case Kind::Prefix:
                if (int c = compare(a.act(), b.act())) return c;
                a = a.body();
                b = b.body();
                break;
            case Kind::Sum:
                if (int c = compare(a.left(), b.left())) return c;
                a = a.right();
                b = b.right();
                break;
            case Kind::Rec:
                if (int c = compare_names(a.binder(), b.binder())) return c;
                a = a.body();
                b = b.body();
                break;
        }
    }
    return 0;
}

std::set<Symbol> free_vars(Expr e) {
    return {e.free_vars().begin(), e.free_vars().end()};
}

// ---------------------------------------------------------------- fresh names

bool is_reserved_name(std::string_view n) {
    if (n.size() < 3 || n.substr(0, 2) != "_g") return false;
    return std::all_of(n.begin() + 2, n.end(), [](char c) { return std::isdigit(c); });
}

Symbol fresh_symbol(const std::set<Symbol>& avoid) {
    for (std::uint32_t i = 0;; ++i) {
        Symbol s = intern("_g" + std::to_string(i));
        if (!avoid.count(s)) return s;
    }
}

Symbol NameSupply::fresh() {
    for (;; ++next_) {
        Symbol s = intern("_g" + std::to_string(next_));
        if (!used_.count(s)) {
            used_.insert(s);
            ++next_;
            return s;
        }
    }
}

void collect_names(Expr e, std::set<Symbol>& out) {
    std::unordered_set<const Node*> seen;
    std::vector<Expr> todo{e};
    while (!todo.empty()) {
        Expr cur = todo.back();
        todo.pop_back();
        if (!seen.insert(cur.node()).second) continue;
        switch (cur.kind()) {
            case Kind::Nil: break;
            case Kind::Var: out.insert(cur.var_name()); break;
            case Kind::Prefix: todo.push_back(cur.body()); break;
            case Kind::Sum:
                todo.push_back(cur.left());
                todo.push_back(cur.right());
                break;
            case Kind::Rec:
                out.insert(cur.binder());
                todo.push_back(cur.body());
                break;
        }
    }
}

// ---------------------------------------------------------------- substitution

namespace {

class Substituter {
public:
    explicit Substituter(const Subst& s) : s_(s) {}

    Expr go(Expr e) {
        if (!touches(e)) return e;
        auto it = memo_.find(e.node());
        if (it != memo_.end()) return it->second;
        Expr out;
        switch (e.kind()) {
            case Kind::Nil: out = e; break;
            case Kind::Var: out = s_.at(e.var_name()); break;
            case Kind::Prefix: out = Expr::prefix(e.act(), go(e.body())); break;
            case Kind::Sum: out = Expr::sum(go(e.left()), go(e.right())); break;
            case Kind::Rec: out = go_rec(e); break;
        }
        memo_.emplace(e.node(), out);
        return out;
    }

private:
    bool touches(Expr e) const {
        for (Symbol x : e.free_vars())
            if (s_.count(x)) return true;
        return false;
    }

    Expr go_rec(Expr e) {
        Symbol x = e.binder();
        Expr body = e.body();
        Subst inner;
        bool capture = false;
        for (Symbol y : body.free_vars()) {
            if (y == x) continue;
            auto it = s_.find(y);
            if (it == s_.end()) continue;
            inner.emplace(y, it->second);
            if (it->second.has_free(x)) capture = true;
        }
        if (!capture) {
            if (!s_.count(x)) return Expr::rec(x, go(body));
            return Expr::rec(x, Substituter(inner).go(body));
        }
        std::set<Symbol> avoid(body.free_vars().begin(), body.free_vars().end());
        for (auto& [y, f] : inner) avoid.insert(f.free_vars().begin(), f.free_vars().end());
        Symbol fresh = fresh_symbol(avoid);
        inner[x] = Expr::var(fresh);
        return Expr::rec(fresh, Substituter(inner).go(body));
    }

    const Subst& s_;
    std::unordered_map<const Node*, Expr> memo_;
};

}  // namespace

Expr substitute(Expr e, const Subst& s) {
    if (s.empty()) return e;
    Substituter sub(s);
    return sub.go(e);
}

// ---------------------------------------------------------------- loops

Expr loop(Symbol x, Expr e) {
    return Expr::rec(x, Expr::sum(Expr::prefix(Action::tau(), Expr::var(x)), e));
}

Expr loop(Expr e) { return loop(fresh_symbol(free_vars(e)), e); }

std::optional<LoopParts> as_loop(Expr e) {
    if (!e.is_rec() || !e.body().is_sum()) return std::nullopt;
    Symbol x = e.binder();
    std::vector<Expr> rights;
    Expr cur = e.body();
    while (cur.is_sum()) {
        rights.push_back(cur.right());
        cur = cur.left();
    }
    if (!cur.is_prefix() || !cur.act().is_tau() || cur.body() != Expr::var(x)) return std::nullopt;
    std::reverse(rights.begin(), rights.end());
    for (Expr r : rights)
        if (r.has_free(x)) return std::nullopt;
    Expr rest = rights.front();
    for (std::size_t i = 1; i < rights.size(); ++i) rest = Expr::sum(rest, rights[i]);
    return LoopParts{x, rest};
}

bool is_literal_loop(Expr e) {
    if (!e.is_rec() || !e.body().is_sum()) return false;
    Expr l = e.body().left();
    return l.is_prefix() && l.act().is_tau() && l.body() == Expr::var(e.binder()) &&
           !e.body().right().has_free(e.binder());
}

// ---------------------------------------------------------------- predicates

namespace {

struct PairHash {
    std::size_t operator()(const std::pair<const Node*, Symbol>& p) const {
        return std::hash<const void*>()(p.first) * 31 + p.second;
    }
};

bool unguarded_rec(Symbol x, Expr e,
                   std::unordered_map<std::pair<const Node*, Symbol>, bool, PairHash>& memo) {
    if (!e.has_free(x)) return false;
    auto key = std::make_pair(e.node(), x);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bool r = false;
    switch (e.kind()) {
        case Kind::Nil: break;
        case Kind::Var: r = e.var_name() == x; break;
        case Kind::Prefix: r = e.act().is_tau() && unguarded_rec(x, e.body(), memo); break;
        case Kind::Sum: r = unguarded_rec(x, e.left(), memo) || unguarded_rec(x, e.right(), memo); break;
        case Kind::Rec: r = e.binder() != x && unguarded_rec(x, e.body(), memo); break;
    }
    memo.emplace(key, r);
    return r;
}

}  // namespace

bool occurs_unguarded(Symbol x, Expr e) {
    thread_local std::unordered_map<std::pair<const Node*, Symbol>, bool, PairHash> memo;
    if (memo.size() > 4'000'000) memo.clear();
    return unguarded_rec(x, e, memo);
}

bool is_guarded_in(Symbol x, Expr e) { return !occurs_unguarded(x, e); }

bool is_guarded_expr(Expr e) {
    thread_local std::unordered_map<const Node*, bool> memo;
    if (memo.size() > 4'000'000) memo.clear();
    auto it = memo.find(e.node());
    if (it != memo.end()) return it->second;
    bool r = true;
    switch (e.kind()) {
        case Kind::Nil:
        case Kind::Var: break;
        case Kind::Prefix: r = is_guarded_expr(e.body()); break;
        case Kind::Sum: r = is_guarded_expr(e.left()) && is_guarded_expr(e.right()); break;
        case Kind::Rec:
            r = (is_loop(e) || is_guarded_in(e.binder(), e.body())) && is_guarded_expr(e.body());
            break;
    }
    memo.emplace(e.node(), r);
    return r;
}

namespace {

bool exposed_ok(Symbol x, Expr e, bool in_plain_rec,
                std::unordered_map<std::pair<const Node*, Symbol>, bool, PairHash>& memo) {
    if (!e.has_free(x)) return true;
    auto key = std::make_pair(e.node(), static_cast<Symbol>(in_plain_rec));
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bool r = true;
    switch (e.kind()) {
        case Kind::Nil: break;
        case Kind::Var: r = !in_plain_rec; break;
        case Kind::Prefix: r = !e.act().is_tau() || exposed_ok(x, e.body(), in_plain_rec, memo); break;
        case Kind::Sum:
            r = exposed_ok(x, e.left(), in_plain_rec, memo) && exposed_ok(x, e.right(), in_plain_rec, memo);
            break;
        case Kind::Rec:
            r = exposed_ok(x, e.body(), in_plain_rec || !is_loop(e), memo);
            break;
    }
    memo.emplace(key, r);
    return r;
}

}  // namespace

bool is_fully_exposed(Symbol x, Expr e) {
    std::unordered_map<std::pair<const Node*, Symbol>, bool, PairHash> memo;
    return exposed_ok(x, e, false, memo);
}

// ---------------------------------------------------------------- sums

static void flatten(Expr e, std::vector<Expr>& out) {
    if (e.is_nil()) return;
    if (e.is_sum()) {
        flatten(e.left(), out);
        flatten(e.right(), out);
        return;
    }
    out.push_back(e);
}

std::vector<Expr> summands(Expr e) {
    std::vector<Expr> out;
    flatten(e, out);
    return out;
}

Expr sum_of(const std::vector<Expr>& atoms) {
    if (atoms.empty()) return Expr::nil();
    Expr acc = atoms.front();
    for (std::size_t i = 1; i < atoms.size(); ++i) acc = Expr::sum(acc, atoms[i]);
    return acc;
}

std::vector<Expr> canonical_atoms(Expr e) {
    auto atoms = summands(e);
    std::sort(atoms.begin(), atoms.end(), ExprLess{});
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    return atoms;
}

Expr SumView::to_expr() const {
    std::vector<Expr> atoms;
    for (auto& [a, e] : prefixed) atoms.push_back(Expr::prefix(a, e));
    for (Symbol w : vars) atoms.push_back(Expr::var(w));
    std::sort(atoms.begin(), atoms.end(), ExprLess{});
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    return sum_of(atoms);
}

std::optional<SumView> as_standard_sum(Expr e) {
    SumView v;
    for (Expr a : canonical_atoms(e)) {
        if (a.is_var()) {
            v.vars.push_back(a.var_name());
        } else if (a.is_prefix() && is_guarded_expr(a.body())) {
            v.prefixed.emplace_back(a.act(), a.body());
        } else {
            return std::nullopt;
        }
    }
    return v;
}

// ---------------------------------------------------------------- parser

namespace {

const char* const kHole = "\xE2\x97\xBB";  // U+25FB

enum class Tok { End, Zero, Ident, Dot, Plus, LParen, RParen, Rec, TauStar, Other };

struct Lexer {
    std::string_view src;
    std::size_t pos = 0;
    Tok tok = Tok::End;
    std::string text;
    std::size_t tok_pos = 0;

    explicit Lexer(std::string_view s, std::size_t start = 0) : src(s), pos(start) { next(); }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("parse error at offset " + std::to_string(tok_pos) + ": " + msg);
    }

    void skip_space() {
        while (pos < src.size()) {
            char c = src[pos];
            if (c == '#') {
                while (pos < src.size() && src[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    void next() {
        skip_space();
        tok_pos = pos;
        text.clear();
        if (pos >= src.size()) {
            tok = Tok::End;
            return;
        }
        char c = src[pos];
        if (src.substr(pos, 3) == kHole) {
            pos += 3;
            tok = Tok::Ident;
            text = kHole;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t b = pos;
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' || src[pos] == '\''))
                ++pos;
            text = std::string(src.substr(b, pos - b));
            if (text == "rec") {
                tok = Tok::Rec;
            } else if (text == "tau" && pos < src.size() && src[pos] == '*') {
                ++pos;
                tok = Tok::TauStar;
            } else {
                tok = Tok::Ident;
            }
            return;
        }
        ++pos;
        switch (c) {
            case '0': tok = Tok::Zero; return;
            case '.': tok = Tok::Dot; return;
            case '+': tok = Tok::Plus; return;
            case '(': tok = Tok::LParen; return;
            case ')': tok = Tok::RParen; return;
            default: tok = Tok::Other; text = std::string(1, c); return;
        }
    }
};

bool is_var_name(const std::string& s) {
    return s == kHole || std::isupper(static_cast<unsigned char>(s[0])) || s[0] == '_';
}

class Parser {
public:
    explicit Parser(Lexer& lx) : lx_(lx) {}

    Expr expr() {
        Expr e = term();
        while (lx_.tok == Tok::Plus) {
            lx_.next();
            e = Expr::sum(e, term());
        }
        return e;
    }

private:
    Expr term() {
        switch (lx_.tok) {
            case Tok::Zero: lx_.next(); return Expr::nil();
            case Tok::LParen: {
                lx_.next();
                Expr e = expr();
                if (lx_.tok != Tok::RParen) lx_.fail("expected ')'");
                lx_.next();
                return e;
            }
            case Tok::Rec: {
                lx_.next();
                if (lx_.tok != Tok::Ident || !is_var_name(lx_.text)) lx_.fail("expected variable after 'rec'");
                Symbol x = intern(lx_.text);
                lx_.next();
                if (lx_.tok != Tok::Dot) lx_.fail("expected '.' after rec binder");
                lx_.next();
                return Expr::rec(x, expr());
            }
            case Tok::TauStar: lx_.next(); return loop(term());
            case Tok::Ident: {
                std::string id = lx_.text;
                lx_.next();
                if (is_var_name(id)) return Expr::var(intern(id));
                if (lx_.tok != Tok::Dot) lx_.fail("expected '.' after action '" + id + "'");
                lx_.next();
                Action a = id == "tau" ? Action::tau() : Action::visible(id);
                return Expr::prefix(a, term());
            }
            default: lx_.fail("unexpected token");
        }
    }

    Lexer& lx_;
};

}  // namespace

Symbol hole_symbol() {
    static const Symbol s = intern(kHole);
    return s;
}

Expr hole() { return Expr::var(hole_symbol()); }

Expr parse(std::string_view text) {
    Lexer lx(text);
    Parser p(lx);
    Expr e = p.expr();
    if (lx.tok != Tok::End) lx.fail("trailing input");
    return e;
}

Expr parse_prefix(std::string_view text, std::size_t& pos) {
    Lexer lx(text, pos);
    Parser p(lx);
    Expr e = p.expr();
    pos = lx.tok_pos;
    return e;
}

// ---------------------------------------------------------------- printer

namespace {

std::optional<Expr> sugar_body(Expr e) {
    if (!is_literal_loop(e)) return std::nullopt;
    Expr body = e.body().right();
    if (loop(body) != e) return std::nullopt;
    return body;
}

// True when printing e leaves a rec body open at its right end.
bool ends_open(Expr e) {
    for (;;) {
        switch (e.kind()) {
            case Kind::Nil:
            case Kind::Var: return false;
            case Kind::Prefix:
                if (e.body().is_sum()) return false;
                e = e.body();
                break;
            case Kind::Sum:
                if (e.right().is_sum()) return false;
                e = e.right();
                break;
            case Kind::Rec: {
                auto b = sugar_body(e);
                if (!b) return true;
                if (b->is_sum()) return false;
                e = *b;
                break;
            }
        }
    }
}

void emit(Expr e, std::string& out);

void emit_term(Expr e, std::string& out) {
    if (e.is_sum()) {
        out += '(';
        emit(e, out);
        out += ')';
    } else {
        emit(e, out);
    }
}

void emit(Expr e, std::string& out) {
    switch (e.kind()) {
        case Kind::Nil: out += '0'; return;
        case Kind::Var: out += name_of(e.var_name()); return;
        case Kind::Prefix:
            out += e.act().name();
            out += '.';
            emit_term(e.body(), out);
            return;
        case Kind::Sum:
            if (ends_open(e.left())) {
                out += '(';
                emit(e.left(), out);
                out += ')';
            } else {
                emit(e.left(), out);
            }
            out += " + ";
            emit_term(e.right(), out);
            return;
        case Kind::Rec:
            if (auto b = sugar_body(e)) {
                out += "tau* ";
                emit_term(*b, out);
                return;
            }
            out += "rec ";
            out += name_of(e.binder());
            out += ". ";
            emit(e.body(), out);
            return;
    }
}

}  // namespace

std::string print(Expr e) {
    std::string out;
    emit(e, out);
    return out;
}

}  // namespace dbc
