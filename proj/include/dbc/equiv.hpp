#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbc/semantics.hpp"

namespace dbc {

class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t n, bool value = false);

    std::size_t size() const { return n_; }
    bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1U; }
    void set(std::size_t i) { w_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    bool any() const;
    // True iff this, b and c share a set bit.
    bool intersects(const Bitset& b) const;
    bool intersects(const Bitset& b, const Bitset& c) const;
    bool intersects(const Bitset& b, const Bitset& c, const Bitset& d) const;
    Bitset& operator|=(const Bitset& o);
    Bitset& operator&=(const Bitset& o);
    friend bool operator==(const Bitset&, const Bitset&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

// Binary relation over the states of one Lts, stored as rows.
class PairRelation {
public:
    PairRelation() = default;
    explicit PairRelation(std::size_t n, bool full = false);

    std::size_t states() const { return rows_.size(); }
    bool contains(std::size_t i, std::size_t j) const { return rows_[i].test(j); }
    void insert(std::size_t i, std::size_t j) { rows_[i].set(j); }
    void erase(std::size_t i, std::size_t j) { rows_[i].reset(j); }
    const Bitset& row(std::size_t i) const { return rows_[i]; }
    std::size_t count() const;
    bool subset_of(const PairRelation& o) const;
    PairRelation transpose() const;
    // R ∩ R⁻¹
    PairRelation symmetric_core() const;
    PairRelation intersect(const PairRelation& o) const;
    static PairRelation identity(std::size_t n);
    friend bool operator==(const PairRelation&, const PairRelation&) = default;

private:
    std::vector<Bitset> rows_;
};

enum class EquivKind { Strong, Branching, Dpbb };

const char* kind_name(EquivKind k);

struct Partition {
    std::vector<std::uint32_t> class_of;
    std::size_t num_classes = 0;

    bool same(std::size_t i, std::size_t j) const { return class_of[i] == class_of[j]; }
    PairRelation relation() const;
    // Dense ids numbered by first occurrence; used to compare partitions.
    static Partition from_relation(const PairRelation& r);
    friend bool operator==(const Partition&, const Partition&) = default;
};

// Tau reachability tables shared by the functionals.
struct TauClosure {
    std::vector<Bitset> star;  // F =>  F'
    std::vector<Bitset> plus;  // F -tau-> => F'
    explicit TauClosure(const Lts& lts);
};

PairRelation functional_S(const Lts& lts, const PairRelation& r);
PairRelation functional_B(const Lts& lts, const PairRelation& r);
PairRelation functional_Bp(const Lts& lts, const PairRelation& r);
PairRelation functional_Bd(const Lts& lts, const PairRelation& r);
PairRelation functional(EquivKind k, const Lts& lts, const PairRelation& r);

// Greatest symmetric post-fixpoint by R_{k+1} = sym(R_k ∩ F(R_k)) from the full relation.
Partition bisimilarity(const Lts& lts, EquivKind kind);

// Union of all post-fixpoints among equivalence relations (set partitions).
// Rejects more than 8 states.
Partition brute_oracle(const Lts& lts, EquivKind kind);

struct RootedResult {
    bool equal = true;
    std::string clause;  // "move-left", "move-right" or "exposure"
    std::string detail;
};

RootedResult rooted_equal(Expr e, Expr f, std::size_t budget = kDefaultBudget);
bool equivalent(Expr e, Expr f, EquivKind kind, std::size_t budget = kDefaultBudget);

// States with an infinite tau-run inside their own class.
std::vector<bool> in_class_divergent(const Lts& lts, const Partition& p);

// Quotient of lts by its dpbb partition.
Lts minimize(const Lts& lts);

}  // namespace dbc
