#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "srl/errors.hpp"

namespace srl {

inline constexpr int kDefaultArityCap = 3;
inline constexpr std::uint64_t kDefaultStateCap = std::uint64_t(1) << 24;

/// A relation symbol. Symbols produced by compiling constants away (or by a
/// generic extension) remember their base symbol and which base argument
/// positions are filled by which constant; `pattern[i]` is empty for an open
/// slot. For ordinary symbols `base == -1` and `pattern` is empty.
struct RelationInfo {
  std::string name;
  std::vector<int> arg_sorts;
  int base = -1;
  std::vector<std::string> pattern;

  int arity() const { return static_cast<int>(arg_sorts.size()); }
  bool is_proposition() const { return arg_sorts.empty(); }
  bool is_derived() const { return base >= 0; }
};

/// Multi-sorted relational signature. Sorts, relation symbols and declared
/// constants; the 0-ary built-ins true/false live in the formula language,
/// not here. Immutable once a model has been built over it.
class Signature {
 public:
  int add_sort(const std::string& name);
  int add_relation(const std::string& name, std::vector<int> arg_sorts,
                   int arity_cap = kDefaultArityCap);
  int add_derived_relation(const std::string& name, std::vector<int> arg_sorts,
                           int base, std::vector<std::string> pattern);
  void add_constant(const std::string& name, int sort);

  int sort_count() const { return static_cast<int>(sorts_.size()); }
  int relation_count() const { return static_cast<int>(rels_.size()); }
  const std::string& sort_name(int s) const { return sorts_[s]; }
  const RelationInfo& relation(int r) const { return rels_[r]; }

  /// -1 when absent.
  int find_sort(const std::string& name) const;
  int find_relation(const std::string& name) const;
  /// -1 when `name` is not a declared constant.
  int constant_sort(const std::string& name) const;
  const std::map<std::string, int>& constants() const { return constants_; }

  /// Looks up a derived symbol by base relation and pattern; -1 when absent.
  int find_derived(int base, const std::vector<std::string>& pattern) const;

  /// Number of generic-extension constants (a1, a2, ...) already in use by
  /// derived symbols of this signature.
  int generic_pool_used = 0;

 private:
  std::vector<std::string> sorts_;
  std::vector<RelationInfo> rels_;
  std::map<std::string, int> sort_index_;
  std::map<std::string, int> rel_index_;
  std::map<std::string, int> constants_;
};

using SignaturePtr = std::shared_ptr<const Signature>;

/// A term of the core language: a sort-annotated variable, or a concrete
/// domain element (canonical names e1..en, 0-based index). Constant terms
/// appear only transiently while rewriting; validated formulas are
/// constant-free.
struct Term {
  enum Kind { Var, Element, Const };
  Kind kind = Var;
  std::string name;
  int sort = -1;
  int element = -1;  // Element: 0-based index

  static Term var(std::string n, int sort) {
    return Term{Var, std::move(n), sort, -1};
  }
  static Term element_ref(int index, int sort);
  static Term constant(std::string n, int sort) {
    return Term{Const, std::move(n), sort, -1};
  }
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Quantifier-free formula tree. Atoms carry a relation id of some signature
/// plus a term list; the built-ins are structural nodes.
struct Formula {
  enum Kind { True, False, Atom, Not, And, Or, Implies };
  Kind kind = True;
  int rel = -1;
  std::vector<Term> args;
  FormulaPtr lhs, rhs;  // Not uses lhs only
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_atom(int rel, std::vector<Term> args);
FormulaPtr f_not(FormulaPtr f);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);

/// Free variables in first-occurrence, left-to-right order, with sorts.
std::vector<std::pair<std::string, int>> free_variables(const Formula& f);

bool mentions_relation(const Formula& f, int rel);
/// All relation ids mentioned, in first-occurrence order.
std::vector<int> mentioned_relations(const Formula& f);

/// Per-sort finite domains, specified by size; elements are the anonymous
/// canonical e1..en of each sort.
struct DomainAssignment {
  std::vector<std::uint32_t> size_by_sort;

  std::uint32_t size(int sort) const { return size_by_sort.at(sort); }
  void validate(const Signature& sig) const;
};

/// Variable assignment used when evaluating a formula: variable name ->
/// 0-based element index.
using GroundingMap = std::map<std::string, int>;

struct GroundAtom {
  int rel = -1;
  std::vector<int> tuple;

  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

/// A finite structure: one truth value per ground atom of the signature on
/// the given domains. Tuples are indexed in lexicographic element order with
/// the first argument most significant.
class World {
 public:
  World(SignaturePtr sig, DomainAssignment domains);

  const Signature& signature() const { return *sig_; }
  SignaturePtr signature_ptr() const { return sig_; }
  const DomainAssignment& domains() const { return domains_; }

  bool get(int rel, const std::vector<int>& tuple) const;
  void set(int rel, const std::vector<int>& tuple, bool value);
  bool get_by_index(int rel, std::uint64_t tuple_index) const {
    return truth_[rel][tuple_index] != 0;
  }
  void set_by_index(int rel, std::uint64_t tuple_index, bool value) {
    truth_[rel][tuple_index] = value ? 1 : 0;
  }

  std::uint64_t tuple_count(int rel) const { return truth_[rel].size(); }
  std::uint64_t true_count(int rel) const;

  std::uint64_t tuple_index(int rel, const std::vector<int>& tuple) const;
  std::vector<int> tuple_from_index(int rel, std::uint64_t index) const;

  /// Canonical record: true atoms in declaration/tuple order, ';'-separated.
  std::string canonical_record() const;

  friend bool operator==(const World& a, const World& b) {
    return a.truth_ == b.truth_;
  }

 private:
  SignaturePtr sig_;
  DomainAssignment domains_;
  std::vector<std::vector<char>> truth_;
};

bool holds(const World& world, const Formula& formula,
           const GroundingMap& grounding);

std::uint64_t count_true_groundings(const World& world, const Formula& formula);

/// Product of the domain sizes of the formula's free variables.
std::uint64_t total_grounding_count(const Formula& formula,
                                    const DomainAssignment& domains);

/// Total number of ground atoms of the signature on the given domains.
std::uint64_t ground_atom_total(const Signature& sig,
                                const DomainAssignment& domains);

/// Fixed global ordering of ground atoms: relations in declaration order,
/// tuples in lexicographic element order.
GroundAtom ground_atom_at(const Signature& sig, const DomainAssignment& domains,
                          std::uint64_t global_index);

/// The `index`-th world under the fixed ordering: ground atom k is true iff
/// bit k of `index` is set.
World world_from_index(SignaturePtr sig, const DomainAssignment& domains,
                       std::uint64_t index);

/// Number of worlds (2^#ground atoms); throws CapError beyond `state_cap`.
std::uint64_t world_count(const Signature& sig, const DomainAssignment& domains,
                          std::uint64_t state_cap = kDefaultStateCap);

/// Calls `fn` for every world exactly once, in index order.
void for_each_world(SignaturePtr sig, const DomainAssignment& domains,
                    const std::function<void(const World&)>& fn,
                    std::uint64_t state_cap = kDefaultStateCap);

/// Projects a world onto a subsignature given by relation names; relation
/// ids in the result follow `names` order.
World reduct(const World& world, const std::vector<std::string>& names);

}  // namespace srl
