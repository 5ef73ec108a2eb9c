#include "srl/logic.hpp"

#include <algorithm>
#include <sstream>

namespace srl {

int Signature::add_sort(const std::string& name) {
  if (sort_index_.count(name))
    throw ValidationError("duplicate sort declaration: " + name);
  sorts_.push_back(name);
  sort_index_[name] = sort_count() - 1;
  return sort_count() - 1;
}

int Signature::add_relation(const std::string& name, std::vector<int> arg_sorts,
                            int arity_cap) {
  if (rel_index_.count(name) || constants_.count(name) || name == "true" ||
      name == "false")
    throw ValidationError("duplicate symbol declaration: " + name);
  if (static_cast<int>(arg_sorts.size()) > arity_cap)
    throw CapError("relation " + name + " exceeds arity cap " +
                   std::to_string(arity_cap));
  for (int s : arg_sorts)
    if (s < 0 || s >= sort_count())
      throw ValidationError("undeclared sort in relation " + name);
  rels_.push_back(RelationInfo{name, std::move(arg_sorts), -1, {}});
  rel_index_[name] = relation_count() - 1;
  return relation_count() - 1;
}

int Signature::add_derived_relation(const std::string& name,
                                    std::vector<int> arg_sorts, int base,
                                    std::vector<std::string> pattern) {
  int r = add_relation(name, std::move(arg_sorts),
                       /*arity_cap=*/kDefaultArityCap);
  rels_[r].base = base;
  rels_[r].pattern = std::move(pattern);
  return r;
}

void Signature::add_constant(const std::string& name, int sort) {
  if (constants_.count(name) || rel_index_.count(name))
    throw ValidationError("duplicate symbol declaration: " + name);
  if (sort < 0 || sort >= sort_count())
    throw ValidationError("undeclared sort for constant " + name);
  constants_[name] = sort;
}

int Signature::find_sort(const std::string& name) const {
  auto it = sort_index_.find(name);
  return it == sort_index_.end() ? -1 : it->second;
}

int Signature::find_relation(const std::string& name) const {
  auto it = rel_index_.find(name);
  return it == rel_index_.end() ? -1 : it->second;
}

int Signature::constant_sort(const std::string& name) const {
  auto it = constants_.find(name);
  return it == constants_.end() ? -1 : it->second;
}

int Signature::find_derived(int base,
                            const std::vector<std::string>& pattern) const {
  for (int r = 0; r < relation_count(); ++r)
    if (rels_[r].base == base && rels_[r].pattern == pattern) return r;
  return -1;
}

Term Term::element_ref(int index, int sort) {
  return Term{Element, "e" + std::to_string(index + 1), sort, index};
}

FormulaPtr f_true() {
  static FormulaPtr t = std::make_shared<Formula>(Formula{Formula::True});
  return t;
}
FormulaPtr f_false() {
  static FormulaPtr f = std::make_shared<Formula>(Formula{Formula::False});
  return f;
}
FormulaPtr f_atom(int rel, std::vector<Term> args) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Atom;
  f->rel = rel;
  f->args = std::move(args);
  return f;
}
static FormulaPtr binary(Formula::Kind k, FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->lhs = std::move(a);
  f->rhs = std::move(b);
  return f;
}
FormulaPtr f_not(FormulaPtr f) {
  auto g = std::make_shared<Formula>();
  g->kind = Formula::Not;
  g->lhs = std::move(f);
  return g;
}
FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
  return binary(Formula::And, std::move(a), std::move(b));
}
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
  return binary(Formula::Or, std::move(a), std::move(b));
}
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
  return binary(Formula::Implies, std::move(a), std::move(b));
}

static void collect_free_vars(const Formula& f,
                              std::vector<std::pair<std::string, int>>& out) {
  switch (f.kind) {
    case Formula::Atom:
      for (const Term& t : f.args)
        if (t.kind == Term::Var) {
          bool seen = false;
          for (auto& [n, s] : out)
            if (n == t.name) seen = true;
          if (!seen) out.emplace_back(t.name, t.sort);
        }
      break;
    case Formula::Not:
      collect_free_vars(*f.lhs, out);
      break;
    case Formula::And:
    case Formula::Or:
    case Formula::Implies:
      collect_free_vars(*f.lhs, out);
      collect_free_vars(*f.rhs, out);
      break;
    default:
      break;
  }
}

std::vector<std::pair<std::string, int>> free_variables(const Formula& f) {
  std::vector<std::pair<std::string, int>> out;
  collect_free_vars(f, out);
  return out;
}

bool mentions_relation(const Formula& f, int rel) {
  switch (f.kind) {
    case Formula::Atom:
      return f.rel == rel;
    case Formula::Not:
      return mentions_relation(*f.lhs, rel);
    case Formula::And:
    case Formula::Or:
    case Formula::Implies:
      return mentions_relation(*f.lhs, rel) || mentions_relation(*f.rhs, rel);
    default:
      return false;
  }
}

static void collect_relations(const Formula& f, std::vector<int>& out) {
  switch (f.kind) {
    case Formula::Atom:
      if (std::find(out.begin(), out.end(), f.rel) == out.end())
        out.push_back(f.rel);
      break;
    case Formula::Not:
      collect_relations(*f.lhs, out);
      break;
    case Formula::And:
    case Formula::Or:
    case Formula::Implies:
      collect_relations(*f.lhs, out);
      collect_relations(*f.rhs, out);
      break;
    default:
      break;
  }
}

std::vector<int> mentioned_relations(const Formula& f) {
  std::vector<int> out;
  collect_relations(f, out);
  return out;
}

void DomainAssignment::validate(const Signature& sig) const {
  if (static_cast<int>(size_by_sort.size()) != sig.sort_count())
    throw ValidationError("domain assignment does not cover all sorts");
  for (int s = 0; s < sig.sort_count(); ++s)
    if (size_by_sort[s] < 1)
      throw ValidationError("sort " + sig.sort_name(s) +
                            " must have at least one element");
}

World::World(SignaturePtr sig, DomainAssignment domains)
    : sig_(std::move(sig)), domains_(std::move(domains)) {
  domains_.validate(*sig_);
  truth_.resize(sig_->relation_count());
  for (int r = 0; r < sig_->relation_count(); ++r) {
    std::uint64_t count = 1;
    for (int s : sig_->relation(r).arg_sorts) count *= domains_.size(s);
    truth_[r].assign(count, 0);
  }
}

std::uint64_t World::tuple_index(int rel, const std::vector<int>& tuple) const {
  const RelationInfo& info = sig_->relation(rel);
  if (tuple.size() != info.arg_sorts.size())
    throw ValidationError("tuple arity mismatch for " + info.name);
  std::uint64_t idx = 0;
  for (size_t i = 0; i < tuple.size(); ++i) {
    std::uint32_t n = domains_.size(info.arg_sorts[i]);
    if (tuple[i] < 0 || static_cast<std::uint32_t>(tuple[i]) >= n)
      throw ValidationError("element out of range for " + info.name);
    idx = idx * n + tuple[i];
  }
  return idx;
}

std::vector<int> World::tuple_from_index(int rel, std::uint64_t index) const {
  const RelationInfo& info = sig_->relation(rel);
  std::vector<int> tuple(info.arg_sorts.size());
  for (int i = static_cast<int>(tuple.size()) - 1; i >= 0; --i) {
    std::uint32_t n = domains_.size(info.arg_sorts[i]);
    tuple[i] = static_cast<int>(index % n);
    index /= n;
  }
  return tuple;
}

bool World::get(int rel, const std::vector<int>& tuple) const {
  return truth_[rel][tuple_index(rel, tuple)] != 0;
}

void World::set(int rel, const std::vector<int>& tuple, bool value) {
  truth_[rel][tuple_index(rel, tuple)] = value ? 1 : 0;
}

std::uint64_t World::true_count(int rel) const {
  std::uint64_t c = 0;
  for (char v : truth_[rel]) c += v != 0;
  return c;
}

std::string World::canonical_record() const {
  std::ostringstream os;
  bool first = true;
  for (int r = 0; r < sig_->relation_count(); ++r) {
    for (std::uint64_t i = 0; i < truth_[r].size(); ++i) {
      if (!truth_[r][i]) continue;
      if (!first) os << ';';
      first = false;
      os << sig_->relation(r).name;
      auto tuple = tuple_from_index(r, i);
      if (!tuple.empty()) {
        os << '(';
        for (size_t k = 0; k < tuple.size(); ++k) {
          if (k) os << ',';
          os << 'e' << tuple[k] + 1;
        }
        os << ')';
      }
    }
  }
  return os.str();
}

static int term_element(const Term& t, const GroundingMap& grounding) {
  switch (t.kind) {
    case Term::Element:
      return t.element;
    case Term::Var: {
      auto it = grounding.find(t.name);
      if (it == grounding.end())
        throw ValidationError("unbound variable " + t.name);
      return it->second;
    }
    default:
      throw ValidationError("constant term " + t.name +
                            " in evaluated formula");
  }
}

bool holds(const World& world, const Formula& formula,
           const GroundingMap& grounding) {
  switch (formula.kind) {
    case Formula::True:
      return true;
    case Formula::False:
      return false;
    case Formula::Atom: {
      std::vector<int> tuple;
      tuple.reserve(formula.args.size());
      for (const Term& t : formula.args)
        tuple.push_back(term_element(t, grounding));
      return world.get(formula.rel, tuple);
    }
    case Formula::Not:
      return !holds(world, *formula.lhs, grounding);
    case Formula::And:
      return holds(world, *formula.lhs, grounding) &&
             holds(world, *formula.rhs, grounding);
    case Formula::Or:
      return holds(world, *formula.lhs, grounding) ||
             holds(world, *formula.rhs, grounding);
    case Formula::Implies:
      return !holds(world, *formula.lhs, grounding) ||
             holds(world, *formula.rhs, grounding);
  }
  return false;
}

std::uint64_t count_true_groundings(const World& world,
                                    const Formula& formula) {
  auto vars = free_variables(formula);
  GroundingMap grounding;
  for (auto& [name, sort] : vars) grounding[name] = 0;
  std::uint64_t count = 0;
  // Odometer over the free variables.
  while (true) {
    if (holds(world, formula, grounding)) ++count;
    size_t i = 0;
    for (; i < vars.size(); ++i) {
      int& v = grounding[vars[i].first];
      if (static_cast<std::uint32_t>(++v) < world.domains().size(vars[i].second))
        break;
      v = 0;
    }
    if (i == vars.size()) break;
  }
  return count;
}

std::uint64_t total_grounding_count(const Formula& formula,
                                    const DomainAssignment& domains) {
  std::uint64_t total = 1;
  for (auto& [name, sort] : free_variables(formula)) total *= domains.size(sort);
  return total;
}

std::uint64_t ground_atom_total(const Signature& sig,
                                const DomainAssignment& domains) {
  std::uint64_t total = 0;
  for (int r = 0; r < sig.relation_count(); ++r) {
    std::uint64_t count = 1;
    for (int s : sig.relation(r).arg_sorts) count *= domains.size(s);
    total += count;
  }
  return total;
}

GroundAtom ground_atom_at(const Signature& sig, const DomainAssignment& domains,
                          std::uint64_t global_index) {
  for (int r = 0; r < sig.relation_count(); ++r) {
    std::uint64_t count = 1;
    for (int s : sig.relation(r).arg_sorts) count *= domains.size(s);
    if (global_index < count) {
      GroundAtom atom;
      atom.rel = r;
      std::uint64_t idx = global_index;
      const auto& sorts = sig.relation(r).arg_sorts;
      atom.tuple.resize(sorts.size());
      for (int i = static_cast<int>(sorts.size()) - 1; i >= 0; --i) {
        std::uint32_t n = domains.size(sorts[i]);
        atom.tuple[i] = static_cast<int>(idx % n);
        idx /= n;
      }
      return atom;
    }
    global_index -= count;
  }
  throw ValidationError("ground atom index out of range");
}

std::uint64_t world_count(const Signature& sig, const DomainAssignment& domains,
                          std::uint64_t state_cap) {
  std::uint64_t atoms = ground_atom_total(sig, domains);
  if (atoms >= 64 || (std::uint64_t(1) << atoms) > state_cap)
    throw CapError("state space too large: 2^" + std::to_string(atoms) +
                   " worlds exceeds cap " + std::to_string(state_cap));
  return std::uint64_t(1) << atoms;
}

World world_from_index(SignaturePtr sig, const DomainAssignment& domains,
                       std::uint64_t index) {
  World world(sig, domains);
  std::uint64_t bit = 0;
  for (int r = 0; r < sig->relation_count(); ++r) {
    for (std::uint64_t i = 0; i < world.tuple_count(r); ++i, ++bit)
      world.set_by_index(r, i, (index >> bit) & 1);
  }
  return world;
}

void for_each_world(SignaturePtr sig, const DomainAssignment& domains,
                    const std::function<void(const World&)>& fn,
                    std::uint64_t state_cap) {
  std::uint64_t total = world_count(*sig, domains, state_cap);
  World world(sig, domains);
  for (std::uint64_t w = 0; w < total; ++w) {
    std::uint64_t bit = 0;
    for (int r = 0; r < sig->relation_count(); ++r)
      for (std::uint64_t i = 0; i < world.tuple_count(r); ++i, ++bit)
        world.set_by_index(r, i, (w >> bit) & 1);
    fn(world);
  }
}

World reduct(const World& world, const std::vector<std::string>& names) {
  auto sub = std::make_shared<Signature>();
  const Signature& sig = world.signature();
  for (int s = 0; s < sig.sort_count(); ++s) sub->add_sort(sig.sort_name(s));
  std::vector<int> sources;
  for (const std::string& name : names) {
    int r = sig.find_relation(name);
    if (r < 0)
      throw ValidationError("reduct symbol not in signature: " + name);
    sub->add_relation(name, sig.relation(r).arg_sorts);
    sources.push_back(r);
  }
  World out(sub, world.domains());
  for (size_t k = 0; k < sources.size(); ++k)
    for (std::uint64_t i = 0; i < out.tuple_count(static_cast<int>(k)); ++i)
      out.set_by_index(static_cast<int>(k), i,
                       world.get_by_index(sources[k], i));
  return out;
}

}  // namespace srl
