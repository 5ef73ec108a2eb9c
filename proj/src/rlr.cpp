#include "srl/rlr.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "srl/mln.hpp"  // sigmoid

namespace srl {

int RlrModel::node_of_relation(int rel) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].rel == rel) return static_cast<int>(i);
  return -1;
}

std::vector<int> RlrModel::parents(int node_index) const {
  std::vector<int> out;
  for (const RlrCondition& cond : nodes[node_index].conditions)
    for (int r : mentioned_relations(*cond.formula))
      if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  return out;
}

namespace {

// Longest root path per node; parent edges derived from condition formulas.
// Returns nullopt when the graph has a cycle.
std::optional<std::vector<int>> try_node_indices(const RlrModel& model) {
  const int n = static_cast<int>(model.nodes.size());
  std::vector<int> index(n, -1);
  std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
  bool cyclic = false;
  std::function<int(int)> visit = [&](int i) -> int {
    if (state[i] == 1) {
      cyclic = true;
      return 0;
    }
    if (state[i] == 2) return index[i];
    state[i] = 1;
    int best = 0;
    for (int rel : model.parents(i)) {
      int p = model.node_of_relation(rel);
      if (p < 0 || cyclic) continue;
      best = std::max(best, visit(p) + 1);
    }
    state[i] = 2;
    index[i] = best;
    return best;
  };
  for (int i = 0; i < n && !cyclic; ++i) visit(i);
  if (cyclic) return std::nullopt;
  return index;
}

}  // namespace

std::vector<int> node_indices(const RlrModel& model) {
  auto idx = try_node_indices(model);
  if (!idx) throw ValidationError("dependency graph contains a cycle");
  return *idx;
}

std::vector<int> evaluation_order(const RlrModel& model) {
  std::vector<int> index = node_indices(model);
  std::vector<int> order(model.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return index[a] < index[b]; });
  return order;
}

std::vector<std::string> validate(const RlrModel& model) {
  std::vector<std::string> violations;
  const Signature& sig = *model.sig;
  auto complain = [&](int node, int cond, const std::string& msg) {
    std::string where = node >= 0 ? "node " + sig.relation(model.nodes[node].rel).name
                                  : std::string("model");
    if (cond >= 0) where += ", condition " + std::to_string(cond + 1);
    violations.push_back(where + ": " + msg);
  };

  std::vector<int> seen(sig.relation_count(), 0);
  for (const RlrNode& node : model.nodes) {
    if (node.rel < 0 || node.rel >= sig.relation_count()) {
      violations.push_back("model: node references unknown relation");
      return violations;
    }
    ++seen[node.rel];
  }
  for (int r = 0; r < sig.relation_count(); ++r) {
    if (seen[r] == 0)
      violations.push_back("model: relation " + sig.relation(r).name +
                           " has no node");
    if (seen[r] > 1)
      violations.push_back("model: relation " + sig.relation(r).name +
                           " has multiple nodes");
  }

  for (size_t i = 0; i < model.nodes.size(); ++i) {
    const RlrNode& node = model.nodes[i];
    const RelationInfo& info = sig.relation(node.rel);
    if (static_cast<int>(node.head_args.size()) != info.arity())
      complain(static_cast<int>(i), -1, "head arity mismatch");
    std::vector<std::string> head_vars;
    for (size_t k = 0; k < node.head_args.size(); ++k) {
      const Term& t = node.head_args[k];
      if (t.kind != Term::Var) {
        complain(static_cast<int>(i), -1, "head arguments must be variables");
        continue;
      }
      if (std::find(head_vars.begin(), head_vars.end(), t.name) !=
          head_vars.end())
        complain(static_cast<int>(i), -1,
                 "head variables must be distinct (" + t.name + ")");
      head_vars.push_back(t.name);
      if (k < info.arg_sorts.size() && t.sort != info.arg_sorts[k])
        complain(static_cast<int>(i), -1, "head variable sort mismatch");
    }

    bool is_root = model.parents(static_cast<int>(i)).empty();
    if (is_root) {
      bool ok = node.conditions.size() == 1 &&
                node.conditions[0].formula->kind == Formula::True &&
                node.conditions[0].scaling_vars.empty();
      if (!ok)
        complain(static_cast<int>(i), -1,
                 "root node must have the single condition (true, w, {})");
    }
    for (size_t c = 0; c < node.conditions.size(); ++c) {
      const RlrCondition& cond = node.conditions[c];
      for (auto& [v, s] : cond.scaling_vars)
        if (std::find(head_vars.begin(), head_vars.end(), v) != head_vars.end())
          complain(static_cast<int>(i), static_cast<int>(c),
                   "head variable " + v + " may not be in the scaling set");
      for (auto& [v, s] : free_variables(*cond.formula)) {
        bool in_head =
            std::find(head_vars.begin(), head_vars.end(), v) != head_vars.end();
        bool in_set = false;
        for (auto& [u, us] : cond.scaling_vars)
          if (u == v) in_set = true;
        if (!in_head && !in_set)
          complain(static_cast<int>(i), static_cast<int>(c),
                   "variable " + v +
                       " occurs in the formula but neither in the head nor in "
                       "the scaling set");
      }
      if (mentions_relation(*cond.formula, node.rel))
        complain(static_cast<int>(i), static_cast<int>(c),
                 "formula mentions the node's own relation (cycle)");
      if (!std::isfinite(cond.weight))
        complain(static_cast<int>(i), static_cast<int>(c), "weight not finite");
    }
    if (!node.declared_parents.empty()) {
      std::vector<int> declared = node.declared_parents;
      std::vector<int> derived = model.parents(static_cast<int>(i));
      std::sort(declared.begin(), declared.end());
      std::sort(derived.begin(), derived.end());
      if (declared != derived)
        complain(static_cast<int>(i), -1,
                 "declared parents differ from the symbols in the conditions");
    }
  }

  if (!try_node_indices(model))
    violations.push_back("model: dependency graph contains a cycle");
  return violations;
}

RlrModel normalize_variable_sets(
    const RlrModel& model, const std::optional<DomainAssignment>& domains) {
  RlrModel out = model;
  for (RlrNode& node : out.nodes) {
    for (RlrCondition& cond : node.conditions) {
      auto used = free_variables(*cond.formula);
      std::vector<std::pair<std::string, int>> kept;
      for (auto& [v, s] : cond.scaling_vars) {
        bool occurs = false;
        for (auto& [u, us] : used)
          if (u == v) occurs = true;
        if (occurs) {
          kept.emplace_back(v, s);
        } else if (!cond.proportional) {
          if (!domains)
            throw ValidationError(
                "normalizing a raw condition requires domain sizes");
          cond.weight *= static_cast<double>(domains->size(s));
        }
        // Proportional: the dropped factor cancels against the divisor.
      }
      cond.scaling_vars = std::move(kept);
    }
  }
  return out;
}

namespace {

std::uint64_t condition_count(const RlrCondition& cond,
                              const GroundingMap& head_binding,
                              const World& world) {
  GroundingMap grounding = head_binding;
  for (auto& [v, s] : cond.scaling_vars) grounding[v] = 0;
  std::uint64_t count = 0;
  while (true) {
    if (holds(world, *cond.formula, grounding)) ++count;
    size_t i = 0;
    for (; i < cond.scaling_vars.size(); ++i) {
      int& v = grounding[cond.scaling_vars[i].first];
      if (static_cast<std::uint32_t>(++v) <
          world.domains().size(cond.scaling_vars[i].second))
        break;
      v = 0;
    }
    if (i == cond.scaling_vars.size()) break;
  }
  return count;
}

double condition_divisor(const RlrCondition& cond,
                         const DomainAssignment& domains) {
  if (!cond.proportional) return 1.0;
  double d = 1.0;
  for (auto& [v, s] : cond.scaling_vars) d *= domains.size(s);
  return d;
}

GroundingMap head_binding(const RlrNode& node,
                          const std::vector<int>& head_tuple) {
  GroundingMap binding;
  for (size_t i = 0; i < node.head_args.size(); ++i)
    binding[node.head_args[i].name] = head_tuple[i];
  return binding;
}

bool condition_head_independent(const RlrNode& node,
                                const RlrCondition& cond) {
  for (auto& [v, s] : free_variables(*cond.formula))
    for (const Term& h : node.head_args)
      if (h.name == v) return false;
  return true;
}

}  // namespace

double conditional_logit(const RlrModel& model, int node_index,
                         const std::vector<int>& head_tuple,
                         const World& parent_world) {
  const RlrNode& node = model.nodes[node_index];
  GroundingMap binding = head_binding(node, head_tuple);
  double logit = 0.0;
  for (const RlrCondition& cond : node.conditions) {
    double divisor = condition_divisor(cond, parent_world.domains());
    logit += (cond.weight / divisor) *
             static_cast<double>(condition_count(cond, binding, parent_world));
  }
  return logit;
}

double conditional_probability(const RlrModel& model, int node_index,
                               const std::vector<int>& head_tuple,
                               const World& parent_world) {
  return sigmoid(conditional_logit(model, node_index, head_tuple, parent_world));
}

namespace {

// Walks all head tuples of a node in lexicographic order, with
// head-independent condition counts hoisted out of the loop.
template <typename Fn>
void for_each_head_tuple(const RlrModel& model, int node_index,
                         const World& world, Fn&& fn) {
  const RlrNode& node = model.nodes[node_index];
  const DomainAssignment& domains = world.domains();
  const auto& sorts = model.sig->relation(node.rel).arg_sorts;

  std::vector<double> fixed_part(node.conditions.size(), 0.0);
  std::vector<char> is_fixed(node.conditions.size(), 0);
  double fixed_logit = 0.0;
  GroundingMap empty;
  for (size_t c = 0; c < node.conditions.size(); ++c) {
    const RlrCondition& cond = node.conditions[c];
    if (condition_head_independent(node, cond)) {
      is_fixed[c] = 1;
      fixed_part[c] = (cond.weight / condition_divisor(cond, domains)) *
                      static_cast<double>(condition_count(cond, empty, world));
      fixed_logit += fixed_part[c];
    }
  }

  std::vector<int> tuple(sorts.size(), 0);
  while (true) {
    double logit = fixed_logit;
    if (!node.head_args.empty()) {
      GroundingMap binding = head_binding(node, tuple);
      for (size_t c = 0; c < node.conditions.size(); ++c) {
        if (is_fixed[c]) continue;
        const RlrCondition& cond = node.conditions[c];
        logit += (cond.weight / condition_divisor(cond, domains)) *
                 static_cast<double>(condition_count(cond, binding, world));
      }
    }
    fn(tuple, logit);
    size_t i = sorts.size();
    while (i > 0) {
      --i;
      if (static_cast<std::uint32_t>(++tuple[i]) < domains.size(sorts[i])) break;
      tuple[i] = 0;
      if (i == 0) return;
    }
    if (sorts.empty()) return;
  }
}

}  // namespace

double world_log_probability(const RlrModel& model, const World& world) {
  double total = 0.0;
  for (int node_index : evaluation_order(model)) {
    const RlrNode& node = model.nodes[node_index];
    for_each_head_tuple(model, node_index, world,
                        [&](const std::vector<int>& tuple, double logit) {
                          bool value = world.get(node.rel, tuple);
                          // log sigmoid(x) = -log(1 + exp(-x))
                          double x = value ? logit : -logit;
                          total -= x >= 0 ? std::log1p(std::exp(-x))
                                          : -x + std::log1p(std::exp(x));
                        });
  }
  return total;
}

double world_probability(const RlrModel& model, const World& world) {
  return std::exp(world_log_probability(model, world));
}

double query_probability(const RlrModel& model, const DomainAssignment& domains,
                         const Formula& query, const Formula* evidence,
                         std::uint64_t state_cap) {
  double numerator = 0.0, denominator = 0.0;
  GroundingMap empty;
  for_each_world(
      model.sig, domains,
      [&](const World& w) {
        if (evidence && !holds(w, *evidence, empty)) return;
        double p = world_probability(model, w);
        denominator += p;
        if (holds(w, query, empty)) numerator += p;
      },
      state_cap);
  if (denominator <= 0.0)
    throw NumericError("conditioning on zero-probability evidence");
  return numerator / denominator;
}

RlrModel convert(const RlrModel& model, const DomainAssignment& domains,
                 ConvertDirection direction) {
  RlrModel out = model;
  for (RlrNode& node : out.nodes) {
    for (RlrCondition& cond : node.conditions) {
      double factor = 1.0;
      for (auto& [v, s] : cond.scaling_vars) factor *= domains.size(s);
      // A raw condition with weight w behaves like a proportional one with
      // weight w * |D|_V, so da -> unscaled divides and the inverse
      // multiplies; the distribution on `domains` is unchanged.
      if (direction == ConvertDirection::DaToUnscaled) {
        if (cond.proportional) cond.weight /= factor;
        cond.proportional = false;
      } else {
        if (!cond.proportional) cond.weight *= factor;
        cond.proportional = true;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generic extension by constants
// ---------------------------------------------------------------------------

std::vector<std::string> generic_constant_names(const Signature& sig,
                                                int count) {
  std::vector<std::string> names;
  int next = sig.generic_pool_used + 1;
  while (static_cast<int>(names.size()) < count) {
    std::string name = "a" + std::to_string(next++);
    if (sig.find_relation(name) >= 0 || sig.constant_sort(name) >= 0) continue;
    names.push_back(name);
  }
  return names;
}

namespace {

struct DerivedSpec {
  int source_rel;                   // relation being specialised
  std::vector<std::string> placement;  // per source slot: "" = open
};

std::string derived_name(const Signature& sig, int base,
                         const std::vector<std::string>& pattern) {
  std::string name = sig.relation(base).name + "[";
  for (size_t i = 0; i < pattern.size(); ++i) {
    if (i) name += ",";
    name += pattern[i].empty() ? "_" : pattern[i];
  }
  return name + "]";
}

// Merges a per-slot placement of `rel` into a pattern over its base symbol.
std::vector<std::string> merged_pattern(const Signature& sig, int rel,
                                        const std::vector<std::string>& placement,
                                        int& base_out) {
  const RelationInfo& info = sig.relation(rel);
  int base = info.is_derived() ? info.base : rel;
  std::vector<std::string> pattern =
      info.is_derived() ? info.pattern
                        : std::vector<std::string>(info.arity(), "");
  size_t slot = 0;
  for (std::string& p : pattern) {
    if (!p.empty()) continue;
    if (!placement[slot].empty()) p = placement[slot];
    ++slot;
  }
  base_out = base;
  return pattern;
}

}  // namespace

FormulaPtr substitute_variables(const Formula& f,
                                const std::map<std::string, Term>& subst) {
  switch (f.kind) {
    case Formula::True:
      return f_true();
    case Formula::False:
      return f_false();
    case Formula::Atom: {
      std::vector<Term> args;
      for (const Term& t : f.args) {
        auto it = t.kind == Term::Var ? subst.find(t.name) : subst.end();
        args.push_back(it == subst.end() ? t : it->second);
      }
      return f_atom(f.rel, std::move(args));
    }
    case Formula::Not:
      return f_not(substitute_variables(*f.lhs, subst));
    case Formula::And:
      return f_and(substitute_variables(*f.lhs, subst),
                   substitute_variables(*f.rhs, subst));
    case Formula::Or:
      return f_or(substitute_variables(*f.lhs, subst),
                  substitute_variables(*f.rhs, subst));
    case Formula::Implies:
      return f_implies(substitute_variables(*f.lhs, subst),
                       substitute_variables(*f.rhs, subst));
  }
  return f_true();
}

FormulaPtr rewrite_with_constants(const Formula& formula,
                                  const Signature& extended_sig) {
  switch (formula.kind) {
    case Formula::True:
      return f_true();
    case Formula::False:
      return f_false();
    case Formula::Atom: {
      std::vector<std::string> placement(formula.args.size());
      std::vector<Term> open_args;
      bool any_const = false;
      for (size_t i = 0; i < formula.args.size(); ++i) {
        if (formula.args[i].kind == Term::Const) {
          placement[i] = formula.args[i].name;
          any_const = true;
        } else {
          open_args.push_back(formula.args[i]);
        }
      }
      if (!any_const) return f_atom(formula.rel, std::move(open_args));
      int base = -1;
      auto pattern = merged_pattern(extended_sig, formula.rel, placement, base);
      int rel = extended_sig.find_derived(base, pattern);
      if (rel < 0)
        throw ValidationError("no derived symbol for constant-instantiated " +
                              extended_sig.relation(formula.rel).name);
      return f_atom(rel, std::move(open_args));
    }
    case Formula::Not:
      return f_not(rewrite_with_constants(*formula.lhs, extended_sig));
    case Formula::And:
      return f_and(rewrite_with_constants(*formula.lhs, extended_sig),
                   rewrite_with_constants(*formula.rhs, extended_sig));
    case Formula::Or:
      return f_or(rewrite_with_constants(*formula.lhs, extended_sig),
                  rewrite_with_constants(*formula.rhs, extended_sig));
    case Formula::Implies:
      return f_implies(rewrite_with_constants(*formula.lhs, extended_sig),
                       rewrite_with_constants(*formula.rhs, extended_sig));
  }
  return f_true();
}

RlrModel generic_extension(const RlrModel& model,
                           const std::vector<int>& constant_sorts) {
  const Signature& old_sig = *model.sig;
  auto names = generic_constant_names(old_sig, static_cast<int>(constant_sorts.size()));

  auto new_sig = std::make_shared<Signature>();
  for (int s = 0; s < old_sig.sort_count(); ++s)
    new_sig->add_sort(old_sig.sort_name(s));
  for (int r = 0; r < old_sig.relation_count(); ++r) {
    const RelationInfo& info = old_sig.relation(r);
    if (info.is_derived())
      new_sig->add_derived_relation(info.name, info.arg_sorts, info.base,
                                    info.pattern);
    else
      new_sig->add_relation(info.name, info.arg_sorts);
  }
  for (auto& [name, sort] : old_sig.constants())
    new_sig->add_constant(name, sort);
  for (size_t i = 0; i < names.size(); ++i)
    new_sig->add_constant(names[i], constant_sorts[i]);
  new_sig->generic_pool_used =
      old_sig.generic_pool_used + static_cast<int>(names.size());

  // All ways of placing the new constants into the open slots of each
  // existing symbol; at least one slot filled.
  std::vector<DerivedSpec> specs;
  for (int r = 0; r < old_sig.relation_count(); ++r) {
    const RelationInfo& info = old_sig.relation(r);
    if (info.arity() == 0) continue;
    std::vector<std::vector<std::string>> options(info.arity());
    for (int slot = 0; slot < info.arity(); ++slot) {
      options[slot].push_back("");
      for (size_t c = 0; c < names.size(); ++c)
        if (constant_sorts[c] == info.arg_sorts[slot])
          options[slot].push_back(names[c]);
    }
    std::vector<size_t> pick(info.arity(), 0);
    while (true) {
      bool any = false;
      std::vector<std::string> placement(info.arity());
      for (int slot = 0; slot < info.arity(); ++slot) {
        placement[slot] = options[slot][pick[slot]];
        if (!placement[slot].empty()) any = true;
      }
      if (any) specs.push_back(DerivedSpec{r, placement});
      size_t i = 0;
      for (; i < pick.size(); ++i) {
        if (++pick[i] < options[i].size()) break;
        pick[i] = 0;
      }
      if (i == pick.size()) break;
    }
  }
  for (const DerivedSpec& spec : specs) {
    const RelationInfo& info = old_sig.relation(spec.source_rel);
    std::vector<int> arg_sorts;
    for (int slot = 0; slot < info.arity(); ++slot)
      if (spec.placement[slot].empty()) arg_sorts.push_back(info.arg_sorts[slot]);
    int base = -1;
    auto pattern = merged_pattern(old_sig, spec.source_rel, spec.placement, base);
    new_sig->add_derived_relation(derived_name(old_sig, base, pattern),
                                  std::move(arg_sorts), base, pattern);
  }

  RlrModel out;
  out.sig = new_sig;
  out.nodes = model.nodes;  // ids of original symbols are unchanged
  for (RlrNode& node : out.nodes) node.declared_parents.clear();
  for (const DerivedSpec& spec : specs) {
    const RlrNode& source = model.nodes[model.node_of_relation(spec.source_rel)];
    RlrNode node;
    std::map<std::string, Term> subst;
    for (size_t slot = 0; slot < spec.placement.size(); ++slot) {
      const Term& head_var = source.head_args[slot];
      if (spec.placement[slot].empty())
        node.head_args.push_back(head_var);
      else
        subst.emplace(head_var.name,
                      Term::constant(spec.placement[slot], head_var.sort));
    }
    int base = -1;
    auto pattern = merged_pattern(old_sig, spec.source_rel, spec.placement, base);
    node.rel = new_sig->find_derived(base, pattern);
    for (const RlrCondition& cond : source.conditions) {
      RlrCondition rewritten = cond;
      rewritten.formula = rewrite_with_constants(
          *substitute_variables(*cond.formula, subst), *new_sig);
      node.conditions.push_back(std::move(rewritten));
    }
    out.nodes.push_back(std::move(node));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling, likelihood, serialization
// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
  // Implementation-defined std distributions are avoided so batches are
  // byte-identical across platforms.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

SampleBatch forward_sample(const RlrModel& model,
                           const DomainAssignment& domains, std::uint64_t seed,
                           std::uint64_t count) {
  SampleBatch batch;
  batch.seed = seed;
  batch.domains = domains;
  std::vector<int> order = evaluation_order(model);
  for (std::uint64_t k = 0; k < count; ++k) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(k + 1)));
    World world(model.sig, domains);
    for (int node_index : order) {
      const RlrNode& node = model.nodes[node_index];
      for_each_head_tuple(model, node_index, world,
                          [&](const std::vector<int>& tuple, double logit) {
                            world.set(node.rel, tuple,
                                      uniform01(rng) < sigmoid(logit));
                          });
    }
    batch.worlds.push_back(std::move(world));
  }
  return batch;
}

double log_likelihood(const RlrModel& model, const SampleBatch& batch) {
  double total = 0.0;
  for (const World& world : batch.worlds)
    total += world_log_probability(model, world);
  return total;
}

void write_batch(std::ostream& os, const SampleBatch& batch,
                 const Signature& sig) {
  os << "# seed=" << batch.seed << "\n# sizes=";
  for (int s = 0; s < sig.sort_count(); ++s) {
    if (s) os << ',';
    os << sig.sort_name(s) << '=' << batch.domains.size(s);
  }
  os << "\n";
  for (const World& world : batch.worlds) os << world.canonical_record() << "\n";
}

SampleBatch read_batch(std::istream& is, SignaturePtr sig) {
  SampleBatch batch;
  batch.domains.size_by_sort.assign(sig->sort_count(), 0);
  bool have_sizes = false;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') {
      std::string body = line.substr(1);
      size_t eq = body.find('=');
      if (eq == std::string::npos) continue;
      std::string key = body.substr(0, eq);
      key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
      std::string value = body.substr(eq + 1);
      if (key == "seed") {
        batch.seed = std::stoull(value);
      } else if (key == "sizes") {
        std::istringstream parts(value);
        std::string part;
        while (std::getline(parts, part, ',')) {
          size_t e = part.find('=');
          if (e == std::string::npos)
            throw ValidationError("malformed sizes header in sample file");
          int sort = sig->find_sort(part.substr(0, e));
          if (sort < 0)
            throw ValidationError("unknown sort in sample file: " +
                                  part.substr(0, e));
          batch.domains.size_by_sort[sort] =
              static_cast<std::uint32_t>(std::stoul(part.substr(e + 1)));
        }
        have_sizes = true;
      }
      continue;
    }
    if (!have_sizes)
      throw ValidationError("sample file lacks a '# sizes=' header");
    World world(sig, batch.domains);
    std::istringstream atoms(line);
    std::string atom;
    while (std::getline(atoms, atom, ';')) {
      if (atom.empty()) continue;
      size_t paren = atom.find('(');
      std::string name = atom.substr(0, paren);
      int rel = sig->find_relation(name);
      if (rel < 0)
        throw ValidationError("unknown relation in sample file: " + name);
      std::vector<int> tuple;
      if (paren != std::string::npos) {
        std::string inner = atom.substr(paren + 1, atom.size() - paren - 2);
        std::istringstream elems(inner);
        std::string el;
        while (std::getline(elems, el, ',')) {
          if (el.empty() || el[0] != 'e')
            throw ValidationError("bad element name in sample file: " + el);
          tuple.push_back(std::stoi(el.substr(1)) - 1);
        }
      }
      world.set(rel, tuple, true);
    }
    batch.worlds.push_back(std::move(world));
  }
  return batch;
}

}  // namespace srl
