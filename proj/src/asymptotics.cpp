#include "srl/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "srl/mln.hpp"  // sigmoid, ground_query
#include "srl/parser.hpp"

namespace srl {

std::string PropositionValuation::key() const {
  std::string out;
  for (auto& [rel, v] : values) {
    out += std::to_string(rel);
    out += v ? "+" : "-";
  }
  return out;
}

namespace {

std::string model_fingerprint(const RlrModel& model) {
  std::ostringstream os;
  const Signature& sig = *model.sig;
  for (int r = 0; r < sig.relation_count(); ++r)
    os << sig.relation(r).name << '/' << sig.relation(r).arity() << ';';
  for (const RlrNode& node : model.nodes) {
    os << '#' << node.rel << ':';
    for (const RlrCondition& cond : node.conditions) {
      os << cond.weight << (cond.proportional ? 'p' : 'r')
         << print_formula(sig, *cond.formula) << '{';
      for (auto& [v, s] : cond.scaling_vars) os << v << ',';
      os << '}';
    }
  }
  return os.str();
}

// Truth of a ground proposition formula under a (partial) valuation. Every
// mentioned proposition must be assigned.
bool eval_prop_formula(const Formula& f, const PropositionValuation& c) {
  switch (f.kind) {
    case Formula::True:
      return true;
    case Formula::False:
      return false;
    case Formula::Atom: {
      if (!f.args.empty())
        throw ValidationError(
            "asymptotic evaluation reached a non-proposition atom");
      auto it = c.values.find(f.rel);
      if (it == c.values.end())
        throw NumericError("proposition valuation does not cover the formula");
      return it->second;
    }
    case Formula::Not:
      return !eval_prop_formula(*f.lhs, c);
    case Formula::And:
      return eval_prop_formula(*f.lhs, c) && eval_prop_formula(*f.rhs, c);
    case Formula::Or:
      return eval_prop_formula(*f.lhs, c) || eval_prop_formula(*f.rhs, c);
    case Formula::Implies:
      return !eval_prop_formula(*f.lhs, c) || eval_prop_formula(*f.rhs, c);
  }
  return false;
}

// Per node, the proposition symbols its conditional depends on, transitively
// through the condition formulas (including through higher-arity parents).
std::vector<std::set<int>> prop_ancestors(const RlrModel& model) {
  std::vector<std::set<int>> anc(model.nodes.size());
  for (int node : evaluation_order(model)) {
    for (const RlrCondition& cond : model.nodes[node].conditions)
      for (int rel : mentioned_relations(*cond.formula)) {
        int p = model.node_of_relation(rel);
        if (p < 0) continue;
        if (model.sig->relation(rel).arity() == 0) anc[node].insert(rel);
        anc[node].insert(anc[p].begin(), anc[p].end());
      }
  }
  return anc;
}

void reject_raw_conditions(const RlrModel& model) {
  for (const RlrNode& node : model.nodes)
    for (const RlrCondition& cond : node.conditions)
      if (!cond.proportional && !cond.scaling_vars.empty())
        throw ValidationError(
            "mixed/unscaled models have no defined asymptotics");
}

}  // namespace

struct AsymptoticEvaluator::Ext {
  RlrModel model;
  FormulaPtr rewritten;
};

AsymptoticEvaluator::AsymptoticEvaluator(RlrModel model, int proposition_cap)
    : model_(std::move(model)), proposition_cap_(proposition_cap) {
  auto violations = validate(model_);
  if (!violations.empty())
    throw ValidationError("invalid model: " + violations.front());
  reject_raw_conditions(model_);
  model_ = normalize_variable_sets(model_, std::nullopt);
}

AsymptoticEvaluator::Ext AsymptoticEvaluator::extend_for(const RlrModel& model,
                                                         const Formula& psi) {
  auto vars = free_variables(psi);
  std::vector<int> sorts;
  for (auto& [v, s] : vars) sorts.push_back(s);
  auto names = generic_constant_names(*model.sig, static_cast<int>(vars.size()));
  RlrModel ext = generic_extension(model, sorts);
  std::map<std::string, Term> subst;
  for (size_t i = 0; i < vars.size(); ++i) {
    subst.emplace(vars[i].first, Term::constant(names[i], vars[i].second));
    if (std::find(constants_used_.begin(), constants_used_.end(), names[i]) ==
        constants_used_.end())
      constants_used_.push_back(names[i]);
  }
  FormulaPtr rewritten =
      rewrite_with_constants(*substitute_variables(psi, subst), *ext.sig);
  return Ext{std::move(ext), std::move(rewritten)};
}

double AsymptoticEvaluator::node_conditional(const RlrModel& model,
                                             int node_index,
                                             const PropositionValuation& prefix) {
  const RlrNode& node = model.nodes[node_index];
  std::vector<int> index = node_indices(model);
  double logit = 0.0;
  for (const RlrCondition& cond : node.conditions) {
    // Termination guard of the recursion: condition formulas sit strictly
    // below the proposition in the index order.
    for (int rel : mentioned_relations(*cond.formula)) {
      int p = model.node_of_relation(rel);
      if (p >= 0 && index[p] >= index[node_index])
        throw ValidationError("condition index does not decrease");
    }
    double p = cond.scaling_vars.empty()
                   ? (eval_prop_formula(*cond.formula, prefix) ? 1.0 : 0.0)
                   : proportion(*cond.formula, prefix, model);
    logit += cond.weight * p;
  }
  return sigmoid(logit);
}

double AsymptoticEvaluator::event_probability(const RlrModel& model,
                                              const Formula& phi,
                                              const PropositionValuation& c,
                                              bool* marginalized) {
  const Signature& sig = *model.sig;
  std::vector<int> index = node_indices(model);

  int bound = -1, c_bound = -1;
  for (int rel : mentioned_relations(phi)) {
    int node = model.node_of_relation(rel);
    if (node < 0 || sig.relation(rel).arity() != 0)
      throw ValidationError(
          "asymptotic events must be formulas over propositions");
    bound = std::max(bound, index[node]);
  }
  for (auto& [rel, v] : c.values) {
    int node = model.node_of_relation(rel);
    if (node < 0 || sig.relation(rel).arity() != 0)
      throw ValidationError("conditioning set must assign propositions");
    c_bound = std::max(c_bound, index[node]);
  }
  if (marginalized && !c.values.empty() && bound > c_bound) *marginalized = true;

  // A conditioned proposition above phi's bound is d-separated from the
  // enumerated propositions once all of its own ancestors are assigned in c:
  // conditioning on it is then uninformative, so it can be dropped. This keeps
  // the chain-rule recursion bounded by phi's index. When an ancestor is
  // unassigned the proposition must stay and the bound grows to cover it.
  std::vector<std::set<int>> ancestors = prop_ancestors(model);
  PropositionValuation effective;
  for (auto& [rel, v] : c.values) {
    int node = model.node_of_relation(rel);
    if (index[node] > bound) {
      bool covered = true;
      for (int a : ancestors[node])
        if (!c.values.count(a)) {
          covered = false;
          break;
        }
      if (covered) continue;
      bound = index[node];
    }
    effective.values.emplace(rel, v);
  }

  // Propositions up to the bound, in evaluation order.
  std::vector<int> props;
  for (int node : evaluation_order(model))
    if (sig.relation(model.nodes[node].rel).arity() == 0 &&
        index[node] <= bound)
      props.push_back(node);
  if (static_cast<int>(props.size()) > proposition_cap_)
    throw CapError("asymptotic evaluation needs " +
                   std::to_string(props.size()) +
                   " propositions, above the cap of " +
                   std::to_string(proposition_cap_));

  double total = 0.0, hit = 0.0;
  PropositionValuation assignment;
  std::function<void(size_t, double)> walk = [&](size_t i, double prob) {
    if (prob == 0.0) return;
    if (i == props.size()) {
      total += prob;
      if (eval_prop_formula(phi, assignment)) hit += prob;
      return;
    }
    int rel = model.nodes[props[i]].rel;
    double p = node_conditional(model, props[i], assignment);
    auto fixed = effective.values.find(rel);
    for (int v = 0; v < 2; ++v) {
      if (fixed != effective.values.end() && fixed->second != (v == 1)) continue;
      assignment.values[rel] = (v == 1);
      walk(i + 1, prob * (v == 1 ? p : 1.0 - p));
      assignment.values.erase(rel);
    }
  };
  walk(0, 1.0);
  if (total <= 0.0)
    throw NumericError(
        "conditioning on a zero-asymptotic-probability valuation");
  return hit / total;
}

double AsymptoticEvaluator::proportion(const Formula& psi,
                                       const PropositionValuation& c) {
  return proportion(psi, c, model_);
}

double AsymptoticEvaluator::proportion(const Formula& psi,
                                       const PropositionValuation& c,
                                       const RlrModel& model) {
  std::string key = model_fingerprint(model) + "|" +
                    print_formula(*model.sig, psi) + "|" + c.key();
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;

  double value;
  if (free_variables(psi).empty()) {
    value = event_probability(model, psi, c, nullptr);
  } else {
    Ext ext = extend_for(model, psi);
    value = event_probability(ext.model, *ext.rewritten, c, nullptr);
  }
  memo_.emplace(key, value);
  table_.push_back(
      ProportionEntry{print_formula(*model.sig, psi), c.key(), value});
  return value;
}

std::vector<std::pair<PropositionValuation, double>>
AsymptoticEvaluator::proposition_distribution() {
  const Signature& sig = *model_.sig;
  std::vector<int> props;
  for (int node : evaluation_order(model_))
    if (sig.relation(model_.nodes[node].rel).arity() == 0)
      props.push_back(node);
  if (static_cast<int>(props.size()) > proposition_cap_)
    throw CapError("model has " + std::to_string(props.size()) +
                   " propositions, above the cap of " +
                   std::to_string(proposition_cap_));

  std::vector<std::pair<PropositionValuation, double>> rows;
  PropositionValuation assignment;
  std::function<void(size_t, double)> walk = [&](size_t i, double prob) {
    if (i == props.size()) {
      rows.emplace_back(assignment, prob);
      return;
    }
    double p = node_conditional(model_, props[i], assignment);
    int rel = model_.nodes[props[i]].rel;
    for (int v = 0; v < 2; ++v) {
      assignment.values[rel] = (v == 1);
      walk(i + 1, prob * (v == 1 ? p : 1.0 - p));
      assignment.values.erase(rel);
    }
  };
  walk(0, 1.0);
  return rows;
}

AsymptoticResult AsymptoticEvaluator::query(const Formula& query,
                                            const Formula* evidence) {
  AsymptoticResult result;
  result.proposition_distribution = proposition_distribution();
  if (evidence) {
    FormulaPtr joint = f_and(substitute_variables(query, {}),
                             substitute_variables(*evidence, {}));
    bool marg = false;
    double denom;
    if (free_variables(*joint).empty()) {
      result.value = event_probability(model_, *joint, {}, &marg);
      denom = event_probability(model_, *evidence, {}, nullptr);
      result.value = denom > 0.0 ? result.value / denom : 0.0;
      if (denom <= 0.0)
        throw NumericError(
            "conditioning on a zero-asymptotic-probability valuation");
    } else {
      Ext ext = extend_for(model_, *joint);
      result.value = event_probability(ext.model, *ext.rewritten, {}, &marg);
      denom = event_probability(ext.model, *evidence, {}, nullptr);
      if (denom <= 0.0)
        throw NumericError(
            "conditioning on a zero-asymptotic-probability valuation");
      result.value /= denom;
    }
    result.marginalized = marg;
  } else {
    result.value = proportion(query, {});
  }
  result.proportion_table = table_;
  result.constants_used = constants_used_;
  return result;
}

double asymptotic_proportion(const RlrModel& model, const Formula& psi,
                             const PropositionValuation& c) {
  AsymptoticEvaluator eval(model);
  return eval.proportion(psi, c);
}

std::vector<std::pair<PropositionValuation, double>>
asymptotic_proposition_distribution(const RlrModel& model,
                                    int proposition_cap) {
  AsymptoticEvaluator eval(model, proposition_cap);
  return eval.proposition_distribution();
}

AsymptoticResult asymptotic_query(const RlrModel& model, const Formula& query,
                                  const Formula* evidence) {
  AsymptoticEvaluator eval(model);
  return eval.query(query, evidence);
}

std::vector<LimitCheckRow> empirical_limit_check(
    const RlrModel& model, const Formula& query,
    const std::vector<std::uint32_t>& sizes, std::uint64_t samples_per_size,
    std::uint64_t seed) {
  double algorithmic = asymptotic_query(model, query).value;
  std::vector<LimitCheckRow> rows;
  for (std::uint32_t n : sizes) {
    DomainAssignment domains;
    domains.size_by_sort.assign(model.sig->sort_count(), n);
    std::uint64_t size_seed = seed ^ (0x9E3779B97F4A7C15ull * n);
    SampleBatch batch =
        forward_sample(model, domains, size_seed, samples_per_size);
    double sum = 0.0;
    std::uint64_t groundings = std::max<std::uint64_t>(
        total_grounding_count(query, domains), 1);
    for (const World& world : batch.worlds)
      sum += static_cast<double>(count_true_groundings(world, query)) /
             static_cast<double>(groundings);
    double empirical = sum / static_cast<double>(samples_per_size);
    LimitCheckRow row;
    row.n = n;
    row.empirical = empirical;
    row.algorithmic = algorithmic;
    row.gap = std::abs(empirical - algorithmic);
    row.tolerance =
        3.0 * std::sqrt(0.25 / static_cast<double>(samples_per_size *
                                                   groundings));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace srl
