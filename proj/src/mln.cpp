#include "srl/mln.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace srl {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Streaming log-sum-exp with a deterministic accumulation order.
struct LogSumExp {
  double max = kNegInf;
  double sum = 0.0;

  void add(double x) {
    if (x == kNegInf) return;
    if (x <= max) {
      sum += std::exp(x - max);
    } else {
      sum = sum * std::exp(max - x) + 1.0;
      max = x;
    }
  }
  double value() const { return sum == 0.0 ? kNegInf : max + std::log(sum); }
};

void collect_literal_atoms(const Formula& f, std::vector<const Formula*>& out) {
  switch (f.kind) {
    case Formula::Atom:
      out.push_back(&f);
      break;
    case Formula::Not:
      collect_literal_atoms(*f.lhs, out);
      break;
    case Formula::And:
    case Formula::Or:
    case Formula::Implies:
      collect_literal_atoms(*f.lhs, out);
      collect_literal_atoms(*f.rhs, out);
      break;
    default:
      break;
  }
}

}  // namespace

std::vector<double> connection_vector(const Formula& formula,
                                      const DomainAssignment& domains) {
  auto vars = free_variables(formula);
  std::vector<const Formula*> literals;
  collect_literal_atoms(formula, literals);
  std::vector<double> entries;
  entries.reserve(literals.size());
  for (const Formula* lit : literals) {
    double product = 1.0;
    for (auto& [name, sort] : vars) {
      bool in_literal = false;
      for (const Term& t : lit->args)
        if (t.kind == Term::Var && t.name == name) in_literal = true;
      if (!in_literal) product *= domains.size(sort);
    }
    entries.push_back(product);
  }
  return entries;
}

double aggregate(const std::vector<double>& cv, Aggregator agg) {
  if (cv.empty()) return 1.0;
  switch (agg) {
    case Aggregator::Max:
      return *std::max_element(cv.begin(), cv.end());
    case Aggregator::Sum:
      return std::accumulate(cv.begin(), cv.end(), 0.0);
    case Aggregator::GeoMean: {
      double log_sum = 0.0;
      for (double e : cv) log_sum += std::log(e);
      return std::exp(log_sum / static_cast<double>(cv.size()));
    }
  }
  return 1.0;
}

double scaling_factor(const Formula& formula, const DomainAssignment& domains,
                      Aggregator agg) {
  return aggregate(connection_vector(formula, domains), agg);
}

double world_log_weight(const MlnModel& model, const World& world) {
  double total = 0.0;
  for (const WeightedFormula& wf : model.formulas) {
    double divisor =
        model.domain_aware
            ? scaling_factor(*wf.formula, world.domains(), model.aggregator)
            : 1.0;
    total += (wf.weight / divisor) *
             static_cast<double>(count_true_groundings(world, *wf.formula));
  }
  return total;
}

double LogWeightedDistribution::probability(std::uint64_t world_index) const {
  return std::exp(log_weights[world_index] - log_partition);
}

LogWeightedDistribution distribution(const MlnModel& model,
                                     const DomainAssignment& domains,
                                     std::uint64_t state_cap) {
  LogWeightedDistribution dist;
  dist.log_weights.reserve(world_count(*model.sig, domains, state_cap));
  for_each_world(
      model.sig, domains,
      [&](const World& w) { dist.log_weights.push_back(world_log_weight(model, w)); },
      state_cap);
  LogSumExp lse;
  for (double lw : dist.log_weights) lse.add(lw);
  dist.log_partition = lse.value();
  return dist;
}

double query_probability(const MlnModel& model, const DomainAssignment& domains,
                         const Formula& query, const Formula* evidence,
                         std::uint64_t state_cap) {
  LogSumExp numerator, denominator;
  GroundingMap empty;
  for_each_world(
      model.sig, domains,
      [&](const World& w) {
        if (evidence && !holds(w, *evidence, empty)) return;
        double lw = world_log_weight(model, w);
        denominator.add(lw);
        if (holds(w, query, empty)) numerator.add(lw);
      },
      state_cap);
  if (denominator.value() == kNegInf)
    throw NumericError("conditioning on zero-probability evidence");
  if (numerator.value() == kNegInf) return 0.0;
  return std::exp(numerator.value() - denominator.value());
}

double delta(const MlnModel& model, const DomainAssignment& domains,
             const World& world, const GroundAtom& atom) {
  (void)domains;
  World flipped = world;
  flipped.set(atom.rel, atom.tuple, true);
  double w_true = world_log_weight(model, flipped);
  flipped.set(atom.rel, atom.tuple, false);
  double w_false = world_log_weight(model, flipped);
  return w_true - w_false;
}

std::pair<double, double> verify_sigmoid_identity(
    const MlnModel& model, const DomainAssignment& domains,
    const GroundAtom& atom, std::uint64_t state_cap) {
  LogWeightedDistribution dist = distribution(model, domains, state_cap);
  double lhs = 0.0, rhs = 0.0;
  std::uint64_t index = 0;
  for_each_world(
      model.sig, domains,
      [&](const World& w) {
        double mu = dist.probability(index++);
        if (w.get(atom.rel, atom.tuple)) lhs += mu;
        rhs += mu * sigmoid(delta(model, domains, w, atom));
      },
      state_cap);
  return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// Factorized partition sums.
//
// Formula groundings are compiled to formulas over global ground-atom ids.
// log Z decomposes by splitting the co-occurrence graph of unassigned atoms
// into connected components (product) and conditioning on the highest-degree
// atom of a component (sum); small components are brute-forced.
// ---------------------------------------------------------------------------

namespace {

constexpr int kBruteForceAtoms = 16;
constexpr int kMaxConditionDepth = 12;
constexpr double kLog2 = 0.6931471805599453094;

// Three-valued evaluation over a partial assignment: -1 unknown, 0, 1.
int eval3(const Formula& f, const std::vector<signed char>& assign) {
  switch (f.kind) {
    case Formula::True:
      return 1;
    case Formula::False:
      return 0;
    case Formula::Atom:
      return assign[f.rel];
    case Formula::Not: {
      int v = eval3(*f.lhs, assign);
      return v < 0 ? -1 : 1 - v;
    }
    case Formula::And: {
      int a = eval3(*f.lhs, assign);
      if (a == 0) return 0;
      int b = eval3(*f.rhs, assign);
      if (b == 0) return 0;
      return (a == 1 && b == 1) ? 1 : -1;
    }
    case Formula::Or: {
      int a = eval3(*f.lhs, assign);
      if (a == 1) return 1;
      int b = eval3(*f.rhs, assign);
      if (b == 1) return 1;
      return (a == 0 && b == 0) ? 0 : -1;
    }
    case Formula::Implies: {
      int a = eval3(*f.lhs, assign);
      int b = eval3(*f.rhs, assign);
      if (a == 0 || b == 1) return 1;
      return (a == 1 && b == 0) ? 0 : -1;
    }
  }
  return -1;
}

void collect_atom_ids(const Formula& f, std::vector<int>& out) {
  switch (f.kind) {
    case Formula::Atom:
      out.push_back(f.rel);
      break;
    case Formula::Not:
      collect_atom_ids(*f.lhs, out);
      break;
    case Formula::And:
    case Formula::Or:
    case Formula::Implies:
      collect_atom_ids(*f.lhs, out);
      collect_atom_ids(*f.rhs, out);
      break;
    default:
      break;
  }
}

class PartitionFactorizer {
 public:
  PartitionFactorizer(const MlnModel& model, const DomainAssignment& domains) {
    const Signature& sig = *model.sig;
    atom_count_ = static_cast<std::uint64_t>(ground_atom_total(sig, domains));
    if (atom_count_ > 2'000'000)
      throw CapError("factorized engine: too many ground atoms (" +
                     std::to_string(atom_count_) + ")");
    // Global atom ids follow the fixed ground-atom ordering.
    offsets_.resize(sig.relation_count());
    std::uint64_t offset = 0;
    World probe(model.sig, domains);
    for (int r = 0; r < sig.relation_count(); ++r) {
      offsets_[r] = offset;
      offset += probe.tuple_count(r);
    }
    for (const WeightedFormula& wf : model.formulas) {
      double divisor =
          model.domain_aware
              ? scaling_factor(*wf.formula, domains, model.aggregator)
              : 1.0;
      double w = wf.weight / divisor;
      auto vars = free_variables(*wf.formula);
      GroundingMap grounding;
      for (auto& [name, sort] : vars) grounding[name] = 0;
      while (true) {
        inst_w_.push_back(w);
        inst_f_.push_back(compile(*wf.formula, grounding, probe));
        size_t i = 0;
        for (; i < vars.size(); ++i) {
          int& v = grounding[vars[i].first];
          if (static_cast<std::uint32_t>(++v) < domains.size(vars[i].second))
            break;
          v = 0;
        }
        if (i == vars.size()) break;
      }
    }
  }

  std::uint64_t atom_id(const GroundAtom& atom, const World& probe) const {
    return offsets_[atom.rel] + probe.tuple_index(atom.rel, atom.tuple);
  }
  std::uint64_t atom_id(int rel, std::uint64_t tuple_index) const {
    return offsets_[rel] + tuple_index;
  }

  double log_z(const std::vector<std::pair<std::uint64_t, bool>>& constraints) {
    std::vector<signed char> assign(atom_count_, -1);
    for (auto& [atom, value] : constraints) assign[atom] = value ? 1 : 0;
    std::vector<int> insts(inst_f_.size());
    std::iota(insts.begin(), insts.end(), 0);
    std::uint64_t scope = atom_count_ - constraints.size();
    return solve(insts, scope, assign, 0);
  }

 private:
  // Reassembles a grounding as a formula whose "atoms" are global atom ids.
  FormulaPtr compile(const Formula& f, const GroundingMap& grounding,
                     const World& probe) {
    switch (f.kind) {
      case Formula::True:
        return f_true();
      case Formula::False:
        return f_false();
      case Formula::Atom: {
        std::vector<int> tuple;
        for (const Term& t : f.args) {
          if (t.kind == Term::Element)
            tuple.push_back(t.element);
          else
            tuple.push_back(grounding.at(t.name));
        }
        return f_atom(static_cast<int>(atom_id(f.rel, probe.tuple_index(f.rel, tuple))),
                      {});
      }
      case Formula::Not:
        return f_not(compile(*f.lhs, grounding, probe));
      case Formula::And:
        return f_and(compile(*f.lhs, grounding, probe),
                     compile(*f.rhs, grounding, probe));
      case Formula::Or:
        return f_or(compile(*f.lhs, grounding, probe),
                    compile(*f.rhs, grounding, probe));
      case Formula::Implies:
        return f_implies(compile(*f.lhs, grounding, probe),
                         compile(*f.rhs, grounding, probe));
    }
    return f_true();
  }

  // log of the sum over all configurations of `scope_size` unassigned atoms
  // of exp(sum of weights of satisfied instances).
  double solve(const std::vector<int>& insts, std::uint64_t scope_size,
               std::vector<signed char>& assign, int depth) {
    double base = 0.0;
    std::vector<int> open;
    std::vector<int> open_atoms;  // unassigned atoms mentioned by open instances
    std::map<int, int> atom_slot;
    std::vector<int> parent;  // union-find over open_atoms slots
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (int idx : insts) {
      int v = eval3(*inst_f_[idx], assign);
      if (v == 1) {
        base += inst_w_[idx];
        continue;
      }
      if (v == 0) continue;
      open.push_back(idx);
      std::vector<int> atoms;
      collect_atom_ids(*inst_f_[idx], atoms);
      int first_slot = -1;
      for (int a : atoms) {
        if (assign[a] != -1) continue;
        auto [it, inserted] = atom_slot.try_emplace(a, -1);
        if (inserted) {
          it->second = static_cast<int>(open_atoms.size());
          open_atoms.push_back(a);
          parent.push_back(it->second);
        }
        if (first_slot < 0)
          first_slot = it->second;
        else
          parent[find(it->second)] = find(first_slot);
      }
    }
    double result =
        base + kLog2 * static_cast<double>(scope_size - open_atoms.size());
    if (open.empty()) return result;

    // Group instances and atoms by connected component.
    std::map<int, std::pair<std::vector<int>, std::vector<int>>> comps;
    for (size_t s = 0; s < open_atoms.size(); ++s)
      comps[find(static_cast<int>(s))].first.push_back(open_atoms[s]);
    for (int idx : open) {
      std::vector<int> atoms;
      collect_atom_ids(*inst_f_[idx], atoms);
      for (int a : atoms)
        if (assign[a] == -1) {
          comps[find(atom_slot[a])].second.push_back(idx);
          break;
        }
    }
    for (auto& [root, comp] : comps)
      result += solve_component(comp.second, comp.first, assign, depth);
    return result;
  }

  double solve_component(const std::vector<int>& insts,
                         const std::vector<int>& atoms,
                         std::vector<signed char>& assign, int depth) {
    if (atoms.size() <= kBruteForceAtoms) {
      LogSumExp lse;
      for (std::uint64_t cfg = 0; cfg < (std::uint64_t(1) << atoms.size());
           ++cfg) {
        for (size_t i = 0; i < atoms.size(); ++i)
          assign[atoms[i]] = static_cast<signed char>((cfg >> i) & 1);
        double s = 0.0;
        for (int idx : insts)
          if (eval3(*inst_f_[idx], assign) == 1) s += inst_w_[idx];
        lse.add(s);
      }
      for (int a : atoms) assign[a] = -1;
      return lse.value();
    }
    if (depth >= kMaxConditionDepth)
      throw ValidationError(
          "not block-factorizable: conditioning depth exhausted without "
          "decomposing the grounding");
    // Condition on the atom shared by the most instances.
    std::map<int, int> degree;
    for (int idx : insts) {
      std::vector<int> mentioned;
      collect_atom_ids(*inst_f_[idx], mentioned);
      std::sort(mentioned.begin(), mentioned.end());
      mentioned.erase(std::unique(mentioned.begin(), mentioned.end()),
                      mentioned.end());
      for (int a : mentioned)
        if (assign[a] == -1) ++degree[a];
    }
    int pivot = atoms.front();
    int best = -1;
    for (int a : atoms)
      if (degree[a] > best) {
        best = degree[a];
        pivot = a;
      }
    LogSumExp lse;
    for (int value = 0; value < 2; ++value) {
      assign[pivot] = static_cast<signed char>(value);
      lse.add(solve(insts, atoms.size() - 1, assign, depth + 1));
    }
    assign[pivot] = -1;
    return lse.value();
  }

  std::uint64_t atom_count_ = 0;
  std::vector<std::uint64_t> offsets_;
  std::vector<double> inst_w_;
  std::vector<FormulaPtr> inst_f_;
};

// Extracts (atom, sign) constraints from a conjunction of ground literals.
void literal_constraints(const Formula& f, const World& probe,
                         const PartitionFactorizer& pf, bool sign,
                         std::vector<std::pair<std::uint64_t, bool>>& out) {
  switch (f.kind) {
    case Formula::Atom: {
      std::vector<int> tuple;
      for (const Term& t : f.args) {
        if (t.kind != Term::Element)
          throw ValidationError("factorized engine requires a ground query");
        tuple.push_back(t.element);
      }
      out.emplace_back(pf.atom_id(GroundAtom{f.rel, tuple}, probe), sign);
      return;
    }
    case Formula::Not:
      literal_constraints(*f.lhs, probe, pf, !sign, out);
      return;
    case Formula::And:
      if (!sign) break;
      literal_constraints(*f.lhs, probe, pf, true, out);
      literal_constraints(*f.rhs, probe, pf, true, out);
      return;
    default:
      break;
  }
  throw ValidationError(
      "factorized engine supports conjunctions of ground literals only");
}

}  // namespace

double factorized_probability(const MlnModel& model,
                              const DomainAssignment& domains,
                              const Formula& query, const Formula* evidence) {
  PartitionFactorizer pf(model, domains);
  World probe(model.sig, domains);
  std::vector<std::pair<std::uint64_t, bool>> base;
  if (evidence) literal_constraints(*evidence, probe, pf, true, base);
  std::vector<std::pair<std::uint64_t, bool>> with_query = base;
  literal_constraints(query, probe, pf, true, with_query);
  double log_num = pf.log_z(with_query);
  double log_den = pf.log_z(base);
  if (log_den == kNegInf)
    throw NumericError("conditioning on zero-probability evidence");
  return std::exp(log_num - log_den);
}

FormulaPtr ground_query(const Formula& query, const DomainAssignment& domains) {
  std::map<std::string, int> next_by_sort;
  std::map<std::string, Term> bound;
  for (auto& [name, sort] : free_variables(query)) {
    int index = next_by_sort[std::to_string(sort)]++;
    if (static_cast<std::uint32_t>(index) >= domains.size(sort))
      throw ValidationError("domain too small to ground query variable " + name);
    bound.emplace(name, Term::element_ref(index, sort));
  }
  std::function<FormulaPtr(const Formula&)> walk =
      [&](const Formula& f) -> FormulaPtr {
    switch (f.kind) {
      case Formula::True:
        return f_true();
      case Formula::False:
        return f_false();
      case Formula::Atom: {
        std::vector<Term> args;
        for (const Term& t : f.args)
          args.push_back(t.kind == Term::Var ? bound.at(t.name) : t);
        return f_atom(f.rel, std::move(args));
      }
      case Formula::Not:
        return f_not(walk(*f.lhs));
      case Formula::And:
        return f_and(walk(*f.lhs), walk(*f.rhs));
      case Formula::Or:
        return f_or(walk(*f.lhs), walk(*f.rhs));
      case Formula::Implies:
        return f_implies(walk(*f.lhs), walk(*f.rhs));
    }
    return f_true();
  };
  return walk(query);
}

std::vector<SweepRow> domain_sweep(const MlnModel& model,
                                   const std::vector<std::uint32_t>& sizes,
                                   const Formula& query, MlnEngine engine) {
  std::vector<SweepRow> rows;
  for (std::uint32_t n : sizes) {
    DomainAssignment domains;
    domains.size_by_sort.assign(model.sig->sort_count(), n);
    FormulaPtr q = ground_query(query, domains);
    double p = engine == MlnEngine::Enumerate
                   ? query_probability(model, domains, *q)
                   : factorized_probability(model, domains, *q);
    rows.push_back(SweepRow{n, p});
  }
  return rows;
}

}  // namespace srl
