// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "srl/asymptotics.hpp"
#include "srl/mln.hpp"
#include "srl/parser.hpp"
#include "srl/rlr.hpp"

using namespace srl;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& msg) {
    if (!cond && ok) {
      ok = false;
      detail = msg;
    }
  }
};

ParsedModel load_model(const std::string& name) {
  const char* dir = std::getenv("SRL_MODELS_DIR");
  if (!dir) throw std::runtime_error("SRL_MODELS_DIR is not set");
  std::ifstream in(std::string(dir) + "/" + name);
  if (!in.good()) throw std::runtime_error("cannot open model " + name);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_model(os.str());
}

// ---------------------------------------------------------------------------
// Random model generators (fixed seeds; all sizes kept enumerable).

FormulaPtr random_mln_formula(std::mt19937_64& rng, const Signature& sig,
                              int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 4 : 0);
  int choice = pick(rng);
  if (choice >= 1 && choice <= 4) {
    FormulaPtr a = random_mln_formula(rng, sig, depth - 1);
    if (choice == 1) return f_not(a);
    FormulaPtr b = random_mln_formula(rng, sig, depth - 1);
    if (choice == 2) return f_and(a, b);
    if (choice == 3) return f_or(a, b);
    return f_implies(a, b);
  }
  int rel = static_cast<int>(rng() % sig.relation_count());
  static const char* names[2] = {"x", "y"};
  std::vector<Term> args;
  for (int i = 0; i < sig.relation(rel).arity(); ++i)
    args.push_back(Term::var(names[rng() % 2], 0));
  return f_atom(rel, args);
}

MlnModel random_mln(std::mt19937_64& rng) {
  auto sig = std::make_shared<Signature>();
  int s = sig->add_sort("s");
  int nrel = 1 + static_cast<int>(rng() % 2);
  for (int i = 0; i < nrel; ++i)
    sig->add_relation("R" + std::to_string(i),
                      std::vector<int>(rng() % 3, s));
  MlnModel m;
  m.sig = sig;
  m.domain_aware = rng() % 2 == 0;
  m.aggregator = static_cast<Aggregator>(rng() % 3);
  std::uniform_real_distribution<double> w(-2.0, 2.0);
  int nf = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < nf; ++i)
    m.formulas.push_back({random_mln_formula(rng, *sig, 2), w(rng)});
  return m;
}

// A random valid RLR over one sort: node 0 is a root, later nodes condition on
// strictly earlier relations, so the dependency graph is a DAG by
// construction. With `v_empty` every scaling set is empty (conditions mention
// head variables only).
RlrModel random_rlr(std::mt19937_64& rng, bool v_empty) {
  auto sig = std::make_shared<Signature>();
  int s = sig->add_sort("s");
  int nrel = 2 + static_cast<int>(rng() % 2);
  std::vector<int> arity(nrel);
  std::vector<int> rels(nrel);
  for (int i = 0; i < nrel; ++i) {
    arity[i] = static_cast<int>(rng() % 2);
    rels[i] = sig->add_relation("R" + std::to_string(i),
                                std::vector<int>(arity[i], s));
  }
  RlrModel m;
  m.sig = sig;
  std::uniform_real_distribution<double> w(-2.0, 2.0);
  for (int i = 0; i < nrel; ++i) {
    RlrNode node;
    node.rel = rels[i];
    for (int a = 0; a < arity[i]; ++a)
      node.head_args.push_back(Term::var("h" + std::to_string(a + 1), s));

    // Parents usable under the v_empty restriction.
    std::vector<int> usable;
    for (int j = 0; j < i; ++j)
      if (arity[j] == 0 || !v_empty || arity[i] >= 1) usable.push_back(j);

    if (i == 0 || usable.empty() || rng() % 4 == 0) {
      node.conditions.push_back(RlrCondition{f_true(), w(rng), {}, true});
    } else {
      int nc = 1 + static_cast<int>(rng() % 2);
      for (int c = 0; c < nc; ++c) {
        bool uses_v = false;
        auto arg = [&]() -> Term {
          if (!v_empty && (node.head_args.empty() || rng() % 2 == 0)) {
            uses_v = true;
            return Term::var("v", s);
          }
          return node.head_args[rng() % node.head_args.size()];
        };
        auto atom = [&]() -> FormulaPtr {
          int j = usable[rng() % usable.size()];
          std::vector<Term> args;
          for (int k = 0; k < arity[j]; ++k) args.push_back(arg());
          return f_atom(rels[j], args);
        };
        FormulaPtr f = atom();
        int shape = static_cast<int>(rng() % 3);
        if (shape == 1) f = f_not(f);
        if (shape == 2) f = f_and(f, atom());
        RlrCondition cond;
        cond.formula = f;
        cond.weight = w(rng);
        cond.proportional = v_empty || rng() % 2 == 0;
        if (uses_v) cond.scaling_vars.emplace_back("v", s);
        node.conditions.push_back(std::move(cond));
      }
    }
    m.nodes.push_back(std::move(node));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Criteria.

void criterion_projectivity(Check& c) {
  auto m = *load_model("projectivity.rlr").rlr;
  auto q = parse_query("Q(e1) & R(e1)", *m.sig);
  double p1 = query_probability(m, DomainAssignment{{1}}, *q);
  double p2 = query_probability(m, DomainAssignment{{2}}, *q);
  double p3 = query_probability(m, DomainAssignment{{3}}, *q);
  c.require(std::abs(p1 - 0.5 * sigmoid(1)) <= 1e-9, "n=1 value off");
  c.require(std::abs(p2 - 0.5 * (0.5 * sigmoid(1) + 0.5 * sigmoid(0.5))) <= 1e-9,
            "n=2 value off");
  c.require(p2 < p1 && p3 < p2, "not strictly decreasing");
}

void criterion_sigmoid_identity(Check& c) {
  std::mt19937_64 rng(20260824);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    MlnModel m = random_mln(rng);
    DomainAssignment d{{1 + static_cast<std::uint32_t>(rng() % 2)}};
    for (int r = 0; r < m.sig->relation_count(); ++r) {
      World probe(m.sig, d);
      for (std::uint64_t idx = 0; idx < probe.tuple_count(r); ++idx) {
        GroundAtom atom{r, probe.tuple_from_index(r, idx)};
        auto [p, e] = verify_sigmoid_identity(m, d, atom);
        worst = std::max(worst, std::abs(p - e));
      }
    }
  }
  c.require(worst <= 1e-10,
            "identity gap " + std::to_string(worst) + " > 1e-10");
}

void criterion_mln_limits(Check& c) {
  auto m = *load_model("ex1.mln").mln;
  auto p_query = parse_query("P", *m.sig);
  auto r_query = parse_query("R(x)", *m.sig);
  std::vector<std::uint32_t> sizes;
  for (std::uint32_t n = 1; n <= 30; ++n) sizes.push_back(n);
  auto pp = domain_sweep(m, sizes, *p_query, MlnEngine::Factorized);
  auto pr = domain_sweep(m, sizes, *r_query, MlnEngine::Factorized);
  for (size_t i = 1; i < pp.size(); ++i)
    c.require(pp[i].probability < pp[i - 1].probability,
              "P(P) not strictly decreasing at n=" + std::to_string(i + 1));
  c.require(pp.back().probability < 1e-4, "P(P) at n=30 not below 1e-4");
  for (size_t i = 0; i < sizes.size(); ++i)
    c.require(std::abs(pr[i].probability - 0.5) <=
                  pp[i].probability * (sigmoid(1) - 0.5) + 1e-9,
              "proof identity violated at n=" + std::to_string(sizes[i]));
  std::vector<std::uint32_t> small(sizes.begin(), sizes.begin() + 10);
  auto pe = domain_sweep(m, small, *p_query, MlnEngine::Enumerate);
  auto re = domain_sweep(m, small, *r_query, MlnEngine::Enumerate);
  for (size_t i = 0; i < small.size(); ++i) {
    c.require(std::abs(pe[i].probability - pp[i].probability) <= 1e-9,
              "engines disagree on P(P)");
    c.require(std::abs(re[i].probability - pr[i].probability) <= 1e-9,
              "engines disagree on P(R(e1))");
  }
}

void criterion_da_sandwich(Check& c) {
  struct Case {
    const char* file;
    const char* query;
  } cases[] = {{"ex1-da.mln", "R(x)"}, {"ex2-da.mln", "Q(x)"}};
  for (const Case& cs : cases) {
    auto m = *load_model(cs.file).mln;
    auto q = parse_query(cs.query, *m.sig);
    auto check = [&](std::uint32_t n, double p) {
      c.require(p >= 0.5 - 1e-12 && p <= sigmoid(1.0 / n) + 1e-12,
                std::string(cs.file) + " bound violated at n=" +
                    std::to_string(n));
    };
    for (std::uint32_t n : {1u, 2u, 3u}) {
      DomainAssignment d;
      d.size_by_sort.assign(m.sig->sort_count(), n);
      check(n, query_probability(m, d, *ground_query(*q, d)));
    }
    for (std::uint32_t n : {10u, 25u, 50u}) {
      DomainAssignment d;
      d.size_by_sort.assign(m.sig->sort_count(), n);
      check(n, factorized_probability(m, d, *ground_query(*q, d)));
    }
  }
}

void criterion_mln_trend(Check& c) {
  auto m = *load_model("ex2.mln").mln;
  auto q = parse_query("Q(x)", *m.sig);
  auto rows = domain_sweep(m, {2, 4, 8, 16}, *q, MlnEngine::Factorized);
  for (size_t i = 1; i < rows.size(); ++i)
    c.require(rows[i].probability > rows[i - 1].probability, "not increasing");
  c.require(rows.back().probability > 0.99, "P(Q) at n=16 not above 0.99");
  auto cross = domain_sweep(m, {2}, *q, MlnEngine::Enumerate);
  c.require(std::abs(cross[0].probability - rows[0].probability) <= 1e-9,
            "enumeration cross-check failed at n=2");
}

void criterion_limit_vs_sampling(Check& c) {
  for (const char* file : {"projectivity.rlr", "chain3.rlr"}) {
    auto m = *load_model(file).rlr;
    for (const char* query : {"Q(x)", "R(y)"}) {
      auto q = parse_query(query, *m.sig);
      auto rows = empirical_limit_check(m, *q, {2000}, 200, 13);
      c.require(rows[0].gap <= 0.03, std::string(file) + " " + query +
                                         " gap " + std::to_string(rows[0].gap));
    }
  }
}

void criterion_convert_equivalence(Check& c) {
  std::mt19937_64 rng(777);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    RlrModel m = random_rlr(rng, false);
    if (!validate(m).empty()) {
      c.require(false, "generator produced an invalid model");
      return;
    }
    for (std::uint32_t n : {1u, 2u, 3u}) {
      DomainAssignment d{{n}};
      RlrModel un = convert(m, d, ConvertDirection::DaToUnscaled);
      RlrModel da = convert(m, d, ConvertDirection::UnscaledToDa);
      for_each_world(m.sig, d, [&](const World& w) {
        double p = world_probability(m, w);
        worst = std::max(worst, std::abs(p - world_probability(un, w)));
        worst = std::max(worst, std::abs(p - world_probability(da, w)));
      });
    }
  }
  c.require(worst <= 1e-12,
            "max world-probability gap " + std::to_string(worst));
}

void criterion_extension_consistency(Check& c) {
  auto m = *load_model("projectivity.rlr").rlr;
  auto ext = generic_extension(m, {0});
  int qa = ext.sig->find_relation("Q[a1]");
  int ra = ext.sig->find_relation("R[a1]");
  c.require(qa >= 0 && ra >= 0, "extension symbols missing");
  for (std::uint32_t n : {1u, 2u, 3u}) {
    DomainAssignment d{{n}};
    double bq = query_probability(m, d, *parse_query("Q(e1)", *m.sig));
    double br = query_probability(m, d, *parse_query("R(e1)", *m.sig));
    c.require(std::abs(bq - query_probability(ext, d, *f_atom(qa, {}))) <= 1e-12,
              "Q marginal mismatch at n=" + std::to_string(n));
    c.require(std::abs(br - query_probability(ext, d, *f_atom(ra, {}))) <= 1e-12,
              "R marginal mismatch at n=" + std::to_string(n));
  }
  auto q = parse_query("Q(x)", *m.sig);
  double base = asymptotic_query(m, *q).value;
  double extended = asymptotic_query(ext, *q).value;
  c.require(std::abs(base - extended) <= 1e-12,
            "asymptotic value changed under unused constants");
}

void criterion_projective_fragment(Check& c) {
  std::mt19937_64 rng(4242);
  for (int t = 0; t < 20; ++t) {
    RlrModel m = random_rlr(rng, true);
    if (!validate(m).empty()) {
      c.require(false, "generator produced an invalid model");
      return;
    }
    int rel = m.nodes.back().rel;
    int arity = m.sig->relation(rel).arity();
    FormulaPtr finite = arity == 0 ? f_atom(rel, {})
                                   : f_atom(rel, {Term::element_ref(0, 0)});
    FormulaPtr limit = arity == 0 ? f_atom(rel, {})
                                  : f_atom(rel, {Term::var("x", 0)});
    double asym = asymptotic_query(m, *limit).value;
    for (std::uint32_t n = 1; n <= 4; ++n) {
      double p = query_probability(m, DomainAssignment{{n}}, *finite);
      c.require(std::abs(p - asym) <= 1e-12,
                "model " + std::to_string(t) + " differs at n=" +
                    std::to_string(n));
    }
  }
}

void criterion_learning(Check& c) {
  auto truth = *load_model("projectivity.rlr").rlr;
  SampleBatch batch = forward_sample(truth, DomainAssignment{{20}}, 7, 500);
  LearnResult learned = learn_weights(truth, batch);
  for (size_t i = 0; i < truth.nodes.size(); ++i)
    for (size_t j = 0; j < truth.nodes[i].conditions.size(); ++j) {
      double got = learned.model.nodes[i].conditions[j].weight;
      double want = truth.nodes[i].conditions[j].weight;
      c.require(std::abs(got - want) <= 0.2,
                "weight " + std::to_string(got) + " vs " +
                    std::to_string(want));
    }
  c.require(log_likelihood(learned.model, batch) >=
                log_likelihood(truth, batch) - 1e-6,
            "learned weights are not a likelihood optimum");
}

void criterion_determinism(Check& c) {
  // Normalization: explicit MLN distribution and RLR world probabilities.
  auto mln = *load_model("ex1.mln").mln;
  DomainAssignment d3{{3}};
  auto dist = distribution(mln, d3);
  double total = 0.0;
  for (std::uint64_t i = 0; i < dist.log_weights.size(); ++i)
    total += dist.probability(i);
  c.require(std::abs(total - 1.0) <= 1e-12, "MLN distribution not normalized");

  auto rlr = *load_model("projectivity.rlr").rlr;
  double rtotal = 0.0;
  for_each_world(rlr.sig, d3,
                 [&](const World& w) { rtotal += world_probability(rlr, w); });
  c.require(std::abs(rtotal - 1.0) <= 1e-12, "RLR distribution not normalized");

  // Byte reproducibility under a fixed seed.
  std::ostringstream a, b;
  write_batch(a, forward_sample(rlr, DomainAssignment{{6}}, 99, 50), *rlr.sig);
  write_batch(b, forward_sample(rlr, DomainAssignment{{6}}, 99, 50), *rlr.sig);
  c.require(!a.str().empty() && a.str() == b.str(),
            "sampling is not byte-reproducible");

  auto q = parse_query("R(x)", *mln.sig);
  auto s1 = domain_sweep(mln, {1, 2, 3, 4}, *q, MlnEngine::Factorized);
  auto s2 = domain_sweep(mln, {1, 2, 3, 4}, *q, MlnEngine::Factorized);
  for (size_t i = 0; i < s1.size(); ++i)
    c.require(s1[i].probability == s2[i].probability,
              "sweep is not bit-reproducible");
}

}  // namespace

int main() {
  struct Entry {
    int number;
    const char* label;
    std::function<void(Check&)> fn;
  };
  std::vector<Entry> entries = {
      {1, "projectivity counterexample values and strict decrease",
       criterion_projectivity},
      {2, "sigmoid-delta identity on 200 random models",
       criterion_sigmoid_identity},
      {3, "unscaled MLN limit behaviour and engine agreement",
       criterion_mln_limits},
      {4, "domain-aware MLN sandwich bounds", criterion_da_sandwich},
      {5, "domain-aware trend toward certainty", criterion_mln_trend},
      {6, "algorithmic limits match forward sampling",
       criterion_limit_vs_sampling},
      {7, "scaled/unscaled conversion preserves world probabilities",
       criterion_convert_equivalence},
      {8, "generic-extension marginal and limit consistency",
       criterion_extension_consistency},
      {9, "projective fragment is size-invariant and equals its limit",
       criterion_projective_fragment},
      {10, "weight learning recovers the generating model",
       criterion_learning},
      {11, "normalization and byte-level determinism", criterion_determinism},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    Check check;
    auto t0 = std::chrono::steady_clock::now();
    try {
      e.fn(check);
    } catch (const std::exception& ex) {
      check.require(false, std::string("exception: ") + ex.what());
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    if (check.ok) {
      std::printf("criterion %2d: PASS  %s (%lld ms)\n", e.number, e.label,
                  static_cast<long long>(ms));
    } else {
      std::printf("criterion %2d: FAIL  %s (%lld ms): %s\n", e.number, e.label,
                  static_cast<long long>(ms), check.detail.c_str());
      ++failures;
    }
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
