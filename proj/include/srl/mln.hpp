#pragma once

#include <optional>
#include <vector>

#include "srl/logic.hpp"

namespace srl {

struct WeightedFormula {
  FormulaPtr formula;
  double weight = 0.0;
};

enum class Aggregator { Max, Sum, GeoMean };

/// Weighted-formula model; `domain_aware` switches on per-formula weight
/// scaling by the aggregated connection vector.
struct MlnModel {
  SignaturePtr sig;
  std::vector<WeightedFormula> formulas;
  bool domain_aware = false;
  Aggregator aggregator = Aggregator::Max;
};

double sigmoid(double x);

/// One entry per literal of the formula (in left-to-right order): the product
/// of the domain sizes of the formula's free variables not occurring in that
/// literal.
std::vector<double> connection_vector(const Formula& formula,
                                      const DomainAssignment& domains);

double aggregate(const std::vector<double>& connection_vector, Aggregator agg);

/// The per-formula weight divisor in domain-aware mode.
double scaling_factor(const Formula& formula, const DomainAssignment& domains,
                      Aggregator agg);

/// Sum over formulas of (w_i / C_i) * #true groundings, with C_i = 1 in
/// unscaled mode.
double world_log_weight(const MlnModel& model, const World& world);

/// Fully materialised distribution over the enumerable state space.
struct LogWeightedDistribution {
  std::vector<double> log_weights;  // by world index
  double log_partition = 0.0;

  double probability(std::uint64_t world_index) const;
};

LogWeightedDistribution distribution(const MlnModel& model,
                                     const DomainAssignment& domains,
                                     std::uint64_t state_cap = kDefaultStateCap);

/// Exact P(query | evidence) by world enumeration; query and evidence are
/// ground formulas. Zero-probability evidence raises NumericError.
double query_probability(const MlnModel& model, const DomainAssignment& domains,
                         const Formula& query,
                         const Formula* evidence = nullptr,
                         std::uint64_t state_cap = kDefaultStateCap);

/// Difference of scaled world weights between the two companions of `world`
/// that fix `atom` true resp. false.
double delta(const MlnModel& model, const DomainAssignment& domains,
             const World& world, const GroundAtom& atom);

/// Returns (P(atom), E_mu[sigmoid(delta_atom)]); the two agree on every
/// enumerable model.
std::pair<double, double> verify_sigmoid_identity(
    const MlnModel& model, const DomainAssignment& domains,
    const GroundAtom& atom, std::uint64_t state_cap = kDefaultStateCap);

/// Exact probability of a ground query via recursive block factorization of
/// the partition sum (component splitting + conditioning on high-degree
/// atoms). Throws ValidationError("not block-factorizable...") when the
/// grounding does not decompose.
double factorized_probability(const MlnModel& model,
                              const DomainAssignment& domains,
                              const Formula& query,
                              const Formula* evidence = nullptr);

enum class MlnEngine { Enumerate, Factorized };

struct SweepRow {
  std::uint32_t n;
  double probability;
};

/// Evaluates the query at each size, scaling all sorts together. Queries with
/// free variables are grounded to distinct canonical elements in
/// first-occurrence order.
std::vector<SweepRow> domain_sweep(const MlnModel& model,
                                   const std::vector<std::uint32_t>& sizes,
                                   const Formula& query, MlnEngine engine);

/// Grounds the free variables of a query to fixed distinct elements
/// (first-occurrence order: e1, e2, ...). Requires the domain to be large
/// enough for the per-sort element counts.
FormulaPtr ground_query(const Formula& query, const DomainAssignment& domains);

}  // namespace srl
