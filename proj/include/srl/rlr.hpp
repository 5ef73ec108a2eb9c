#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "srl/logic.hpp"

namespace srl {

/// One condition (psi_i, w_i, V_i) of a node label. `scaling_vars` is V_i;
/// the weight is divided by the product of its domain sizes when the
/// condition is proportional, and by 1 when raw.
struct RlrCondition {
  FormulaPtr formula;
  double weight = 0.0;
  std::vector<std::pair<std::string, int>> scaling_vars;
  bool proportional = true;
};

struct RlrNode {
  int rel = -1;
  std::vector<Term> head_args;  // distinct variables
  std::vector<RlrCondition> conditions;
  std::vector<int> declared_parents;  // optional DSL annotation
};

/// Directed model: a DAG over the signature's relation symbols, one node per
/// symbol, in declaration order. Unscaled / domain-aware / mixed behaviour is
/// carried entirely by the per-condition proportional flags.
struct RlrModel {
  SignaturePtr sig;
  std::vector<RlrNode> nodes;

  int node_of_relation(int rel) const;
  /// All relation symbols occurring in the node's condition formulas.
  std::vector<int> parents(int node_index) const;
};

/// Checks every structural invariant; each violation names the node and
/// condition. Empty result means the model is valid.
std::vector<std::string> validate(const RlrModel& model);

/// Per-node index: length of the longest path from a root, following the
/// parent relation derived from the condition formulas. Requires acyclicity.
std::vector<int> node_indices(const RlrModel& model);

/// Node evaluation order: ascending index, ties by declaration order.
std::vector<int> evaluation_order(const RlrModel& model);

/// Drops scaling variables that do not occur in the condition formula. For a
/// proportional condition the weight is unchanged; for a raw condition it is
/// multiplied by the dropped variables' domain sizes (which requires
/// `domains`). The returned model defines the same distribution.
RlrModel normalize_variable_sets(const RlrModel& model,
                                 const std::optional<DomainAssignment>& domains);

/// Pre-sigmoid argument of the head-atom conditional.
double conditional_logit(const RlrModel& model, int node_index,
                         const std::vector<int>& head_tuple,
                         const World& parent_world);

/// sigmoid of conditional_logit.
double conditional_probability(const RlrModel& model, int node_index,
                               const std::vector<int>& head_tuple,
                               const World& parent_world);

double world_log_probability(const RlrModel& model, const World& world);
double world_probability(const RlrModel& model, const World& world);

/// Exact P(query | evidence) by world enumeration.
double query_probability(const RlrModel& model, const DomainAssignment& domains,
                         const Formula& query,
                         const Formula* evidence = nullptr,
                         std::uint64_t state_cap = kDefaultStateCap);

enum class ConvertDirection { DaToUnscaled, UnscaledToDa };

/// Per-condition weight multiplication (or division) by |D|_{V_i} with the
/// proportional flags toggled; the distribution on `domains` is unchanged.
RlrModel convert(const RlrModel& model, const DomainAssignment& domains,
                 ConvertDirection direction);

/// Generic extension by fresh constants of the given sorts (drawn from the
/// reserved pool a1, a2, ...): adds a derived relation symbol and node for
/// every way of substituting the new constants into existing symbols.
RlrModel generic_extension(const RlrModel& model,
                           const std::vector<int>& constant_sorts);

/// Names of the constants a fresh extension by `count` constants would use.
std::vector<std::string> generic_constant_names(const Signature& sig,
                                                int count);

/// Rewrites a formula whose terms may include constants from the extension
/// pool into a constant-free formula over the extended signature's derived
/// symbols.
FormulaPtr rewrite_with_constants(const Formula& formula,
                                  const Signature& extended_sig);

/// Replaces variables by the given terms; variables not in the map are kept.
/// With an empty map this is a structural clone.
FormulaPtr substitute_variables(const Formula& formula,
                                const std::map<std::string, Term>& subst);

struct SampleBatch {
  std::uint64_t seed = 0;
  DomainAssignment domains;
  std::vector<World> worlds;
};

/// Ancestral sampling in evaluation order; sample k uses an independent
/// substream derived from (seed, k), so batches are reproducible and
/// insensitive to sample count prefixes.
SampleBatch forward_sample(const RlrModel& model,
                           const DomainAssignment& domains, std::uint64_t seed,
                           std::uint64_t count);

double log_likelihood(const RlrModel& model, const SampleBatch& batch);

/// Line-delimited canonical world records; `#`-prefixed header lines carry
/// the seed and domain sizes.
void write_batch(std::ostream& os, const SampleBatch& batch,
                 const Signature& sig);
SampleBatch read_batch(std::istream& is, SignaturePtr sig);

struct LearnResult {
  RlrModel model;
  std::vector<std::string> warnings;
};

/// Per-node convex logistic-regression fit by Newton's method (gradient-norm
/// tolerance 1e-8, weight clamp |w| <= 30, clamping reported).
LearnResult learn_weights(const RlrModel& structure, const SampleBatch& batch);

}  // namespace srl
