#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "srl/rlr.hpp"

namespace srl {

inline constexpr int kDefaultPropositionCap = 20;

/// Truth values for proposition symbols (relation id -> value). Used both for
/// the conditioning sets C of the recursion and for the support of the
/// limiting proposition distribution.
struct PropositionValuation {
  std::map<int, bool> values;

  std::string key() const;
};

struct ProportionEntry {
  std::string formula;    // canonical print
  std::string valuation;  // canonical print of C
  double value = 0.0;
};

struct AsymptoticResult {
  double value = 0.0;
  /// Limiting joint distribution over the base model's propositions.
  std::vector<std::pair<PropositionValuation, double>> proposition_distribution;
  /// Every limit proportion p_{psi,C} computed along the way.
  std::vector<ProportionEntry> proportion_table;
  /// Generic constants introduced while evaluating the query.
  std::vector<std::string> constants_used;
  /// True when the query mixed propositions the conditioning set did not
  /// cover, so the result marginalizes over them.
  bool marginalized = false;
};

/// Exact domain-size -> infinity limits for fully proportional models, by the
/// index recursion: every condition count concentrates on its limit
/// proportion, so each conditional probability is a sigmoid of a weighted sum
/// of recursively computed proportions. Raw conditions with a nonempty
/// scaling set are rejected. Memoizes proportions per (model, formula, C).
class AsymptoticEvaluator {
 public:
  explicit AsymptoticEvaluator(RlrModel model,
                               int proposition_cap = kDefaultPropositionCap);

  /// Limit proportion of groundings satisfying psi, conditioned on C. Ground
  /// proposition formulas give their conditional probability (0/1 when C
  /// covers them).
  double proportion(const Formula& psi, const PropositionValuation& c);

  /// Limiting joint law of the model's propositions, by the chain rule in
  /// index order.
  std::vector<std::pair<PropositionValuation, double>>
  proposition_distribution();

  /// Limit of P(query | evidence): free query variables become fresh generic
  /// constants; evidence must be a formula over propositions.
  AsymptoticResult query(const Formula& query, const Formula* evidence = nullptr);

  const RlrModel& model() const { return model_; }

 private:
  struct Ext;
  double proportion(const Formula& psi, const PropositionValuation& c,
                    const RlrModel& model);
  double event_probability(const RlrModel& model, const Formula& phi,
                           const PropositionValuation& c, bool* marginalized);
  double node_conditional(const RlrModel& model, int node_index,
                          const PropositionValuation& prefix);
  Ext extend_for(const RlrModel& model, const Formula& psi);

  RlrModel model_;
  int proposition_cap_;
  std::map<std::string, double> memo_;
  std::vector<ProportionEntry> table_;
  std::vector<std::string> constants_used_;
};

double asymptotic_proportion(const RlrModel& model, const Formula& psi,
                             const PropositionValuation& c);
std::vector<std::pair<PropositionValuation, double>>
asymptotic_proposition_distribution(const RlrModel& model,
                                    int proposition_cap = kDefaultPropositionCap);
AsymptoticResult asymptotic_query(const RlrModel& model, const Formula& query,
                                  const Formula* evidence = nullptr);

struct LimitCheckRow {
  std::uint32_t n = 0;
  double empirical = 0.0;
  double algorithmic = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;  // 3 * binomial stddev at this size
};

/// Forward-sampling validation of the limit: empirical frequency of the
/// (grounded) query at each size versus the algorithmic limit.
std::vector<LimitCheckRow> empirical_limit_check(
    const RlrModel& model, const Formula& query,
    const std::vector<std::uint32_t>& sizes, std::uint64_t samples_per_size,
    std::uint64_t seed);

}  // namespace srl
