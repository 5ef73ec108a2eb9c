#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "srl/mln.hpp"  // sigmoid
#include "srl/rlr.hpp"

namespace srl {

namespace {

constexpr double kGradTol = 1e-8;
constexpr double kWeightClamp = 30.0;
constexpr int kMaxNewtonIters = 200;

}  // namespace

LearnResult learn_weights(const RlrModel& structure, const SampleBatch& batch) {
  LearnResult result;
  result.model = structure;
  if (batch.worlds.empty())
    throw ValidationError("cannot learn from an empty sample batch");
  for (const World& w : batch.worlds)
    if (!(w.domains().size_by_sort == batch.domains.size_by_sort))
      throw ValidationError("sample batch has inconsistent domain sizes");

  const DomainAssignment& domains = batch.domains;
  for (size_t node_index = 0; node_index < structure.nodes.size();
       ++node_index) {
    RlrNode& node = result.model.nodes[node_index];
    const int k = static_cast<int>(node.conditions.size());
    if (k == 0) continue;

    // One row per (world, head tuple); feature j = count_j / divisor_j.
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> targets;
    std::vector<double> divisor(k);
    for (int j = 0; j < k; ++j)
      divisor[j] = [&] {
        const RlrCondition& cond = node.conditions[j];
        if (!cond.proportional) return 1.0;
        double d = 1.0;
        for (auto& [v, s] : cond.scaling_vars) d *= domains.size(s);
        return d;
      }();

    const auto& sorts = structure.sig->relation(node.rel).arg_sorts;
    for (const World& world : batch.worlds) {
      std::vector<int> tuple(sorts.size(), 0);
      while (true) {
        GroundingMap binding;
        for (size_t i = 0; i < node.head_args.size(); ++i)
          binding[node.head_args[i].name] = tuple[i];
        Eigen::VectorXd x(k);
        for (int j = 0; j < k; ++j) {
          const RlrCondition& cond = node.conditions[j];
          GroundingMap grounding = binding;
          for (auto& [v, s] : cond.scaling_vars) grounding[v] = 0;
          std::uint64_t count = 0;
          while (true) {
            if (holds(world, *cond.formula, grounding)) ++count;
            size_t i = 0;
            for (; i < cond.scaling_vars.size(); ++i) {
              int& val = grounding[cond.scaling_vars[i].first];
              if (static_cast<std::uint32_t>(++val) <
                  domains.size(cond.scaling_vars[i].second))
                break;
              val = 0;
            }
            if (i == cond.scaling_vars.size()) break;
          }
          x(j) = static_cast<double>(count) / divisor[j];
        }
        rows.push_back(std::move(x));
        targets.push_back(world.get(node.rel, tuple) ? 1.0 : 0.0);

        size_t i = sorts.size();
        bool done = sorts.empty();
        while (i > 0) {
          --i;
          if (static_cast<std::uint32_t>(++tuple[i]) < domains.size(sorts[i]))
            break;
          tuple[i] = 0;
          if (i == 0) done = true;
        }
        if (done) break;
      }
    }

    const int m = static_cast<int>(rows.size());
    Eigen::MatrixXd X(m, k);
    Eigen::VectorXd y(m);
    for (int r = 0; r < m; ++r) {
      X.row(r) = rows[r].transpose();
      y(r) = targets[r];
    }

    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    bool clamped = false, converged = false;
    for (int iter = 0; iter < kMaxNewtonIters; ++iter) {
      Eigen::VectorXd p = (X * w).unaryExpr([](double z) { return sigmoid(z); });
      Eigen::VectorXd grad = X.transpose() * (p - y);
      if (grad.norm() <= kGradTol) {
        converged = true;
        break;
      }
      Eigen::VectorXd wdiag = p.array() * (1.0 - p.array());
      Eigen::MatrixXd H = X.transpose() * wdiag.asDiagonal() * X;
      H.diagonal().array() += 1e-10;
      w -= H.ldlt().solve(grad);
      for (int j = 0; j < k; ++j) {
        if (std::abs(w(j)) > kWeightClamp) {
          w(j) = w(j) > 0 ? kWeightClamp : -kWeightClamp;
          clamped = true;
        }
      }
    }
    // A perfect fit with nonzero weights means the likelihood has no finite
    // maximizer (separation): the optimum ran to the gradient tolerance on
    // its way to infinity.
    bool separable = false;
    if (w.norm() > 0) {
      double max_resid =
          ((X * w).unaryExpr([](double z) { return sigmoid(z); }) - y)
              .cwiseAbs()
              .maxCoeff();
      separable = max_resid < 1e-6;
    }
    std::string rel_name = structure.sig->relation(node.rel).name;
    if (clamped || separable)
      result.warnings.push_back("node " + rel_name +
                                ": data looks separable; weights are "
                                "unbounded and clamped at |w| <= 30");
    if (!converged && !clamped)
      result.warnings.push_back("node " + rel_name +
                                ": Newton iteration did not reach tolerance");
    for (int j = 0; j < k; ++j) node.conditions[j].weight = w(j);
  }
  return result;
}

}  // namespace srl
