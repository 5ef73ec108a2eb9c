#pragma once

#include <optional>
#include <string>

#include "srl/mln.hpp"
#include "srl/rlr.hpp"

namespace srl {

/// A parsed model file: the signature plus exactly one of the two model
/// kinds.
struct ParsedModel {
  SignaturePtr sig;
  std::optional<MlnModel> mln;
  std::optional<RlrModel> rlr;
};

/// Parses a model-DSL source text. Constant-bearing atoms in mln blocks are
/// compiled into derived relation symbols; rlr blocks reject constants (the
/// generic extension is the sanctioned mechanism there).
ParsedModel parse_model(const std::string& text);

/// Parses a query/evidence formula against an existing signature. Besides
/// variables, terms may name concrete elements (e1, e2, ...) or declared
/// constants.
FormulaPtr parse_query(const std::string& text, const Signature& sig);

/// Canonical single-line rendering; parseable by parse_query for
/// element-free, constant-free formulas. Derived symbols print in constant
/// notation (R(a1, x)).
std::string print_formula(const Signature& sig, const Formula& formula);

/// Renders a full model file; parse_model(print_model(m)) reproduces m.
std::string print_model(const ParsedModel& model);
std::string print_model(const MlnModel& model);
std::string print_model(const RlrModel& model);

}  // namespace srl
