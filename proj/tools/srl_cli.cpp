// srl: command-line front end for the relational inference engines.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "srl/asymptotics.hpp"
#include "srl/mln.hpp"
#include "srl/parser.hpp"
#include "srl/rlr.hpp"

using nlohmann::json;

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw srl::ValidationError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw srl::ValidationError("cannot write " + out_path);
  out << text;
}

srl::DomainAssignment parse_sizes(const srl::Signature& sig,
                                  const std::vector<std::string>& specs) {
  srl::DomainAssignment domains;
  domains.size_by_sort.assign(sig.sort_count(), 0);
  for (const std::string& spec : specs) {
    size_t eq = spec.find('=');
    if (eq == std::string::npos)
      throw srl::ValidationError("--size expects SORT=N, got '" + spec + "'");
    int sort = sig.find_sort(spec.substr(0, eq));
    if (sort < 0)
      throw srl::ValidationError("unknown sort " + spec.substr(0, eq));
    long n = std::stol(spec.substr(eq + 1));
    if (n < 1) throw srl::ValidationError("domain sizes must be >= 1");
    domains.size_by_sort[sort] = static_cast<std::uint32_t>(n);
  }
  for (int s = 0; s < sig.sort_count(); ++s)
    if (domains.size_by_sort[s] == 0)
      throw srl::ValidationError("no --size given for sort " +
                                 sig.sort_name(s));
  return domains;
}

std::vector<std::uint32_t> parse_range(const std::string& spec) {
  // SORT=A..B[:STEP]; the range is applied to every sort.
  size_t eq = spec.find('=');
  if (eq == std::string::npos)
    throw srl::ValidationError("--sizes expects SORT=A..B[:STEP]");
  std::string rest = spec.substr(eq + 1);
  size_t dots = rest.find("..");
  if (dots == std::string::npos)
    throw srl::ValidationError("--sizes expects SORT=A..B[:STEP]");
  long a = std::stol(rest.substr(0, dots));
  std::string tail = rest.substr(dots + 2);
  long step = 1;
  size_t colon = tail.find(':');
  if (colon != std::string::npos) {
    step = std::stol(tail.substr(colon + 1));
    tail = tail.substr(0, colon);
  }
  long b = std::stol(tail);
  if (a < 1 || b < a || step < 1)
    throw srl::ValidationError("empty or invalid size range '" + spec + "'");
  std::vector<std::uint32_t> sizes;
  for (long n = a; n <= b; n += step)
    sizes.push_back(static_cast<std::uint32_t>(n));
  return sizes;
}

void check_elements(const srl::Formula& f, const srl::Signature& sig,
                    const srl::DomainAssignment& domains) {
  if (f.kind == srl::Formula::Atom) {
    for (const srl::Term& t : f.args)
      if (t.kind == srl::Term::Element &&
          static_cast<std::uint32_t>(t.element) >= domains.size(t.sort))
        throw srl::ValidationError("element " + t.name +
                                   " is outside the domain of sort " +
                                   sig.sort_name(t.sort));
    return;
  }
  if (f.lhs) check_elements(*f.lhs, sig, domains);
  if (f.rhs) check_elements(*f.rhs, sig, domains);
}

struct CommonArgs {
  std::string model_path;
  std::vector<std::string> size_specs;
  std::string sizes_spec;
  std::string query_text;
  std::string evidence_text;
  std::string engine = "enumerate";
  std::uint64_t seed = 0;
  std::uint64_t samples = 1000;
  std::string out_path;
  std::string format = "table";
  std::string to_mode;
  std::string data_path;
};

int run_validate(const CommonArgs& args) {
  srl::ParsedModel parsed = srl::parse_model(read_file(args.model_path));
  if (parsed.rlr) {
    auto violations = srl::validate(*parsed.rlr);
    if (!violations.empty()) {
      for (const std::string& v : violations) std::cerr << v << "\n";
      return 1;
    }
  }
  std::cout << "ok\n";
  return 0;
}

int run_infer(const CommonArgs& args) {
  srl::ParsedModel parsed = srl::parse_model(read_file(args.model_path));
  srl::DomainAssignment domains = parse_sizes(*parsed.sig, args.size_specs);
  if (args.query_text.empty())
    throw srl::ValidationError("infer requires --query");
  srl::FormulaPtr query = srl::parse_query(args.query_text, *parsed.sig);
  query = srl::ground_query(*query, domains);
  check_elements(*query, *parsed.sig, domains);
  srl::FormulaPtr evidence;
  if (!args.evidence_text.empty()) {
    evidence = srl::parse_query(args.evidence_text, *parsed.sig);
    evidence = srl::ground_query(*evidence, domains);
    check_elements(*evidence, *parsed.sig, domains);
  }

  double value;
  if (parsed.mln) {
    if (args.engine == "factorized")
      value = srl::factorized_probability(*parsed.mln, domains, *query,
                                          evidence.get());
    else
      value = srl::query_probability(*parsed.mln, domains, *query,
                                     evidence.get());
  } else {
    if (args.engine == "factorized")
      throw srl::ValidationError(
          "the factorized engine applies to mln models only");
    value = srl::query_probability(*parsed.rlr, domains, *query,
                                   evidence.get());
  }

  std::ostringstream os;
  if (args.format == "json") {
    json j = {{"query", args.query_text},
              {"evidence", args.evidence_text},
              {"engine", args.engine},
              {"value", value}};
    os << j.dump(2) << "\n";
  } else if (args.format == "csv") {
    os << "query,evidence,engine,value\n"
       << '"' << args.query_text << "\",\"" << args.evidence_text << "\","
       << args.engine << ',' << fmt17(value) << "\n";
  } else {
    os << "P(" << args.query_text
       << (args.evidence_text.empty() ? "" : " | " + args.evidence_text)
       << ") = " << fmt17(value) << "\n";
  }
  write_output(args.out_path, os.str());
  return 0;
}

int run_sweep(const CommonArgs& args) {
  srl::ParsedModel parsed = srl::parse_model(read_file(args.model_path));
  if (args.query_text.empty())
    throw srl::ValidationError("sweep requires --query");
  if (args.sizes_spec.empty())
    throw srl::ValidationError("sweep requires --sizes SORT=A..B[:STEP]");
  std::vector<std::uint32_t> sizes = parse_range(args.sizes_spec);
  srl::FormulaPtr query = srl::parse_query(args.query_text, *parsed.sig);

  std::vector<srl::SweepRow> rows;
  if (parsed.mln) {
    srl::MlnEngine engine = args.engine == "factorized"
                                ? srl::MlnEngine::Factorized
                                : srl::MlnEngine::Enumerate;
    rows = srl::domain_sweep(*parsed.mln, sizes, *query, engine);
  } else {
    if (args.engine == "factorized")
      throw srl::ValidationError(
          "the factorized engine applies to mln models only");
    for (std::uint32_t n : sizes) {
      srl::DomainAssignment domains;
      domains.size_by_sort.assign(parsed.sig->sort_count(), n);
      srl::FormulaPtr ground = srl::ground_query(*query, domains);
      check_elements(*ground, *parsed.sig, domains);
      rows.push_back(
          {n, srl::query_probability(*parsed.rlr, domains, *ground)});
    }
  }

  std::ostringstream os;
  if (args.format == "json") {
    json j = json::array();
    for (const srl::SweepRow& row : rows)
      j.push_back({{"n", row.n}, {"probability", row.probability}});
    os << j.dump(2) << "\n";
  } else if (args.format == "table") {
    os << "  n  probability\n";
    for (const srl::SweepRow& row : rows) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%3u  %.12f\n", row.n, row.probability);
      os << buf;
    }
  } else {
    os << "n,probability\n";
    for (const srl::SweepRow& row : rows)
      os << row.n << ',' << fmt17(row.probability) << "\n";
  }
  write_output(args.out_path, os.str());
  return 0;
}

int run_asymptotic(const CommonArgs& args) {
  srl::ParsedModel parsed = srl::parse_model(read_file(args.model_path));
  if (!parsed.rlr)
    throw srl::ValidationError("asymptotic analysis applies to rlr models");
  if (args.query_text.empty())
    throw srl::ValidationError("asymptotic requires --query");
  srl::FormulaPtr query = srl::parse_query(args.query_text, *parsed.sig);
  srl::FormulaPtr evidence;
  if (!args.evidence_text.empty())
    evidence = srl::parse_query(args.evidence_text, *parsed.sig);

  srl::AsymptoticResult result =
      srl::asymptotic_query(*parsed.rlr, *query, evidence.get());

  json dist = json::array();
  for (auto& [valuation, p] : result.proposition_distribution) {
    json vals = json::object();
    for (auto& [rel, v] : valuation.values)
      vals[parsed.sig->relation(rel).name] = v;
    dist.push_back({{"valuation", vals}, {"probability", p}});
  }
  json table = json::array();
  for (const srl::ProportionEntry& e : result.proportion_table)
    table.push_back({{"formula", e.formula},
                     {"valuation", e.valuation},
                     {"value", e.value}});
  json j = {{"query", args.query_text},
            {"evidence", args.evidence_text},
            {"value", result.value},
            {"proposition_distribution", dist},
            {"proportion_table", table},
            {"constants_used", result.constants_used},
            {"marginalized", result.marginalized}};
  write_output(args.out_path, j.dump(2) + "\n");
  return 0;
}

int run_sample(const CommonArgs& args) {
  srl::ParsedModel parsed = srl::parse_model(read_file(args.model_path));
  if (!parsed.rlr)
    throw srl::ValidationError("sampling applies to rlr models");
  srl::DomainAssignment domains = parse_sizes(*parsed.sig, args.size_specs);
  srl::SampleBatch batch =
      srl::forward_sample(*parsed.rlr, domains, args.seed, args.samples);
  std::ostringstream os;
  srl::write_batch(os, batch, *parsed.sig);
  write_output(args.out_path, os.str());
  return 0;
}

int run_learn(const CommonArgs& args) {
  srl::ParsedModel parsed = srl::parse_model(read_file(args.model_path));
  if (!parsed.rlr)
    throw srl::ValidationError("learning applies to rlr models");
  if (args.data_path.empty())
    throw srl::ValidationError("learn requires --data PATH (a sample file)");
  std::ifstream in(args.data_path, std::ios::binary);
  if (!in) throw srl::ValidationError("cannot open " + args.data_path);
  srl::SampleBatch batch = srl::read_batch(in, parsed.sig);
  srl::LearnResult result = srl::learn_weights(*parsed.rlr, batch);
  for (const std::string& w : result.warnings) std::cerr << w << "\n";
  std::ostringstream os;
  os << "// log-likelihood: " << fmt17(srl::log_likelihood(result.model, batch))
     << "\n"
     << srl::print_model(result.model);
  write_output(args.out_path, os.str());
  return 0;
}

int run_convert(const CommonArgs& args) {
  srl::ParsedModel parsed = srl::parse_model(read_file(args.model_path));
  if (!parsed.rlr)
    throw srl::ValidationError("conversion applies to rlr models");
  srl::DomainAssignment domains = parse_sizes(*parsed.sig, args.size_specs);
  srl::ConvertDirection direction;
  if (args.to_mode == "unscaled")
    direction = srl::ConvertDirection::DaToUnscaled;
  else if (args.to_mode == "da")
    direction = srl::ConvertDirection::UnscaledToDa;
  else
    throw srl::ValidationError("--to expects 'unscaled' or 'da'");
  srl::RlrModel converted = srl::convert(*parsed.rlr, domains, direction);
  write_output(args.out_path, srl::print_model(converted));
  return 0;
}

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool needs_model = true) {
  if (needs_model)
    cmd->add_option("model", args.model_path, "model file")->required();
  cmd->add_option("--size", args.size_specs, "domain size, SORT=N (repeatable)");
  cmd->add_option("--sizes", args.sizes_spec, "size range, SORT=A..B[:STEP]");
  cmd->add_option("--query", args.query_text, "query formula");
  cmd->add_option("--evidence", args.evidence_text, "evidence formula");
  cmd->add_option("--engine", args.engine, "enumerate|factorized");
  cmd->add_option("--seed", args.seed, "random seed");
  cmd->add_option("--samples", args.samples, "number of samples");
  cmd->add_option("--out", args.out_path, "output path (default stdout)");
  cmd->add_option("--format", args.format, "csv|json|table");
  cmd->add_option("--to", args.to_mode, "conversion target: unscaled|da");
  cmd->add_option("--data", args.data_path, "sample file for learning");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statistical-relational inference toolkit"};
  app.require_subcommand(1);
  CommonArgs args;

  auto* validate = app.add_subcommand("validate", "parse and validate a model");
  auto* infer = app.add_subcommand("infer", "exact query probability");
  auto* sweep = app.add_subcommand("sweep", "query probability across sizes");
  auto* asymptotic =
      app.add_subcommand("asymptotic", "domain-size limit of a query");
  auto* sample = app.add_subcommand("sample", "forward-sample worlds");
  auto* learn = app.add_subcommand("learn", "fit weights to a sample file");
  auto* convert = app.add_subcommand("convert", "rescale weights for a size");
  for (CLI::App* cmd :
       {validate, infer, sweep, asymptotic, sample, learn, convert})
    add_common_flags(cmd, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (validate->parsed()) return run_validate(args);
    if (infer->parsed()) return run_infer(args);
    if (sweep->parsed()) return run_sweep(args);
    if (asymptotic->parsed()) return run_asymptotic(args);
    if (sample->parsed()) return run_sample(args);
    if (learn->parsed()) return run_learn(args);
    if (convert->parsed()) return run_convert(args);
  } catch (const srl::CapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const srl::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
