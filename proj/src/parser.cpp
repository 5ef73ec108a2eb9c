#include "srl/parser.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

namespace srl {

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

struct Token {
  enum Kind {
    Ident,
    Number,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Colon,
    Comma,
    Bang,
    Amp,
    Pipe,
    Arrow,
    End
  };
  Kind kind = End;
  std::string text;
  double number = 0.0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_space();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::End;
      tok_.text = "end of input";
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        bump();
      tok_.kind = Token::Ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
        ((c == '-' || c == '+') && pos_ + 1 < src_.size() &&
         (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) ||
          src_[pos_ + 1] == '.'))) {
      lex_number();
      return;
    }
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      bump();
      bump();
      tok_.kind = Token::Arrow;
      tok_.text = "->";
      return;
    }
    switch (c) {
      case '(': single(Token::LParen); return;
      case ')': single(Token::RParen); return;
      case '{': single(Token::LBrace); return;
      case '}': single(Token::RBrace); return;
      case ';': single(Token::Semi); return;
      case ':': single(Token::Colon); return;
      case ',': single(Token::Comma); return;
      case '!': single(Token::Bang); return;
      case '&': single(Token::Amp); return;
      case '|': single(Token::Pipe); return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'",
                         line_, col_);
    }
  }

  void lex_number() {
    size_t start = pos_;
    if (src_[pos_] == '-' || src_[pos_] == '+') bump();
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_])))
      bump();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      bump();
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        bump();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      bump();
      if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) bump();
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        bump();
    }
    tok_.kind = Token::Number;
    tok_.text = src_.substr(start, pos_ - start);
    char* end = nullptr;
    tok_.number = std::strtod(tok_.text.c_str(), &end);
    if (end != tok_.text.c_str() + tok_.text.size())
      throw ParseError("malformed number '" + tok_.text + "'", tok_.line,
                       tok_.col);
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void single(Token::Kind kind) {
    tok_.kind = kind;
    tok_.text = src_.substr(pos_, 1);
    bump();
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// Variable sorts inferred while parsing one formula context (an mln formula
/// or one rlr node body).
using VarSorts = std::map<std::string, int>;

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  ParsedModel parse_file() {
    parse_decls();
    const Token& t = lex_.peek();
    if (t.kind == Token::Ident && t.text == "mln") {
      parse_mln_block();
    } else if (t.kind == Token::Ident && t.text == "rlr") {
      parse_rlr_block();
    } else {
      fail(t, "expected an mln or rlr block");
    }
    expect(Token::End, "end of file");

    ParsedModel out;
    auto shared = std::make_shared<Signature>(std::move(sig_));
    out.sig = shared;
    if (mln_) {
      mln_->sig = shared;
      out.mln = std::move(mln_);
    } else {
      rlr_->sig = shared;
      auto violations = srl::validate(*rlr_);
      if (!violations.empty())
        throw ValidationError("invalid rlr model: " + violations.front());
      out.rlr = std::move(rlr_);
    }
    return out;
  }

  FormulaPtr parse_query_formula(const Signature& sig) {
    query_sig_ = &sig;
    VarSorts vars;
    FormulaPtr f = parse_formula(vars, /*allow_elements=*/true);
    expect(Token::End, "end of query");
    return f;
  }

 private:
  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw ParseError(msg + " (got '" + t.text + "')", t.line, t.col);
  }

  Token expect(Token::Kind kind, const std::string& what) {
    if (lex_.peek().kind != kind) fail(lex_.peek(), "expected " + what);
    return lex_.take();
  }

  Token expect_ident(const std::string& what) {
    return expect(Token::Ident, what);
  }

  bool accept_keyword(const std::string& kw) {
    if (lex_.peek().kind == Token::Ident && lex_.peek().text == kw) {
      lex_.take();
      return true;
    }
    return false;
  }

  const Signature& sig() const { return query_sig_ ? *query_sig_ : sig_; }

  // ---- declarations ----

  void parse_decls() {
    while (lex_.peek().kind == Token::Ident) {
      const std::string& kw = lex_.peek().text;
      if (kw == "sort") {
        lex_.take();
        Token name = expect_ident("a sort name");
        declare_name(name);
        sig_.add_sort(name.text);
        expect(Token::Semi, "';'");
      } else if (kw == "pred") {
        lex_.take();
        Token name = expect_ident("a predicate name");
        declare_name(name);
        expect(Token::LParen, "'('");
        std::vector<int> arg_sorts;
        if (lex_.peek().kind != Token::RParen) {
          while (true) {
            Token s = expect_ident("a sort name");
            int sid = sig_.find_sort(s.text);
            if (sid < 0)
              throw ParseError("undeclared sort " + s.text, s.line, s.col);
            arg_sorts.push_back(sid);
            if (lex_.peek().kind != Token::Comma) break;
            lex_.take();
          }
        }
        expect(Token::RParen, "')'");
        expect(Token::Semi, "';'");
        sig_.add_relation(name.text, std::move(arg_sorts));
      } else if (kw == "prop") {
        lex_.take();
        Token name = expect_ident("a proposition name");
        declare_name(name);
        sig_.add_relation(name.text, {});
        expect(Token::Semi, "';'");
      } else if (kw == "const") {
        lex_.take();
        Token name = expect_ident("a constant name");
        declare_name(name);
        expect(Token::Colon, "':'");
        Token s = expect_ident("a sort name");
        int sid = sig_.find_sort(s.text);
        if (sid < 0)
          throw ParseError("undeclared sort " + s.text, s.line, s.col);
        sig_.add_constant(name.text, sid);
        expect(Token::Semi, "';'");
      } else {
        break;
      }
    }
  }

  void declare_name(const Token& name) {
    if (sig_.find_sort(name.text) >= 0 || sig_.find_relation(name.text) >= 0 ||
        sig_.constant_sort(name.text) >= 0 || name.text == "true" ||
        name.text == "false")
      throw ParseError("duplicate declaration of " + name.text, name.line,
                       name.col);
  }

  // ---- mln ----

  void parse_mln_block() {
    lex_.take();  // mln
    expect(Token::LBrace, "'{'");
    mln_.emplace();
    if (accept_keyword("scaling")) {
      expect(Token::Colon, "':'");
      Token mode = expect_ident("'none' or 'da'");
      if (mode.text == "da")
        mln_->domain_aware = true;
      else if (mode.text != "none")
        fail(mode, "expected 'none' or 'da'");
      if (accept_keyword("aggregator")) {
        expect(Token::Colon, "':'");
        Token agg = expect_ident("'max', 'sum' or 'geomean'");
        if (agg.text == "max")
          mln_->aggregator = Aggregator::Max;
        else if (agg.text == "sum")
          mln_->aggregator = Aggregator::Sum;
        else if (agg.text == "geomean")
          mln_->aggregator = Aggregator::GeoMean;
        else
          fail(agg, "expected 'max', 'sum' or 'geomean'");
      }
      expect(Token::Semi, "';'");
    }
    while (lex_.peek().kind == Token::Number) {
      Token w = lex_.take();
      expect(Token::Colon, "':'");
      VarSorts vars;
      allow_constants_ = true;
      FormulaPtr f = parse_formula(vars, /*allow_elements=*/false);
      allow_constants_ = false;
      expect(Token::Semi, "';'");
      declare_derived_symbols(*f);
      mln_->formulas.push_back(
          WeightedFormula{rewrite_with_constants(*f, sig_), w.number});
    }
    expect(Token::RBrace, "'}'");
  }

  /// Registers a derived relation symbol for every constant-bearing atom of
  /// an mln formula, so rewrite_with_constants can compile the constants
  /// away. Atoms reference only original symbols here.
  void declare_derived_symbols(const Formula& f) {
    if (f.kind == Formula::Atom) {
      std::vector<std::string> pattern(f.args.size());
      std::vector<int> open_sorts;
      bool any = false;
      for (size_t i = 0; i < f.args.size(); ++i) {
        if (f.args[i].kind == Term::Const) {
          pattern[i] = f.args[i].name;
          any = true;
        } else {
          open_sorts.push_back(f.args[i].sort);
        }
      }
      if (any && sig_.find_derived(f.rel, pattern) < 0) {
        std::string name = sig_.relation(f.rel).name + "[";
        for (size_t i = 0; i < pattern.size(); ++i) {
          if (i) name += ",";
          name += pattern[i].empty() ? "_" : pattern[i];
        }
        name += "]";
        sig_.add_derived_relation(name, std::move(open_sorts), f.rel,
                                  std::move(pattern));
      }
      return;
    }
    if (f.lhs) declare_derived_symbols(*f.lhs);
    if (f.rhs) declare_derived_symbols(*f.rhs);
  }

  // ---- rlr ----

  void parse_rlr_block() {
    lex_.take();  // rlr
    expect(Token::LBrace, "'{'");
    rlr_.emplace();
    while (accept_keyword("node")) parse_node();
    expect(Token::RBrace, "'}'");
  }

  void parse_node() {
    Token name = expect_ident("a relation name");
    int rel = sig_.find_relation(name.text);
    if (rel < 0)
      throw ParseError("undeclared relation " + name.text, name.line,
                       name.col);
    const RelationInfo& info = sig_.relation(rel);

    RlrNode node;
    node.rel = rel;
    VarSorts head_vars;
    if (lex_.peek().kind == Token::LParen) {
      lex_.take();
      int pos = 0;
      if (lex_.peek().kind != Token::RParen) {
        while (true) {
          Token v = expect_ident("a variable");
          if (pos >= info.arity())
            throw ParseError("too many arguments for " + name.text, v.line,
                             v.col);
          if (head_vars.count(v.text))
            throw ParseError("repeated head variable " + v.text, v.line,
                             v.col);
          int sort = info.arg_sorts[pos];
          head_vars[v.text] = sort;
          node.head_args.push_back(Term::var(v.text, sort));
          ++pos;
          if (lex_.peek().kind != Token::Comma) break;
          lex_.take();
        }
      }
      expect(Token::RParen, "')'");
      if (pos != info.arity())
        fail(lex_.peek(), "wrong number of arguments for " + name.text);
    } else if (info.arity() != 0) {
      fail(lex_.peek(), "expected '(' after " + name.text);
    }

    expect(Token::LBrace, "'{'");
    if (accept_keyword("parents")) {
      while (true) {
        Token p = expect_ident("a relation name");
        int prel = sig_.find_relation(p.text);
        if (prel < 0)
          throw ParseError("undeclared relation " + p.text, p.line, p.col);
        node.declared_parents.push_back(prel);
        if (lex_.peek().kind != Token::Comma) break;
        lex_.take();
      }
      expect(Token::Semi, "';'");
    }
    while (lex_.peek().kind == Token::Number) {
      Token w = lex_.take();
      RlrCondition cond;
      cond.weight = w.number;
      if (accept_keyword("prop"))
        cond.proportional = true;
      else if (accept_keyword("raw"))
        cond.proportional = false;
      expect(Token::Colon, "':'");
      VarSorts vars = head_vars;
      FormulaPtr f = parse_formula(vars, /*allow_elements=*/false);
      cond.formula = f;
      if (accept_keyword("over")) {
        expect(Token::LBrace, "'{'");
        while (true) {
          Token v = expect_ident("a variable");
          if (head_vars.count(v.text))
            throw ParseError("head variable " + v.text +
                                 " may not be in the scaling set",
                             v.line, v.col);
          int sort;
          auto it = vars.find(v.text);
          if (it != vars.end()) {
            sort = it->second;
          } else if (sig_.sort_count() == 1) {
            sort = 0;
          } else {
            throw ParseError("cannot infer the sort of " + v.text +
                                 " (not used in the formula)",
                             v.line, v.col);
          }
          cond.scaling_vars.emplace_back(v.text, sort);
          if (lex_.peek().kind != Token::Comma) break;
          lex_.take();
        }
        expect(Token::RBrace, "'}'");
      }
      expect(Token::Semi, "';'");
      node.conditions.push_back(std::move(cond));
    }
    expect(Token::RBrace, "'}'");
    rlr_->nodes.push_back(std::move(node));
  }

  // ---- formulas ----

  FormulaPtr parse_formula(VarSorts& vars, bool allow_elements) {
    return parse_implies(vars, allow_elements);
  }

  FormulaPtr parse_implies(VarSorts& vars, bool allow_elements) {
    FormulaPtr lhs = parse_or(vars, allow_elements);
    if (lex_.peek().kind == Token::Arrow) {
      lex_.take();
      return f_implies(lhs, parse_implies(vars, allow_elements));
    }
    return lhs;
  }

  FormulaPtr parse_or(VarSorts& vars, bool allow_elements) {
    FormulaPtr f = parse_and(vars, allow_elements);
    while (lex_.peek().kind == Token::Pipe) {
      lex_.take();
      f = f_or(f, parse_and(vars, allow_elements));
    }
    return f;
  }

  FormulaPtr parse_and(VarSorts& vars, bool allow_elements) {
    FormulaPtr f = parse_unary(vars, allow_elements);
    while (lex_.peek().kind == Token::Amp) {
      lex_.take();
      f = f_and(f, parse_unary(vars, allow_elements));
    }
    return f;
  }

  FormulaPtr parse_unary(VarSorts& vars, bool allow_elements) {
    const Token& t = lex_.peek();
    if (t.kind == Token::Bang) {
      lex_.take();
      return f_not(parse_unary(vars, allow_elements));
    }
    if (t.kind == Token::LParen) {
      lex_.take();
      FormulaPtr f = parse_formula(vars, allow_elements);
      expect(Token::RParen, "')'");
      return f;
    }
    if (t.kind == Token::Ident) {
      if (t.text == "true") {
        lex_.take();
        return f_true();
      }
      if (t.text == "false") {
        lex_.take();
        return f_false();
      }
      return parse_atom(vars, allow_elements);
    }
    fail(t, "expected a formula");
  }

  FormulaPtr parse_atom(VarSorts& vars, bool allow_elements) {
    Token name = lex_.take();
    int rel = sig().find_relation(name.text);
    if (rel < 0)
      throw ParseError("undeclared relation " + name.text, name.line,
                       name.col);
    const RelationInfo& info = sig().relation(rel);
    std::vector<Term> args;
    if (lex_.peek().kind == Token::LParen) {
      lex_.take();
      if (lex_.peek().kind != Token::RParen) {
        while (true) {
          Token a = expect_ident("a term");
          int pos = static_cast<int>(args.size());
          if (pos >= info.arity())
            throw ParseError("too many arguments for " + name.text, a.line,
                             a.col);
          args.push_back(make_term(a, info.arg_sorts[pos], vars,
                                   allow_elements));
          if (lex_.peek().kind != Token::Comma) break;
          lex_.take();
        }
      }
      expect(Token::RParen, "')'");
    }
    if (static_cast<int>(args.size()) != info.arity())
      throw ParseError("wrong number of arguments for " + name.text, name.line,
                       name.col);
    return f_atom(rel, std::move(args));
  }

  Term make_term(const Token& t, int sort, VarSorts& vars,
                 bool allow_elements) {
    int const_sort = sig().constant_sort(t.text);
    if (const_sort >= 0) {
      if (!allow_constants_ && !query_sig_)
        throw ParseError("constant " + t.text +
                             " is not allowed here; extend the model by "
                             "generic constants instead",
                         t.line, t.col);
      if (const_sort != sort)
        throw ParseError("sort mismatch for constant " + t.text, t.line,
                         t.col);
      return Term::constant(t.text, sort);
    }
    if (allow_elements && t.text.size() > 1 && t.text[0] == 'e') {
      bool digits = true;
      for (size_t i = 1; i < t.text.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(t.text[i]));
      if (digits) {
        int index = std::atoi(t.text.c_str() + 1);
        if (index < 1)
          throw ParseError("element indices start at e1", t.line, t.col);
        return Term::element_ref(index - 1, sort);
      }
    }
    auto it = vars.find(t.text);
    if (it != vars.end()) {
      if (it->second != sort)
        throw ParseError("variable " + t.text + " used at two sorts", t.line,
                         t.col);
    } else {
      vars[t.text] = sort;
    }
    return Term::var(t.text, sort);
  }

  Lexer lex_;
  Signature sig_;
  const Signature* query_sig_ = nullptr;
  bool allow_constants_ = false;
  std::optional<MlnModel> mln_;
  std::optional<RlrModel> rlr_;
};

}  // namespace

ParsedModel parse_model(const std::string& text) {
  return Parser(text).parse_file();
}

FormulaPtr parse_query(const std::string& text, const Signature& sig) {
  FormulaPtr f = Parser(text).parse_query_formula(sig);
  // Constant-bearing atoms resolve to the matching derived symbols.
  return rewrite_with_constants(*f, sig);
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

std::string number_text(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string term_text(const Term& t) {
  if (t.kind == Term::Element) return "e" + std::to_string(t.element + 1);
  return t.name;
}

std::string atom_text(const Signature& sig, const Formula& f) {
  const RelationInfo& info = sig.relation(f.rel);
  if (!info.is_derived()) {
    if (f.args.empty()) return info.name;
    std::string out = info.name + "(";
    for (size_t i = 0; i < f.args.size(); ++i) {
      if (i) out += ", ";
      out += term_text(f.args[i]);
    }
    return out + ")";
  }
  // Reconstruct the base atom in constant notation.
  std::string out = sig.relation(info.base).name + "(";
  size_t open = 0;
  for (size_t i = 0; i < info.pattern.size(); ++i) {
    if (i) out += ", ";
    out += info.pattern[i].empty() ? term_text(f.args[open++])
                                   : info.pattern[i];
  }
  return out + ")";
}

// Precedence levels: implies 0, or 1, and 2, unary 3.
std::string formula_text(const Signature& sig, const Formula& f, int level) {
  std::string out;
  int mine;
  switch (f.kind) {
    case Formula::True:
      return "true";
    case Formula::False:
      return "false";
    case Formula::Atom:
      return atom_text(sig, f);
    case Formula::Not:
      return "!" + formula_text(sig, *f.lhs, 3);
    case Formula::Implies:
      mine = 0;
      out = formula_text(sig, *f.lhs, 1) + " -> " +
            formula_text(sig, *f.rhs, 0);
      break;
    case Formula::Or:
      mine = 1;
      out = formula_text(sig, *f.lhs, 1) + " | " +
            formula_text(sig, *f.rhs, 2);
      break;
    case Formula::And:
      mine = 2;
      out = formula_text(sig, *f.lhs, 2) + " & " +
            formula_text(sig, *f.rhs, 3);
      break;
    default:
      return out;
  }
  return mine < level ? "(" + out + ")" : out;
}

void print_decls(std::ostream& os, const Signature& sig) {
  for (int s = 0; s < sig.sort_count(); ++s)
    os << "sort " << sig.sort_name(s) << ";\n";
  for (int r = 0; r < sig.relation_count(); ++r) {
    const RelationInfo& info = sig.relation(r);
    if (info.is_derived()) continue;  // re-created by constant compilation
    if (info.is_proposition()) {
      os << "prop " << info.name << ";\n";
    } else {
      os << "pred " << info.name << "(";
      for (size_t i = 0; i < info.arg_sorts.size(); ++i) {
        if (i) os << ", ";
        os << sig.sort_name(info.arg_sorts[i]);
      }
      os << ");\n";
    }
  }
  for (auto& [name, sort] : sig.constants())
    os << "const " << name << " : " << sig.sort_name(sort) << ";\n";
}

}  // namespace

std::string print_formula(const Signature& sig, const Formula& formula) {
  return formula_text(sig, formula, 0);
}

std::string print_model(const MlnModel& model) {
  std::ostringstream os;
  print_decls(os, *model.sig);
  os << "mln {\n";
  os << "  scaling: " << (model.domain_aware ? "da" : "none");
  if (model.domain_aware) {
    os << " aggregator: ";
    switch (model.aggregator) {
      case Aggregator::Max: os << "max"; break;
      case Aggregator::Sum: os << "sum"; break;
      case Aggregator::GeoMean: os << "geomean"; break;
    }
  }
  os << ";\n";
  for (const WeightedFormula& wf : model.formulas)
    os << "  " << number_text(wf.weight) << " : "
       << print_formula(*model.sig, *wf.formula) << ";\n";
  os << "}\n";
  return os.str();
}

std::string print_model(const RlrModel& model) {
  const Signature& sig = *model.sig;
  std::ostringstream os;
  print_decls(os, sig);
  os << "rlr {\n";
  for (const RlrNode& node : model.nodes) {
    os << "  node " << sig.relation(node.rel).name;
    if (!node.head_args.empty()) {
      os << "(";
      for (size_t i = 0; i < node.head_args.size(); ++i) {
        if (i) os << ", ";
        os << node.head_args[i].name;
      }
      os << ")";
    }
    os << " {\n";
    if (!node.declared_parents.empty()) {
      os << "    parents ";
      for (size_t i = 0; i < node.declared_parents.size(); ++i) {
        if (i) os << ", ";
        os << sig.relation(node.declared_parents[i]).name;
      }
      os << ";\n";
    }
    for (const RlrCondition& cond : node.conditions) {
      os << "    " << number_text(cond.weight) << " "
         << (cond.proportional ? "prop" : "raw") << " : "
         << print_formula(sig, *cond.formula);
      if (!cond.scaling_vars.empty()) {
        os << " over {";
        for (size_t i = 0; i < cond.scaling_vars.size(); ++i) {
          if (i) os << ", ";
          os << cond.scaling_vars[i].first;
        }
        os << "}";
      }
      os << ";\n";
    }
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

std::string print_model(const ParsedModel& model) {
  if (model.mln) return print_model(*model.mln);
  if (model.rlr) return print_model(*model.rlr);
  throw ValidationError("empty parsed model");
}

}  // namespace srl
