// Line-based declarative check documents.
//
//   chart x y z
//   box x -2 2
//   config seed=7 samples=32 abs_tol=1e-9 rel_tol=1e-9
//   scalar phi = y*exp(-x)
//   form nu = dy - y*dx
//   region U1 : x > 0, y < 1          (or: region W : all)
//   foliation F region=U1 leafdim=2 decomp=[nu] adapted=[y]
//   family Fam members=[F, G] saturated=false
//   mu m0 foliation=F value={-dx}     (or: mu m0 foliation=F solve)
//   closed M0 zero x^2 + y^2          (or: closed M0 balls [(0,0;0.5)] / closed M0 box)
//   testfn T cover closed=M0 bumps=[(1,0;0.5), (-1,0;0.5)]
//   tubular T f=phi t=y eps=0.5 eps_outer=1
//   check c1 frobenius foliation=F mu=m0 [expect=fail]
//
// In expressions `^` is the wedge product as soon as one side is a form and
// the power otherwise; dx is the coordinate differential and d(...) the
// exterior derivative.  Parameter values containing spaces go in braces.
#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "folgv/findings.hpp"
#include "folgv/foliation.hpp"
#include "folgv/forms.hpp"
#include "folgv/gv.hpp"
#include "folgv/region.hpp"
#include "folgv/report.hpp"
#include "folgv/singular.hpp"
#include "folgv/test_functions.hpp"

namespace folgv {

struct Diagnostic {
  int line = 0;
  int col = 0;
  std::string message;

  std::string str() const { return std::to_string(line) + ":" + std::to_string(col) + ": " + message; }
};

using Value = std::variant<Expr, DiffForm>;

// Runs one bound check; name, kind and line are filled in by the runner.
using CheckFn = std::function<CheckEntry(const ZeroTestConfig&)>;

struct CheckSpec {
  std::string name;
  std::string kind;
  int line = 0;
  bool expect_fail = false;
  CheckFn run;
};

struct TestFnSpec {
  std::string kind;  // strong, weak, bump, cover
  Expr value;
  std::vector<BumpSpec> bumps;
  std::string closed;
};

struct SpecDocument {
  std::string name;
  Chart chart;
  std::vector<Interval> box;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> abs_tol;
  std::optional<double> rel_tol;

  std::map<std::string, Expr> scalars;
  std::map<std::string, DiffForm> forms;
  std::map<std::string, Region> regions;
  std::map<std::string, Foliation> foliations;
  std::map<std::string, FoliationFamily> families;
  MuChoice mus;  // by foliation name
  std::map<std::string, ClosedSetSpec> closed;
  std::map<std::string, TestFnSpec> testfns;
  std::map<std::string, TubularData> tubulars;
  std::vector<CheckSpec> checks;

  ZeroTestConfig config() const {
    ZeroTestConfig c;
    if (seed) c.rng_seed = *seed;
    if (samples) c.sample_count = *samples;
    if (abs_tol) c.abs_tol = *abs_tol;
    if (rel_tol) c.rel_tol = *rel_tol;
    return c;
  }
};

struct ParseResult {
  std::optional<SpecDocument> document;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return document.has_value() && diagnostics.empty(); }
};

namespace parse {

struct Error {
  int col;
  std::string message;
};

inline constexpr int kMaxDepth = 200;
inline constexpr std::size_t kMaxTerms = 20000;
inline constexpr std::size_t kMaxDigits = 400;
inline constexpr long kMaxExponent = 64;

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline bool is_identifier(const std::string& s) {
  if (s.empty() || !ident_start(s[0])) return false;
  for (char c : s)
    if (!ident_char(c)) return false;
  return true;
}

// Exact value of a decimal literal like 12, 0.25, 1e-9, 3.5E+2.
inline std::optional<Rational> decimal(const std::string& s) {
  std::size_t i = 0;
  std::string digits;
  long scale = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) digits += s[i++];
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits += s[i++];
      --scale;
    }
  }
  if (digits.empty() || digits.size() > kMaxDigits) return std::nullopt;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    std::string ex;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ex += s[i++];
    if (ex.empty() || ex.size() > 3) return std::nullopt;
    long e = std::stol(ex);
    scale += neg ? -e : e;
  }
  if (i != s.size() || std::labs(scale) > static_cast<long>(kMaxDigits)) return std::nullopt;
  mpz_class num(digits, 10), ten = 10, p;
  mpz_pow_ui(p.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(std::labs(scale)));
  Rational r = scale >= 0 ? Rational(num * p) : Rational(num, p);
  r.canonicalize();
  return r;
}

inline std::optional<double> number(std::string s) {
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s = s.substr(1);
  }
  auto r = decimal(s);
  if (!r) return std::nullopt;
  double v = r->get_d();
  return neg ? -v : v;
}

// Recursive-descent parser for scalar and form expressions.
class ExprParser {
 public:
  ExprParser(const SpecDocument& doc, const std::string& text, int col0) : doc_(doc), s_(text), col0_(col0) {}

  Value parse() {
    Value v = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  const SpecDocument& doc_;
  const std::string& s_;
  int col0_;
  std::size_t pos_ = 0;
  int depth_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw Error{col0_ + static_cast<int>(pos_), msg}; }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  struct Guard {
    ExprParser& p;
    explicit Guard(ExprParser& pp) : p(pp) {
      if (++p.depth_ > kMaxDepth) p.fail("expression nested too deeply");
    }
    ~Guard() { --p.depth_; }
  };

  DiffForm as_form(const Value& v) const {
    if (auto f = std::get_if<DiffForm>(&v)) return *f;
    return DiffForm::scalar(doc_.chart, std::get<Expr>(v));
  }

  void size_check(const Value& v) const {
    std::size_t n = 0;
    if (auto e = std::get_if<Expr>(&v)) n = e->terms().size();
    else
      for (const auto& [I, c] : std::get<DiffForm>(v).coefficients()) n += c.terms().size();
    if (n > kMaxTerms) fail("expression too large");
  }

  static std::size_t terms_of(const Value& v) {
    if (auto e = std::get_if<Expr>(&v)) return e->terms().size();
    std::size_t n = 0;
    for (const auto& [I, c] : std::get<DiffForm>(v).coefficients()) n += c.terms().size();
    return n;
  }

  Value add(const Value& a, const Value& b, bool minus) {
    if (std::holds_alternative<Expr>(a) && std::holds_alternative<Expr>(b))
      return minus ? std::get<Expr>(a) - std::get<Expr>(b) : std::get<Expr>(a) + std::get<Expr>(b);
    DiffForm fa = as_form(a), fb = as_form(b);
    if (fa.degree() != fb.degree())
      fail("adding forms of degree " + std::to_string(fa.degree()) + " and " + std::to_string(fb.degree()));
    return minus ? fa - fb : fa + fb;
  }

  Value sum() {
    Guard g(*this);
    Value v = product();
    for (;;) {
      if (eat('+')) v = add(v, product(), false);
      else if (eat('-')) v = add(v, product(), true);
      else break;
      size_check(v);
    }
    return v;
  }

  Value product() {
    Guard g(*this);
    Value v = unary();
    for (;;) {
      std::size_t at = pos_;
      if (eat('*')) {
        Value w = unary();
        if (terms_of(v) * terms_of(w) > kMaxTerms * 10) fail("expression too large");
        if (std::holds_alternative<Expr>(v) && std::holds_alternative<Expr>(w)) v = std::get<Expr>(v) * std::get<Expr>(w);
        else if (std::holds_alternative<Expr>(v)) v = std::get<Expr>(v) * std::get<DiffForm>(w);
        else if (std::holds_alternative<Expr>(w)) v = std::get<DiffForm>(v) * std::get<Expr>(w);
        else {
          pos_ = at;
          fail("'*' between two forms; use '^' for the wedge product");
        }
      } else if (eat('/')) {
        Value w = unary();
        if (!std::holds_alternative<Expr>(w)) fail("division by a form");
        const Expr& den = std::get<Expr>(w);
        if (den.is_zero()) fail("division by zero");
        if (den.terms().size() > 64) fail("denominator too large");
        Expr inv = reciprocal(den);
        if (auto e = std::get_if<Expr>(&v)) v = *e * inv;
        else v = inv * std::get<DiffForm>(v);
      } else {
        break;
      }
      size_check(v);
    }
    return v;
  }

  Value unary() {
    Guard g(*this);
    if (eat('-')) {
      Value v = unary();
      if (auto e = std::get_if<Expr>(&v)) return -*e;
      return -std::get<DiffForm>(v);
    }
    if (eat('+')) return unary();
    return power();
  }

  Value power() {
    Guard g(*this);
    Value base = primary();
    if (!eat('^')) return base;
    std::size_t at = pos_;
    Value ex = unary();
    if (std::holds_alternative<Expr>(base) && std::holds_alternative<Expr>(ex)) {
      auto k = std::get<Expr>(ex).constant_value();
      if (!k || !is_integer(*k)) {
        pos_ = at;
        fail("exponent must be an integer constant");
      }
      if (abs(*k) > kMaxExponent) {
        pos_ = at;
        fail("exponent too large");
      }
      long n = k->get_num().get_si();
      const Expr& b = std::get<Expr>(base);
      double est = 1.0;
      std::size_t t = b.terms().size();
      for (long i = 1; i <= std::labs(n) && t > 1; ++i) est = est * static_cast<double>(t - 1 + static_cast<std::size_t>(i)) / static_cast<double>(i);
      if (est > static_cast<double>(kMaxTerms)) fail("expression too large");
      if (n < 0 && b.is_zero()) fail("division by zero");
      return pow(b, n);
    }
    return wedge(as_form(base), as_form(ex));
  }

  std::string identifier() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  Value call(const std::string& fn, std::size_t at) {
    Value arg = sum();
    if (!eat(')')) fail("expected ')'");
    if (fn == "d") {
      if (auto e = std::get_if<Expr>(&arg)) return ext_d(doc_.chart, *e);
      return ext_d(std::get<DiffForm>(arg));
    }
    auto e = std::get_if<Expr>(&arg);
    if (!e) {
      pos_ = at;
      fail(fn + " applied to a form");
    }
    if (fn == "exp") return exp(*e);
    if (fn == "log") return log(*e);
    if (fn == "psi0" || fn == "strengthen") return psi0(*e);
    if (fn == "flatexp") return flatexp(*e);
    pos_ = at;
    fail("unknown function '" + fn + "'");
  }

  Value primary() {
    Guard g(*this);
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Value v = sum();
      if (!eat(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        std::size_t save = pos_++;
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        } else {
          pos_ = save;
        }
      }
      auto r = decimal(s_.substr(start, pos_ - start));
      if (!r) {
        pos_ = start;
        fail("malformed number");
      }
      return Expr(*r);
    }
    if (ident_start(c)) {
      std::size_t at = pos_;
      std::string id = identifier();
      if (eat('(')) return call(id, at);
      if (auto it = doc_.scalars.find(id); it != doc_.scalars.end()) return it->second;
      if (auto it = doc_.forms.find(id); it != doc_.forms.end()) return it->second;
      if (std::find(doc_.chart.begin(), doc_.chart.end(), id) != doc_.chart.end()) return Expr::coordinate(id);
      if (id.size() > 1 && id[0] == 'd') {
        std::string coord = id.substr(1);
        if (std::find(doc_.chart.begin(), doc_.chart.end(), coord) != doc_.chart.end())
          return DiffForm::basis(doc_.chart, coord);
      }
      pos_ = at;
      fail("unresolved reference '" + id + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

struct Word {
  std::string text;
  int col;
};

// Splits on whitespace outside brackets.
inline std::vector<Word> words(const std::string& line, int col0 = 1) {
  std::vector<Word> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    int depth = 0;
    while (i < line.size() && (depth > 0 || !std::isspace(static_cast<unsigned char>(line[i])))) {
      char c = line[i];
      if (c == '(' || c == '[' || c == '{') ++depth;
      else if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
      ++i;
    }
    out.push_back(Word{line.substr(start, i - start), col0 + static_cast<int>(start)});
  }
  return out;
}

// Splits on commas (or `sep`) outside brackets.
inline std::vector<Word> split_top(const std::string& s, int col0, char sep = ',') {
  std::vector<Word> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    char c = i < s.size() ? s[i] : sep;
    if (c == '(' || c == '[' || c == '{') ++depth;
    else if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
    if (depth == 0 && c == sep) {
      std::string part = s.substr(start, i - start);
      std::size_t a = part.find_first_not_of(" \t");
      std::size_t b = part.find_last_not_of(" \t");
      if (a != std::string::npos) out.push_back(Word{part.substr(a, b - a + 1), col0 + static_cast<int>(start + a)});
      else out.push_back(Word{"", col0 + static_cast<int>(start)});
      start = i + 1;
    }
  }
  return out;
}

inline bool bracketed(const std::string& s, char open, char close) {
  return s.size() >= 2 && s.front() == open && s.back() == close;
}

// Items of a [a, b, c] list.
inline std::vector<Word> list_items(const Word& w) {
  if (!bracketed(w.text, '[', ']')) throw Error{w.col, "expected a bracketed list"};
  std::string inner = w.text.substr(1, w.text.size() - 2);
  if (inner.find_first_not_of(" \t") == std::string::npos) return {};
  auto items = split_top(inner, w.col + 1);
  for (const auto& it : items)
    if (it.text.empty()) throw Error{it.col, "empty list item"};
  return items;
}

struct Params {
  std::map<std::string, Word> values;
  std::vector<Word> flags;
  mutable std::set<std::string> used;

  bool has(const std::string& k) const { return values.count(k) > 0; }

  const Word* get(const std::string& k) const {
    auto it = values.find(k);
    if (it == values.end()) return nullptr;
    used.insert(k);
    return &it->second;
  }

  const Word& require(const std::string& k, int col) const {
    if (auto w = get(k)) return *w;
    throw Error{col, "missing parameter '" + k + "'"};
  }

  bool flag(const std::string& f) const {
    for (const auto& w : flags)
      if (w.text == f) {
        used.insert("#" + f);
        return true;
      }
    return false;
  }

  void finish() const {
    for (const auto& [k, w] : values)
      if (!used.count(k)) throw Error{w.col, "unknown parameter '" + k + "'"};
    for (const auto& w : flags)
      if (!used.count("#" + w.text)) throw Error{w.col, "unexpected word '" + w.text + "'"};
  }
};

inline Params params(const std::vector<Word>& ws, std::size_t from) {
  Params p;
  for (std::size_t i = from; i < ws.size(); ++i) {
    const auto& w = ws[i];
    auto eq = w.text.find('=');
    if (eq != std::string::npos && eq > 0 && is_identifier(w.text.substr(0, eq))) {
      std::string key = w.text.substr(0, eq);
      std::string val = w.text.substr(eq + 1);
      int col = w.col + static_cast<int>(eq) + 1;
      if (val.empty()) throw Error{col, "empty value for '" + key + "'"};
      if (p.values.count(key)) throw Error{w.col, "duplicate parameter '" + key + "'"};
      p.values.emplace(key, Word{val, col});
    } else {
      p.flags.push_back(w);
    }
  }
  return p;
}

}  // namespace parse

class DocumentParser {
 public:
  ParseResult run(const std::string& text, const std::string& name) {
    doc_.name = name;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line_ = lineno;
      if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      try {
        statement(line);
      } catch (const parse::Error& e) {
        diag(e.col, e.message);
      } catch (const std::exception& e) {
        diag(1, e.what());
      }
    }
    ParseResult res;
    res.diagnostics = std::move(diags_);
    if (res.diagnostics.empty()) {
      if (doc_.chart.empty()) res.diagnostics.push_back(Diagnostic{1, 1, "document declares no chart"});
      else res.document = std::move(doc_);
    }
    return res;
  }

 private:
  SpecDocument doc_;
  std::vector<Diagnostic> diags_;
  int line_ = 0;
  std::set<std::string> names_;  // every declared object name

  void diag(int col, std::string msg) { diags_.push_back(Diagnostic{line_, col, std::move(msg)}); }

  [[noreturn]] static void fail(int col, const std::string& msg) { throw parse::Error{col, msg}; }

  void need_chart(int col) const {
    if (doc_.chart.empty()) fail(col, "chart must be declared first");
  }

  void declare(const parse::Word& w) {
    if (!parse::is_identifier(w.text)) fail(w.col, "invalid name '" + w.text + "'");
    if (std::find(doc_.chart.begin(), doc_.chart.end(), w.text) != doc_.chart.end())
      fail(w.col, "name '" + w.text + "' clashes with a coordinate");
    if (!names_.insert(w.text).second) fail(w.col, "duplicate name '" + w.text + "'");
  }

  Value value(const parse::Word& w) const {
    std::string text = w.text;
    int col = w.col;
    if (parse::bracketed(text, '{', '}')) {
      text = text.substr(1, text.size() - 2);
      ++col;
    }
    try {
      return parse::ExprParser(doc_, text, col).parse();
    } catch (const DomainError& e) {
      fail(col, e.what());
    }
  }

  Expr scalar(const parse::Word& w) const {
    Value v = value(w);
    if (auto e = std::get_if<Expr>(&v)) return *e;
    const auto& f = std::get<DiffForm>(v);
    if (f.degree() == 0) return f.coefficient({});
    fail(w.col, "expected a scalar, got a " + std::to_string(f.degree()) + "-form");
  }

  DiffForm form(const parse::Word& w, std::optional<int> degree = std::nullopt) const {
    Value v = value(w);
    if (auto e = std::get_if<Expr>(&v); e && degree && e->is_zero()) return DiffForm(doc_.chart, *degree);
    DiffForm f = std::holds_alternative<Expr>(v) ? DiffForm::scalar(doc_.chart, std::get<Expr>(v)) : std::get<DiffForm>(v);
    if (f.is_zero() && degree) return DiffForm(doc_.chart, *degree);
    if (degree && f.degree() != *degree)
      fail(w.col, "expected a " + std::to_string(*degree) + "-form, got degree " + std::to_string(f.degree()));
    return f;
  }

  long integer(const parse::Word& w, long lo, long hi) const {
    auto r = parse::decimal(w.text);
    if (!r || !is_integer(*r) || *r < lo || *r > hi)
      fail(w.col, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return r->get_num().get_si();
  }

  double real(const parse::Word& w) const {
    auto v = parse::number(w.text);
    if (!v) fail(w.col, "expected a number");
    return *v;
  }

  bool boolean(const parse::Word& w) const {
    if (w.text == "true" || w.text == "yes") return true;
    if (w.text == "false" || w.text == "no") return false;
    fail(w.col, "expected true or false");
  }

  template <class Map>
  const typename Map::mapped_type& lookup(const Map& m, const parse::Word& w, const char* what) const {
    auto it = m.find(w.text);
    if (it == m.end()) fail(w.col, "unresolved reference to " + std::string(what) + " '" + w.text + "'");
    return it->second;
  }

  std::string rest_after(const std::string& line, char sep, int& col) const {
    auto p = line.find(sep);
    if (p == std::string::npos) fail(1, std::string("expected '") + sep + "'");
    col = static_cast<int>(p) + 2;
    return line.substr(p + 1);
  }

  Region region_or_box(const parse::Params& p) const {
    if (auto w = p.get("region")) {
      if (w->text == "box") return whole_box(doc_.chart, doc_.box);
      return lookup(doc_.regions, *w, "region");
    }
    return whole_box(doc_.chart, doc_.box);
  }

  void statement(const std::string& line) {
    auto ws = parse::words(line);
    if (ws.empty()) return;
    const std::string& kw = ws[0].text;
    if (kw == "document") return document_stmt(ws);
    if (kw == "chart") return chart_stmt(ws);
    if (kw == "box") return box_stmt(ws);
    if (kw == "config") return config_stmt(ws);
    if (kw == "scalar" || kw == "form") return define_stmt(ws, line, kw == "form");
    if (kw == "region") return region_stmt(ws, line);
    if (kw == "foliation") return foliation_stmt(ws);
    if (kw == "family") return family_stmt(ws);
    if (kw == "mu") return mu_stmt(ws);
    if (kw == "closed") return closed_stmt(ws, line);
    if (kw == "testfn") return testfn_stmt(ws);
    if (kw == "tubular") return tubular_stmt(ws);
    if (kw == "check") return check_stmt(ws);
    fail(ws[0].col, "unknown statement '" + kw + "'");
  }

  void document_stmt(const std::vector<parse::Word>& ws) {
    if (ws.size() != 2) fail(ws[0].col, "document takes one name");
    doc_.name = ws[1].text;
  }

  void chart_stmt(const std::vector<parse::Word>& ws) {
    if (!doc_.chart.empty()) fail(ws[0].col, "chart declared twice");
    if (ws.size() < 2) fail(ws[0].col, "chart needs at least one coordinate");
    if (ws.size() > 9) fail(ws[9].col, "at most 8 coordinates");
    Chart c;
    for (std::size_t i = 1; i < ws.size(); ++i) {
      if (!parse::is_identifier(ws[i].text)) fail(ws[i].col, "invalid coordinate '" + ws[i].text + "'");
      if (std::find(c.begin(), c.end(), ws[i].text) != c.end()) fail(ws[i].col, "duplicate coordinate");
      if (names_.count(ws[i].text)) fail(ws[i].col, "coordinate clashes with a name");
      c.push_back(ws[i].text);
    }
    doc_.chart = c;
    doc_.box.assign(c.size(), Interval{-2.0, 2.0});
  }

  void box_stmt(const std::vector<parse::Word>& ws) {
    need_chart(ws[0].col);
    if (ws.size() != 4) fail(ws[0].col, "box takes a coordinate and two bounds");
    auto it = std::find(doc_.chart.begin(), doc_.chart.end(), ws[1].text);
    if (it == doc_.chart.end()) fail(ws[1].col, "unknown coordinate '" + ws[1].text + "'");
    double lo = real(ws[2]), hi = real(ws[3]);
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) fail(ws[2].col, "box needs finite lo < hi");
    doc_.box[static_cast<std::size_t>(it - doc_.chart.begin())] = Interval{lo, hi};
  }

  void config_stmt(const std::vector<parse::Word>& ws) {
    auto p = parse::params(ws, 1);
    if (auto w = p.get("seed")) {
      auto r = parse::decimal(w->text);
      if (!r || !is_integer(*r) || *r < 0 || r->get_num() > mpz_class("18446744073709551615"))
        fail(w->col, "seed must be a 64-bit unsigned integer");
      doc_.seed = std::stoull(r->get_num().get_str());
    }
    if (auto w = p.get("samples")) doc_.samples = static_cast<std::size_t>(integer(*w, 1, 100000));
    if (auto w = p.get("abs_tol")) {
      double v = real(*w);
      if (!(v > 0)) fail(w->col, "tolerance must be > 0");
      doc_.abs_tol = v;
    }
    if (auto w = p.get("rel_tol")) {
      double v = real(*w);
      if (!(v > 0)) fail(w->col, "tolerance must be > 0");
      doc_.rel_tol = v;
    }
    p.finish();
  }

  void define_stmt(const std::vector<parse::Word>& ws, const std::string& line, bool is_form) {
    need_chart(ws[0].col);
    if (ws.size() < 4 || ws[2].text != "=") fail(ws[0].col, "expected: " + ws[0].text + " NAME = EXPR");
    int col;
    std::string rhs = rest_after(line, '=', col);
    Value v;
    try {
      v = parse::ExprParser(doc_, rhs, col).parse();
    } catch (const DomainError& e) {
      fail(col, e.what());
    }
    declare(ws[1]);
    if (is_form) {
      doc_.forms[ws[1].text] =
          std::holds_alternative<Expr>(v) ? DiffForm::scalar(doc_.chart, std::get<Expr>(v)) : std::get<DiffForm>(v);
    } else {
      auto e = std::get_if<Expr>(&v);
      if (!e) fail(col, "scalar defined by a form; use 'form'");
      doc_.scalars[ws[1].text] = *e;
    }
  }

  void region_stmt(const std::vector<parse::Word>& ws, const std::string& line) {
    need_chart(ws[0].col);
    if (ws.size() < 3 || ws[2].text != ":") fail(ws[0].col, "expected: region NAME : g > 0, ...");
    int col;
    std::string rhs = rest_after(line, ':', col);
    Region r = whole_box(doc_.chart, doc_.box, ws[1].text);
    auto trimmed = parse::split_top(rhs, col);
    if (!(trimmed.size() == 1 && trimmed[0].text == "all")) {
      for (const auto& c : trimmed) {
        if (c.text.empty()) fail(c.col, "empty constraint");
        auto gt = c.text.find('>'), lt = c.text.find('<');
        if ((gt == std::string::npos) == (lt == std::string::npos))
          fail(c.col, "constraint needs exactly one strict inequality");
        std::size_t at = gt != std::string::npos ? gt : lt;
        parse::Word lhs{c.text.substr(0, at), c.col};
        parse::Word rhs_w{c.text.substr(at + 1), c.col + static_cast<int>(at) + 1};
        if (!rhs_w.text.empty() && rhs_w.text[0] == '=') fail(rhs_w.col, "only strict inequalities describe open regions");
        Expr a = scalar(lhs), b = scalar(rhs_w);
        Expr g = gt != std::string::npos ? a - b : b - a;
        if (g.is_zero()) fail(c.col, "constraint is never satisfied");
        r.constraints.push_back(g);
      }
    }
    declare(ws[1]);
    doc_.regions[ws[1].text] = r;
  }

  void foliation_stmt(const std::vector<parse::Word>& ws) {
    need_chart(ws[0].col);
    if (ws.size() < 2) fail(ws[0].col, "foliation needs a name");
    auto p = parse::params(ws, 2);
    Region region = region_or_box(p);
    const int m = static_cast<int>(doc_.chart.size());
    int r = static_cast<int>(integer(p.require("leafdim", ws[0].col), 0, m));
    std::vector<DiffForm> decomp;
    if (auto w = p.get("decomp"))
      for (const auto& it : parse::list_items(*w)) decomp.push_back(form(it, 1));
    std::optional<DiffForm> nu;
    if (auto w = p.get("nu")) nu = form(*w, m - r);
    std::vector<std::string> adapted;
    if (auto w = p.get("adapted"))
      for (const auto& it : parse::list_items(*w)) {
        if (std::find(doc_.chart.begin(), doc_.chart.end(), it.text) == doc_.chart.end())
          fail(it.col, "unknown coordinate '" + it.text + "'");
        adapted.push_back(it.text);
      }
    p.finish();
    if (static_cast<int>(decomp.size()) != m - r && !(decomp.empty() && nu && m - r <= 1))
      fail(ws[0].col, "codimension " + std::to_string(m - r) + " needs " + std::to_string(m - r) + " decomposition forms");
    if (decomp.empty() && nu && m - r == 1) decomp.push_back(*nu);
    if (!adapted.empty() && static_cast<int>(adapted.size()) != m - r)
      fail(ws[0].col, "adapted coordinates must number the codimension");
    if (!nu && m - r == 0) nu = DiffForm::scalar(doc_.chart, Expr(1));
    declare(ws[1]);
    doc_.foliations[ws[1].text] = make_foliation(ws[1].text, region, r, decomp, nu, adapted);
  }

  void family_stmt(const std::vector<parse::Word>& ws) {
    need_chart(ws[0].col);
    if (ws.size() < 2) fail(ws[0].col, "family needs a name");
    auto p = parse::params(ws, 2);
    FoliationFamily fam;
    fam.name = ws[1].text;
    fam.chart = doc_.chart;
    fam.box = doc_.box;
    for (const auto& it : parse::list_items(p.require("members", ws[0].col)))
      fam.members.push_back(lookup(doc_.foliations, it, "foliation"));
    if (fam.members.empty()) fail(ws[0].col, "family needs members");
    if (auto w = p.get("saturated")) fam.saturated = boolean(*w);
    p.finish();
    declare(ws[1]);
    doc_.families[ws[1].text] = fam;
  }

  void mu_stmt(const std::vector<parse::Word>& ws) {
    need_chart(ws[0].col);
    if (ws.size() < 2) fail(ws[0].col, "mu needs a name");
    auto p = parse::params(ws, 2);
    const Foliation& F = lookup(doc_.foliations, p.require("foliation", ws[0].col), "foliation");
    DiffForm mu;
    if (p.flag("solve")) {
      if (p.has("value")) fail(ws[0].col, "give either value= or solve");
      try {
        mu = solve_mu(F, doc_.config());
      } catch (const UnsupportedShapeError& e) {
        fail(ws[0].col, e.what());
      } catch (const PreconditionError& e) {
        fail(ws[0].col, e.what());
      }
    } else {
      mu = form(p.require("value", ws[0].col), 1);
    }
    p.finish();
    declare(ws[1]);
    doc_.forms[ws[1].text] = mu;
    doc_.mus[F.name] = mu;
  }

  std::vector<BumpSpec> bump_list(const parse::Word& w) const {
    std::vector<BumpSpec> out;
    for (const auto& it : parse::list_items(w)) out.push_back(bump_spec(it));
    return out;
  }

  // (c1, ..., cm; r)
  BumpSpec bump_spec(const parse::Word& w) const {
    if (!parse::bracketed(w.text, '(', ')')) fail(w.col, "expected (c1, ..., cm; r)");
    auto halves = parse::split_top(w.text.substr(1, w.text.size() - 2), w.col + 1, ';');
    if (halves.size() != 2) fail(w.col, "expected (c1, ..., cm; r)");
    auto cs = parse::split_top(halves[0].text, halves[0].col);
    if (cs.size() != doc_.chart.size()) fail(w.col, "center needs one value per coordinate");
    BumpSpec b;
    for (std::size_t k = 0; k < cs.size(); ++k) b.center[doc_.chart[k]] = real(cs[k]);
    b.r = real(halves[1]);
    if (!(b.r > 0)) fail(halves[1].col, "radius must be positive");
    return b;
  }

  void closed_stmt(const std::vector<parse::Word>& ws, const std::string& line) {
    need_chart(ws[0].col);
    if (ws.size() < 3) fail(ws[0].col, "expected: closed NAME zero EXPR | balls [...] | box");
    ClosedSetSpec M0;
    if (ws[2].text == "zero") {
      std::size_t at = static_cast<std::size_t>(ws[2].col - 1) + 4;
      parse::Word w{line.substr(at), static_cast<int>(at) + 1};
      M0 = ClosedSetSpec::zero_set(doc_.chart, doc_.box, scalar(w));
    } else if (ws[2].text == "balls") {
      if (ws.size() != 4) fail(ws[2].col, "balls takes one list");
      std::vector<Ball> balls;
      for (const auto& b : bump_list(ws[3])) balls.push_back(Ball{b.center, b.r});
      M0 = ClosedSetSpec::box_minus_balls(doc_.chart, doc_.box, balls);
    } else if (ws[2].text == "box" && ws.size() == 3) {
      M0 = ClosedSetSpec::box_minus_balls(doc_.chart, doc_.box, {});
    } else {
      fail(ws[2].col, "expected zero, balls or box");
    }
    declare(ws[1]);
    doc_.closed[ws[1].text] = M0;
  }

  void testfn_stmt(const std::vector<parse::Word>& ws) {
    need_chart(ws[0].col);
    if (ws.size() < 3) fail(ws[0].col, "expected: testfn NAME KIND ...");
    auto p = parse::params(ws, 3);
    TestFnSpec t;
    t.kind = ws[2].text;
    if (t.kind == "strong") {
      t.value = strengthen(scalar(p.require("f", ws[2].col)));
    } else if (t.kind == "weak") {
      t.value = scalar(p.require("f", ws[2].col));
    } else if (t.kind == "bump") {
      const auto& c = p.require("center", ws[2].col);
      parse::Word spec{"(" + (parse::bracketed(c.text, '(', ')') ? c.text.substr(1, c.text.size() - 2) : c.text) + ";" +
                           p.require("r", ws[2].col).text + ")",
                       c.col};
      t.bumps.push_back(bump_spec(spec));
      t.value = bump(t.bumps.back());
    } else if (t.kind == "cover") {
      const auto& cw = p.require("closed", ws[2].col);
      lookup(doc_.closed, cw, "closed set");
      t.closed = cw.text;
      t.bumps = bump_list(p.require("bumps", ws[2].col));
      for (const auto& b : t.bumps) t.value += bump(b);
    } else {
      fail(ws[2].col, "unknown test function kind '" + t.kind + "'");
    }
    p.finish();
    declare(ws[1]);
    doc_.scalars[ws[1].text] = t.value;
    doc_.testfns[ws[1].text] = t;
  }

  void tubular_stmt(const std::vector<parse::Word>& ws) {
    need_chart(ws[0].col);
    if (ws.size() < 2) fail(ws[0].col, "tubular needs a name");
    auto p = parse::params(ws, 2);
    Expr f = scalar(p.require("f", ws[0].col));
    const auto& t = p.require("t", ws[0].col);
    if (std::find(doc_.chart.begin(), doc_.chart.end(), t.text) == doc_.chart.end())
      fail(t.col, "unknown coordinate '" + t.text + "'");
    double eps = real(p.require("eps", ws[0].col));
    double outer = real(p.require("eps_outer", ws[0].col));
    if (!(eps > 0) || !(outer > eps)) fail(ws[0].col, "need 0 < eps < eps_outer");
    p.finish();
    declare(ws[1]);
    doc_.tubulars[ws[1].text] = make_tubular(doc_.chart, f, t.text, eps, outer);
  }

  // -------------------------------------------------------------------------
  // checks

  void check_stmt(const std::vector<parse::Word>& ws) {
    need_chart(ws[0].col);
    if (ws.size() < 3) fail(ws[0].col, "expected: check NAME KIND key=value ...");
    auto p = parse::params(ws, 3);
    CheckSpec c;
    c.name = ws[1].text;
    c.kind = ws[2].text;
    c.line = line_;
    if (auto w = p.get("expect")) {
      if (w->text != "fail" && w->text != "pass") fail(w->col, "expect must be pass or fail");
      c.expect_fail = w->text == "fail";
    }
    c.run = bind(c.kind, p, ws[2].col);
    p.finish();
    for (const auto& other : doc_.checks)
      if (other.name == c.name) fail(ws[1].col, "duplicate check name '" + c.name + "'");
    doc_.checks.push_back(std::move(c));
  }

  DiffForm mu_of(const Foliation& F, const parse::Params& p, const char* key = "mu") const {
    if (auto w = p.get(key)) return form(*w, 1);
    auto it = doc_.mus.find(F.name);
    if (it != doc_.mus.end()) return it->second;
    try {
      return solve_mu(F, doc_.config());
    } catch (const std::exception& e) {
      fail(1, std::string("no mu for '") + F.name + "': " + e.what());
    }
  }

  static CheckEntry entry(const CheckReport& r) {
    CheckEntry e;
    e.status = r.overall();
    e.findings = r.findings;
    e.notes = r.notes;
    return e;
  }

  static CheckEntry entry(const FormZeroResult& z, const std::string& what) {
    CheckReport r;
    r.add(zero_finding(what, z));
    CheckEntry e = entry(r);
    e.detail = r.findings.front().detail;
    return e;
  }

  static ProducedForm produced(const DiffForm& f) { return ProducedForm{f.degree(), to_string(f), to_latex(f)}; }

  CheckFn bind(const std::string& kind, const parse::Params& p, int col) {
    const Chart chart = doc_.chart;
    if (kind == "frobenius") {
      DiffForm nu, mu;
      Region r;
      if (auto w = p.get("foliation")) {
        const Foliation& F = lookup(doc_.foliations, *w, "foliation");
        nu = F.nu;
        r = F.region;
        mu = mu_of(F, p);
        if (p.has("region")) r = region_or_box(p);
      } else {
        nu = form(p.require("nu", col));
        mu = form(p.require("mu", col), 1);
        r = region_or_box(p);
      }
      return [nu, mu, r](const ZeroTestConfig& cfg) {
        return entry(verify_frobenius(nu, mu, r, cfg), "d(nu) - nu^mu = 0");
      };
    }
    if (kind == "gv-closed") {
      DiffForm mu;
      int q;
      Region r;
      if (auto w = p.get("foliation")) {
        const Foliation& F = lookup(doc_.foliations, *w, "foliation");
        mu = mu_of(F, p);
        q = F.codim();
        r = F.region;
      } else {
        mu = form(p.require("mu", col), 1);
        q = static_cast<int>(integer(p.require("q", col), 0, 8));
        r = region_or_box(p);
      }
      if (auto w = p.get("q")) q = static_cast<int>(integer(*w, 0, 8));
      std::optional<DiffForm> expected;
      if (auto w = p.get("expect_form")) expected = form(*w, 2 * q + 1);
      return [mu, q, r, expected](const ZeroTestConfig& cfg) {
        DiffForm gv = gv_form(mu, q);
        CheckReport rep;
        rep.add(zero_finding("closed", form_is_zero_on(ext_d(gv), r, cfg)));
        if (expected) rep.add(zero_finding("equals expected", forms_equal(gv, *expected, r, cfg)));
        CheckEntry e = entry(rep);
        e.detail = "gv = " + to_string(gv);
        e.form = produced(gv);
        return e;
      };
    }
    if (kind == "overlap-vanishing") {
      FoliationFamily fam = lookup(doc_.families, p.require("family", col), "family");
      MuChoice mus = doc_.mus;
      return [fam, mus](const ZeroTestConfig& cfg) { return entry(check_minimal_vanishing(fam, mus, cfg)); };
    }
    if (kind == "gv-min") {
      FoliationFamily fam = lookup(doc_.families, p.require("family", col), "family");
      std::size_t i = 0;
      if (auto w = p.get("stratum")) i = static_cast<std::size_t>(integer(*w, 0, 64));
      if (i >= fam.ranks().size()) fail(col, "stratum index out of range");
      MuChoice mus = doc_.mus;
      return [fam, mus, i](const ZeroTestConfig& cfg) {
        GVResult g = gv_min(fam, mus, i, cfg);
        CheckEntry e = entry(g.report);
        CheckReport wd = check_well_defined(g.form, cfg);
        for (const auto& f : wd.findings) e.findings.push_back(f);
        e.status = worst(e.status, wd.overall());
        e.detail = std::string(g.glued ? "GLUED" : "NOT GLUED") + ", degree " + std::to_string(g.degree) + ", rank " +
                   std::to_string(g.rank) + ", nonzero piece on " + g.base;
        if (!g.glued) e.status = worst(e.status, Status::Undecided);
        e.form = produced(g.form.pieces.front().form);
        return e;
      };
    }
    if (kind == "basic") {
      Expr phi = scalar(p.require("phi", col));
      Foliation F = lookup(doc_.foliations, p.require("foliation", col), "foliation");
      Region r = p.has("region") ? region_or_box(p) : F.region;
      return [phi, F, r](const ZeroTestConfig& cfg) { return entry(check_basic(phi, F, r, cfg), "d(phi) in I(F)"); };
    }
    if (kind == "gv-weighted") {
      Expr phi = scalar(p.require("phi", col));
      Foliation F = lookup(doc_.foliations, p.require("foliation", col), "foliation");
      DiffForm mu = mu_of(F, p);
      int q = F.codim();
      if (auto w = p.get("q")) q = static_cast<int>(integer(*w, 0, 8));
      return [phi, F, mu, q](const ZeroTestConfig& cfg) {
        WeightedGV w = gv_weighted(phi, mu, q, F, cfg);
        CheckReport rep;
        rep.add(zero_finding("basic", w.basic));
        rep.add(zero_finding("identity", w.identity));
        rep.add(zero_finding("closed", w.closed));
        rep.add(zero_finding("dphi^gv = 0", w.dphi_wedge));
        CheckEntry e = entry(rep);
        e.detail = "nu_bar = " + to_string(w.nu_bar);
        e.form = produced(w.nu_bar);
        return e;
      };
    }
    if (kind == "overlap-identities") {
      Foliation sub = lookup(doc_.foliations, p.require("sub", col), "foliation");
      Foliation sup = lookup(doc_.foliations, p.require("sup", col), "foliation");
      DiffForm mu1 = mu_of(sub, p, "mu1"), mu2 = mu_of(sup, p, "mu2");
      std::optional<DiffForm> theta;
      if (auto w = p.get("theta")) theta = form(*w);
      std::optional<Region> ov;
      if (p.has("region")) ov = region_or_box(p);
      return [sub, sup, mu1, mu2, theta, ov](const ZeroTestConfig& cfg) {
        Region r = ov ? *ov : intersect(sub.region, sup.region);
        CheckReport rep;
        DiffForm th;
        std::string detail;
        if (theta) {
          th = *theta;
          rep.add(zero_finding("theta", forms_equal(sub.nu, wedge(sup.nu, th), r, cfg)));
        } else {
          ThetaSolution s = solve_theta(sub, sup, r, cfg);
          th = s.theta;
          rep.add(zero_finding("theta", s.check));
          detail = "theta = " + to_string(th) + " (sign " + (s.sign > 0 ? "+" : "-") + ")";
        }
        CheckReport ids = check_overlap_identities(sub, sup, mu1, mu2, th, r, cfg);
        for (const auto& f : ids.findings) rep.add(f);
        CheckEntry e = entry(rep);
        e.detail = detail.empty() ? "theta = " + to_string(th) : detail;
        return e;
      };
    }
    if (kind == "foliation") {
      Foliation F = lookup(doc_.foliations, p.require("foliation", col), "foliation");
      return [F](const ZeroTestConfig& cfg) { return entry(validate_foliation(F, cfg)); };
    }
    if (kind == "family") {
      FoliationFamily fam = lookup(doc_.families, p.require("family", col), "family");
      return [fam](const ZeroTestConfig& cfg) { return entry(check_family(fam, cfg)); };
    }
    if (kind == "invariance") {
      Foliation F = lookup(doc_.foliations, p.require("foliation", col), "foliation");
      CoordinateMap m{chart, chart, {}};
      for (const auto& it : parse::list_items(p.require("map", col))) m.components.push_back(scalar(it));
      if (m.components.size() != chart.size()) fail(col, "map needs one component per coordinate");
      return [F, m](const ZeroTestConfig& cfg) { return entry(check_invariance(m, F, cfg), "pullback preserves I(F)"); };
    }
    if (kind == "flatness") {
      Expr f = scalar(p.require("f", col));
      ClosedSetSpec M0 = lookup(doc_.closed, p.require("closed", col), "closed set");
      return [f, M0](const ZeroTestConfig& cfg) {
        FlatnessReport fr = flatness_check(f, M0, cfg);
        CheckEntry e;
        e.status = fr.status;
        e.detail = fr.detail;
        Finding fd{"flatness", fr.status, fr.detail, fr.witness, {}};
        e.findings.push_back(fd);
        if (fr.flat_structure) e.notes.push_back("built from flat atoms");
        e.notes.push_back(std::to_string(fr.boundary_points) + " boundary points");
        return e;
      };
    }
    if (kind == "weak-cover") {
      const auto& tw = p.require("testfn", col);
      TestFnSpec t = lookup(doc_.testfns, tw, "test function");
      if (t.kind != "cover") fail(tw.col, "test function is not a cover sum");
      ClosedSetSpec M0 = doc_.closed.at(t.closed);
      std::size_t n = 64;
      if (auto w = p.get("points")) n = static_cast<std::size_t>(integer(*w, 1, 100000));
      return [t, M0, n](const ZeroTestConfig& cfg) {
        Expr phi = weak_test_from_cover(t.bumps, M0, cfg);
        CheckEntry e = entry(verify_weak_test(phi, M0, cfg, n));
        e.detail = std::to_string(t.bumps.size()) + " bumps";
        return e;
      };
    }
    if (kind == "exactness") {
      DiffForm nu = form(p.require("nu", col));
      DiffForm tau = form(p.require("tau", col));
      if (tau.degree() + 1 != nu.degree()) fail(col, "primitive must have degree one less than the form");
      Region r = region_or_box(p);
      return [nu, tau, r](const ZeroTestConfig& cfg) { return entry(verify_exact(nu, tau, r, cfg), "d(tau) = nu"); };
    }
    if (kind == "weighted-exact") {
      Foliation F = lookup(doc_.foliations, p.require("foliation", col), "foliation");
      Expr phi = scalar(p.require("phi", col));
      DiffForm mu = mu_of(F, p);
      const auto& t = p.require("t", col);
      if (std::find(chart.begin(), chart.end(), t.text) == chart.end()) fail(t.col, "unknown coordinate '" + t.text + "'");
      DiffForm tau = form(p.require("tau", col), 2 * F.codim());
      std::string tc = t.text;
      return [F, phi, mu, tc, tau](const ZeroTestConfig& cfg) {
        DiffForm nu_bar;
        CheckEntry e = entry(check_weighted_exactness(F, phi, mu, tc, tau, cfg, &nu_bar));
        e.detail = "nu_bar = " + to_string(nu_bar);
        e.form = produced(nu_bar);
        return e;
      };
    }
    if (kind == "ideal") {
      DiffForm b = form(p.require("b", col));
      std::vector<DiffForm> gens;
      for (const auto& it : parse::list_items(p.require("gens", col))) gens.push_back(form(it, 1));
      Region r = region_or_box(p);
      return [b, gens, r](const ZeroTestConfig& cfg) { return entry(ideal_member(b, gens, r, cfg), "member of ideal"); };
    }
    if (kind == "collar") {
      TubularData td = lookup(doc_.tubulars, p.require("tubular", col), "tubular neighbourhood");
      int q = static_cast<int>(integer(p.require("q", col), 0, 8));
      DiffForm nu = form(p.require("nu", col), 2 * q + 1);
      DiffForm alpha = form(p.require("alpha", col), 2 * q + 1);
      const auto& bw = p.require("beta", col);
      DiffForm beta = to_slice(form(bw, 2 * q), td, bw.col);
      Region r = region_or_box(p);
      return [td, q, nu, alpha, beta, r](const ZeroTestConfig& cfg) {
        CheckReport rep;
        rep.append(validate_tubular(td, cfg), "");
        rep.add(zero_finding("f^q nu = Phi(alpha, beta)", check_collar(nu, q, alpha, beta, td, r, cfg)));
        return entry(rep);
      };
    }
    if (kind == "df-complex") {
      Expr f = scalar(p.require("f", col));
      DiffForm w = form(p.require("form", col));
      Region r = region_or_box(p);
      return [f, w, r](const ZeroTestConfig& cfg) {
        CheckReport rep;
        rep.add(zero_finding("d_f d_f = 0", form_is_zero_on(d_f(f, d_f(f, w)), r, cfg)));
        rep.add(zero_finding("chain map", forms_equal(d_f(f, phi_map(f, w)), phi_map(f, ext_d(w)), r, cfg)));
        return entry(rep);
      };
    }
    fail(col, "unknown check kind '" + kind + "'");
  }

  // A form on the full chart that does not involve t, re-expressed on the slice.
  DiffForm to_slice(const DiffForm& f, const TubularData& td, int col) const {
    int tpos = static_cast<int>(std::find(td.chart.begin(), td.chart.end(), td.t) - td.chart.begin());
    DiffForm out(td.slice, f.degree());
    for (const auto& [I, c] : f.coefficients()) {
      IndexTuple J;
      for (int i : I) {
        if (i == tpos) fail(col, "form on the slice involves d" + td.t);
        J.push_back(i > tpos ? i - 1 : i);
      }
      if (mentions(c, td.t)) fail(col, "form on the slice involves " + td.t);
      out.set(J, c);
    }
    return out;
  }
};

inline ParseResult parse_spec(const std::string& text, const std::string& name = "") {
  return DocumentParser().run(text, name);
}

}  // namespace folgv
