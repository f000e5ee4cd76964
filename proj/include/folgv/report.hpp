// Batch report: one entry per check, rendered as text, json or latex.
#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "folgv/findings.hpp"

namespace folgv {

inline constexpr int kReportSchemaVersion = 1;

struct ProducedForm {
  int degree = 0;
  std::string text;
  std::string latex;

  bool operator==(const ProducedForm&) const = default;
};

struct CheckEntry {
  std::string name;
  std::string kind;
  int line = 0;
  Status status = Status::Pass;
  std::string detail;
  std::vector<Finding> findings;
  std::vector<std::string> notes;
  std::optional<ProducedForm> form;
  std::optional<double> seconds;  // only filled when timing is requested
};

struct Report {
  std::string document;
  std::uint64_t seed = 0;
  std::string seed_source = "default";
  std::size_t samples = 0;
  double abs_tol = 0.0;
  double rel_tol = 0.0;
  std::vector<std::string> diagnostics;
  std::vector<CheckEntry> checks;

  std::size_t count(Status s) const {
    std::size_t n = 0;
    for (const auto& c : checks) n += c.status == s;
    return n;
  }
};

// 0 all pass, 1 any fail, 2 undecided without fail.
inline int exit_status(const Report& r) {
  if (r.count(Status::Fail)) return 1;
  if (r.count(Status::Undecided)) return 2;
  return 0;
}

inline bool operator==(const Finding& a, const Finding& b) {
  return a.name == b.name && a.status == b.status && a.detail == b.detail && a.witness == b.witness &&
         a.witness_form == b.witness_form;
}

inline bool operator==(const CheckEntry& a, const CheckEntry& b) {
  return a.name == b.name && a.kind == b.kind && a.line == b.line && a.status == b.status && a.detail == b.detail &&
         a.findings == b.findings && a.notes == b.notes && a.form == b.form && a.seconds == b.seconds;
}

inline bool operator==(const Report& a, const Report& b) {
  return a.document == b.document && a.seed == b.seed && a.seed_source == b.seed_source && a.samples == b.samples &&
         a.abs_tol == b.abs_tol && a.rel_tol == b.rel_tol && a.diagnostics == b.diagnostics && a.checks == b.checks;
}

// ---------------------------------------------------------------------------
// json

inline Status status_from_name(const std::string& s) {
  if (s == "PASS") return Status::Pass;
  if (s == "FAIL") return Status::Fail;
  if (s == "UNDECIDED") return Status::Undecided;
  throw std::invalid_argument("unknown status '" + s + "'");
}

inline nlohmann::ordered_json point_json(const Point& p) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

inline nlohmann::ordered_json to_json(const Report& r) {
  using J = nlohmann::ordered_json;
  J j;
  j["schema_version"] = kReportSchemaVersion;
  j["document"] = r.document;
  j["seed"] = r.seed;
  j["seed_source"] = r.seed_source;
  j["samples"] = r.samples;
  j["abs_tol"] = r.abs_tol;
  j["rel_tol"] = r.rel_tol;
  j["summary"] = {{"total", r.checks.size()},
                  {"pass", r.count(Status::Pass)},
                  {"fail", r.count(Status::Fail)},
                  {"undecided", r.count(Status::Undecided)}};
  j["diagnostics"] = r.diagnostics;
  J checks = J::array();
  for (const auto& c : r.checks) {
    J e;
    e["name"] = c.name;
    e["kind"] = c.kind;
    e["line"] = c.line;
    e["status"] = status_name(c.status);
    e["detail"] = c.detail;
    J fs = J::array();
    for (const auto& f : c.findings) {
      J x;
      x["name"] = f.name;
      x["status"] = status_name(f.status);
      x["detail"] = f.detail;
      x["witness"] = f.witness ? point_json(*f.witness) : J();
      x["witness_form"] = f.witness_form;
      fs.push_back(std::move(x));
    }
    e["findings"] = std::move(fs);
    e["notes"] = c.notes;
    if (c.form)
      e["form"] = {{"degree", c.form->degree}, {"text", c.form->text}, {"latex", c.form->latex}};
    else
      e["form"] = nullptr;
    if (c.seconds) e["seconds"] = *c.seconds;
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  return j;
}

inline std::string render_json(const Report& r) { return to_json(r).dump(2) + "\n"; }

inline Report report_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kReportSchemaVersion) throw std::invalid_argument("unsupported schema version");
  Report r;
  r.document = j.at("document").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.seed_source = j.at("seed_source").get<std::string>();
  r.samples = j.at("samples").get<std::size_t>();
  r.abs_tol = j.at("abs_tol").get<double>();
  r.rel_tol = j.at("rel_tol").get<double>();
  r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  for (const auto& e : j.at("checks")) {
    CheckEntry c;
    c.name = e.at("name").get<std::string>();
    c.kind = e.at("kind").get<std::string>();
    c.line = e.at("line").get<int>();
    c.status = status_from_name(e.at("status").get<std::string>());
    c.detail = e.at("detail").get<std::string>();
    for (const auto& x : e.at("findings")) {
      Finding f;
      f.name = x.at("name").get<std::string>();
      f.status = status_from_name(x.at("status").get<std::string>());
      f.detail = x.at("detail").get<std::string>();
      if (!x.at("witness").is_null()) f.witness = x.at("witness").get<Point>();
      f.witness_form = x.at("witness_form").get<std::string>();
      c.findings.push_back(std::move(f));
    }
    c.notes = e.at("notes").get<std::vector<std::string>>();
    if (!e.at("form").is_null()) {
      const auto& fj = e.at("form");
      c.form = ProducedForm{fj.at("degree").get<int>(), fj.at("text").get<std::string>(), fj.at("latex").get<std::string>()};
    }
    if (e.contains("seconds")) c.seconds = e.at("seconds").get<double>();
    r.checks.push_back(std::move(c));
  }
  return r;
}

inline Report report_from_json(const std::string& text) { return report_from_json(nlohmann::json::parse(text)); }

// ---------------------------------------------------------------------------
// text

inline std::string render_text(const Report& r) {
  std::ostringstream os;
  os << "folgv report: " << (r.document.empty() ? "(unnamed)" : r.document) << "\n";
  os << "seed " << r.seed << " (" << r.seed_source << "), samples " << r.samples << ", abs_tol " << r.abs_tol
     << ", rel_tol " << r.rel_tol << "\n";
  for (const auto& d : r.diagnostics) os << "diagnostic: " << d << "\n";
  std::size_t w = 4;
  for (const auto& c : r.checks) w = std::max(w, c.name.size());
  for (const auto& c : r.checks) {
    std::string st = status_name(c.status);
    os << st << std::string(10 - st.size(), ' ') << c.name << std::string(w + 2 - c.name.size(), ' ') << c.kind;
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
    for (const auto& f : c.findings) {
      if (f.status == Status::Pass && c.status == Status::Pass) continue;
      os << "    " << status_name(f.status) << " " << f.name;
      if (!f.detail.empty()) os << ": " << f.detail;
      os << "\n";
      if (f.witness) os << "      witness " << point_string(*f.witness) << "\n";
      if (!f.witness_form.empty()) os << "      residual " << f.witness_form << "\n";
    }
    if (c.form) os << "    form (degree " << c.form->degree << "): " << c.form->text << "\n";
    for (const auto& n : c.notes) os << "    note: " << n << "\n";
  }
  os << "summary: " << r.checks.size() << " checks, " << r.count(Status::Pass) << " pass, " << r.count(Status::Fail)
     << " fail, " << r.count(Status::Undecided) << " undecided\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// latex

inline std::string latex_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '_': case '&': case '%': case '$': case '#': case '{': case '}':
        out += '\\';
        out += ch;
        break;
      case '^': out += "\\textasciicircum{}"; break;
      case '\\': out += "\\textbackslash{}"; break;
      case '~': out += "\\textasciitilde{}"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string render_latex(const Report& r) {
  std::ostringstream os;
  os << "\\section*{folgv report: " << latex_escape(r.document.empty() ? "(unnamed)" : r.document) << "}\n";
  os << "Seed " << r.seed << " (" << latex_escape(r.seed_source) << "), " << r.samples << " samples.\n\n";
  os << "\\begin{tabular}{lll}\n\\hline\nStatus & Check & Kind \\\\\n\\hline\n";
  for (const auto& c : r.checks)
    os << status_name(c.status) << " & " << latex_escape(c.name) << " & " << latex_escape(c.kind) << " \\\\\n";
  os << "\\hline\n\\end{tabular}\n\n";
  for (const auto& c : r.checks) {
    if (c.status != Status::Pass || !c.form) continue;
    os << "\\paragraph{" << latex_escape(c.name) << "} degree " << c.form->degree << ":\n\\[\n" << c.form->latex
       << "\n\\]\n";
  }
  os << "Summary: " << r.checks.size() << " checks, " << r.count(Status::Pass) << " pass, " << r.count(Status::Fail)
     << " fail, " << r.count(Status::Undecided) << " undecided.\n";
  return os.str();
}

inline std::string render_report(const Report& r, const std::string& format) {
  if (format == "text") return render_text(r);
  if (format == "json") return render_json(r);
  if (format == "latex") return render_latex(r);
  throw std::invalid_argument("unknown report format '" + format + "'");
}

}  // namespace folgv
