// folgv: run check documents from the command line.
//
//   folgv check FILE [--format text|json|latex]
//   folgv gv FILE --stratum I
//   folgv report FILE --format text|json|latex
//
// Exit status: 0 all pass, 1 a failure, 2 undecided, 3 usage, 4 io, 5 parse.
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "folgv/runner.hpp"

namespace {

constexpr int kUsage = 3;
constexpr int kIo = 4;
constexpr int kParse = 5;

struct Args {
  std::string file;
  std::string format = "text";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> tol;
  std::size_t stratum = 0;
  unsigned threads = 0;
  bool timing = false;
};

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

folgv::RunOptions options(const Args& a) {
  folgv::RunOptions o;
  o.seed = a.seed;
  o.seed_env = folgv::seed_from_environment();
  o.samples = a.samples;
  o.tol = a.tol;
  o.threads = a.threads;
  o.timing = a.timing;
  return o;
}

// Loads FILE as a document, or as a saved json report when it is one.
int load(const Args& a, folgv::Report& out, bool allow_saved) {
  auto text = slurp(a.file);
  if (!text) {
    std::cerr << "folgv: cannot read " << a.file << "\n";
    return kIo;
  }
  if (allow_saved) {
    auto j = nlohmann::json::parse(*text, nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.contains("schema_version")) {
      try {
        out = folgv::report_from_json(j);
        return 0;
      } catch (const std::exception& e) {
        std::cerr << "folgv: " << a.file << ": " << e.what() << "\n";
        return kParse;
      }
    }
  }
  folgv::ParseResult p = folgv::parse_spec(*text, a.file);
  if (!p.ok()) {
    for (const auto& d : p.diagnostics) std::cerr << a.file << ":" << d.str() << "\n";
    return kParse;
  }
  try {
    out = folgv::run_document(*p.document, options(a));
  } catch (const std::invalid_argument& e) {
    std::cerr << "folgv: " << e.what() << "\n";
    return kUsage;
  }
  return 0;
}

int run_check(const Args& a, bool allow_saved) {
  folgv::Report rep;
  if (int rc = load(a, rep, allow_saved)) return rc;
  std::cout << folgv::render_report(rep, a.format);
  return folgv::exit_status(rep);
}

int run_gv(const Args& a) {
  auto text = slurp(a.file);
  if (!text) {
    std::cerr << "folgv: cannot read " << a.file << "\n";
    return kIo;
  }
  folgv::ParseResult p = folgv::parse_spec(*text, a.file);
  if (!p.ok()) {
    for (const auto& d : p.diagnostics) std::cerr << a.file << ":" << d.str() << "\n";
    return kParse;
  }
  const auto& doc = *p.document;
  if (doc.families.size() != 1) {
    std::cerr << "folgv: gv needs a document with exactly one family\n";
    return kUsage;
  }
  const auto& fam = doc.families.begin()->second;
  if (a.stratum >= fam.ranks().size()) {
    std::cerr << "folgv: stratum " << a.stratum << " out of range (family has " << fam.ranks().size() << ")\n";
    return kUsage;
  }
  folgv::ZeroTestConfig cfg;
  try {
    cfg = folgv::resolve_config(doc, options(a)).first;
  } catch (const std::invalid_argument& e) {
    std::cerr << "folgv: " << e.what() << "\n";
    return kUsage;
  }
  try {
    folgv::GVResult g = folgv::gv_min(fam, doc.mus, a.stratum, cfg);
    std::cout << "GV_min stratum " << a.stratum << " (rank " << g.rank << ", degree " << g.degree << ")\n";
    for (const auto& piece : g.form.pieces)
      std::cout << "  on " << piece.region.name << ": " << folgv::to_string(piece.form) << "\n";
    std::cout << (g.glued ? "GLUED" : "NOT GLUED") << "\n";
    folgv::Status st = g.report.overall();
    for (const auto& f : g.report.findings)
      std::cout << "  " << folgv::status_name(f.status) << " " << f.name << ": " << f.detail << "\n";
    for (const auto& n : g.report.notes) std::cout << "  note: " << n << "\n";
    if (!g.glued) st = folgv::worst(st, folgv::Status::Undecided);
    return st == folgv::Status::Pass ? 0 : st == folgv::Status::Fail ? 1 : 2;
  } catch (const folgv::GluingError& e) {
    std::cout << "FAIL gluing: " << e.what() << "\n";
    if (e.witness()) std::cout << "  witness " << folgv::point_string(*e.witness()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cout << "FAIL: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"folgv: verify foliation and Godbillon-Vey computations"};
  app.require_subcommand(1);
  Args a;
  auto common = [&a](CLI::App* sub) {
    sub->add_option("file", a.file, "check document")->required();
    sub->add_option("--seed", a.seed, "random seed (overrides FOLGV_SEED and the document)");
    sub->add_option("--samples", a.samples, "samples per zero test")->check(CLI::Range(1, 100000));
    sub->add_option("--tol", a.tol, "absolute and relative tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--threads", a.threads, "worker threads (0: all cores)");
  };
  auto formats = CLI::IsMember({"text", "json", "latex"});

  auto* check = app.add_subcommand("check", "run every check in a document");
  common(check);
  check->add_option("--format", a.format, "output format")->check(formats);
  check->add_flag("--timing", a.timing, "record per-check wall time");

  auto* gv = app.add_subcommand("gv", "compute GV_min for one stratum of the document's family");
  common(gv);
  gv->add_option("--stratum", a.stratum, "stratum index, by increasing rank")->required();

  auto* report = app.add_subcommand("report", "render a document run or a saved json report");
  common(report);
  report->add_option("--format", a.format, "output format")->required()->check(formats);
  report->add_flag("--timing", a.timing, "record per-check wall time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  if (*check) return run_check(a, false);
  if (*gv) return run_gv(a);
  return run_check(a, true);
}
