// Runs the checks of a parsed document on a small worker pool.  Results are
// stored by check index, so the report does not depend on scheduling.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "folgv/document.hpp"
#include "folgv/report.hpp"

namespace folgv {

inline constexpr std::uint64_t kDefaultSeed = 0x5eed5eedULL;
inline constexpr const char* kSeedEnv = "FOLGV_SEED";

struct RunOptions {
  std::optional<std::uint64_t> seed;  // command line
  std::optional<std::string> seed_env;  // value of FOLGV_SEED, if set
  std::optional<std::size_t> samples;
  std::optional<double> tol;  // sets both abs and rel
  unsigned threads = 0;  // 0: hardware concurrency
  bool timing = false;
};

inline std::optional<std::uint64_t> parse_seed(const std::string& s) {
  if (s.empty() || s.size() > 20 || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
  mpz_class v(s, 10);
  if (v > mpz_class("18446744073709551615")) return std::nullopt;
  return std::stoull(s);
}

inline std::optional<std::string> seed_from_environment() {
  const char* v = std::getenv(kSeedEnv);
  if (!v) return std::nullopt;
  return std::string(v);
}

// Seed precedence: command line, environment, document, default.
inline std::pair<ZeroTestConfig, std::string> resolve_config(const SpecDocument& doc, const RunOptions& opt) {
  ZeroTestConfig cfg = doc.config();
  std::string source = doc.seed ? "document" : "default";
  if (!doc.seed) cfg.rng_seed = kDefaultSeed;
  if (opt.seed_env) {
    auto s = parse_seed(*opt.seed_env);
    if (!s) throw std::invalid_argument(std::string(kSeedEnv) + " is not a 64-bit unsigned integer");
    cfg.rng_seed = *s;
    source = "environment";
  }
  if (opt.seed) {
    cfg.rng_seed = *opt.seed;
    source = "command line";
  }
  if (opt.samples) cfg.sample_count = *opt.samples;
  if (opt.tol) cfg.abs_tol = cfg.rel_tol = *opt.tol;
  cfg.validate();
  return {cfg, source};
}

namespace detail {

inline Finding error_finding(const char* what, const std::exception& e, std::optional<Point> witness) {
  return Finding{"error", Status::Fail, std::string(what) + ": " + e.what(), std::move(witness), {}};
}

inline CheckEntry run_one(const CheckSpec& c, const ZeroTestConfig& cfg, bool timing) {
  auto t0 = std::chrono::steady_clock::now();
  CheckEntry e;
  std::optional<Finding> err;
  try {
    e = c.run(cfg);
  } catch (const PreconditionError& x) {
    err = error_finding("precondition", x, x.witness());
  } catch (const GluingError& x) {
    err = error_finding("gluing", x, x.witness());
  } catch (const CoverageError& x) {
    err = error_finding("coverage", x, x.witness());
  } catch (const std::exception& x) {
    err = error_finding("error", x, std::nullopt);
  }
  if (err) {
    e = CheckEntry{};
    e.status = Status::Fail;
    e.detail = err->detail;
    e.findings = {*err};
  }
  e.name = c.name;
  e.kind = c.kind;
  e.line = c.line;
  if (c.expect_fail) {
    if (e.status == Status::Fail) {
      e.status = Status::Pass;
      e.notes.push_back("expected failure observed");
    } else if (e.status == Status::Pass) {
      e.status = Status::Fail;
      e.notes.push_back("expected a failure but the check passed");
    }
  }
  if (timing) e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return e;
}

}  // namespace detail

inline Report run_document(const SpecDocument& doc, const RunOptions& opt = {}) {
  auto [cfg, source] = resolve_config(doc, opt);
  Report rep;
  rep.document = doc.name;
  rep.seed = cfg.rng_seed;
  rep.seed_source = source;
  rep.samples = cfg.sample_count;
  rep.abs_tol = cfg.abs_tol;
  rep.rel_tol = cfg.rel_tol;
  rep.checks.resize(doc.checks.size());

  unsigned n = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(1, doc.checks.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&, cfg = cfg] {
    for (std::size_t i; (i = next.fetch_add(1)) < doc.checks.size();)
      rep.checks[i] = detail::run_one(doc.checks[i], cfg, opt.timing);
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rep;
}

// Parse failures produce a report with diagnostics and no checks.
inline Report run_text(const std::string& text, const std::string& name, const RunOptions& opt = {}) {
  ParseResult p = parse_spec(text, name);
  if (!p.ok()) {
    Report r;
    r.document = name;
    for (const auto& d : p.diagnostics) r.diagnostics.push_back(d.str());
    return r;
  }
  return run_document(*p.document, opt);
}

}  // namespace folgv
