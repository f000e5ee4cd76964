// Verdict records shared by the engine checks.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "folgv/forms.hpp"
#include "folgv/region.hpp"

namespace folgv {

enum class Status { Pass, Fail, Undecided };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Undecided: return "UNDECIDED";
  }
  return "?";
}

inline Status worst(Status a, Status b) {
  if (a == Status::Fail || b == Status::Fail) return Status::Fail;
  if (a == Status::Undecided || b == Status::Undecided) return Status::Undecided;
  return Status::Pass;
}

// A zero test that is expected to come out zero.
inline Status expect_zero(Verdict v) {
  switch (v) {
    case Verdict::ProvedZero: return Status::Pass;
    case Verdict::NonZero: return Status::Fail;
    case Verdict::Undecided: return Status::Undecided;
  }
  return Status::Undecided;
}

struct Finding {
  std::string name;
  Status status = Status::Pass;
  std::string detail;
  std::optional<Point> witness;
  std::string witness_form;  // non-zero normal form, when there is one
};

struct CheckReport {
  std::vector<Finding> findings;
  std::vector<std::string> notes;

  Status overall() const {
    Status s = Status::Pass;
    for (const auto& f : findings) s = worst(s, f.status);
    return s;
  }

  const Finding* find(const std::string& name) const {
    for (const auto& f : findings)
      if (f.name == name) return &f;
    return nullptr;
  }

  Finding& add(Finding f) {
    findings.push_back(std::move(f));
    return findings.back();
  }

  Finding& add(const std::string& name, Status s, std::string detail = {}) {
    return add(Finding{name, s, std::move(detail), std::nullopt, {}});
  }

  void append(const CheckReport& other, const std::string& prefix) {
    for (auto f : other.findings) {
      f.name = prefix + f.name;
      findings.push_back(std::move(f));
    }
    for (const auto& n : other.notes) notes.push_back(prefix + n);
  }
};

inline Finding zero_finding(const std::string& name, const FormZeroResult& z) {
  Finding f;
  f.name = name;
  f.status = expect_zero(z.verdict);
  f.detail = std::string(verdict_name(z.verdict)) + " (" + z.method + ")";
  if (!z.proved()) {
    f.witness = z.witness;
    f.witness_form = to_string(z.residual);
    if (z.nonzero()) f.detail += " at component " + z.witness_component;
  }
  return f;
}

inline Finding zero_finding(const std::string& name, const ZeroResult& z) {
  Finding f;
  f.name = name;
  f.status = expect_zero(z.verdict);
  f.detail = std::string(verdict_name(z.verdict)) + " (" + z.method + ")";
  if (!z.proved()) {
    f.witness = z.witness;
    f.witness_form = to_string(z.residual);
  }
  return f;
}

}  // namespace folgv
