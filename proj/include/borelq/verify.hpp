#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace borelq {

/// One relation check. `tag` is the short relation key used in reports
/// (Qlin, Qcom, PQcom, partadd, parhom, loc-cons, Jj, wcom, wecom, cm-Ehr).
struct CheckResult {
  std::string tag;
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  /// For ratio checks residual holds the ratio and [lower, tolerance] the band.
  double lower = 0.0;
  bool is_band = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool pass() const;
};

/// algebra, imprimitivity, poisson, ehrenfest-classical, all.
std::vector<std::string> suite_names();
/// Throws PreconditionError("cli") for unknown names.
SuiteReport run_suite(std::string_view name);
std::string to_json(const SuiteReport& report);

SuiteReport verify_algebra();
SuiteReport verify_imprimitivity();
SuiteReport verify_poisson();
SuiteReport verify_classical_ehrenfest();

}  // namespace borelq
