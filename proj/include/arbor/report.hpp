#pragma once

#include <map>
#include <string>
#include <vector>

namespace arbor {

struct ReportItem {
  std::string code;     // stable machine-readable tag, e.g. "TS4-overlap"
  std::string message;  // human-readable detail
};

/// Non-throwing validation result: violations plus free-form numeric stats.
struct Report {
  std::vector<ReportItem> violations;
  std::map<std::string, double> stats;
  std::vector<std::string> notes;

  bool ok() const { return violations.empty(); }
  void fail(const std::string& code, const std::string& message) {
    violations.push_back({code, message});
  }
  bool has(const std::string& code) const {
    for (const auto& v : violations)
      if (v.code == code) return true;
    return false;
  }
  std::string summary() const;
};

}  // namespace arbor
