#pragma once

#include <string>
#include <vector>

#include "hkq/serialization.hpp"

namespace hkq {

// One invariant evaluated by a check suite.
struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string relation;  // how measured is compared with threshold: "<=", ">=", ">"
  Json extra = Json::object();
};

// core, solvers, asymptotics, potential.
std::vector<std::string> check_suite_names();
// suite is one of check_suite_names() or "all"; throws invalid_argument otherwise.
std::vector<CheckResult> run_checks(const std::string& suite, unsigned jobs = 1);
// {suite, passed, failed, details: [...]}
Json check_report(const std::string& suite, unsigned jobs = 1);

}  // namespace hkq
