#pragma once

#include <memory>
#include <string>
#include <vector>

#include "feaslab/multistage.hpp"
#include "feaslab/saa.hpp"

namespace feaslab {

/// Built-in problem instances used by the experiment runner and the test
/// suites; every entry is validated at construction.
std::shared_ptr<const StochasticProblem> catalog_problem(const std::string& name);
std::shared_ptr<const MultistageProblem> catalog_multistage(const std::string& name);

std::vector<std::string> catalog_problem_names();
std::vector<std::string> catalog_multistage_names();

/// The functional-chain battery for bound-dominance runs:
/// m in {1,2,4}, independent and comonotone threshold couplings.
std::vector<std::string> bound_check_battery();

}  // namespace feaslab
