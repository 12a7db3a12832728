#pragma once

#include <json.hpp>

#include "feaslab/experiments.hpp"

namespace feaslab {

using json = nlohmann::json;

json to_json(const ScalarDistribution& d);
ScalarDistribution distribution_from_json(const json& j);

json to_json(const ConstraintFn& f);
ConstraintFn constraint_from_json(const json& j);

json to_json(const ChainDomainSpec& spec);
ChainDomainSpec chain_domain_from_json(const json& j);

json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json to_json(const StochasticProblem& p);
StochasticProblem problem_from_json(const json& j);

json to_json(const MultistageProblem& p);
MultistageProblem multistage_from_json(const json& j);

/// Throws ConfigError on malformed content.
ExperimentConfig config_from_json(const json& j);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace feaslab
