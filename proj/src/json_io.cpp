#include "feaslab/json_io.hpp"

#include <fstream>

#include "feaslab/catalog.hpp"
#include "feaslab/errors.hpp"

namespace feaslab {

namespace {

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

double num(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) bad(std::string("missing numeric field: ") + key);
  return j[key].get<double>();
}

Vector vec(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array()) bad(std::string("missing array field: ") + key);
  Vector v;
  for (const auto& e : j[key]) {
    if (!e.is_number()) bad(std::string("non-numeric entry in: ") + key);
    v.push_back(e.get<double>());
  }
  return v;
}

std::string str(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) bad(std::string("missing string field: ") + key);
  return j[key].get<std::string>();
}

}  // namespace

json to_json(const ScalarDistribution& d) {
  switch (d.family()) {
    case DistFamily::uniform:
      return {{"family", "uniform"}, {"a", d.param_a()}, {"b", d.param_b()}};
    case DistFamily::exponential:
      return {{"family", "exponential"}, {"rate", d.param_a()}};
    case DistFamily::normal:
      return {{"family", "normal"}, {"mean", d.param_a()}, {"sd", d.param_b()}};
    case DistFamily::discrete:
      return {{"family", "discrete"}, {"values", d.atoms()}, {"probs", d.atom_probs()}};
    case DistFamily::shifted_scaled:
      return {{"family", "shifted_scaled"},
              {"shift", d.param_a()},
              {"scale", d.param_b()},
              {"inner", to_json(d.inner())}};
  }
  bad("unknown distribution family");
}

ScalarDistribution distribution_from_json(const json& j) {
  std::string fam = str(j, "family");
  try {
    if (fam == "uniform") return ScalarDistribution::uniform(num(j, "a"), num(j, "b"));
    if (fam == "exponential") return ScalarDistribution::exponential(num(j, "rate"));
    if (fam == "normal") return ScalarDistribution::normal(num(j, "mean"), num(j, "sd"));
    if (fam == "discrete") {
      Vector v = vec(j, "values"), p = vec(j, "probs");
      return ScalarDistribution::discrete(std::move(v), std::move(p));
    }
    if (fam == "shifted_scaled") {
      if (!j.contains("inner")) bad("shifted_scaled: missing inner");
      return ScalarDistribution::shifted_scaled(distribution_from_json(j["inner"]),
                                                num(j, "shift"), num(j, "scale"));
    }
  } catch (const std::invalid_argument& e) {
    bad(std::string("invalid distribution: ") + e.what());
  }
  bad("unknown distribution family: " + fam);
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) bad("matrix must be a nested array");
  int rows = static_cast<int>(j.size());
  int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) bad("ragged matrix rows");
    for (int c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) bad("non-numeric matrix entry");
      m(i, c) = j[i][c].get<double>();
    }
  }
  return m;
}

json to_json(const ConstraintFn& f) {
  switch (f.kind()) {
    case ConstraintFn::Kind::affine:
      return {{"kind", "affine"}, {"a", f.linear_part()}, {"b", f.constant_part()}};
    case ConstraintFn::Kind::quadratic:
      return {{"kind", "quadratic"},
              {"Q", to_json(f.quadratic_part())},
              {"a", f.linear_part()},
              {"b", f.constant_part()}};
    case ConstraintFn::Kind::norm:
      return {{"kind", "norm"}, {"center", f.center()}};
  }
  bad("unknown constraint kind");
}

ConstraintFn constraint_from_json(const json& j) {
  std::string kind = str(j, "kind");
  try {
    if (kind == "affine") return ConstraintFn::affine(vec(j, "a"), num(j, "b"));
    if (kind == "quadratic") {
      if (!j.contains("Q")) bad("quadratic: missing Q");
      return ConstraintFn::quadratic(matrix_from_json(j["Q"]), vec(j, "a"), num(j, "b"));
    }
    if (kind == "norm") return ConstraintFn::norm_ball(vec(j, "center"));
  } catch (const std::invalid_argument& e) {
    bad(std::string("invalid constraint: ") + e.what());
  }
  bad("unknown constraint kind: " + kind);
}

json to_json(const ChainDomainSpec& spec) {
  json chains = json::array();
  for (const ChainLink& link : spec.chains)
    chains.push_back({{"fn", to_json(link.fn)}, {"law", to_json(link.law)}});
  return {{"dim", spec.dim},
          {"chains", std::move(chains)},
          {"independent_thresholds", spec.independent_thresholds}};
}

ChainDomainSpec chain_domain_from_json(const json& j) {
  ChainDomainSpec spec;
  spec.dim = static_cast<int>(num(j, "dim"));
  if (!j.contains("chains") || !j["chains"].is_array()) bad("chain domain: missing chains");
  for (const auto& c : j["chains"]) {
    if (!c.contains("fn") || !c.contains("law")) bad("chain entry needs fn and law");
    spec.chains.push_back({constraint_from_json(c["fn"]), distribution_from_json(c["law"])});
  }
  if (j.contains("independent_thresholds"))
    spec.independent_thresholds = j["independent_thresholds"].get<bool>();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    bad(std::string("invalid chain domain: ") + e.what());
  }
  return spec;
}

namespace {

json objective_to_json(const ObjectiveSpec& o) {
  switch (o.kind) {
    case ObjectiveSpec::Kind::linear:
      return {{"kind", "linear"}, {"c", o.c}};
    case ObjectiveSpec::Kind::quadratic_diag:
      return {{"kind", "quadratic_diag"}, {"weights", o.weights}, {"center", o.center}};
    case ObjectiveSpec::Kind::abs_deviation:
      return {{"kind", "abs_deviation"}, {"a", o.a}, {"law", to_json(*o.law)}};
    case ObjectiveSpec::Kind::scaled_linear:
      return {{"kind", "scaled_linear"}, {"a", o.a}, {"law", to_json(*o.law)}};
    case ObjectiveSpec::Kind::linear_abs:
      return {{"kind", "linear_abs"}, {"c", o.c}, {"a", o.a}, {"law", to_json(*o.law)}};
  }
  bad("unknown objective kind");
}

ObjectiveSpec objective_from_json(const json& j) {
  ObjectiveSpec o;
  std::string kind = str(j, "kind");
  if (kind == "linear") {
    o.kind = ObjectiveSpec::Kind::linear;
    o.c = vec(j, "c");
  } else if (kind == "quadratic_diag") {
    o.kind = ObjectiveSpec::Kind::quadratic_diag;
    o.weights = vec(j, "weights");
    o.center = vec(j, "center");
  } else if (kind == "abs_deviation") {
    o.kind = ObjectiveSpec::Kind::abs_deviation;
    o.a = vec(j, "a");
    o.law = distribution_from_json(j.at("law"));
  } else if (kind == "scaled_linear") {
    o.kind = ObjectiveSpec::Kind::scaled_linear;
    o.a = vec(j, "a");
    o.law = distribution_from_json(j.at("law"));
  } else if (kind == "linear_abs") {
    o.kind = ObjectiveSpec::Kind::linear_abs;
    o.c = vec(j, "c");
    o.a = vec(j, "a");
    o.law = distribution_from_json(j.at("law"));
  } else {
    bad("unknown objective kind: " + kind);
  }
  return o;
}

}  // namespace

json to_json(const StochasticProblem& p) {
  json j;
  j["dim"] = p.dim;
  j["box"] = {{"lo", p.box.lo}, {"hi", p.box.hi}};
  if (p.x_ineq) j["x_ineq"] = {{"G", to_json(p.x_ineq->G)}, {"g", p.x_ineq->g}};
  if (p.recourse) {
    json ts;
    ts["c"] = p.recourse->c;
    ts["g"] = p.recourse->g;
    ts["W"] = to_json(p.recourse->W);
    ts["T"] = to_json(p.recourse->T);
    json laws = json::array();
    for (const auto& l : p.recourse->h_laws) laws.push_back(to_json(l));
    ts["h_laws"] = std::move(laws);
    j["two_stage"] = std::move(ts);
  } else {
    j["objective"] = objective_to_json(p.objective);
  }
  if (p.domain) j["domain"] = to_json(*p.domain);
  return j;
}

StochasticProblem problem_from_json(const json& j) {
  StochasticProblem p;
  p.dim = static_cast<int>(num(j, "dim"));
  if (!j.contains("box")) bad("problem: missing box");
  p.box.lo = vec(j["box"], "lo");
  p.box.hi = vec(j["box"], "hi");
  if (j.contains("x_ineq")) {
    AffineIneq iq;
    iq.G = matrix_from_json(j["x_ineq"].at("G"));
    iq.g = vec(j["x_ineq"], "g");
    p.x_ineq = std::move(iq);
  }
  if (j.contains("two_stage")) {
    const json& ts = j["two_stage"];
    TwoStageLP t;
    t.c = vec(ts, "c");
    t.g = vec(ts, "g");
    t.W = matrix_from_json(ts.at("W"));
    t.T = matrix_from_json(ts.at("T"));
    if (!ts.contains("h_laws") || !ts["h_laws"].is_array()) bad("two_stage: missing h_laws");
    for (const auto& l : ts["h_laws"]) t.h_laws.push_back(distribution_from_json(l));
    p.recourse = std::move(t);
  } else if (j.contains("objective")) {
    p.objective = objective_from_json(j["objective"]);
  } else {
    bad("problem: needs objective or two_stage");
  }
  if (j.contains("domain")) p.domain = chain_domain_from_json(j["domain"]);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    bad(std::string("invalid problem: ") + e.what());
  }
  return p;
}

json to_json(const MultistageProblem& p) {
  json j;
  j["first"] = {{"A", to_json(p.first.A)}, {"b", p.first.b}, {"cost", p.first.cost}};
  json stages = json::array();
  for (const StageData& s : p.stages) {
    json laws = json::array();
    for (const auto& l : s.b_laws) laws.push_back(to_json(l));
    stages.push_back({{"t", s.t},
                      {"A", to_json(s.A)},
                      {"B", to_json(s.B)},
                      {"b_laws", std::move(laws)},
                      {"cost", s.cost}});
  }
  j["stages"] = std::move(stages);
  return j;
}

MultistageProblem multistage_from_json(const json& j) {
  MultistageProblem p;
  if (!j.contains("first")) bad("multistage: missing first stage");
  p.first.A = matrix_from_json(j["first"].at("A"));
  p.first.b = vec(j["first"], "b");
  p.first.cost = vec(j["first"], "cost");
  if (!j.contains("stages") || !j["stages"].is_array()) bad("multistage: missing stages");
  for (const auto& s : j["stages"]) {
    std::vector<ScalarDistribution> laws;
    if (!s.contains("b_laws") || !s["b_laws"].is_array()) bad("stage: missing b_laws");
    for (const auto& l : s["b_laws"]) laws.push_back(distribution_from_json(l));
    try {
      p.stages.push_back(StageData::make(static_cast<int>(num(s, "t")),
                                         matrix_from_json(s.at("A")), matrix_from_json(s.at("B")),
                                         std::move(laws), vec(s, "cost")));
    } catch (const std::invalid_argument& e) {
      bad(std::string("invalid stage: ") + e.what());
    }
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    bad(std::string("invalid multistage problem: ") + e.what());
  }
  return p;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.kind = kind_from_name(str(j, "experiment"));
  } catch (const std::invalid_argument& e) {
    bad(e.what());
  }
  cfg.name = j.contains("name") ? j["name"].get<std::string>() : kind_name(cfg.kind);
  if (j.contains("trials")) cfg.trials = j["trials"].get<std::int64_t>();
  if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  if (j.contains("domain_M")) cfg.domain_M = j["domain_M"].get<std::int64_t>();
  if (j.contains("solver_tol")) cfg.solver_tol = j["solver_tol"].get<double>();

  if (j.contains("grid")) {
    for (const auto& e : j["grid"].at("N")) cfg.grid.Ns.push_back(e.get<std::int64_t>());
    for (const auto& e : j["grid"].at("alpha")) cfg.grid.alphas.push_back(e.get<double>());
  }
  if (j.contains("cells")) {
    for (const auto& c : j["cells"])
      cfg.cells.push_back({static_cast<int>(num(c, "m")),
                           static_cast<std::int64_t>(num(c, "N")), num(c, "alpha")});
  }
  if (j.contains("Ns"))
    for (const auto& e : j["Ns"]) cfg.Ns.push_back(e.get<std::int64_t>());
  if (j.contains("alpha") && j["alpha"].is_number()) cfg.alpha = j["alpha"].get<double>();
  if (j.contains("j_active")) cfg.j_active = j["j_active"].get<int>();
  if (j.contains("branching"))
    for (const auto& e : j["branching"]) cfg.branching.push_back(e.get<int>());
  if (j.contains("stage_alphas"))
    for (const auto& e : j["stage_alphas"]) cfg.stage_alphas.push_back(e.get<double>());

  if (j.contains("catalog")) {
    std::string name = j["catalog"].get<std::string>();
    if (cfg.kind == ExperimentKind::multistage) {
      cfg.ms_problem = catalog_multistage(name);
    } else {
      cfg.problem = catalog_problem(name);
      if (cfg.kind == ExperimentKind::active_constraints)
        cfg.perturbed_problem = catalog_problem(name + "_perturbed");
    }
  } else if (j.contains("problem")) {
    if (cfg.kind == ExperimentKind::multistage)
      cfg.ms_problem =
          std::make_shared<const MultistageProblem>(multistage_from_json(j["problem"]));
    else
      cfg.problem = std::make_shared<const StochasticProblem>(problem_from_json(j["problem"]));
    if (cfg.kind == ExperimentKind::active_constraints && j.contains("perturbed_problem"))
      cfg.perturbed_problem =
          std::make_shared<const StochasticProblem>(problem_from_json(j["perturbed_problem"]));
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    bad(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace feaslab
