#pragma once
// Exact mixed-integer formulation of the embedding problem and its LP-format
// serialization. The model builder indexes components and arcs globally
// (services sorted by template id), so variable names stay unique across
// services:
//   x_j_v, y_a_v_v', z_a_v_v'_l, Lam_j_v_k, LamP_j_v_k, rho_j_v, mu_j_v,
//   om_cpu_v, om_mem_v, om_l, psi_cpu, psi_mem, psi_dr, zeta_a_v_v'_l,
//   del_j_v
// Only affine resource functions are supported; piecewise-linear functions
// are rejected with a locator.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tembed/model.hpp"

namespace tembed {

enum class VarKind { kBinary, kContinuous };  // continuous vars are >= 0

struct MilpVariable {
  std::string name;
  VarKind kind{VarKind::kContinuous};
  std::optional<double> upper;  // explicit upper bound, if any
};

struct LinearTerm {
  double coef{0};
  int var{-1};  // index into MilpModel::variables
};

enum class Relation { kLe, kEq, kGe };

struct MilpConstraint {
  std::string name;
  std::vector<LinearTerm> terms;
  Relation rel{Relation::kEq};
  double rhs{0};
};

// Big-M constants, sized from the worst-case rate amplification of the
// requested services so that no feasible (cycle-free) value ever reaches
// them.
struct BigM {
  double rate_M{1};  // bounds every rate variable (Lam, LamP, y, z)
  double cpu_M{1};   // bounds total CPU over-subscription of any node
  double mem_M{1};   // bounds total memory over-subscription of any node
  double dr_M{1};    // bounds total data-rate over-subscription of any link
};

struct MilpModel {
  std::vector<MilpVariable> variables;
  std::vector<MilpConstraint> constraints;
  std::vector<LinearTerm> objective;  // sense: minimize
  std::map<std::string, int> index;   // variable name -> position

  // Build inputs, kept so a solution file can be turned back into a
  // configuration and re-scored without re-supplying them.
  SubstrateNetwork substrate;
  std::vector<ServiceRequest> services;  // sorted by template id
  std::optional<SystemConfiguration> previous;
  Weights weights;
  BigM big_m;

  // -1 when the name is unknown.
  int var(const std::string& name) const;
};

BigM compute_big_m(const SubstrateNetwork& net,
                   const std::vector<ServiceRequest>& services);

// Builds the full model: placement/rate consistency, data-rate propagation,
// flow conservation, resource accounting, overload indicators, and the
// weighted objective. `prev` contributes the x* constants and enables the
// churn variables; services absent from `prev` get no churn terms.
MilpModel build_model(const SubstrateNetwork& net,
                      const std::vector<ServiceRequest>& services,
                      const SystemConfiguration* prev, const Weights& weights);

// CPLEX-LP-format text: Minimize / Subject To / Bounds / Binary / End.
// Deterministic; numbers use 12 significant digits; Bounds and Binary are
// omitted when empty.
std::string emit_lp(const MilpModel& model);

// Parses a solution file (`name value` lines, `#` comments, optional
// `objective <value>` line) and reconstructs the configuration: x gives the
// instances, y the edge rates, z the per-link routing. Rates and loads are
// re-propagated from the resource functions. Throws std::invalid_argument on
// unknown variables, flow-conservation mismatches beyond 1e-6, or a claimed
// objective that differs from the re-scored one by more than 1e-6 relative.
SystemConfiguration import_solution(const MilpModel& model,
                                    const std::string& solution_text);

// Translates a configuration over the same substrate/services into a full
// variable assignment (omitted variables are zero). Used to cross-check the
// constraint system against the validators.
std::map<std::string, double> assignment_from_configuration(
    const MilpModel& model, const SystemConfiguration& cfg);

struct ConstraintCheck {
  std::string name;
  double lhs{0};
  double rhs{0};
  Relation rel{Relation::kEq};
  bool ok{true};
};

// Evaluates every constraint under the assignment (tolerance kTol, scaled).
std::vector<ConstraintCheck> check_constraints(
    const MilpModel& model, const std::map<std::string, double>& assignment);

double objective_value(const MilpModel& model,
                       const std::map<std::string, double>& assignment);

}  // namespace tembed
