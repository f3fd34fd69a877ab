#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "loadgan/grid/case.hpp"
#include "loadgan/grid/powerflow.hpp"

namespace loadgan::grid {

/// Bus loads for one hour, in case bus order (MW / MVAr).
struct HourlyLoads {
  std::vector<double> pd;
  std::vector<double> qd;
};

/// Bus id -> profile (any positive units; only the shape matters).
using LoadAssignment = std::map<int, std::vector<double>>;

/// Buses with nonzero base-case active load.
std::vector<int> loaded_buses(const GridCase& grid);

/// Pd(t) = Pd_base * p(t) / max(p) and Qd scaled by the same factor. Every
/// PQ bus with nonzero Pd needs a profile; loaded PV or slack buses without
/// one keep their base load. All profiles must share one length.
std::vector<HourlyLoads> map_profiles(const GridCase& grid, const LoadAssignment& assignment);

/// The base case with one hour's loads applied. Non-slack generator Pg is
/// scaled by total load relative to the base case; the slack absorbs the rest.
GridCase case_for_hour(const GridCase& base, const HourlyLoads& loads);

struct Violation {
  std::size_t hour = 0;
  std::string element;   // "bus" or "gen"
  int id = 0;            // bus id (generators are identified by their bus)
  std::string quantity;  // "Vm", "Qg", "Pg"
  double value = 0.0;
  double limit = 0.0;
};

struct LimitOptions {
  bool check_voltage = true;
  bool check_reactive = true;
  bool check_slack_active = true;
  /// Slack allowed on every limit before a violation is recorded.
  double tolerance = 1e-6;
};

/// Vm in [Vmin, Vmax] per bus; Qg in [Qmin, Qmax] for slack and PV
/// generators; slack Pg in [Pmin, Pmax].
std::vector<Violation> check_limits(const GridCase& grid, const PFSolution& solution, std::size_t hour,
                                    const LimitOptions& limits = {});

/// Generator voltage set points are re-chosen per hour, standing in for the
/// voltage decisions of an optimal power flow: starting from the case set
/// points clamped into their bus voltage band, a compass search over the
/// set points minimizes the total limit excess of the converged solution.
struct VoltageSearchOptions {
  bool enabled = true;
  double initial_step = 0.02;  // p.u.
  double min_step = 1e-4;
  std::size_t max_evaluations = 4000;
};

/// Total limit excess of a solution in p.u. (0 iff check_limits finds nothing
/// beyond the tolerance).
double limit_excess(const GridCase& grid, const PFSolution& solution, const LimitOptions& limits = {});

struct ScheduledSolution {
  GridCase grid;  // with the chosen generator set points
  PFSolution solution;
  std::size_t evaluations = 0;
};

/// Runs the power flow for `grid`, searching voltage set points when enabled
/// and the case set points leave violations.
ScheduledSolution solve_with_voltage_search(const GridCase& grid, const PFOptions& pf, const LimitOptions& limits,
                                            const VoltageSearchOptions& search);

struct HourResult {
  std::size_t hour = 0;
  bool converged = false;
  std::size_t iterations = 0;
  double max_mismatch = 0.0;
  std::size_t violations = 0;
  /// Populated when the solve raised an error instead of returning.
  std::string error;
  /// Generator voltage set points used, in case generator order.
  std::vector<double> vg;

  bool feasible() const { return converged && violations == 0 && error.empty(); }
};

struct FeasibilityReport {
  std::vector<HourResult> hours;
  std::vector<Violation> violations;

  std::size_t feasible_hours() const;
};

FeasibilityReport feasibility_report(const GridCase& base, std::span<const HourlyLoads> hourly,
                                     const PFOptions& pf = {}, const LimitOptions& limits = {},
                                     const VoltageSearchOptions& search = {});

/// `hour,converged,iterations,max_mismatch,n_violations`
std::string feasibility_csv(const FeasibilityReport& report);
/// `hour,element,id,quantity,value,limit`
std::string violations_csv(const FeasibilityReport& report);
/// `hour,gen_bus,vg`
std::string setpoints_csv(const GridCase& base, const FeasibilityReport& report);

}  // namespace loadgan::grid
