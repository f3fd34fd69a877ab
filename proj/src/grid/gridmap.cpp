#include "loadgan/grid/gridmap.hpp"

#include <algorithm>
#include <cmath>

#include "loadgan/corpus_io.hpp"
#include "loadgan/error.hpp"

namespace loadgan::grid {

std::vector<int> loaded_buses(const GridCase& grid) {
  std::vector<int> ids;
  for (const auto& b : grid.buses) {
    if (b.pd != 0.0) ids.push_back(b.id);
  }
  return ids;
}

std::vector<HourlyLoads> map_profiles(const GridCase& grid, const LoadAssignment& assignment) {
  std::size_t hours = 0;
  for (const auto& [id, profile] : assignment) {
    grid.bus_index(id);
    if (profile.empty()) fail(ErrorCode::DegenerateProfile, "empty profile for bus " + std::to_string(id));
    if (hours != 0 && profile.size() != hours) fail(ErrorCode::ShapeMismatch, "profiles differ in length");
    hours = profile.size();
  }
  for (const auto& b : grid.buses) {
    if (b.type == BusType::PQ && b.pd != 0.0 && !assignment.count(b.id)) {
      fail(ErrorCode::UnassignedLoad, "bus " + std::to_string(b.id) + " has load but no profile");
    }
  }
  if (hours == 0) fail(ErrorCode::UnassignedLoad, "no profiles assigned");

  std::vector<HourlyLoads> out(hours);
  for (auto& h : out) {
    for (const auto& b : grid.buses) {
      h.pd.push_back(b.pd);
      h.qd.push_back(b.qd);
    }
  }
  for (const auto& [id, profile] : assignment) {
    const std::size_t i = grid.bus_index(id);
    const double peak = *std::max_element(profile.begin(), profile.end());
    if (!(peak > 0.0) || !std::isfinite(peak)) {
      fail(ErrorCode::DegenerateProfile, "profile for bus " + std::to_string(id) + " has no positive peak");
    }
    for (std::size_t t = 0; t < hours; ++t) {
      if (!std::isfinite(profile[t])) fail(ErrorCode::DegenerateProfile, "non-finite profile value");
      const double factor = profile[t] / peak;
      out[t].pd[i] = grid.buses[i].pd * factor;
      out[t].qd[i] = grid.buses[i].qd * factor;
    }
  }
  return out;
}

GridCase case_for_hour(const GridCase& base, const HourlyLoads& loads) {
  if (loads.pd.size() != base.buses.size() || loads.qd.size() != base.buses.size()) {
    fail(ErrorCode::ShapeMismatch, "hourly loads do not match the bus count");
  }
  GridCase c = base;
  double base_total = 0.0, total = 0.0;
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    base_total += base.buses[i].pd;
    total += loads.pd[i];
    c.buses[i].pd = loads.pd[i];
    c.buses[i].qd = loads.qd[i];
  }
  const double ratio = base_total != 0.0 ? total / base_total : 1.0;
  const std::size_t slack = base.slack_index();
  for (auto& g : c.generators) {
    if (base.bus_index(g.bus) != slack) g.pg *= ratio;
  }
  c.warnings.clear();
  return c;
}

std::vector<Violation> check_limits(const GridCase& grid, const PFSolution& solution, std::size_t hour,
                                    const LimitOptions& limits) {
  std::vector<Violation> out;
  if (solution.vm.size() != grid.buses.size()) fail(ErrorCode::ShapeMismatch, "solution does not match the case");
  if (limits.check_voltage) {
    for (std::size_t i = 0; i < grid.buses.size(); ++i) {
      const auto& b = grid.buses[i];
      if (b.type == BusType::Isolated) continue;
      if (solution.vm[i] > b.vmax + limits.tolerance) out.push_back({hour, "bus", b.id, "Vm", solution.vm[i], b.vmax});
      if (solution.vm[i] < b.vmin - limits.tolerance) out.push_back({hour, "bus", b.id, "Vm", solution.vm[i], b.vmin});
    }
  }
  const auto outputs = generator_outputs(grid, solution);
  const std::size_t slack = grid.slack_index();
  for (std::size_t k = 0; k < grid.generators.size(); ++k) {
    const auto& g = grid.generators[k];
    if (!g.in_service) continue;
    const std::size_t i = grid.bus_index(g.bus);
    const auto type = grid.buses[i].type;
    if (limits.check_reactive && (type == BusType::Slack || type == BusType::PV)) {
      if (outputs[k].qg > g.qmax + limits.tolerance) out.push_back({hour, "gen", g.bus, "Qg", outputs[k].qg, g.qmax});
      if (outputs[k].qg < g.qmin - limits.tolerance) out.push_back({hour, "gen", g.bus, "Qg", outputs[k].qg, g.qmin});
    }
    if (limits.check_slack_active && i == slack) {
      if (outputs[k].pg > g.pmax + limits.tolerance) out.push_back({hour, "gen", g.bus, "Pg", outputs[k].pg, g.pmax});
      if (outputs[k].pg < g.pmin - limits.tolerance) out.push_back({hour, "gen", g.bus, "Pg", outputs[k].pg, g.pmin});
    }
  }
  return out;
}

std::size_t FeasibilityReport::feasible_hours() const {
  return static_cast<std::size_t>(std::count_if(hours.begin(), hours.end(), [](const HourResult& h) { return h.feasible(); }));
}

double limit_excess(const GridCase& grid, const PFSolution& solution, const LimitOptions& limits) {
  double total = 0.0;
  for (const auto& v : check_limits(grid, solution, 0, limits)) {
    const double gap = std::abs(v.value - v.limit);
    total += v.quantity == "Vm" ? gap : gap / grid.base_mva;
  }
  return total;
}

ScheduledSolution solve_with_voltage_search(const GridCase& grid, const PFOptions& pf, const LimitOptions& limits,
                                            const VoltageSearchOptions& search) {
  ScheduledSolution best{grid, newton_pf(grid, pf), 1};
  if (!search.enabled) return best;

  // One decision variable per generator bus, bounded by that bus's band.
  std::vector<int> buses;
  for (const auto& g : grid.generators) {
    if (g.in_service && std::find(buses.begin(), buses.end(), g.bus) == buses.end()) buses.push_back(g.bus);
  }
  std::vector<double> lo, hi, x;
  for (int id : buses) {
    const auto& b = grid.buses[grid.bus_index(id)];
    lo.push_back(b.vmin);
    hi.push_back(b.vmax);
    double vg = b.vm;
    for (const auto& g : grid.generators) {
      if (g.in_service && g.bus == id) {
        vg = g.vg;
        break;
      }
    }
    x.push_back(std::clamp(vg, b.vmin, b.vmax));
  }

  constexpr double kFailed = 1e6;
  std::size_t evaluations = best.evaluations;
  auto evaluate = [&](const std::vector<double>& point, GridCase& c, PFSolution& sol) {
    c = grid;
    for (auto& g : c.generators) {
      const auto it = std::find(buses.begin(), buses.end(), g.bus);
      if (it != buses.end()) g.vg = point[static_cast<std::size_t>(it - buses.begin())];
    }
    ++evaluations;
    try {
      sol = newton_pf(c, pf);
    } catch (const Error&) {
      return kFailed;
    }
    return sol.converged ? limit_excess(c, sol, limits) : kFailed + sol.max_mismatch;
  };

  double objective = best.solution.converged ? limit_excess(grid, best.solution, limits) : kFailed;
  if (objective == 0.0) return best;
  {
    GridCase c;
    PFSolution sol;
    objective = evaluate(x, c, sol);
    best = {std::move(c), std::move(sol), evaluations};
  }

  double step = search.initial_step;
  while (objective > 0.0 && step >= search.min_step && evaluations < search.max_evaluations) {
    bool improved = false;
    for (std::size_t k = 0; k < x.size() && !improved; ++k) {
      for (double dir : {1.0, -1.0}) {
        std::vector<double> trial = x;
        trial[k] = std::clamp(x[k] + dir * step, lo[k], hi[k]);
        if (trial[k] == x[k]) continue;
        GridCase c;
        PFSolution sol;
        const double value = evaluate(trial, c, sol);
        if (value < objective) {
          objective = value;
          x = std::move(trial);
          best.grid = std::move(c);
          best.solution = std::move(sol);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step /= 2.0;
  }
  best.evaluations = evaluations;
  return best;
}

FeasibilityReport feasibility_report(const GridCase& base, std::span<const HourlyLoads> hourly, const PFOptions& pf,
                                     const LimitOptions& limits, const VoltageSearchOptions& search) {
  FeasibilityReport report;
  for (std::size_t t = 0; t < hourly.size(); ++t) {
    HourResult h;
    h.hour = t;
    try {
      const auto scheduled = solve_with_voltage_search(case_for_hour(base, hourly[t]), pf, limits, search);
      const PFSolution& sol = scheduled.solution;
      h.converged = sol.converged;
      h.iterations = sol.iterations;
      h.max_mismatch = sol.max_mismatch;
      for (const auto& g : scheduled.grid.generators) h.vg.push_back(g.vg);
      if (sol.converged) {
        auto v = check_limits(scheduled.grid, sol, t, limits);
        h.violations = v.size();
        report.violations.insert(report.violations.end(), v.begin(), v.end());
      }
    } catch (const Error& e) {
      h.converged = false;
      h.error = e.what();
    }
    report.hours.push_back(h);
  }
  return report;
}

std::string setpoints_csv(const GridCase& base, const FeasibilityReport& report) {
  std::string out = "hour,gen_bus,vg\n";
  for (const auto& h : report.hours) {
    for (std::size_t k = 0; k < h.vg.size() && k < base.generators.size(); ++k) {
      out += std::to_string(h.hour) + ',' + std::to_string(base.generators[k].bus) + ',' +
             corpus::format_double(h.vg[k]) + '\n';
    }
  }
  return out;
}

std::string feasibility_csv(const FeasibilityReport& report) {
  std::string out = "hour,converged,iterations,max_mismatch,n_violations\n";
  for (const auto& h : report.hours) {
    out += std::to_string(h.hour) + ',' + (h.converged ? "1" : "0") + ',' + std::to_string(h.iterations) + ',' +
           corpus::format_double(h.max_mismatch) + ',' + std::to_string(h.violations) + '\n';
  }
  return out;
}

std::string violations_csv(const FeasibilityReport& report) {
  std::string out = "hour,element,id,quantity,value,limit\n";
  for (const auto& v : report.violations) {
    out += std::to_string(v.hour) + ',' + v.element + ',' + std::to_string(v.id) + ',' + v.quantity + ',' +
           corpus::format_double(v.value) + ',' + corpus::format_double(v.limit) + '\n';
  }
  return out;
}

}  // namespace loadgan::grid
