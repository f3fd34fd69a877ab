#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace loadgan::grid {

enum class BusType { PQ = 1, PV = 2, Slack = 3, Isolated = 4 };

struct Bus {
  int id = 0;
  BusType type = BusType::PQ;
  double pd = 0.0;  // MW
  double qd = 0.0;  // MVAr
  double gs = 0.0;  // MW at V = 1 p.u.
  double bs = 0.0;  // MVAr at V = 1 p.u.
  int area = 1;
  double vm = 1.0;
  double va = 0.0;  // degrees
  double base_kv = 0.0;
  int zone = 1;
  double vmax = 1.1;
  double vmin = 0.9;

  friend bool operator==(const Bus&, const Bus&) = default;
};

struct Generator {
  int bus = 0;
  double pg = 0.0;  // MW
  double qg = 0.0;  // MVAr
  double qmax = 0.0;
  double qmin = 0.0;
  double vg = 1.0;
  double mbase = 100.0;
  bool in_service = true;
  double pmax = 0.0;
  double pmin = 0.0;

  friend bool operator==(const Generator&, const Generator&) = default;
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b = 0.0;  // total line charging, p.u.
  double rate_a = 0.0;
  double rate_b = 0.0;
  double rate_c = 0.0;
  double ratio = 0.0;  // 0 means no transformer
  double angle = 0.0;  // degrees
  bool in_service = true;
  double angmin = -360.0;
  double angmax = 360.0;

  friend bool operator==(const Branch&, const Branch&) = default;
};

struct GridCase {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Branch> branches;
  /// Parser notes about ignored input; not part of the model.
  std::vector<std::string> warnings;

  /// Position of a bus id in `buses`; throws TopologyError if absent.
  std::size_t bus_index(int id) const;
  std::size_t slack_index() const;
  /// Exactly one slack bus, unique bus ids, existing endpoints and r^2 + x^2 > 0
  /// on in-service branches.
  void validate() const;

  friend bool operator==(const GridCase& a, const GridCase& b) {
    return a.base_mva == b.base_mva && a.buses == b.buses && a.generators == b.generators && a.branches == b.branches;
  }
};

/// Supported subset: `mpc.baseMVA`, `mpc.bus`, `mpc.gen` and `mpc.branch`
/// matrices; `%` comments; other `mpc.*` entries are skipped with a warning.
GridCase parse_matpower_case(std::string_view text);
GridCase load_matpower_case(const std::string& path);

/// MATPOWER text that parses back to an identical case.
std::string serialize_matpower_case(const GridCase& grid);

}  // namespace loadgan::grid
