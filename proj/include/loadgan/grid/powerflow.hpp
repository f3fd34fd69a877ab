#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "loadgan/error.hpp"
#include "loadgan/grid/case.hpp"

namespace loadgan::grid {

using ComplexMatrix = Eigen::MatrixXcd;

/// Bus admittance matrix in p.u., buses in case order. Out-of-service
/// branches are skipped.
ComplexMatrix admittance_matrix(const GridCase& grid);

struct PFOptions {
  double tolerance = 1e-8;  // p.u.
  std::size_t max_iterations = 20;
  /// Start from the case's Vm/Va instead of a flat start.
  bool use_case_start = false;
};

struct PFSolution {
  std::vector<double> vm;  // p.u.
  std::vector<double> va;  // radians
  bool converged = false;
  std::size_t iterations = 0;
  double max_mismatch = 0.0;
  /// Max |mismatch| before each update and at the final iterate.
  std::vector<double> mismatch_history;
  /// Set when the solve did not converge (Diverged).
  std::optional<ErrorCode> failure;
};

/// Full Newton-Raphson on the polar power-mismatch equations. A
/// non-converging solve returns its best iterate with `converged = false`;
/// a singular Jacobian throws SingularJacobian.
PFSolution newton_pf(const GridCase& grid, const PFOptions& options = {});

/// Injections S = V conj(Y V) in MW / MVAr per bus.
std::vector<std::complex<double>> bus_injections(const GridCase& grid, const PFSolution& solution);

struct GeneratorOutput {
  double pg = 0.0;  // MW
  double qg = 0.0;  // MVAr
};

/// Generator outputs implied by a solution: the slack bus supplies the P
/// balance, slack and PV buses the Q balance, shared equally among the
/// in-service generators at a bus. Other generators keep their set points.
std::vector<GeneratorOutput> generator_outputs(const GridCase& grid, const PFSolution& solution);

}  // namespace loadgan::grid
