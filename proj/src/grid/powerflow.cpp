#include "loadgan/grid/powerflow.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace loadgan::grid {

namespace {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

constexpr double kSingularRcond = 1e-14;

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

struct BusRoles {
  std::vector<std::size_t> pvpq;
  std::vector<std::size_t> pq;
  std::vector<double> v_set;  // voltage set point for slack/PV buses, else NaN
  std::vector<Complex> s_sched;  // scheduled injection, p.u.
  std::vector<bool> active;   // false for isolated buses
};

BusRoles roles_of(const GridCase& grid) {
  const std::size_t n = grid.buses.size();
  BusRoles r;
  r.v_set.assign(n, std::nan(""));
  r.s_sched.assign(n, Complex{});
  r.active.assign(n, true);
  std::vector<bool> has_gen(n, false);
  for (const auto& g : grid.generators) {
    if (!g.in_service) continue;
    const std::size_t i = grid.bus_index(g.bus);
    r.s_sched[i] += Complex(g.pg, g.qg);
    if (!has_gen[i]) r.v_set[i] = g.vg;
    has_gen[i] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = grid.buses[i];
    r.s_sched[i] = (r.s_sched[i] - Complex(b.pd, b.qd)) / grid.base_mva;
    switch (b.type) {
      case BusType::Slack:
        if (!has_gen[i]) r.v_set[i] = b.vm;
        break;
      case BusType::PV:
        if (has_gen[i]) {
          r.pvpq.push_back(i);
          break;
        }
        [[fallthrough]];  // a PV bus without a running generator behaves as PQ
      case BusType::PQ:
        r.v_set[i] = std::nan("");
        r.pvpq.push_back(i);
        r.pq.push_back(i);
        break;
      case BusType::Isolated:
        r.active[i] = false;
        break;
    }
  }
  std::sort(r.pvpq.begin(), r.pvpq.end());
  return r;
}

}  // namespace

ComplexMatrix admittance_matrix(const GridCase& grid) {
  const auto n = static_cast<Eigen::Index>(grid.buses.size());
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  for (const auto& br : grid.branches) {
    if (!br.in_service) continue;
    const auto f = static_cast<Eigen::Index>(grid.bus_index(br.from));
    const auto t = static_cast<Eigen::Index>(grid.bus_index(br.to));
    const Complex ys = 1.0 / Complex(br.r, br.x);
    const Complex charging(0.0, br.b / 2.0);
    const double ratio = br.ratio == 0.0 ? 1.0 : br.ratio;
    const Complex tap = std::polar(ratio, radians(br.angle));
    y(f, f) += (ys + charging) / (ratio * ratio);
    y(t, t) += ys + charging;
    y(f, t) -= ys / std::conj(tap);
    y(t, f) -= ys / tap;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& b = grid.buses[static_cast<std::size_t>(i)];
    y(i, i) += Complex(b.gs, b.bs) / grid.base_mva;
  }
  return y;
}

PFSolution newton_pf(const GridCase& grid, const PFOptions& options) {
  grid.validate();
  const std::size_t n = grid.buses.size();
  const ComplexMatrix y = admittance_matrix(grid);
  const BusRoles roles = roles_of(grid);
  const std::size_t slack = grid.slack_index();

  std::vector<double> vm(n), va(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = grid.buses[i];
    vm[i] = options.use_case_start ? b.vm : 1.0;
    va[i] = options.use_case_start ? radians(b.va) : 0.0;
    if (!std::isnan(roles.v_set[i])) vm[i] = roles.v_set[i];
  }
  va[slack] = radians(grid.buses[slack].va);

  const std::size_t npvpq = roles.pvpq.size();
  const std::size_t npq = roles.pq.size();
  const auto dim = static_cast<Eigen::Index>(npvpq + npq);

  PFSolution best;
  best.max_mismatch = std::numeric_limits<double>::infinity();
  PFSolution sol;
  sol.vm = vm;
  sol.va = va;

  ComplexVector v(static_cast<Eigen::Index>(n));
  Eigen::VectorXd f(dim);
  for (std::size_t it = 0;; ++it) {
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = std::polar(vm[i], va[i]);
    const ComplexVector current = y * v;
    const ComplexVector s = v.cwiseProduct(current.conjugate());

    double worst = 0.0;
    for (std::size_t k = 0; k < npvpq; ++k) {
      const auto i = roles.pvpq[k];
      f(static_cast<Eigen::Index>(k)) = s(static_cast<Eigen::Index>(i)).real() - roles.s_sched[i].real();
    }
    for (std::size_t k = 0; k < npq; ++k) {
      const auto i = roles.pq[k];
      f(static_cast<Eigen::Index>(npvpq + k)) = s(static_cast<Eigen::Index>(i)).imag() - roles.s_sched[i].imag();
    }
    worst = dim > 0 ? f.cwiseAbs().maxCoeff() : 0.0;
    if (!std::isfinite(worst)) worst = std::numeric_limits<double>::infinity();

    sol.vm = vm;
    sol.va = va;
    sol.iterations = it;
    sol.max_mismatch = worst;
    sol.mismatch_history.push_back(worst);
    if (worst < best.max_mismatch) {
      best.vm = vm;
      best.va = va;
      best.iterations = it;
      best.max_mismatch = worst;
    }
    if (worst <= options.tolerance) {
      sol.converged = true;
      return sol;
    }
    if (it >= options.max_iterations || !std::isfinite(worst)) break;

    // dS/dVa = j diag(V) conj(diag(I) - Y diag(V))
    // dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
    const auto nn = static_cast<Eigen::Index>(n);
    ComplexVector vnorm(nn);
    for (Eigen::Index i = 0; i < nn; ++i) vnorm(i) = v(i) / std::abs(v(i));
    ComplexMatrix ds_dva = -(y * v.asDiagonal());
    ds_dva.diagonal() += current;
    ds_dva = (Complex(0.0, 1.0) * v).asDiagonal() * ds_dva.conjugate();
    ComplexMatrix ds_dvm = v.asDiagonal() * (y * vnorm.asDiagonal()).conjugate();
    ds_dvm.diagonal() += current.conjugate().cwiseProduct(vnorm);

    Eigen::MatrixXd jac(dim, dim);
    for (std::size_t r = 0; r < npvpq; ++r) {
      const auto i = static_cast<Eigen::Index>(roles.pvpq[r]);
      for (std::size_t c = 0; c < npvpq; ++c) {
        jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            ds_dva(i, static_cast<Eigen::Index>(roles.pvpq[c])).real();
      }
      for (std::size_t c = 0; c < npq; ++c) {
        jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(npvpq + c)) =
            ds_dvm(i, static_cast<Eigen::Index>(roles.pq[c])).real();
      }
    }
    for (std::size_t r = 0; r < npq; ++r) {
      const auto i = static_cast<Eigen::Index>(roles.pq[r]);
      for (std::size_t c = 0; c < npvpq; ++c) {
        jac(static_cast<Eigen::Index>(npvpq + r), static_cast<Eigen::Index>(c)) =
            ds_dva(i, static_cast<Eigen::Index>(roles.pvpq[c])).imag();
      }
      for (std::size_t c = 0; c < npq; ++c) {
        jac(static_cast<Eigen::Index>(npvpq + r), static_cast<Eigen::Index>(npvpq + c)) =
            ds_dvm(i, static_cast<Eigen::Index>(roles.pq[c])).imag();
      }
    }

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    if (!(lu.rcond() > kSingularRcond)) {
      fail(ErrorCode::SingularJacobian, "power-flow Jacobian is singular at iteration " + std::to_string(it));
    }
    const Eigen::VectorXd dx = lu.solve(-f);
    for (std::size_t k = 0; k < npvpq; ++k) va[roles.pvpq[k]] += dx(static_cast<Eigen::Index>(k));
    for (std::size_t k = 0; k < npq; ++k) vm[roles.pq[k]] += dx(static_cast<Eigen::Index>(npvpq + k));
  }

  best.converged = false;
  best.failure = ErrorCode::Diverged;
  best.mismatch_history = std::move(sol.mismatch_history);
  return best;
}

std::vector<std::complex<double>> bus_injections(const GridCase& grid, const PFSolution& solution) {
  const std::size_t n = grid.buses.size();
  const ComplexMatrix y = admittance_matrix(grid);
  ComplexVector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = std::polar(solution.vm[i], solution.va[i]);
  const ComplexVector s = v.cwiseProduct((y * v).conjugate());
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = s(static_cast<Eigen::Index>(i)) * grid.base_mva;
  return out;
}

std::vector<GeneratorOutput> generator_outputs(const GridCase& grid, const PFSolution& solution) {
  const auto injections = bus_injections(grid, solution);
  const std::size_t n = grid.buses.size();
  std::vector<std::size_t> running(n, 0);
  for (const auto& g : grid.generators) {
    if (g.in_service) ++running[grid.bus_index(g.bus)];
  }
  const std::size_t slack = grid.slack_index();
  std::vector<GeneratorOutput> out;
  for (const auto& g : grid.generators) {
    GeneratorOutput o{g.pg, g.qg};
    const std::size_t i = grid.bus_index(g.bus);
    const auto& b = grid.buses[i];
    if (!g.in_service) {
      o = {0.0, 0.0};
    } else {
      const auto share = static_cast<double>(running[i]);
      if (i == slack) o.pg = (injections[i].real() + b.pd) / share;
      if (b.type == BusType::Slack || b.type == BusType::PV) o.qg = (injections[i].imag() + b.qd) / share;
    }
    out.push_back(o);
  }
  return out;
}

}  // namespace loadgan::grid
