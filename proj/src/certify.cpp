#include <cmath>
#include <limits>
#include <variant>

#include "proxsgd/solvers.hpp"

namespace proxsgd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One ADMM block: phi(D x) with D given as dense rows and phi encoded by the
// owning component.
struct Split {
  const ProxOperator* op;
  Eigen::Index row;   // first row of the block in the stacked D
  Eigen::Index rows;
};

// prox of step * w ||.||_p on a block difference.
Vector shrink(const Vector& v, double t, EdgeNorm norm) {
  if (norm == EdgeNorm::L1) {
    return v.array().sign() * (v.array().abs() - t).max(0.0);
  }
  const double nv = v.norm();
  if (nv <= t) return Vector::Zero(v.size());
  return v * (1.0 - t / nv);
}

struct Quadratic {
  Matrix H;  // Hessian of f
  Vector c;  // f(x) = 1/2 x'Hx - c'x + const
};

Quadratic quadratic_form(const SmoothOracle& oracle) {
  const std::size_t n = oracle.dim();
  Quadratic q{Matrix::Zero(n, n), Vector::Zero(n)};
  if (const auto* ls = std::get_if<LeastSquaresData>(&oracle.kind())) {
    const double N = double(ls->A.rows());
    q.H = ls->A.transpose() * ls->A / N;
    q.c = ls->A.transpose() * ls->b / N;
    return q;
  }
  if (const auto* sep = std::get_if<SeparableData>(&oracle.kind())) {
    const auto d = static_cast<Eigen::Index>(sep->block_dim);
    for (std::size_t k = 0; k < sep->A.size(); ++k) {
      const auto off = static_cast<Eigen::Index>(k) * d;
      const double Nk = double(sep->A[k].rows());
      q.H.block(off, off, d, d) = sep->A[k].transpose() * sep->A[k] / Nk;
      q.c.segment(off, d) = sep->A[k].transpose() * sep->b[k] / Nk;
    }
    return q;
  }
  throw std::invalid_argument("admm: f must be least squares or separable least squares");
}

}  // namespace

ReferenceSolution run_fista(const ProblemInstance& problem, const Vector& x0, double tol,
                            std::size_t max_iter) {
  const ProxOperator& g = problem.monolithic_prox();
  const double Lf = full_smoothness_constant(problem.oracle);
  if (!(Lf > 0.0)) throw std::invalid_argument("fista: f has zero curvature");
  const double step = 1.0 / Lf;

  auto residual_at = [&](const Vector& p) {
    return Lf * (p - prox(g, p - step * problem.oracle.full_grad(p), step)).norm();
  };

  Vector x = prox(g, x0, step);
  double hx = problem.objective(x);
  Vector y = x;
  double theta = 1.0;
  bool momentum = false;
  Vector best = x;
  double best_value = hx;
  double best_residual = kInf;

  for (std::size_t k = 1; k <= max_iter; ++k) {
    Vector x_next = y - step * problem.oracle.full_grad(y);
    prox_inplace(g, x_next, step);
    const double r_y = Lf * (x_next - y).norm();
    const double h_next = problem.objective(x_next);

    if (r_y <= tol) {
      const double r = residual_at(x_next);
      if (r <= tol) return {x_next, h_next, r, k};
    }
    if (h_next < best_value) {
      best = x_next;
      best_value = h_next;
      best_residual = r_y;
    }

    if (h_next > hx && momentum) {
      // Function-value restart: drop momentum and retry from x. Without
      // momentum the step is a plain prox-gradient step, and any increase is
      // rounding, so it is accepted.
      theta = 1.0;
      y = x;
      momentum = false;
      continue;
    }
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    y = x_next + ((theta - 1.0) / theta_next) * (x_next - x);
    momentum = true;
    theta = theta_next;
    x = std::move(x_next);
    hx = h_next;
  }
  throw ConvergenceError("fista: iteration cap reached", best, best_value, best_residual, max_iter);
}

ReferenceSolution run_admm(const ProblemInstance& problem, const Vector& x0, double tol,
                           std::size_t max_iter) {
  const Quadratic q = quadratic_form(problem.oracle);
  const auto n = static_cast<Eigen::Index>(problem.dim());

  std::vector<Split> splits;
  Eigen::Index total_rows = 0;
  for (const auto& op : problem.regularizer.components()) {
    if (op.is_indicator()) {
      throw std::invalid_argument(std::string("admm: indicator component '") + op.name() +
                                  "' is not supported; use a monolithic prox");
    }
    if (std::holds_alternative<ZeroFunction>(op.kind())) continue;
    const Eigen::Index rows =
        std::holds_alternative<EdgeDiff>(op.kind())
            ? static_cast<Eigen::Index>(std::get<EdgeDiff>(op.kind()).block_dim)
            : n;
    splits.push_back({&op, total_rows, rows});
    total_rows += rows;
  }

  Matrix D = Matrix::Zero(total_rows, n);
  for (const auto& s : splits) {
    if (const auto* e = std::get_if<EdgeDiff>(&s.op->kind())) {
      const auto d = s.rows;
      D.block(s.row, static_cast<Eigen::Index>(e->i) * d, d, d).setIdentity();
      D.block(s.row, static_cast<Eigen::Index>(e->j) * d, d, d) -= Matrix::Identity(d, d);
    } else {
      D.block(s.row, 0, n, n).setIdentity();
    }
  }
  const Matrix DtD = D.transpose() * D;

  double rho = std::max(1.0, q.H.diagonal().maxCoeff());
  Eigen::LDLT<Matrix> solver(q.H + rho * DtD);

  Vector x = x0;
  Vector z = D * x;
  Vector u = Vector::Zero(total_rows);
  Vector best = x;
  double best_residual = kInf;

  for (std::size_t k = 1; k <= max_iter; ++k) {
    x = solver.solve(q.c + rho * D.transpose() * (z - u));
    const Vector Dx = D * x;
    const Vector z_old = z;
    const Vector w = Dx + u;
    for (const auto& s : splits) {
      const Vector seg = w.segment(s.row, s.rows);
      if (const auto* e = std::get_if<EdgeDiff>(&s.op->kind())) {
        z.segment(s.row, s.rows) = shrink(seg, e->weight / rho, e->norm);
      } else {
        z.segment(s.row, s.rows) = prox(*s.op, seg, 1.0 / rho);
      }
    }
    u += Dx - z;

    const double r_primal = (Dx - z).norm();
    const double r_dual = rho * (D.transpose() * (z - z_old)).norm();
    const double scale_primal = std::max({1.0, Dx.norm(), z.norm()});
    const double scale_dual = std::max(1.0, rho * (D.transpose() * u).norm());
    const double residual = std::max(r_primal / scale_primal, r_dual / scale_dual);
    if (residual < best_residual) {
      best_residual = residual;
      best = x;
    }
    if (residual <= tol) return {x, problem.objective(x), residual, k};

    // Residual balancing; u is scaled, so it rescales with rho.
    if (k % 10 == 0) {
      double factor = 1.0;
      if (r_primal > 10.0 * r_dual) factor = 2.0;
      else if (r_dual > 10.0 * r_primal) factor = 0.5;
      if (factor != 1.0) {
        rho *= factor;
        u /= factor;
        solver.compute(q.H + rho * DtD);
      }
    }
  }
  throw ConvergenceError("admm: iteration cap reached", best, problem.objective(best), best_residual,
                         max_iter);
}

SolutionCertificate certify_solution(const ProblemInstance& problem, const Vector& x0, double tol,
                                     std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("certify: tolerance must be positive");
  const bool monolithic = problem.has_monolithic_prox();
  const ReferenceSolution ref =
      monolithic ? run_fista(problem, x0, tol, max_iter) : run_admm(problem, x0, tol, max_iter);

  SolutionCertificate cert;
  cert.x_star = ref.x;
  cert.h_star = ref.value;
  cert.sigma_star_sq = second_moment(problem.oracle, ref.x);
  cert.d_star_sq = (ref.x - problem.x0).squaredNorm();
  cert.solver_tolerance = tol;
  cert.solver_iterations = ref.iterations;
  cert.solver = monolithic ? "fista" : "admm";
  return cert;
}

}  // namespace proxsgd
