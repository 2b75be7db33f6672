#include "proxsgd/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace proxsgd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(const Vector& x, Eigen::Index dim, const char* what) {
  if (x.size() != dim) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(dim) + ")");
  }
}

void require_edge_fits(const EdgeDiff& e, const Vector& x) {
  const auto need = static_cast<Eigen::Index>((std::max(e.i, e.j) + 1) * e.block_dim);
  if (x.size() < need) {
    throw std::invalid_argument("edge_diff: vector too short for node blocks");
  }
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

ProxOperator ProxOperator::zero() { return ProxOperator(ZeroFunction{}); }

ProxOperator ProxOperator::l1(double lambda, Vector center) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("l1: lambda must be finite and nonnegative");
  }
  if (!center.allFinite()) throw std::invalid_argument("l1: center must be finite");
  return ProxOperator(L1Norm{lambda, std::move(center)});
}

ProxOperator ProxOperator::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) {
    throw std::invalid_argument("box: lo and hi differ in dimension");
  }
  for (Eigen::Index k = 0; k < lo.size(); ++k) {
    if (std::isnan(lo[k]) || std::isnan(hi[k]) || lo[k] > hi[k]) {
      throw std::invalid_argument("box: requires lo <= hi componentwise");
    }
  }
  return ProxOperator(BoxProjection{std::move(lo), std::move(hi)});
}

ProxOperator ProxOperator::ball(Vector center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("ball: radius must be positive and finite");
  }
  if (!center.allFinite()) {
    throw std::invalid_argument("ball: center must be finite");
  }
  return ProxOperator(BallProjection{std::move(center), radius});
}

ProxOperator ProxOperator::edge_diff(std::size_t i, std::size_t j, double weight,
                                     std::size_t block_dim, EdgeNorm norm) {
  if (i == j) throw std::invalid_argument("edge_diff: self-loop (i == j)");
  if (block_dim == 0) throw std::invalid_argument("edge_diff: block_dim must be positive");
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument("edge_diff: weight must be finite and nonnegative");
  }
  return ProxOperator(EdgeDiff{i, j, weight, block_dim, norm});
}

bool ProxOperator::is_indicator() const {
  return std::holds_alternative<BoxProjection>(kind_) ||
         std::holds_alternative<BallProjection>(kind_);
}

const char* ProxOperator::name() const {
  return std::visit(Overloaded{
                        [](const ZeroFunction&) { return "zero"; },
                        [](const L1Norm&) { return "l1"; },
                        [](const BoxProjection&) { return "box"; },
                        [](const BallProjection&) { return "ball"; },
                        [](const EdgeDiff&) { return "edge_diff"; },
                    },
                    kind_);
}

double ProxOperator::lipschitz(std::size_t dim) const {
  return std::visit(
      Overloaded{
          [](const ZeroFunction&) { return 0.0; },
          [dim](const L1Norm& op) { return op.lambda * std::sqrt(double(dim)); },
          [](const BoxProjection&) { return kInf; },
          [](const BallProjection&) { return kInf; },
          [](const EdgeDiff& e) {
            // |w||d||_p - w||d'||_p| <= w c_p ||d - d'|| and ||d - d'|| <= sqrt(2) ||x - x'||.
            const double cp = e.norm == EdgeNorm::L2 ? 1.0 : std::sqrt(double(e.block_dim));
            return std::sqrt(2.0) * cp * e.weight;
          },
      },
      kind_);
}

void prox_inplace(const ProxOperator& op, Vector& v, double step) {
  std::visit(
      Overloaded{
          [](const ZeroFunction&) {},
          [&](const L1Norm& l1) {
            const double t = l1.lambda * step;
            if (l1.center.size() == 0) {
              for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = soft_threshold(v[k], t);
              return;
            }
            require_dim(v, l1.center.size(), "l1");
            for (Eigen::Index k = 0; k < v.size(); ++k) {
              v[k] = l1.center[k] + soft_threshold(v[k] - l1.center[k], t);
            }
          },
          [&](const BoxProjection& box) {
            require_dim(v, box.lo.size(), "box");
            v = v.cwiseMax(box.lo).cwiseMin(box.hi);
          },
          [&](const BallProjection& ball) {
            require_dim(v, ball.center.size(), "ball");
            const double r = (v - ball.center).norm();
            if (r > ball.radius) v = ball.center + (ball.radius / r) * (v - ball.center);
          },
          [&](const EdgeDiff& e) {
            require_edge_fits(e, v);
            const auto d = static_cast<Eigen::Index>(e.block_dim);
            auto xi = v.segment(static_cast<Eigen::Index>(e.i) * d, d);
            auto xj = v.segment(static_cast<Eigen::Index>(e.j) * d, d);
            const double shrink = e.weight * step;
            if (e.norm == EdgeNorm::L2) {
              const Vector diff = xi - xj;
              const double r = diff.norm();
              if (r == 0.0) return;
              const double s = std::min(shrink, 0.5 * r);
              const Vector move = (s / r) * diff;
              xi -= move;
              xj += move;
            } else {
              for (Eigen::Index k = 0; k < d; ++k) {
                const double diff = xi[k] - xj[k];
                const double s = std::min(shrink, 0.5 * std::abs(diff));
                const double move = diff > 0 ? s : -s;
                xi[k] -= move;
                xj[k] += move;
              }
            }
          },
      },
      op.kind());
}

Vector prox(const ProxOperator& op, const Vector& v, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("prox: step must be positive and finite");
  }
  if (!v.allFinite()) throw std::invalid_argument("prox: input vector is not finite");
  Vector out = v;
  prox_inplace(op, out, step);
  return out;
}

double eval_g(const ProxOperator& op, const Vector& x) {
  return std::visit(
      Overloaded{
          [](const ZeroFunction&) { return 0.0; },
          [&](const L1Norm& l1) {
            if (l1.center.size() == 0) return l1.lambda * x.lpNorm<1>();
            require_dim(x, l1.center.size(), "l1");
            return l1.lambda * (x - l1.center).lpNorm<1>();
          },
          [&](const BoxProjection& box) {
            require_dim(x, box.lo.size(), "box");
            for (Eigen::Index k = 0; k < x.size(); ++k) {
              if (x[k] < box.lo[k] || x[k] > box.hi[k]) return kInf;
            }
            return 0.0;
          },
          [&](const BallProjection& ball) {
            require_dim(x, ball.center.size(), "ball");
            // Projections land on the sphere only up to rounding.
            return (x - ball.center).norm() <= ball.radius * (1.0 + 1e-12) ? 0.0 : kInf;
          },
          [&](const EdgeDiff& e) {
            require_edge_fits(e, x);
            const auto d = static_cast<Eigen::Index>(e.block_dim);
            const Vector diff = x.segment(static_cast<Eigen::Index>(e.i) * d, d) -
                                x.segment(static_cast<Eigen::Index>(e.j) * d, d);
            return e.weight * (e.norm == EdgeNorm::L2 ? diff.norm() : diff.lpNorm<1>());
          },
      },
      op.kind());
}

bool check_prox_optimality_at(const ProxOperator& op, const Vector& v, double step,
                              const Vector& candidate, std::span<const Vector> probes) {
  const double g_candidate = eval_g(op, candidate);
  for (const Vector& x : probes) {
    const double gx = eval_g(op, x);
    if (std::isinf(gx)) continue;
    const double lhs = (x - candidate).dot(v - candidate);
    const double rhs = step * (gx - g_candidate);
    if (!(lhs <= rhs + kProxOptimalityTolerance)) return false;
  }
  return true;
}

bool check_prox_optimality(const ProxOperator& op, const Vector& v, double step,
                           std::span<const Vector> probes) {
  return check_prox_optimality_at(op, v, step, prox(op, v, step), probes);
}

}  // namespace proxsgd
