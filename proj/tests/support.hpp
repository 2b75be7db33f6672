#pragma once

#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <vector>

#include "proxsgd/prox.hpp"
#include "proxsgd/rng.hpp"

namespace testing {

using proxsgd::Vector;

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

inline Vector random_vector(std::size_t n, proxsgd::Rng& rng, double scale = 1.0) {
  proxsgd::NormalSampler normal;
  Vector v(n);
  for (auto& x : v) x = scale * normal(rng);
  return v;
}

// Grid-zoom minimizer of a convex function on R^k: evaluates a (points)^k grid
// around the incumbent, recentres on the best node and shrinks.
inline Vector grid_zoom_minimize(const std::function<double(const Vector&)>& fn, Vector center,
                                 double half_width, int points = 11, int levels = 40) {
  const auto k = center.size();
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int level = 0; level < levels; ++level) {
    const double spacing = 2.0 * half_width / (points - 1);
    Vector best = center;
    double best_value = fn(center);
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      Vector p(k);
      for (Eigen::Index d = 0; d < k; ++d) p[d] = center[d] - half_width + spacing * idx[std::size_t(d)];
      const double value = fn(p);
      if (value < best_value) {
        best_value = value;
        best = p;
      }
      Eigen::Index d = 0;
      while (d < k && ++idx[std::size_t(d)] == points) idx[std::size_t(d++)] = 0;
      if (d == k) break;
    }
    center = best;
    half_width = 2.0 * spacing;
  }
  return center;
}

// prox of w ||x_i - x_j||_p by brute force over the two node blocks only.
inline Vector brute_force_edge_prox(const Vector& v, std::size_t i, std::size_t j, double w,
                                    std::size_t d, proxsgd::EdgeNorm norm, double step) {
  const auto di = Eigen::Index(d);
  const Vector vi = v.segment(Eigen::Index(i) * di, di);
  const Vector vj = v.segment(Eigen::Index(j) * di, di);
  auto objective = [&](const Vector& z) {
    const Vector zi = z.head(di);
    const Vector zj = z.tail(di);
    const Vector diff = zi - zj;
    const double pen = norm == proxsgd::EdgeNorm::L2 ? diff.norm() : diff.lpNorm<1>();
    return w * pen + ((zi - vi).squaredNorm() + (zj - vj).squaredNorm()) / (2.0 * step);
  };
  Vector start(2 * di);
  start << vi, vj;
  const double radius = 2.0 * (w * step * std::sqrt(double(d)) + (vi - vj).norm()) + 1.0;
  const Vector z = grid_zoom_minimize(objective, start, radius);
  Vector out = v;
  out.segment(Eigen::Index(i) * di, di) = z.head(di);
  out.segment(Eigen::Index(j) * di, di) = z.tail(di);
  return out;
}

}  // namespace testing
