#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "proxsgd/prox.hpp"
#include "support.hpp"

using namespace proxsgd;
using Catch::Approx;
using testing::vec;

namespace {

std::vector<ProxOperator> all_kinds() {
  const double inf = std::numeric_limits<double>::infinity();
  return {ProxOperator::zero(),
          ProxOperator::l1(0.4),
          ProxOperator::l1(0.5, vec({1.0, -1.0, 0.0, 2.0})),
          ProxOperator::box(vec({-1, -inf, 0, -0.5}), vec({1, 0.2, inf, 0.5})),
          ProxOperator::ball(vec({0.3, -0.2, 0.0, 1.0}), 0.8),
          ProxOperator::edge_diff(0, 1, 0.6, 2, EdgeNorm::L2),
          ProxOperator::edge_diff(1, 0, 0.6, 2, EdgeNorm::L1)};
}

}  // namespace

TEST_CASE("zero prox is the identity", "[prox]") {
  const Vector v = vec({1.5, -2.0, 0.0});
  REQUIRE(prox(ProxOperator::zero(), v, 3.0) == v);
}

TEST_CASE("l1 prox soft-thresholds each coordinate", "[prox]") {
  // lambda * step = 0.5
  const Vector p = prox(ProxOperator::l1(0.25), vec({2.0, 0.3, -2.0, 0.5, 0.0}), 2.0);
  CHECK(p[0] == Approx(1.5));
  CHECK(p[1] == 0.0);
  CHECK(p[2] == Approx(-1.5));
  CHECK(std::abs(p[3]) < 1e-15);
  CHECK(p[4] == 0.0);
}

TEST_CASE("centred l1 prox thresholds around the centre", "[prox]") {
  const auto op = ProxOperator::l1(1.0, vec({1.0, -1.0}));
  const Vector p = prox(op, vec({5.0, -1.2}), 0.5);
  CHECK(p[0] == Approx(4.5));
  CHECK(p[1] == -1.0);
  CHECK(eval_g(op, vec({0.0, 0.0})) == Approx(2.0));
  CHECK_THROWS_AS(prox(op, vec({1.0, 2.0, 3.0}), 1.0), std::invalid_argument);
}

TEST_CASE("box prox clamps and ignores the step", "[prox]") {
  const auto op = ProxOperator::box(vec({-1, 0}), vec({1, std::numeric_limits<double>::infinity()}));
  const Vector p1 = prox(op, vec({3.0, -2.0}), 0.1);
  const Vector p2 = prox(op, vec({3.0, -2.0}), 10.0);
  CHECK(p1 == vec({1.0, 0.0}));
  CHECK(p1 == p2);
  CHECK(prox(op, vec({0.2, 1e9}), 1.0) == vec({0.2, 1e9}));
}

TEST_CASE("ball prox scales onto the sphere", "[prox]") {
  const auto op = ProxOperator::ball(vec({1.0, 1.0}), 2.0);
  const Vector p = prox(op, vec({1.0, 5.0}), 1.0);
  CHECK(p[0] == Approx(1.0));
  CHECK(p[1] == Approx(3.0));
  const Vector inside = vec({1.5, 0.5});
  CHECK(prox(op, inside, 1.0) == inside);
  CHECK(eval_g(op, p) == 0.0);
}

TEST_CASE("edge prox moves the two blocks toward their midpoint", "[prox]") {
  // Node 0 = (0, 0), node 1 = (4, 0), node 2 untouched; w step = 0.5.
  const Vector v = vec({0, 0, 4, 0, 7, 7});
  const auto op = ProxOperator::edge_diff(0, 1, 0.25, 2, EdgeNorm::L2);
  const Vector p = prox(op, v, 2.0);
  CHECK(p[0] == Approx(0.5));
  CHECK(p[2] == Approx(3.5));
  CHECK(p[1] == 0.0);
  CHECK(p[3] == 0.0);
  CHECK(p[4] == 7.0);
  CHECK(p[5] == 7.0);

  SECTION("large step fuses the nodes at the midpoint") {
    const Vector q = prox(op, v, 100.0);
    CHECK(q[0] == Approx(2.0));
    CHECK(q[2] == Approx(2.0));
  }
  SECTION("l1 variant shrinks each component separately") {
    const auto op1 = ProxOperator::edge_diff(0, 1, 0.25, 2, EdgeNorm::L1);
    const Vector q = prox(op1, vec({0, 0, 4, 0.6, 0, 0}), 2.0);
    CHECK(q[0] == Approx(0.5));
    CHECK(q[2] == Approx(3.5));
    CHECK(q[1] == Approx(0.3));  // difference 0.6 < 2 * 0.5, fused
    CHECK(q[3] == Approx(0.3));
  }
}

TEST_CASE("prox rejects invalid input", "[prox][errors]") {
  const Vector v = vec({1.0, 2.0});
  CHECK_THROWS_AS(prox(ProxOperator::l1(1.0), v, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prox(ProxOperator::l1(1.0), v, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(prox(ProxOperator::l1(1.0), vec({1.0, std::nan("")}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(prox(ProxOperator::ball(vec({0, 0, 0}), 1.0), v, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(prox(ProxOperator::edge_diff(0, 2, 1.0, 1), v, 1.0), std::invalid_argument);

  CHECK_THROWS_AS(ProxOperator::l1(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(ProxOperator::box(vec({1.0}), vec({0.0})), std::invalid_argument);
  CHECK_THROWS_AS(ProxOperator::box(vec({1.0}), vec({1.0, 2.0})), std::invalid_argument);
  CHECK_THROWS_AS(ProxOperator::ball(vec({0.0}), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ProxOperator::ball(vec({0.0}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ProxOperator::edge_diff(1, 1, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(ProxOperator::edge_diff(0, 1, -1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(ProxOperator::edge_diff(0, 1, 1.0, 0), std::invalid_argument);
}

TEST_CASE("indicators evaluate to +inf outside their set", "[prox]") {
  const auto box = ProxOperator::box(vec({0.0}), vec({1.0}));
  CHECK(eval_g(box, vec({0.5})) == 0.0);
  CHECK(std::isinf(eval_g(box, vec({1.5}))));
  CHECK(box.is_indicator());
  CHECK(std::isinf(box.lipschitz(1)));
  CHECK(ProxOperator::l1(2.0).lipschitz(4) == Approx(4.0));
  CHECK(ProxOperator::edge_diff(0, 1, 1.5, 3, EdgeNorm::L2).lipschitz(6) == Approx(1.5 * std::sqrt(2.0)));
  CHECK(ProxOperator::edge_diff(0, 1, 1.5, 3, EdgeNorm::L1).lipschitz(6) == Approx(1.5 * std::sqrt(6.0)));
}

TEST_CASE("prox satisfies the optimality inequality for every kind", "[prox][property]") {
  Rng rng(derive_seed(11, 0));
  for (const auto& op : all_kinds()) {
    INFO(op.name());
    std::vector<Vector> probes;
    for (int k = 0; k < 100; ++k) {
      Vector x = testing::random_vector(4, rng, 2.0);
      if (op.is_indicator()) x = prox(op, x, 1.0);
      probes.push_back(x);
    }
    for (int trial = 0; trial < 20; ++trial) {
      const Vector v = testing::random_vector(4, rng, 3.0);
      const double step = 0.05 + 2.0 * uniform_unit(rng);
      CHECK(check_prox_optimality(op, v, step, probes));
    }
  }
}

TEST_CASE("optimality check rejects a wrong candidate", "[prox][property]") {
  Rng rng(derive_seed(12, 0));
  for (const auto& op : all_kinds()) {
    if (std::holds_alternative<ZeroFunction>(op.kind())) continue;
    INFO(op.name());
    const Vector v = testing::random_vector(4, rng, 3.0) + Vector::Constant(4, 2.0);
    const double step = 0.7;
    const Vector p = prox(op, v, step);
    // With p as the probe, strong convexity forces a strict violation by
    // ||c - p||^2 for any other candidate c.
    std::vector<Vector> probes{p};
    const Vector wrong = p + Vector::Constant(4, 0.3);
    CHECK(check_prox_optimality_at(op, v, step, p, probes));
    CHECK_FALSE(check_prox_optimality_at(op, v, step, wrong, probes));
  }
}

TEST_CASE("prox is firmly nonexpansive", "[prox][property]") {
  Rng rng(derive_seed(13, 0));
  for (const auto& op : all_kinds()) {
    INFO(op.name());
    for (int k = 0; k < 200; ++k) {
      const Vector u = testing::random_vector(4, rng, 3.0);
      const Vector v = testing::random_vector(4, rng, 3.0);
      const double step = 0.1 + uniform_unit(rng);
      const Vector pu = prox(op, u, step);
      const Vector pv = prox(op, v, step);
      CHECK((pu - pv).squaredNorm() <= (pu - pv).dot(u - v) + 1e-12);
    }
  }
}

TEST_CASE("edge prox matches a brute-force minimizer", "[prox][oracle]") {
  Rng rng(derive_seed(14, 0));
  for (std::size_t d : {1u, 2u}) {
    for (EdgeNorm norm : {EdgeNorm::L2, EdgeNorm::L1}) {
      for (int k = 0; k < 6; ++k) {
        const std::size_t nodes = 3;
        const Vector v = testing::random_vector(nodes * d, rng, 1.5);
        const double w = 0.2 + uniform_unit(rng);
        const double step = 0.2 + 1.5 * uniform_unit(rng);
        const std::size_t i = k % 3, j = (k + 1) % 3;
        const auto op = ProxOperator::edge_diff(i, j, w, d, norm);
        const Vector fast = prox(op, v, step);
        const Vector brute = testing::brute_force_edge_prox(v, i, j, w, d, norm, step);
        INFO("d=" << d << " k=" << k << " norm=" << (norm == EdgeNorm::L2 ? "l2" : "l1"));
        CHECK((fast - brute).lpNorm<Eigen::Infinity>() <= 1e-4);
      }
    }
  }
}

TEST_CASE("zero-weight edge prox is the identity", "[prox]") {
  const Vector v = vec({1, 2, 3, 4});
  CHECK(prox(ProxOperator::edge_diff(0, 1, 0.0, 2), v, 5.0) == v);
}

TEST_CASE("prox_inplace agrees with prox", "[prox]") {
  Rng rng(derive_seed(15, 0));
  for (const auto& op : all_kinds()) {
    Vector v = testing::random_vector(4, rng, 2.0);
    const Vector expected = prox(op, v, 0.6);
    prox_inplace(op, v, 0.6);
    CHECK(v == expected);
  }
}
