#include "ageopt/anneal.hpp"
#include "ageopt/sim.hpp"
#include "support/instances.hpp"
#include "support/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace ageopt;
using namespace ageopt::anneal;

TEST_CASE("acceptance probability") {
  Rng rng = Rng::derive(1, 1);
  CHECK(acceptance(-1.0, 1.0, rng));
  CHECK(acceptance(0.0, 1.0, rng));
  const double T = 0.7;
  const int n = 200'000;
  int hits = 0;
  for (int k = 0; k < n; ++k) hits += acceptance(T * std::log(2.0), T, rng);
  CHECK(static_cast<double>(hits) / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("cooling schedules") {
  AnnealConfig c;
  c.schedule = Schedule::log;
  CHECK(temperature(c, 3.0, 1) == doctest::Approx(3.0 / std::log(2.0)));
  CHECK(temperature(c, 3.0, 10) > temperature(c, 3.0, 11));
  c.schedule = Schedule::power;
  CHECK(temperature(c, 3.0, 10) > temperature(c, 3.0, 11));
}

TEST_CASE("proposals and encoding") {
  Rng rng = Rng::derive(2, 1);
  const Thresholds cur{0, 2, 1};
  for (int k = 0; k < 1000; ++k) {
    const auto p = proposal_uniform(cur, 3, rng);
    CHECK(p.location >= 0);
    CHECK(p.location < 3);
    CHECK(p.value != cur[p.location]);
    CHECK(p.value <= 3);
  }
  const Thresholds tau{2, 0, 3};
  CHECK(encode(tau, 3) == 2 + 0 * 4 + 3 * 16);
  CHECK(decode(encode(tau, 3), 3, 3) == tau);
}

TEST_CASE("kernel is stochastic and reversible with respect to Boltzmann weights") {
  auto inst = fixtures::random_joac(80, 2, 2, 0.3);
  const double T = 0.8;
  const int tm = 2;
  const Matrix K = mh_kernel(inst, T, tm);
  const Vector pi = boltzmann(inst, T, tm);
  for (int r = 0; r < K.rows(); ++r) CHECK(K.row(r).sum() == doctest::Approx(1.0));
  CHECK((pi.transpose() * K - pi.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  for (int a = 0; a < K.rows(); ++a)
    for (int b = 0; b < K.rows(); ++b) CHECK(pi(a) * K(a, b) == doctest::Approx(pi(b) * K(b, a)));
  const auto g = oracle::gibbs(fixtures::to_oracle(inst), T, tm);
  for (int k = 0; k < pi.size(); ++k) CHECK(pi(k) == doctest::Approx(g[k]).epsilon(1e-12));
}

TEST_CASE("annealing reaches the exhaustive optimum on a small instance") {
  auto inst = fixtures::random_joac(90, 3, 2, 0.2);
  AnnealConfig c;
  c.t_max = 3;
  c.seed = 5;
  const auto r = sa_optimize(inst, c);
  const auto best = sim::exhaustive_threshold_search(inst, 3);
  CHECK(r.best_objective == doctest::Approx(best.objective).epsilon(1e-9));
  CHECK(joac::feasible(inst, r.best).feasible);
  CHECK(r.max_audit_drift < 1e-9);
  CHECK(slots_to_reach(r, r.best_objective) >= 0);
}

TEST_CASE("infeasible start") {
  auto inst = fixtures::random_joac(91, 2, 1, 0.01);
  AnnealConfig c;
  c.t_max = 3;
  const Thresholds start{3, 3};
  REQUIRE_FALSE(joac::feasible(inst, start).feasible);
  try {
    sa_optimize(inst, c, start);
    FAIL("expected InfeasibleStart");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::infeasible_start);
  }
}

TEST_CASE("neighborhood graph") {
  const auto g = neighborhood_graph(fixtures::corridor(6), 2);
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(0, 2));
  CHECK_FALSE(g.adjacent(0, 3));
  CHECK(g.adjacent(2, 0));
  CHECK_FALSE(g.adjacent(2, 2));
}
