#include "ageopt/coloring.hpp"
#include "ageopt/joac.hpp"
#include "support/instances.hpp"
#include "support/oracle.hpp"

#include <doctest.h>

#include <thread>

using namespace ageopt;
using namespace ageopt::coloring;

namespace {

Graph cycle(int n) {
  Graph g;
  g.adjacency.resize(n);
  for (int i = 0; i < n; ++i) {
    g.adjacency[i].push_back((i + 1) % n);
    g.adjacency[i].push_back((i + n - 1) % n);
  }
  return g;
}

Graph complete(int n) {
  Graph g;
  g.adjacency.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) g.adjacency[i].push_back(j);
  return g;
}

Coloring identity(int n) {
  Coloring c;
  for (int i = 0; i < n; ++i) c.colors.push_back(i);
  return c;
}

}  // namespace

TEST_CASE("chromatic numbers of standard graphs") {
  CHECK(chromatic_number(cycle(6)) == 2);
  CHECK(chromatic_number(cycle(7)) == 3);
  for (int n = 1; n <= 6; ++n) CHECK(chromatic_number(complete(n)) == n);
  Graph edgeless;
  edgeless.adjacency.resize(4);
  CHECK(chromatic_number(edgeless) == 1);
  CHECK(oracle::chromatic_number(cycle(7).adjacency) == 3);
}

TEST_CASE("greedy coloring is proper") {
  for (const auto& g : {cycle(6), cycle(9), complete(5)}) {
    const auto c = greedy_coloring(g);
    CHECK(is_feasible(g, c));
    CHECK(c.used() <= g.max_degree() + 1);
  }
  CHECK(greedy_coloring(complete(5)).used() == 5);
}

TEST_CASE("coloring accessors") {
  Coloring c{{2, 0, 2, 5}};
  CHECK(c.used() == 3);
  CHECK(c.palette() == std::vector<int>{0, 2, 5});
  CHECK(c.members(2) == std::vector<int>{0, 2});
  CHECK(is_feasible(cycle(4), c));
  CHECK_FALSE(is_feasible(cycle(4), Coloring{{2, 2, 0, 5}}));
}

TEST_CASE("annealing colorer") {
  SUBCASE("ring of six reaches two colors") {
    const auto g = cycle(6);
    SaColorer col(g, identity(6), 0.0, 3, nullptr);
    col.advance(20'000);
    CHECK(is_feasible(g, col.current()));
    CHECK(col.best().used() == 2);
  }
  SUBCASE("complete graph keeps n colors") {
    const auto g = complete(5);
    SaColorer col(g, identity(5), 0.0, 4, nullptr);
    col.advance(1000);
    CHECK(col.best().used() == 5);
    CHECK(is_feasible(g, col.current()));
  }
  SUBCASE("steps never leave the feasible set") {
    const auto g = cycle(9);
    Rng rng = Rng::derive(5, 5);
    Coloring c = identity(9);
    for (long n = 1; n <= 5000; ++n) {
      c = sa_coloring_step(g, c, n, 9.0, rng);
      REQUIRE(is_feasible(g, c));
    }
  }
}

TEST_CASE("broadcast cell keeps strict improvements") {
  BroadcastCell cell;
  CHECK(cell.latest() == nullptr);
  CHECK(cell.publish(Coloring{{0, 1, 2}}));
  CHECK_FALSE(cell.publish(Coloring{{0, 1, 2}}));
  CHECK(cell.publish(Coloring{{0, 1, 0}}));
  CHECK(cell.latest()->used() == 2);
  CHECK(cell.version() == 2);

  BroadcastCell shared;
  std::thread writer([&] {
    for (int k = 8; k >= 1; --k) {
      Coloring c;
      for (int i = 0; i < 8; ++i) c.colors.push_back(i % k);
      shared.publish(c);
    }
  });
  for (int k = 0; k < 1000; ++k)
    if (auto p = shared.latest()) CHECK(p->colors.size() == 8);
  writer.join();
  CHECK(shared.latest()->used() == 1);
}

TEST_CASE("accelerated annealing changes one color class per slot") {
  auto inst = fixtures::random_joac(95, 6, 3, 0.3);
  anneal::AnnealConfig c;
  c.t_max = 4;
  c.seed = 8;
  c.iteration_cap = 5000;
  const auto r = accelerated_sa(inst, c);
  CHECK(r.colorings_feasible);
  CHECK(r.single_class_changes);
  CHECK(joac::feasible(inst, r.anneal.best).feasible);
  CHECK(r.anneal.best_objective <= joac::objective(inst, Thresholds(6, 0)) + 1e-12);
}
