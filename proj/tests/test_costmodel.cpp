#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "predplan/costmodel.hpp"

using namespace predplan;
using doctest::Approx;

namespace {

Atom unit_atom(double cost_factor = 1.0) {
  Atom atom;
  atom.cost_factor = cost_factor;
  return atom;
}

CostModel model_of(CostModel::Variant variant, double kappa = 0.0) {
  CostModel model;
  model.variant = variant;
  model.kappa = kappa;
  return model;
}

}  // namespace

TEST_SUITE("costmodel") {
  TEST_CASE("simplified cost is linear in the count") {
    const CostModel model = model_of(CostModel::Variant::Simplified);
    CHECK(step_cost(model, unit_atom(), 100, 1000) == Approx(100));
    CHECK(step_cost(model, unit_atom(3.0), 100, 1000) == Approx(300));
    CHECK(step_cost(model_of(CostModel::Variant::Simplified, 2.5),
                    unit_atom(), 100, 1000) == Approx(102.5));
  }

  TEST_CASE("hdd cost jumps to a full scan at the threshold") {
    CostModel model = model_of(CostModel::Variant::Hdd);
    model.theta = 0.9;
    model.total_records = 1000;
    CHECK(step_cost(model, unit_atom(), 950, 1000) == Approx(1000));
    CHECK(step_cost(model, unit_atom(), 500, 1000) == Approx(500));
    CHECK(step_cost(model, unit_atom(), 900, 1000) == Approx(1000));
    CHECK(step_cost(model, unit_atom(), 899, 1000) == Approx(899));
  }

  TEST_CASE("basic cost charges the count plus overhead") {
    const CostModel model = model_of(CostModel::Variant::Basic, 1.5);
    CHECK(step_cost(model, unit_atom(), 10, 100) == Approx(11.5));
  }

  TEST_CASE("set operations are free outside the basic model") {
    CostModel basic = model_of(CostModel::Variant::Basic);
    basic.epsilon = 0.25;
    basic.kappa_prime = 4;
    CHECK(setop_cost(basic, 100) == Approx(26.0));
    CHECK(setop_cost(model_of(CostModel::Variant::Simplified), 100) == 0.0);
    CHECK(setop_cost(model_of(CostModel::Variant::Hdd), 100) == 0.0);
  }

  TEST_CASE("step cost is monotone in the count for every variant") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto variant : {CostModel::Variant::Basic,
                         CostModel::Variant::Simplified,
                         CostModel::Variant::Hdd}) {
      CostModel model = model_of(variant, unit(rng));
      model.theta = 0.9;
      model.total_records = 1000;
      const Atom atom = unit_atom(1.0 + 3.0 * unit(rng));
      for (int i = 0; i < 200; ++i) {
        double a = 1000 * unit(rng);
        double b = 1000 * unit(rng);
        if (a > b) std::swap(a, b);
        CHECK(step_cost(model, atom, a, 1000) <=
              step_cost(model, atom, b, 1000) + 1e-12);
      }
    }
  }

  TEST_CASE("splitting a step never pays off when overhead is positive") {
    const CostModel model = model_of(CostModel::Variant::Simplified, 0.5);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Atom atom = unit_atom(2.0);
    for (int i = 0; i < 200; ++i) {
      const double x = 500 * unit(rng);
      const double y = 500 * unit(rng);
      CHECK(step_cost(model, atom, x + y, 1000) <=
            step_cost(model, atom, x, 1000) +
                step_cost(model, atom, y, 1000) + 1e-12);
    }
  }

  TEST_CASE("and chain recurrence") {
    CHECK(and_chain_cost({{1, 0.5}, {1, 0.5}}) == Approx(1.5));
    CHECK(and_chain_cost({}) == Approx(0.0));
    CHECK(and_chain_cost({{1, 0.469}, {1, 0.984}}) == Approx(1.469));
    CHECK(and_chain_cost({{1, 0.5}, {1, 0.5}}, 0.5) == Approx(0.75));
  }

  TEST_CASE("or chain recurrence") {
    CHECK(or_chain_cost({{1, 0.5}, {1, 0.5}}) == Approx(1.5));
    CHECK(or_chain_cost({{1, 1.0}, {1, 0.123}}) == Approx(1.0));
    CHECK(or_chain_cost({{1, 0.3}, {2, 0.6}}) == Approx(2.4));
    CHECK(or_chain_cost({}) == Approx(0.0));
  }

  TEST_CASE("or chain state accumulates pass probability") {
    OrChainState state;
    CHECK(state.y == Approx(0.0));
    state.advance(0.3);
    CHECK(state.y == Approx(0.3));
    state.advance(0.6);
    CHECK(state.y == Approx(0.3 + 0.6 * 0.7));
  }

  TEST_CASE("weights match their closed forms") {
    CHECK(and_weight(1, 0.5) == Approx(2.0));
    CHECK(or_weight(1, 0.5) == Approx(2.0));
    CHECK(and_weight(1, 0.469) == Approx(1.883).epsilon(0.001));
    CHECK(or_weight(1, 0.313) == Approx(3.195).epsilon(0.001));
  }

  TEST_CASE("degenerate selectivities sort last via infinite weight") {
    CHECK(std::isinf(and_weight(1, 1.0)));
    CHECK(std::isinf(or_weight(1, 0.0)));
    CHECK(std::isfinite(and_weight(1, 0.0)));
    CHECK(std::isfinite(or_weight(1, 1.0)));
  }

  TEST_CASE("or chain cost never exceeds the plain sum") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      std::vector<std::pair<double, double>> chain;
      double plain = 0.0;
      const int n = 1 + static_cast<int>(rng() % 6);
      for (int k = 0; k < n; ++k) {
        const double cost = 0.1 + 9.9 * unit(rng);
        chain.emplace_back(cost, unit(rng));
        plain += cost;
      }
      CHECK(or_chain_cost(chain) <= plain + 1e-12);
      CHECK(and_chain_cost(chain) <= plain + 1e-12);
    }
  }
}
