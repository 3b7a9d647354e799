#pragma once

#include "liqgame/market_model.hpp"
#include "liqgame/stackelberg.hpp"

namespace liqgame::testing {

/// Two players: one liquidating, one starting flat.
inline GameSpec table1() {
  GameSpec s;
  s.horizon_T = 10.0;
  s.grid_steps = 1000;
  s.players = {
      {5e-5, 2.5e-5, 5e-6, 0.5, 0.0, 1.0},
      {5e-6, 2.5e-6, 5e-7, 2e-2, 0.0, 0.0},
  };
  return s;
}

inline GameSpec table2() {
  GameSpec s;
  s.horizon_T = 10.0;
  s.grid_steps = 1000;
  s.players = {
      {5e-5, 2.5e-5, 5e-6, 0.5, 0.0, 1.0},
      {3e-5, 1.5e-5, 7e-7, 0.3, 0.0, 0.7},
      {2e-5, 1e-5, 5e-7, 0.2, 0.0, 0.5},
      {5e-6, 2.5e-6, 2e-8, 1e-2, 0.0, 0.0},
      {1e-5, 5e-6, 5e-7, 0.1, 0.0, -0.2},
  };
  return s;
}

inline PlayerParams table3_player() { return {1e-5, 1e-5, 1e-7, 0.1, 0.0, 1.0}; }

inline GameSpec table3(std::size_t n) { return homogeneous_game(table3_player(), n, 10.0, 1000); }

/// Table 3 with the permanent impact scaled down a hundredfold.
inline GameSpec table3_weak(std::size_t n) {
  PlayerParams p = table3_player();
  p.alpha *= 1e-2;
  return homogeneous_game(p, n, 10.0, 1000);
}

inline HierarchyGameSpec table4() {
  HierarchyGameSpec s;
  s.leader = {5e-5, 2.5e-5, 5e-4, 1.0};
  s.follower = {3e-5, 1.5e-5, 5e-7};
  s.followers = 5;
  s.horizon_T = 1.0;
  s.grid_steps = 1000;
  return s;
}

}  // namespace liqgame::testing
