#pragma once

#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "liqgame/error.hpp"
#include "liqgame/market_model.hpp"
#include "liqgame/stackelberg.hpp"

namespace liqgame::io {

using Json = nlohmann::json;

namespace detail {

[[noreturn]] inline void invalid(const std::string& what) {
  throw Error(ErrorCategory::kValidation, what);
}

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) invalid("missing key \"" + std::string(key) + "\" in " + where);
  return *it;
}

inline double number(const Json& v, const std::string& what) {
  if (!v.is_number()) invalid(what + " must be a number");
  return v.get<double>();
}

inline double number_at(const Json& obj, const char* key, const std::string& where) {
  return number(require(obj, key, where), where + "." + key);
}

inline std::size_t count(const Json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    invalid(what + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline void reject_unknown(const Json& obj, std::initializer_list<const char*> known,
                           const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) invalid("unknown key \"" + item.key() + "\" in " + where);
  }
}

inline const Json& object(const Json& v, const std::string& what) {
  if (!v.is_object()) invalid(what + " must be an object");
  return v;
}

}  // namespace detail

inline Json to_json(const PlayerParams& p) {
  return Json{{"alpha", p.alpha}, {"kappa", p.kappa}, {"lambda", p.lambda},
              {"A", p.terminal_penalty_A}, {"mu", p.mu}, {"q0", p.q0}};
}

/// Keys alpha, kappa, lambda, A, q0 are required; mu defaults to 0.
inline PlayerParams player_from_json(const Json& j, const std::string& where) {
  detail::object(j, where);
  detail::reject_unknown(j, {"alpha", "kappa", "lambda", "A", "mu", "q0"}, where);
  PlayerParams p;
  p.alpha = detail::number_at(j, "alpha", where);
  p.kappa = detail::number_at(j, "kappa", where);
  p.lambda = detail::number_at(j, "lambda", where);
  p.terminal_penalty_A = detail::number_at(j, "A", where);
  p.q0 = detail::number_at(j, "q0", where);
  if (j.contains("mu")) p.mu = detail::number(j["mu"], where + ".mu");
  return p;
}

inline Json to_json(const GameSpec& s) {
  Json players = Json::array();
  for (const PlayerParams& p : s.players) players.push_back(to_json(p));
  return Json{{"horizon_T", s.horizon_T}, {"grid_steps", s.grid_steps}, {"players", players}};
}

/// Reads horizon_T, grid_steps (default 1000) and players from `j`, ignoring
/// other keys so a scenario document can carry the game inline.
inline GameSpec game_from_json(const Json& j) {
  detail::object(j, "scenario");
  GameSpec s;
  s.horizon_T = detail::number_at(j, "horizon_T", "scenario");
  if (j.contains("grid_steps")) s.grid_steps = detail::count(j["grid_steps"], "grid_steps");
  const Json& players = detail::require(j, "players", "scenario");
  if (!players.is_array()) detail::invalid("players must be an array");
  for (std::size_t i = 0; i < players.size(); ++i) {
    s.players.push_back(player_from_json(players[i], "players[" + std::to_string(i) + "]"));
  }
  return s;
}

inline Json to_json(const HierarchyGameSpec& s) {
  return Json{{"leader",
               {{"alpha0", s.leader.alpha0},
                {"kappa0", s.leader.kappa0},
                {"lambda0", s.leader.lambda0},
                {"q00", s.leader.q00}}},
              {"follower",
               {{"alpha", s.follower.alpha},
                {"kappa", s.follower.kappa},
                {"lambda", s.follower.lambda}}},
              {"N", s.followers},
              {"horizon_T", s.horizon_T},
              {"grid_steps", s.grid_steps}};
}

inline HierarchyGameSpec hierarchy_from_json(const Json& j) {
  detail::object(j, "scenario");
  HierarchyGameSpec s;
  const Json& l = detail::object(detail::require(j, "leader", "scenario"), "leader");
  detail::reject_unknown(l, {"alpha0", "kappa0", "lambda0", "q00"}, "leader");
  s.leader.alpha0 = detail::number_at(l, "alpha0", "leader");
  s.leader.kappa0 = detail::number_at(l, "kappa0", "leader");
  s.leader.lambda0 = detail::number_at(l, "lambda0", "leader");
  s.leader.q00 = detail::number_at(l, "q00", "leader");
  const Json& f = detail::object(detail::require(j, "follower", "scenario"), "follower");
  detail::reject_unknown(f, {"alpha", "kappa", "lambda"}, "follower");
  s.follower.alpha = detail::number_at(f, "alpha", "follower");
  s.follower.kappa = detail::number_at(f, "kappa", "follower");
  s.follower.lambda = detail::number_at(f, "lambda", "follower");
  s.followers = detail::count(detail::require(j, "N", "scenario"), "N");
  s.horizon_T = detail::number_at(j, "horizon_T", "scenario");
  if (j.contains("grid_steps")) s.grid_steps = detail::count(j["grid_steps"], "grid_steps");
  return s;
}

inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCategory::kValidation, "malformed JSON in " + source + ": " + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCategory::kIo, "cannot read " + path);
  return parse_json(buf.str(), path);
}

}  // namespace liqgame::io
