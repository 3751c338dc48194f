#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fairslice/model.hpp"

namespace fairslice::io {

using json = nlohmann::json;

inline Rational number_from(const json& node, const std::string& where) {
  if (node.is_string()) return parse_rational(node.get<std::string>());
  if (node.is_number_integer()) return Rational(Integer(node.get<std::int64_t>()));
  throw Error(ErrorCode::MalformedNumber, where + ": numbers must be strings (\"p/q\" or decimal)");
}

inline json number_to(const Rational& r) { return to_string(r); }

inline const json& require(const json& node, const char* key, const std::string& where) {
  if (!node.is_object() || !node.contains(key))
    throw Error(ErrorCode::MalformedDocument, where + ": missing \"" + key + "\"");
  return node.at(key);
}

inline PiecewiseDensity density_from_json(const json& node, const std::string& where) {
  const auto& bps = require(node, "breakpoints", where);
  const auto& vals = require(node, "values", where);
  if (!bps.is_array() || !vals.is_array())
    throw Error(ErrorCode::MalformedDocument, where + ": breakpoints and values must be arrays");
  std::vector<Rational> breakpoints, values;
  for (const auto& b : bps) breakpoints.push_back(number_from(b, where));
  for (const auto& v : vals) values.push_back(number_from(v, where));
  try {
    return PiecewiseDensity(std::move(breakpoints), std::move(values));
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.what());
  }
}

inline json density_to_json(const PiecewiseDensity& d) {
  json bps = json::array(), vals = json::array();
  for (const auto& b : d.breakpoints()) bps.push_back(number_to(b));
  for (const auto& v : d.values()) vals.push_back(number_to(v));
  return {{"breakpoints", bps}, {"values", vals}};
}

inline Profile profile_from_json(const json& doc) {
  const auto& agents = require(doc, "agents", "profile");
  if (!agents.is_array()) throw Error(ErrorCode::MalformedDocument, "profile: \"agents\" must be an array");
  if (agents.empty()) throw Error(ErrorCode::EmptyProfile, "profile has no agents");
  std::vector<AgentSpec> specs;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    std::string where = "agent " + std::to_string(i);
    std::string name = a.contains("name") ? a.at("name").get<std::string>() : "a" + std::to_string(i + 1);
    where += " (" + name + ")";
    Rational claim = a.contains("claim") ? number_from(a.at("claim"), where) : Rational(1);
    specs.push_back({name, density_from_json(require(a, "density", where), where), claim});
  }
  return Profile(std::move(specs));
}

inline Profile parse_profile(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("profile is not valid JSON: ") + e.what());
  }
  // fixture files nest the profile
  if (doc.is_object() && !doc.contains("agents") && doc.contains("profile")) return profile_from_json(doc.at("profile"));
  return profile_from_json(doc);
}

inline json profile_to_json(const Profile& profile) {
  json agents = json::array();
  for (const auto& a : profile.agents())
    agents.push_back({{"name", a.name}, {"claim", number_to(a.claim)}, {"density", density_to_json(a.density)}});
  return {{"agents", agents}};
}

inline json piece_to_json(const Piece& piece) {
  json out = json::array();
  for (const auto& iv : piece) out.push_back({number_to(iv.lo), number_to(iv.hi)});
  return out;
}

inline Piece piece_from_json(const json& node, const std::string& where) {
  if (!node.is_array()) throw Error(ErrorCode::MalformedDocument, where + ": piece must be an array of [lo, hi]");
  Piece out;
  for (const auto& iv : node) {
    if (!iv.is_array() || iv.size() != 2) throw Error(ErrorCode::MalformedDocument, where + ": interval must be [lo, hi]");
    Interval interval{number_from(iv[0], where), number_from(iv[1], where)};
    if (interval.lo > interval.hi || interval.lo < 0 || interval.hi > 1)
      throw Error(ErrorCode::MalformedDocument, where + ": interval outside [0,1] or reversed");
    out.push_back(std::move(interval));
  }
  return out;
}

inline json allocation_to_json(const Allocation& alloc) {
  json pieces = json::object();
  for (std::size_t i = 0; i < alloc.agents(); ++i) pieces[alloc.names[i]] = piece_to_json(alloc.pieces[i]);
  return {{"pieces", pieces},
          {"waste", piece_to_json(alloc.waste)},
          {"coordinates", alloc.coordinates == Coordinates::Original ? "original" : "rescaled"}};
}

// Agents are matched by name against the profile order; missing agents get nothing.
inline Allocation allocation_from_json(const json& doc, const Profile& profile) {
  const json& body = doc.contains("allocation") ? doc.at("allocation") : doc;
  const auto& pieces = require(body, "pieces", "allocation");
  if (!pieces.is_object()) throw Error(ErrorCode::MalformedDocument, "allocation: \"pieces\" must be an object");
  if (body.contains("coordinates") && body.at("coordinates") != "original")
    throw Error(ErrorCode::MalformedDocument, "allocation: only original coordinates can be checked against a profile");
  Allocation out;
  out.names = profile.names();
  out.pieces.resize(profile.size());
  for (auto it = pieces.begin(); it != pieces.end(); ++it) {
    auto pos = std::find(out.names.begin(), out.names.end(), it.key());
    if (pos == out.names.end()) throw Error(ErrorCode::MalformedDocument, "allocation names unknown agent '" + it.key() + "'");
    out.pieces[static_cast<std::size_t>(pos - out.names.begin())] = normalize(piece_from_json(it.value(), it.key()));
  }
  if (body.contains("waste")) out.waste = normalize(piece_from_json(body.at("waste"), "waste"));
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline Profile load_profile(const std::string& path) { return parse_profile(read_file(path)); }

}  // namespace fairslice::io
