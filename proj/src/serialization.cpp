#include "allpay/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace allpay {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::kFormatMismatch, std::string("missing field '") + key + "'");
  }
  return *it;
}

template <class T>
T get_as(const json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kFormatMismatch, std::string("field '") + what + "' has the wrong type");
  }
}

}  // namespace

GraphSpec graph_spec_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kFormatMismatch, "game spec must be a JSON object");
  GraphSpec spec;
  for (const json& v : field(j, "vertices")) spec.vertices.push_back(get_as<std::string>(v, "vertices"));
  for (const json& e : field(j, "edges")) {
    GraphSpec::Edge edge;
    edge.from = get_as<std::string>(field(e, "from"), "from");
    edge.to = get_as<std::string>(field(e, "to"), "to");
    try {
      edge.player = parse_player(get_as<std::string>(field(e, "player"), "player"));
    } catch (const Error& err) {
      throw Error(ErrorCode::kFormatMismatch, err.what());
    }
    spec.edges.push_back(std::move(edge));
  }
  if (j.contains("win_a")) spec.win_a = get_as<std::string>(j["win_a"], "win_a");
  if (j.contains("win_b")) spec.win_b = get_as<std::string>(j["win_b"], "win_b");
  if (j.contains("start")) spec.start = get_as<std::string>(j["start"], "start");
  if (j.contains("label")) spec.label = get_as<std::string>(j["label"], "label");
  return spec;
}

json graph_to_json(const GameGraph& g) {
  const GraphSpec spec = g.to_spec();
  json edges = json::array();
  for (const auto& e : spec.edges) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"player", player_name(e.player)}});
  }
  json out = {{"vertices", spec.vertices}, {"edges", std::move(edges)},
              {"win_a", spec.win_a},       {"win_b", spec.win_b}};
  if (spec.start) out["start"] = *spec.start;
  if (!spec.label.empty()) out["label"] = spec.label;
  return out;
}

ToeplitzPayoff matrix_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kFormatMismatch, "matrix must be a JSON object");
  const int rows = get_as<int>(field(j, "rows"), "rows");
  const int cols = get_as<int>(field(j, "cols"), "cols");
  auto diag = get_as<std::vector<double>>(field(j, "diag"), "diag");
  const double total = j.contains("total") ? get_as<double>(j["total"], "total") : 1.0;
  return ToeplitzPayoff(rows, cols, std::move(diag), total);
}

json matrix_to_json(const ToeplitzPayoff& m) {
  std::vector<double> diag;
  for (double v : m.diagonals()) diag.push_back(round_significant(v));
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"diag", std::move(diag)},
          {"total", round_significant(m.total())}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kFormatMismatch, "'" + path + "' is not valid JSON: " + e.what());
  }
}

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

}  // namespace allpay
