#include "forel/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace forel {

using nlohmann::json;

namespace {

json ParseJson(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("invalid JSON in " + what);
  return j;
}

const json& Require(const json& j, const std::string& field) {
  auto it = j.find(field);
  if (it == j.end()) throw ConfigError("missing field '" + field + "'");
  return *it;
}

double RequireNumber(const json& j, const std::string& field) {
  const json& v = Require(j, field);
  if (!v.is_number()) throw ConfigError("field '" + field + "' must be a number");
  return v.get<double>();
}

// Accepts a flat array or arbitrarily nested arrays; flattens row-major.
void FlattenInto(const json& node, Vec* out, const std::string& field) {
  if (node.is_number()) {
    out->push_back(node.get<double>());
    return;
  }
  if (!node.is_array()) {
    throw ConfigError("field '" + field + "' must contain numbers/arrays");
  }
  for (const json& child : node) FlattenInto(child, out, field);
}

Mat MatFromJson(const json& node, const std::string& field) {
  if (!node.is_array() || node.empty() || !node[0].is_array()) {
    throw ConfigError("field '" + field + "' must be a 2-D array");
  }
  std::vector<Vec> rows;
  for (const json& r : node) {
    if (!r.is_array()) throw ConfigError("field '" + field + "' must be a 2-D array");
    Vec row;
    for (const json& v : r) {
      if (!v.is_number()) throw ConfigError("field '" + field + "' must be numeric");
      row.push_back(v.get<double>());
    }
    rows.push_back(std::move(row));
  }
  return Mat::FromRows(rows);
}

}  // namespace

Game GameFromJsonText(const std::string& text) {
  json j = ParseJson(text, "game");
  int players = static_cast<int>(RequireNumber(j, "players"));
  const json& actions_j = Require(j, "actions");
  if (!actions_j.is_array() || static_cast<int>(actions_j.size()) != players) {
    throw ConfigError("field 'actions' must list one action count per player");
  }
  std::vector<int> actions;
  for (const json& a : actions_j) actions.push_back(a.get<int>());

  std::vector<AffineTransform> affine;
  if (j.contains("affine")) {
    for (const json& t : j["affine"]) {
      AffineTransform tr;
      tr.scale = RequireNumber(t, "a");
      tr.offset = RequireNumber(t, "b");
      affine.push_back(tr);
    }
  }
  bool constant_sum = j.value("constant_sum", false);

  std::string form = Require(j, "form").get<std::string>();
  try {
    if (form == "polymatrix") {
      std::vector<Edge> edges;
      for (const json& e : Require(j, "edges")) {
        Edge edge;
        edge.i = static_cast<int>(RequireNumber(e, "i"));
        edge.j = static_cast<int>(RequireNumber(e, "j"));
        edge.payoff_i = MatFromJson(Require(e, "u_ij"), "u_ij");
        edge.payoff_j = MatFromJson(Require(e, "u_ji"), "u_ji");
        edges.push_back(std::move(edge));
      }
      return Game::MakePolymatrix(std::move(actions), std::move(edges),
                                  std::move(affine), constant_sum);
    }
    if (form == "normal") {
      const json& tensors_j = Require(j, "tensors");
      if (!tensors_j.is_array() ||
          static_cast<int>(tensors_j.size()) != players) {
        throw ConfigError("field 'tensors' must hold one tensor per player");
      }
      std::vector<Vec> tensors;
      for (const json& t : tensors_j) {
        Vec flat;
        FlattenInto(t, &flat, "tensors");
        tensors.push_back(std::move(flat));
      }
      return Game::MakeNormalForm(std::move(actions), std::move(tensors),
                                  std::move(affine), constant_sum);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid game: ") + e.what());
  }
  throw ConfigError("field 'form' must be 'polymatrix' or 'normal'");
}

Game GameFromJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open game file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return GameFromJsonText(ss.str());
}

std::string GameToJsonText(const Game& game) {
  using ojson = nlohmann::ordered_json;
  ojson j;
  j["players"] = game.num_players();
  j["actions"] = game.actions();
  j["form"] = game.form() == GameForm::kPolymatrix ? "polymatrix" : "normal";
  if (game.form() == GameForm::kPolymatrix) {
    ojson edges = ojson::array();
    for (const Edge& e : game.edges()) {
      ojson ej;
      ej["i"] = e.i;
      ej["j"] = e.j;
      auto rows = [](const Mat& m) {
        ojson out = ojson::array();
        for (int r = 0; r < m.rows; ++r) {
          ojson row = ojson::array();
          for (int c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
          out.push_back(row);
        }
        return out;
      };
      ej["u_ij"] = rows(e.payoff_i);
      ej["u_ji"] = rows(e.payoff_j);
      edges.push_back(ej);
    }
    j["edges"] = edges;
  }
  ojson affine = ojson::array();
  for (const AffineTransform& t : game.affine()) {
    affine.push_back({{"a", t.scale}, {"b", t.offset}});
  }
  j["affine"] = affine;
  j["constant_sum"] = game.declared_constant_sum();
  return j.dump(2);
}

namespace {

std::vector<Vec> VecsFromJson(const json& node, const std::string& field) {
  if (!node.is_array()) throw ConfigError("field '" + field + "' must be an array");
  std::vector<Vec> out;
  for (const json& row : node) {
    if (!row.is_array()) {
      throw ConfigError("field '" + field + "' must be an array of arrays");
    }
    Vec v;
    for (const json& x : row) v.push_back(x.get<double>());
    out.push_back(std::move(v));
  }
  return out;
}

std::uint64_t HashText(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

ExperimentConfig ConfigFromJsonText(const std::string& text,
                                    const std::string& base_dir) {
  json j = ParseJson(text, "config");

  const json& game_j = Require(j, "game");
  Game game = game_j.is_string()
                  ? GameFromJsonFile(base_dir + "/" + game_j.get<std::string>())
                  : GameFromJsonText(game_j.dump());

  std::vector<RegularizerKind> kinds;
  try {
    if (!j.contains("regularizers")) {
      kinds.assign(game.num_players(), RegularizerKind::kEntropic);
    } else if (j["regularizers"].is_string()) {
      kinds.assign(
          game.num_players(),
          RegularizerKindFromName(j["regularizers"].get<std::string>()));
    } else {
      for (const json& r : j["regularizers"]) {
        kinds.push_back(RegularizerKindFromName(r.get<std::string>()));
      }
      if (static_cast<int>(kinds.size()) != game.num_players()) {
        throw ConfigError("field 'regularizers' must name one per player");
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field 'regularizers': ") + e.what());
  }

  ExperimentConfig cfg;
  cfg.game = std::move(game);
  cfg.regularizers = std::move(kinds);
  cfg.config_hash = HashText(text);

  int start_count = 0;
  if (j.contains("y0")) {
    ++start_count;
    cfg.start = StartKind::kScores;
    cfg.y0.scores = VecsFromJson(j["y0"], "y0");
  }
  if (j.contains("x0")) {
    ++start_count;
    cfg.start = StartKind::kProfile;
    cfg.x0.strategies = VecsFromJson(j["x0"], "x0");
  }
  if (j.contains("random") && j["random"].get<bool>()) {
    ++start_count;
    cfg.start = StartKind::kRandom;
  }
  if (start_count != 1) {
    throw ConfigError("exactly one of 'y0', 'x0', 'random' must be given");
  }

  cfg.horizon = RequireNumber(j, "T");
  cfg.step = RequireNumber(j, "h");
  if (!(cfg.horizon > 0.0) || !(cfg.step > 0.0)) {
    throw ConfigError("fields 'T' and 'h' must be positive");
  }
  if (j.contains("method")) {
    try {
      cfg.method = IntegrationMethodFromName(j["method"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  cfg.sample_every = j.value("sample_every", 1);
  if (cfg.sample_every < 1) throw ConfigError("field 'sample_every' must be >= 1");
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.output = j.value("output", std::string{});

  if (j.contains("analyses")) {
    const json& a = j["analyses"];
    cfg.analyses.coupling = a.value("coupling", false);
    cfg.analyses.regret = a.value("regret", false);
    cfg.analyses.support = a.value("support", false);
    if (a.contains("recurrence")) {
      RecurrenceSettings r;
      r.epsilon = RequireNumber(a["recurrence"], "epsilon");
      r.t_min = RequireNumber(a["recurrence"], "t_min");
      cfg.analyses.recurrence = r;
    }
    if (a.contains("divergence")) {
      DivergenceSettings d;
      const json& dj = a["divergence"];
      d.delta = dj.value("delta", 1e-4);
      d.count = dj.value("count", 100);
      d.range = dj.value("range", 3.0);
      cfg.analyses.divergence = d;
    }
  }

  if (j.contains("x_star")) {
    MixedProfile xs;
    xs.strategies = VecsFromJson(j["x_star"], "x_star");
    cfg.x_star_override = std::move(xs);
  }
  if (j.contains("weights")) {
    Vec w;
    for (const json& v : j["weights"]) w.push_back(v.get<double>());
    cfg.weight_override = std::move(w);
  }

  if (j.contains("sweep")) {
    SweepSettings sw;
    const json& s = j["sweep"];
    sw.n_seeds = s.value("n_seeds", 1);
    if (sw.n_seeds < 1) throw ConfigError("field 'n_seeds' must be >= 1");
    if (s.contains("regularizers")) {
      for (const json& set : s["regularizers"]) {
        std::vector<RegularizerKind> ks;
        if (set.is_string()) {
          ks.assign(cfg.game.num_players(),
                    RegularizerKindFromName(set.get<std::string>()));
        } else {
          for (const json& r : set) {
            ks.push_back(RegularizerKindFromName(r.get<std::string>()));
          }
        }
        if (static_cast<int>(ks.size()) != cfg.game.num_players()) {
          throw ConfigError("sweep regularizer set has wrong player count");
        }
        sw.regularizer_sets.push_back(std::move(ks));
      }
    }
    if (sw.regularizer_sets.empty()) {
      sw.regularizer_sets.push_back(cfg.regularizers);
    }
    if (static_cast<long long>(sw.n_seeds) * sw.regularizer_sets.size() > 10000) {
      throw ConfigError("sweep grid exceeds 10^4 runs");
    }
    cfg.sweep = std::move(sw);
  }
  return cfg;
}

ExperimentConfig ConfigFromJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string dir = ".";
  auto slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash);
  return ConfigFromJsonText(ss.str(), dir);
}

ScoreState ScoresFromProfile(const MixedProfile& x,
                             const std::vector<RegularizerKind>& kinds) {
  if (x.num_players() != static_cast<int>(kinds.size())) {
    throw ConfigError("profile/regularizer player count mismatch");
  }
  ScoreState y;
  y.scores.resize(x.num_players());
  for (int i = 0; i < x.num_players(); ++i) {
    if (kinds[i] == RegularizerKind::kEntropic) {
      for (double p : x[i]) {
        if (!(p > 0.0)) {
          throw ConfigError(
              "x0 must be strictly interior for an entropic regularizer "
              "(log of a zero entry)");
        }
      }
      for (double p : x[i]) y[i].push_back(std::log(p));
    } else {
      y[i] = x[i];
    }
  }
  return y;
}

namespace {

// splitmix64; fixed here so outputs are reproducible byte-for-byte.
std::uint64_t NextRaw(std::uint64_t* state) {
  std::uint64_t z = (*state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double NextUnit(std::uint64_t* state) {
  return static_cast<double>(NextRaw(state) >> 11) * 0x1.0p-53;
}

}  // namespace

MixedProfile RandomInteriorProfile(const Game& game, std::uint64_t seed) {
  std::uint64_t state = seed * 0x9e3779b97f4a7c15ull + 0xd1b54a32d192ed03ull;
  MixedProfile x;
  x.strategies.resize(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    Vec v(game.num_actions(i));
    double total = 0.0;
    for (double& p : v) {
      double u = NextUnit(&state);
      if (u <= 0.0) u = 0x1.0p-53;
      p = -std::log(u);  // flat Dirichlet via normalized exponentials
      total += p;
    }
    for (double& p : v) p /= total;
    x[i] = std::move(v);
  }
  return x;
}

}  // namespace forel
