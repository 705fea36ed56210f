#include "forel/cli.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "forel/log.hpp"

namespace forel {

namespace {

LogLevel g_log_level = LogLevel::kError;

}  // namespace

void InitLoggingFromEnv() {
  const char* env = std::getenv("FOREL_LOG");
  if (env == nullptr) return;
  std::string v = env;
  if (v == "debug") {
    g_log_level = LogLevel::kDebug;
  } else if (v == "info") {
    g_log_level = LogLevel::kInfo;
  } else {
    g_log_level = LogLevel::kError;
  }
}

void Log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(g_log_level)) return;
  const char* tag = level == LogLevel::kError
                        ? "error"
                        : (level == LogLevel::kInfo ? "info" : "debug");
  std::fprintf(stderr, "[forel %s] %s\n", tag, msg.c_str());
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

DiagnosticsContext ResolveDiagnostics(const ExperimentConfig& cfg) {
  DiagnosticsContext out;
  const Game& game = cfg.game;

  std::optional<MixedProfile> x_star = cfg.x_star_override;
  if (game.num_players() == 2 && game.form() == GameForm::kPolymatrix &&
      game.edges().size() == 1) {
    EquilibriumReport eq = MaxSupportEquilibrium(game.TwoPlayerBaseMatrix());
    if (!x_star) x_star = eq.x_star;
    out.equilibrium = std::move(eq);
  } else if (game.form() == GameForm::kPolymatrix) {
    InteriorSolveResult interior = PolymatrixInteriorEquilibrium(game);
    if (interior.profile) {
      if (!x_star) x_star = interior.profile;
      // Interior equilibrium: every action is essential.
      EquilibriumReport eq;
      eq.x_star = *interior.profile;
      eq.essential.resize(game.num_players());
      eq.margins.resize(game.num_players());
      for (int i = 0; i < game.num_players(); ++i) {
        for (int a = 0; a < game.num_actions(i); ++a) {
          eq.essential[i].push_back(a);
        }
        eq.margins[i].assign(game.num_actions(i), 0.0);
      }
      out.equilibrium = std::move(eq);
    } else {
      LogInfo("no equilibrium reference: " + interior.message);
    }
  }
  if (x_star) {
    Vec conserved = cfg.weight_override ? *cfg.weight_override
                                        : ConservedWeights(game);
    out.unweighted = MakeCouplingReference(*x_star);
    out.weighted = MakeCouplingReference(*x_star, conserved);
  }
  return out;
}

ScoreState InitialScores(const ExperimentConfig& cfg, std::uint64_t seed) {
  switch (cfg.start) {
    case StartKind::kScores:
      return cfg.y0;
    case StartKind::kProfile:
      try {
        CheckProfile(cfg.x0, cfg.game.actions());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid 'x0': ") + e.what());
      }
      return ScoresFromProfile(cfg.x0, cfg.regularizers);
    case StartKind::kRandom:
      return ScoresFromProfile(RandomInteriorProfile(cfg.game, seed),
                               cfg.regularizers);
  }
  throw std::logic_error("unreachable");
}

namespace {

Vec PlayerOmegas(const RegularizerSet& regs) {
  Vec out;
  for (const Regularizer& r : regs) out.push_back(r.Omega());
  return out;
}

void WriteTrajectoryCsv(const std::string& path, const Trajectory& traj) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "t,player,action,x,y,cum_v\n";
  for (int k = 0; k < traj.num_samples(); ++k) {
    for (int i = 0; i < traj.num_players(); ++i) {
      const Vec& x = traj.profiles[k][i];
      const Vec& y = traj.states[k][i];
      const Vec& cv = traj.cum_payoff_vec[k][i];
      for (size_t a = 0; a < x.size(); ++a) {
        f << FormatDouble(traj.times[k]) << ',' << i << ',' << a << ','
          << FormatDouble(x[a]) << ',' << FormatDouble(y[a]) << ','
          << FormatDouble(cv[a]) << '\n';
      }
    }
  }
}

struct DiagnosticsTable {
  Vec g;
  Vec g_weighted;
  std::vector<Vec> regret;  // per player
  Vec dist_to_x0;
  Vec face_mass;
};

DiagnosticsTable BuildDiagnostics(const Trajectory& traj,
                                  const RegularizerSet& regs,
                                  const DiagnosticsContext& diag) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DiagnosticsTable t;
  const int n = traj.num_samples();
  t.g.assign(n, nan);
  t.g_weighted.assign(n, nan);
  t.dist_to_x0.assign(n, 0.0);
  t.face_mass.assign(n, nan);
  t.regret.resize(traj.num_players());
  for (int i = 0; i < traj.num_players(); ++i) {
    t.regret[i] = RegretSeries(traj, i);
  }
  for (int k = 0; k < n; ++k) {
    if (diag.unweighted) {
      t.g[k] = FenchelCoupling(regs, *diag.unweighted, traj.states[k]);
      t.g_weighted[k] = FenchelCoupling(regs, *diag.weighted, traj.states[k]);
    }
    t.dist_to_x0[k] = ProfileDistance(traj.profiles[k], traj.profiles[0]);
    if (diag.equilibrium) {
      t.face_mass[k] = FaceMass(traj.profiles[k], diag.equilibrium->essential);
    }
  }
  return t;
}

void WriteDiagnosticsCsv(const std::string& path, const Trajectory& traj,
                         const DiagnosticsTable& table) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "t,G,G_weighted";
  for (int i = 0; i < traj.num_players(); ++i) f << ",regret_" << (i + 1);
  f << ",dist_to_x0,face_mass\n";
  for (int k = 0; k < traj.num_samples(); ++k) {
    f << FormatDouble(traj.times[k]) << ',' << FormatDouble(table.g[k]) << ','
      << FormatDouble(table.g_weighted[k]);
    for (int i = 0; i < traj.num_players(); ++i) {
      f << ',' << FormatDouble(table.regret[i][k]);
    }
    f << ',' << FormatDouble(table.dist_to_x0[k]) << ','
      << FormatDouble(table.face_mass[k]) << '\n';
  }
}

}  // namespace

int CmdSimulate(const ExperimentConfig& cfg, const std::string& out_dir) {
  RegularizerSet regs = MakeRegularizers(cfg.game, cfg.regularizers);
  ScoreState y0 = InitialScores(cfg, cfg.seed);
  DiagnosticsContext diag = ResolveDiagnostics(cfg);
  if (cfg.analyses.coupling && !diag.unweighted) {
    throw ConfigError(
        "coupling analysis needs an equilibrium reference; set 'x_star'");
  }

  IntegrateOptions opts{.horizon = cfg.horizon,
                        .step = cfg.step,
                        .method = cfg.method,
                        .sample_every = cfg.sample_every};
  Trajectory traj;
  try {
    traj = Integrate(cfg.game, regs, y0, opts);
  } catch (const DivergedError& e) {
    LogError("integration diverged; last valid time " +
             FormatDouble(e.last_valid_time()));
    return 3;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  std::filesystem::create_directories(out_dir);
  DiagnosticsTable table = BuildDiagnostics(traj, regs, diag);
  WriteTrajectoryCsv(out_dir + "/trajectory.csv", traj);
  WriteDiagnosticsCsv(out_dir + "/diagnostics.csv", traj, table);
  LogInfo("wrote " + out_dir + "/trajectory.csv (" +
          std::to_string(traj.num_samples()) + " samples)");
  return 0;
}

Trajectory ReadTrajectoryCsv(const std::string& path, const Game& game,
                             const RegularizerSet& regs) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open trajectory file: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "t,player,action,x,y,cum_v") {
    throw ConfigError("malformed trajectory CSV: unexpected header");
  }

  int rows_per_sample = 0;
  for (int i = 0; i < game.num_players(); ++i) {
    rows_per_sample += game.num_actions(i);
  }

  Trajectory traj;
  int row_in_sample = 0;
  ScoreState y;
  MixedProfile x;
  ScoreState cv;
  auto reset_sample = [&] {
    y.scores.assign(game.num_players(), {});
    x.strategies.assign(game.num_players(), {});
    cv.scores.assign(game.num_players(), {});
    for (int i = 0; i < game.num_players(); ++i) {
      y[i].assign(game.num_actions(i), 0.0);
      x[i].assign(game.num_actions(i), 0.0);
      cv[i].assign(game.num_actions(i), 0.0);
    }
  };
  reset_sample();
  double t_current = 0.0;

  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<std::string, 6> cell;
    size_t start = 0;
    for (int c = 0; c < 6; ++c) {
      size_t comma = line.find(',', start);
      if (c < 5 && comma == std::string::npos) {
        throw ConfigError("malformed trajectory CSV at line " +
                          std::to_string(line_no));
      }
      cell[c] = line.substr(start, comma == std::string::npos
                                       ? std::string::npos
                                       : comma - start);
      start = comma + 1;
    }
    try {
      double t = std::stod(cell[0]);
      int player = std::stoi(cell[1]);
      int action = std::stoi(cell[2]);
      if (player < 0 || player >= game.num_players() || action < 0 ||
          action >= game.num_actions(player)) {
        throw std::out_of_range("player/action id");
      }
      x[player][action] = std::stod(cell[3]);
      y[player][action] = std::stod(cell[4]);
      cv[player][action] = std::stod(cell[5]);
      t_current = t;
    } catch (const std::exception&) {
      throw ConfigError("malformed trajectory CSV at line " +
                        std::to_string(line_no));
    }
    if (++row_in_sample == rows_per_sample) {
      traj.times.push_back(t_current);
      traj.states.push_back(y);
      traj.profiles.push_back(x);
      traj.cum_payoff_vec.push_back(cv);
      // The realized-payoff integral is recovered through the conjugate:
      // d/dt h*(y(t)) = <Q(y), dy/dt> = u(x(t)).
      Vec cu(game.num_players(), 0.0);
      for (int i = 0; i < game.num_players(); ++i) {
        double base = regs[i].Conjugate(traj.states[0][i]);
        cu[i] = regs[i].Conjugate(y[i]) - base;
      }
      traj.cum_utility.push_back(cu);
      row_in_sample = 0;
      reset_sample();
    }
  }
  if (row_in_sample != 0) {
    throw ConfigError("malformed trajectory CSV: truncated final sample");
  }
  if (traj.times.empty()) throw ConfigError("trajectory CSV has no samples");
  traj.meta.game_hash = game.Hash();
  if (traj.num_samples() > 1) traj.meta.step = traj.times[1] - traj.times[0];
  return traj;
}

namespace {

nlohmann::ordered_json RecurrenceToJson(const RecurrenceReport& rep) {
  nlohmann::ordered_json j;
  j["epsilon"] = rep.epsilon;
  j["t_min"] = rep.t_min;
  if (rep.first_return_time) {
    j["first_return_time"] = *rep.first_return_time;
  } else {
    j["first_return_time"] = nullptr;
  }
  j["min_distance_after_burn_in"] = rep.min_distance_after_burn_in;
  j["n_returns"] = rep.n_returns;
  return j;
}

std::string ReportToText(const nlohmann::ordered_json& j,
                         const std::string& format) {
  if (format == "csv") {
    std::ostringstream out;
    out << "key,value\n";
    for (auto it = j.begin(); it != j.end(); ++it) {
      out << it.key() << ',' << it.value().dump() << '\n';
    }
    return out.str();
  }
  return j.dump(2) + "\n";
}

}  // namespace

int CmdAnalyze(const std::string& trajectory_path, const ExperimentConfig& cfg,
               const std::string& out_dir, std::string* report_out,
               const std::string& format) {
  RegularizerSet regs = MakeRegularizers(cfg.game, cfg.regularizers);
  Trajectory traj = ReadTrajectoryCsv(trajectory_path, cfg.game, regs);
  DiagnosticsContext diag = ResolveDiagnostics(cfg);

  nlohmann::ordered_json rep;
  if (diag.unweighted) {
    rep["G_max_dev"] = MaxCouplingDeviation(regs, *diag.unweighted, traj);
    rep["G_weighted_max_dev"] =
        MaxCouplingDeviation(regs, *diag.weighted, traj);
  }

  // min over players and samples of Omega_i / t - R_i(t).
  Vec omegas = PlayerOmegas(regs);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < traj.num_players(); ++i) {
    Vec r = RegretSeries(traj, i);
    for (int k = 0; k < traj.num_samples(); ++k) {
      if (!(traj.times[k] > 0.0)) continue;
      margin = std::min(margin, omegas[i] / traj.times[k] - r[k]);
    }
  }
  rep["regret_margin"] = margin;

  if (cfg.analyses.recurrence) {
    RecurrenceReport rec = RecurrenceStats(traj, cfg.analyses.recurrence->epsilon,
                                           cfg.analyses.recurrence->t_min);
    rep["recurrence"] = RecurrenceToJson(rec);
    if (rec.first_return_time) {
      rep["first_return_time"] = *rec.first_return_time;
    } else {
      rep["first_return_time"] = nullptr;
    }
  }

  if (diag.equilibrium) {
    SupportClassification cls = ClassifySupport(traj, *diag.equilibrium, 1e-2);
    rep["classification"] = SupportVerdictName(cls.verdict);
    rep["face_mass_final"] = cls.final_face_mass;
  }

  rep["max_score_difference"] =
      MaxScoreDifference(traj, DefaultBenchmark(cfg.game));

  if (cfg.analyses.divergence) {
    const DivergenceSettings& ds = *cfg.analyses.divergence;
    std::uint64_t state = cfg.seed * 0x9e3779b97f4a7c15ull + 1;
    auto next_unit = [&state]() {
      state += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = state;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      z ^= z >> 31;
      return static_cast<double>(z >> 11) * 0x1.0p-53;
    };
    double max_abs = 0.0;
    int skipped = 0;
    std::vector<int> benchmark = DefaultBenchmark(cfg.game);
    for (int s = 0; s < ds.count; ++s) {
      ReducedState z;
      z.benchmark = benchmark;
      z.diffs.resize(cfg.game.num_players());
      for (int i = 0; i < cfg.game.num_players(); ++i) {
        for (int a = 0; a + 1 < cfg.game.num_actions(i); ++a) {
          z.diffs[i].push_back((2.0 * next_unit() - 1.0) * ds.range);
        }
      }
      DivergenceCheck chk = DivergenceEstimate(cfg.game, regs, z, ds.delta);
      if (chk.skipped_at_kink) {
        ++skipped;
      } else {
        max_abs = std::max(max_abs, std::fabs(chk.value));
      }
    }
    rep["divergence_max_abs"] = max_abs;
    rep["divergence_skipped_at_kink"] = skipped;
  }

  std::string text = ReportToText(rep, format);
  if (report_out != nullptr) *report_out = text;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream f(out_dir + "/report.json");
    if (!f) throw ConfigError("cannot write report.json");
    f << rep.dump(2) << '\n';
  }
  return 0;
}

int CmdEquilibrium(const Game& game, const std::string& out_dir,
                   std::string* report_out, const std::string& format) {
  if (game.num_players() != 2 || game.form() != GameForm::kPolymatrix ||
      game.edges().size() != 1) {
    throw ConfigError(
        "equilibrium command needs a 2-player game (one edge); use "
        "'x_star' overrides for larger games");
  }
  EquilibriumReport eq = MaxSupportEquilibrium(game.TwoPlayerBaseMatrix());
  nlohmann::ordered_json j;
  j["value"] = eq.value;
  j["x_star"] = {eq.x_star[0], eq.x_star[1]};
  j["essential"] = eq.essential;
  j["margins"] = {eq.margins[0], eq.margins[1]};
  std::string text = ReportToText(j, format);
  if (report_out != nullptr) *report_out = text;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream f(out_dir + "/equilibrium.json");
    if (!f) throw ConfigError("cannot write equilibrium.json");
    f << j.dump(2) << '\n';
  }
  return 0;
}

namespace {

struct SweepRow {
  std::uint64_t seed = 0;
  std::string regularizers;
  double g_dev = std::numeric_limits<double>::quiet_NaN();
  double regret_margin = std::numeric_limits<double>::quiet_NaN();
  std::string classification;
  std::optional<double> first_return_time;
  bool diverged = false;
};

SweepRow RunSweepCell(const ExperimentConfig& cfg,
                      const std::vector<RegularizerKind>& kinds,
                      std::uint64_t seed) {
  SweepRow row;
  row.seed = seed;
  for (size_t i = 0; i < kinds.size(); ++i) {
    if (i > 0) row.regularizers += '+';
    row.regularizers += RegularizerKindName(kinds[i]);
  }

  RegularizerSet regs = MakeRegularizers(cfg.game, kinds);
  ScoreState y0 =
      ScoresFromProfile(RandomInteriorProfile(cfg.game, seed), kinds);
  IntegrateOptions opts{.horizon = cfg.horizon,
                        .step = cfg.step,
                        .method = cfg.method,
                        .sample_every = cfg.sample_every};
  Trajectory traj;
  try {
    traj = Integrate(cfg.game, regs, y0, opts);
  } catch (const DivergedError&) {
    row.diverged = true;
    row.classification = "diverged";
    return row;
  }

  DiagnosticsContext diag = ResolveDiagnostics(cfg);
  if (diag.weighted) {
    row.g_dev = MaxCouplingDeviation(regs, *diag.weighted, traj);
  }
  Vec omegas = PlayerOmegas(regs);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < traj.num_players(); ++i) {
    Vec r = RegretSeries(traj, i);
    for (int k = 0; k < traj.num_samples(); ++k) {
      if (!(traj.times[k] > 0.0)) continue;
      margin = std::min(margin, omegas[i] / traj.times[k] - r[k]);
    }
  }
  row.regret_margin = margin;

  if (diag.equilibrium) {
    SupportClassification cls = ClassifySupport(traj, *diag.equilibrium, 1e-2);
    row.classification = SupportVerdictName(cls.verdict);
  } else {
    row.classification = "unknown";
  }
  RecurrenceSettings rec =
      cfg.analyses.recurrence.value_or(RecurrenceSettings{});
  if (traj.times.back() > rec.t_min) {
    RecurrenceReport rr = RecurrenceStats(traj, rec.epsilon, rec.t_min);
    row.first_return_time = rr.first_return_time;
  }
  return row;
}

}  // namespace

int CmdSweep(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (!cfg.sweep) throw ConfigError("missing field 'sweep'");
  const SweepSettings& sw = *cfg.sweep;

  struct Cell {
    std::vector<RegularizerKind> kinds;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& kinds : sw.regularizer_sets) {
    for (int s = 0; s < sw.n_seeds; ++s) {
      cells.push_back({kinds, cfg.seed + static_cast<std::uint64_t>(s)});
    }
  }

  std::vector<SweepRow> rows(cells.size());
  std::atomic<size_t> next{0};
  unsigned n_workers = std::min<unsigned>(
      std::max(1u, std::thread::hardware_concurrency()),
      static_cast<unsigned>(cells.size()));
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        size_t k = next.fetch_add(1);
        if (k >= cells.size()) return;
        rows[k] = RunSweepCell(cfg, cells[k].kinds, cells[k].seed);
      }
    });
  }
  for (std::thread& w : workers) w.join();

  std::filesystem::create_directories(out_dir);
  std::ofstream f(out_dir + "/summary.csv");
  if (!f) throw ConfigError("cannot write summary.csv");
  f << "config_hash,seed,regularizers,G_max_dev,regret_margin,classification,"
       "first_return_time\n";
  for (const SweepRow& row : rows) {
    f << cfg.config_hash << ',' << row.seed << ',' << row.regularizers << ','
      << FormatDouble(row.g_dev) << ',' << FormatDouble(row.regret_margin)
      << ',' << row.classification << ','
      << (row.first_return_time ? FormatDouble(*row.first_return_time) : "")
      << '\n';
  }
  LogInfo("wrote " + out_dir + "/summary.csv (" + std::to_string(rows.size()) +
          " runs)");
  return 0;
}

int RunMain(int argc, char** argv) {
  InitLoggingFromEnv();
  CLI::App app{"FoReL dynamics simulator for constant-sum polymatrix games"};
  app.require_subcommand(1);

  std::string config_path;
  std::string game_path;
  std::string out_dir = ".";
  std::string trajectory_path;
  std::string format = "json";
  std::uint64_t seed_override = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* copt = sub->add_option("--config", config_path, "experiment config JSON");
    if (needs_config) copt->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", format, "report format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
  };

  CLI::App* simulate = app.add_subcommand("simulate", "integrate one trajectory");
  add_common(simulate, true);
  CLI::App* analyze = app.add_subcommand("analyze", "analyze a trajectory CSV");
  analyze->add_option("trajectory", trajectory_path, "trajectory.csv path")
      ->required();
  add_common(analyze, true);
  CLI::App* equilibrium =
      app.add_subcommand("equilibrium", "report the maximal-support equilibrium");
  equilibrium->add_option("--game", game_path, "game JSON path");
  add_common(equilibrium, false);
  CLI::App* sweep = app.add_subcommand("sweep", "run a grid of trajectories");
  add_common(sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (equilibrium->parsed()) {
      Game game = [&] {
        if (!game_path.empty()) return GameFromJsonFile(game_path);
        if (config_path.empty()) {
          throw ConfigError("equilibrium needs --game or --config");
        }
        return ConfigFromJsonFile(config_path).game;
      }();
      std::string text;
      int rc = CmdEquilibrium(game, out_dir, &text, format);
      std::cout << text;
      return rc;
    }

    ExperimentConfig cfg = ConfigFromJsonFile(config_path);
    if (seed_given) cfg.seed = seed_override;
    if (out_dir == "." && !cfg.output.empty()) out_dir = cfg.output;

    if (simulate->parsed()) return CmdSimulate(cfg, out_dir);
    if (sweep->parsed()) return CmdSweep(cfg, out_dir);
    if (analyze->parsed()) {
      std::string text;
      int rc = CmdAnalyze(trajectory_path, cfg, out_dir, &text, format);
      std::cout << text;
      return rc;
    }
  } catch (const ConfigError& e) {
    LogError(e.what());
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DivergedError& e) {
    std::cerr << "integration diverged; last valid time "
              << FormatDouble(e.last_valid_time()) << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace forel
