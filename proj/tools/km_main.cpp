// km: learn Kolmogorov models from rating data, evaluate them, and mine
// the deterministic association rules they imply.
#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "km/benchmark.hpp"
#include "km/dataio.hpp"
#include "km/errors.hpp"
#include "km/model_io.hpp"
#include "km/rules.hpp"
#include "km/trainer.hpp"

namespace {

using json = nlohmann::json;

struct RunConfig {
  km::TrainConfig train;
  km::EvalConfig eval;
  double min_beta = 0.5;
  std::string q2_mode_name = "sdr";

  void finalize() {
    if (q2_mode_name == "sdr") {
      train.q2_mode = km::BinaryQpMode::kSdr;
    } else if (q2_mode_name == "exhaustive") {
      train.q2_mode = km::BinaryQpMode::kExhaustive;
    } else {
      throw std::invalid_argument("q2_mode must be 'sdr' or 'exhaustive'");
    }
    train.validate();
    eval.validate();
    if (!(min_beta >= 0.0))
      throw std::invalid_argument("min_beta must be >= 0");
  }
};

json config_json(const RunConfig& c) {
  return json{
      {"train",
       {{"D", c.train.D},
        {"bcd_iters", c.train.bcd_iters},
        {"lambda", c.train.lambda},
        {"mu", c.train.mu},
        {"seed", c.train.seed},
        {"restarts", c.train.restarts},
        {"threads", c.train.threads},
        {"q2_mode", c.q2_mode_name},
        {"stop_objective", c.train.stop_objective}}},
      {"fw",
       {{"epsilon", c.train.fw.epsilon},
        {"max_iters", c.train.fw.max_iters},
        {"gap_tol", c.train.fw.gap_tol}}},
      {"sdr", {{"m_rnd", c.train.sdr.m_rnd}}},
      {"sdp",
       {{"rank", c.train.sdp.rank},
        {"tol", c.train.sdp.tol},
        {"max_sweeps", c.train.sdp.max_sweeps}}},
      {"eval",
       {{"r_max", c.eval.r_max},
        {"split_fraction", c.eval.split_fraction},
        {"split_seed", c.eval.split_seed}}},
      {"rules", {{"min_beta", c.min_beta}}}};
}

// Configuration files are flat INI-style sections mirroring the module
// configs; any value here is overridden by the matching command-line flag.
//   [train] D=8 ... / [fw] epsilon=1e-7 ... / [sdr] m_rnd=50 /
//   [sdp] rank=0 ... / [eval] r_max=5 ... / [rules] min_beta=0.5
std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw km::IoError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line, section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw km::IoError("config " + path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty() || key.empty())
      throw km::IoError("config " + path + ":" + std::to_string(lineno) +
                        ": key outside a [section]");
    kv[section + "." + key] = val;
  }
  return kv;
}

// One overridable setting: its config-file key, the CLI option bound to it,
// and how to assign a raw string to the underlying field.
struct Binding {
  std::string key;
  CLI::Option* opt = nullptr;
  std::function<void(const std::string&)> assign;
};

template <typename T>
void assign_parsed(const std::string& key, const std::string& raw, T* dst) {
  std::istringstream ss(raw);
  T v;
  if (!(ss >> v) || !(ss >> std::ws).eof())
    throw std::invalid_argument("config key " + key + ": cannot parse '" +
                                raw + "'");
  *dst = v;
}

class OptionSet {
 public:
  OptionSet(CLI::App* app, RunConfig* cfg) : app_(app), cfg_(cfg) {
    app_->add_option("--config", config_path_,
                     "INI-style config file; flags override its values");
  }

  template <typename T>
  void bind(const std::string& key, const std::string& flag, T* field,
            const std::string& help) {
    CLI::Option* opt = app_->add_option(flag, *field, help);
    bindings_.push_back(
        {key, opt, [key, field](const std::string& raw) {
           assign_parsed(key, raw, field);
         }});
  }

  // call after parsing: config file fills every field whose flag was absent
  void apply_config_file() const {
    if (config_path_.empty()) return;
    auto kv = parse_config_file(config_path_);
    for (const Binding& b : bindings_) {
      auto it = kv.find(b.key);
      if (it == kv.end()) continue;
      if (b.opt->count() == 0) b.assign(it->second);
      kv.erase(it);
    }
    if (!kv.empty())
      throw std::invalid_argument("config key not recognized here: " +
                                  kv.begin()->first);
  }

  const std::string& config_path() const { return config_path_; }

 private:
  CLI::App* app_;
  RunConfig* cfg_;
  std::string config_path_;
  std::vector<Binding> bindings_;
};

void bind_train_options(OptionSet& o, RunConfig& c) {
  o.bind("train.D", "--D", &c.train.D, "latent dimension (elementary events)");
  o.bind("train.bcd_iters", "--bcd-iters", &c.train.bcd_iters,
         "BCD sweeps per restart");
  o.bind("train.lambda", "--lambda", &c.train.lambda, "l2 penalty on theta");
  o.bind("train.mu", "--mu", &c.train.mu, "l1 penalty on psi");
  o.bind("train.seed", "--seed", &c.train.seed, "master RNG seed");
  o.bind("train.restarts", "--restarts", &c.train.restarts,
         "independent seeded restarts");
  o.bind("train.threads", "--threads", &c.train.threads,
         "worker threads for per-user/per-item subproblems");
  o.bind("train.q2_mode", "--q2-mode", &c.q2_mode_name,
         "indicator solver: sdr or exhaustive");
  o.bind("train.stop_objective", "--stop-objective", &c.train.stop_objective,
         "stop restarts once the best objective reaches this (<0 off)");
  o.bind("fw.epsilon", "--fw-epsilon", &c.train.fw.epsilon,
         "FW displacement stopping threshold");
  o.bind("fw.max_iters", "--fw-max-iters", &c.train.fw.max_iters,
         "FW iteration cap");
  o.bind("fw.gap_tol", "--fw-gap-tol", &c.train.fw.gap_tol,
         "optional FW duality-gap stop (0 off)");
  o.bind("sdr.m_rnd", "--sdr-m-rnd", &c.train.sdr.m_rnd,
         "Gaussian rounding draws per indicator solve");
  o.bind("sdp.rank", "--sdp-rank", &c.train.sdp.rank,
         "Gram factor rank (0 = auto)");
  o.bind("sdp.tol", "--sdp-tol", &c.train.sdp.tol,
         "SDP per-sweep relative decrease tolerance");
  o.bind("sdp.max_sweeps", "--sdp-max-sweeps", &c.train.sdp.max_sweeps,
         "SDP sweep cap");
}

void bind_eval_options(OptionSet& o, RunConfig& c) {
  o.bind("eval.r_max", "--r-max", &c.eval.r_max, "maximum rating R_max");
  o.bind("eval.split_fraction", "--split-fraction", &c.eval.split_fraction,
         "train fraction for splits");
  o.bind("eval.split_seed", "--split-seed", &c.eval.split_seed,
         "seed for splits");
}

void emit_report(const json& report, const std::string& path) {
  if (path.empty()) {
    std::cout << report.dump() << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw km::IoError("cannot open for writing: " + path);
  out << report.dump(2) << "\n";
  if (!out) throw km::IoError("write failure: " + path);
}

json trace_json(const km::TrainTrace& t) {
  return json{{"objective", t.objective},
              {"objective_raw", t.objective_raw},
              {"final_objective", t.objective.back()},
              {"final_objective_raw", t.final_objective_raw},
              {"final_rmse", t.final_rmse},
              {"best_restart", t.best_restart},
              {"best_restart_seed", t.best_restart_seed},
              {"restart_objectives", t.restart_objectives},
              {"guard_rejections", t.guard_rejections},
              {"fw_guard_uses", t.fw_guard_uses},
              {"max_final_fw_gap", t.max_final_fw_gap}};
}

// ---------------------------------------------------------------- train ---

int cmd_train(RunConfig& cfg, const std::string& ratings_path,
              const std::string& out_model, const std::string& out_trace,
              const std::string& out_report) {
  cfg.finalize();
  const km::ObservationSet obs =
      km::load_ratings_file(ratings_path, cfg.eval.r_max);
  auto [model, trace] = km::train(obs, cfg.train);
  km::save_model(model, out_model);
  if (!out_trace.empty()) km::write_trace_csv(trace, obs.size(), out_trace);

  json report;
  report["command"] = "train";
  report["config"] = config_json(cfg);
  report["input"] = {{"path", ratings_path},
                     {"digest", km::file_digest(ratings_path)},
                     {"records", obs.size()},
                     {"users", obs.num_users()},
                     {"items", obs.num_items()}};
  report["results"] = trace_json(trace);
  report["outputs"] = {{"model", out_model}, {"trace", out_trace}};
  emit_report(report, out_report);

  std::cout << "trained D=" << cfg.train.D << " on " << obs.size()
            << " records: objective " << trace.objective.back() << ", rmse "
            << trace.final_rmse << " (restart " << trace.best_restart << ")\n";
  return 0;
}

// ------------------------------------------------------------- evaluate ---

int cmd_evaluate(RunConfig& cfg, const std::string& model_path,
                 const std::string& ratings_path,
                 const std::string& out_report) {
  cfg.finalize();
  const km::KolmogorovModel model = km::load_model(model_path);
  const km::ObservationSet obs =
      km::load_ratings_file(ratings_path, cfg.eval.r_max);

  km::ColdStartStats cold;
  const double score = km::nrmse(model, obs, cfg.eval.r_max, &cold);

  // residual summaries per entity: count + rmse, worst first
  struct Agg {
    std::int64_t id;
    int count;
    double sq;
  };
  std::map<std::int64_t, std::pair<int, double>> by_user, by_item;
  for (const km::Observation& ob : obs.records()) {
    const std::int64_t uid = obs.users().external(ob.user);
    const std::int64_t iid = obs.items().external(ob.item);
    double pred = 1.0;
    const auto mu = model.users().find(uid);
    const auto mi = model.items().find(iid);
    if (mu && mi) {
      pred = model.theta(*mu).dot(model.psi(*mi));
    } else if (mu) {
      pred = 1.0;
    } else if (mi) {
      pred = model.psi(*mi).support_size() / double(model.D());
    }
    const double r = pred - ob.p;
    auto& u = by_user[uid];
    u.first++, u.second += r * r;
    auto& i = by_item[iid];
    i.first++, i.second += r * r;
  }
  auto summarize = [](const std::map<std::int64_t, std::pair<int, double>>& m) {
    std::vector<Agg> rows;
    rows.reserve(m.size());
    for (const auto& [id, cs] : m) rows.push_back({id, cs.first, cs.second});
    std::sort(rows.begin(), rows.end(), [](const Agg& a, const Agg& b) {
      const double ra = a.sq / a.count, rb = b.sq / b.count;
      return ra != rb ? ra > rb : a.id < b.id;
    });
    json out = json::array();
    for (const Agg& a : rows)
      out.push_back({{"id", a.id},
                     {"count", a.count},
                     {"rmse", std::sqrt(a.sq / a.count)}});
    return out;
  };

  json report;
  report["command"] = "evaluate";
  report["config"] = config_json(cfg);
  report["input"] = {{"model", model_path},
                     {"model_digest", km::file_digest(model_path)},
                     {"ratings", ratings_path},
                     {"ratings_digest", km::file_digest(ratings_path)},
                     {"records", obs.size()}};
  report["results"] = {{"nrmse", score},
                       {"cold_start",
                        {{"unknown_users", cold.unknown_users},
                         {"unknown_items", cold.unknown_items},
                         {"affected_records", cold.affected_records}}},
                       {"per_user", summarize(by_user)},
                       {"per_item", summarize(by_item)}};
  emit_report(report, out_report);

  std::cout << "nrmse " << score << " over " << obs.size() << " records";
  if (cold.affected_records > 0)
    std::cout << " (cold-start: " << cold.affected_records << " records, "
              << cold.unknown_users << " unknown users, " << cold.unknown_items
              << " unknown items)";
  std::cout << "\n";
  return 0;
}

// -------------------------------------------------------------- predict ---

int cmd_predict(const std::string& model_path, std::int64_t user,
                std::int64_t item) {
  const km::KolmogorovModel model = km::load_model(model_path);
  const double p = km::predict(model, user, item);
  std::cout << "P[user " << user << " likes item " << item << "] = " << p
            << "  (dislikes: " << km::predict_complement(model, user, item)
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------- rules ---

int cmd_rules(RunConfig& cfg, const std::string& model_path,
              const std::string& out_report) {
  if (!(cfg.min_beta >= 0.0))
    throw std::invalid_argument("min_beta must be >= 0");
  const km::KolmogorovModel model = km::load_model(model_path);
  const km::RuleReport rep = km::mine_rules(model, cfg.min_beta);

  std::cout << "maximally influential set M (" << rep.maximal_set.size()
            << " items):";
  for (std::int64_t id : rep.maximal_set) std::cout << " " << id;
  std::cout << "\n";
  std::cout << "items with beta >= " << cfg.min_beta << ":\n";
  std::vector<int> scored;
  for (int i = 0; i < model.num_items(); ++i)
    if (rep.beta[i] >= cfg.min_beta) scored.push_back(i);
  std::sort(scored.begin(), scored.end(), [&](int a, int b) {
    return rep.beta[a] != rep.beta[b]
               ? rep.beta[a] > rep.beta[b]
               : model.items().external(a) < model.items().external(b);
  });
  for (int i : scored)
    std::cout << "  item " << model.items().external(i) << "  beta "
              << rep.beta[i] << "\n";
  const size_t shown = std::min<size_t>(rep.rules.size(), 50);
  for (size_t k = 0; k < shown; ++k) {
    const km::Rule& r = rep.rules[k];
    if (r.likes)
      std::cout << "  likes " << r.if_item << " => likes " << r.then_item
                << "\n";
    else
      std::cout << "  dislikes " << r.if_item << " => dislikes " << r.then_item
                << "\n";
  }
  if (rep.rules.size() > shown)
    std::cout << "  ... (" << rep.rules.size() << " rules total)\n";

  if (!out_report.empty()) km::save_rule_report(rep, model, out_report);
  return 0;
}

// ------------------------------------------------------------ bench-sdr ---

int cmd_bench_sdr(km::SdrBenchConfig& bench, const std::string& out_csv) {
  const std::vector<km::SdrBenchRow> rows = km::sdr_benchmark(bench);
  std::cout << "D,instances,mismatches,rate\n";
  std::ostringstream csv;
  csv << "D,instances,mismatches,rate\n";
  for (const km::SdrBenchRow& r : rows) {
    std::ostringstream line;
    line << r.D << ',' << r.instances << ',' << r.mismatches << ','
         << r.rate() << "\n";
    std::cout << line.str();
    csv << line.str();
  }
  if (!out_csv.empty()) {
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw km::IoError("cannot open for writing: " + out_csv);
    out << csv.str();
  }
  return 0;
}

// ---------------------------------------------------------- grid-search ---

int cmd_grid_search(RunConfig& cfg, const std::string& ratings_path,
                    const std::string& lambda_list, const std::string& mu_list,
                    double val_fraction, const std::string& out_table,
                    const std::string& out_report) {
  cfg.finalize();
  auto parse_list = [](const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) v.push_back(std::stod(tok));
    if (v.empty()) throw std::invalid_argument("empty grid list: " + s);
    return v;
  };
  const auto lambdas = parse_list(lambda_list);
  const auto mus = parse_list(mu_list);
  const km::ObservationSet obs =
      km::load_ratings_file(ratings_path, cfg.eval.r_max);
  const km::GridSearchResult g = km::grid_search(
      obs, lambdas, mus, cfg.train, cfg.eval.r_max, val_fraction);
  if (!out_table.empty()) km::write_grid_csv(g, out_table);

  json table = json::array();
  for (const km::GridPoint& p : g.table)
    table.push_back(
        {{"lambda", p.lambda}, {"mu", p.mu}, {"val_nrmse", p.val_nrmse}});
  json report;
  report["command"] = "grid-search";
  report["config"] = config_json(cfg);
  report["input"] = {{"path", ratings_path},
                     {"digest", km::file_digest(ratings_path)},
                     {"records", obs.size()}};
  report["results"] = {{"best_lambda", g.best_lambda},
                       {"best_mu", g.best_mu},
                       {"val_fraction", val_fraction},
                       {"table", table}};
  report["outputs"] = {{"table", out_table}};
  emit_report(report, out_report);

  std::cout << "best lambda " << g.best_lambda << ", mu " << g.best_mu << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kolmogorov model learning and rule mining"};
  app.require_subcommand(1);

  RunConfig cfg;

  // train
  auto* train = app.add_subcommand("train", "fit a model to a ratings file");
  OptionSet train_opts(train, &cfg);
  std::string ratings, out_model = "model.json", out_trace, out_report;
  train->add_option("--ratings", ratings, "ratings file")->required();
  train->add_option("--out-model", out_model, "model JSON output");
  train->add_option("--out-trace", out_trace, "objective trace CSV output");
  train->add_option("--out-report", out_report,
                    "run-report JSON (stdout JSON line when omitted)");
  bind_train_options(train_opts, cfg);
  bind_eval_options(train_opts, cfg);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a model on ratings");
  OptionSet eval_opts(evaluate, &cfg);
  std::string model_path;
  evaluate->add_option("--model", model_path, "model JSON")->required();
  evaluate->add_option("--ratings", ratings, "ratings file")->required();
  evaluate->add_option("--out-report", out_report, "report JSON output");
  bind_eval_options(eval_opts, cfg);

  // predict
  auto* predict = app.add_subcommand("predict", "one probability lookup");
  std::int64_t user = 0, item = 0;
  predict->add_option("--model", model_path, "model JSON")->required();
  predict->add_option("--user", user, "user id")->required();
  predict->add_option("--item", item, "item id")->required();

  // rules
  auto* rules = app.add_subcommand("rules", "mine association rules");
  OptionSet rules_opts(rules, &cfg);
  rules->add_option("--model", model_path, "model JSON")->required();
  rules->add_option("--out-report", out_report, "RuleReport JSON output");
  rules_opts.bind("rules.min_beta", "--min-beta", &cfg.min_beta,
                  "influence-score filter for the rule listing");

  // bench-sdr
  auto* bench = app.add_subcommand(
      "bench-sdr", "SDR vs exhaustive mismatch rate on synthetic data");
  km::SdrBenchConfig bench_cfg;
  bench->add_option("--D", bench_cfg.dims, "dimensions to test");
  bench->add_option("--users", bench_cfg.users, "synthetic users");
  bench->add_option("--items", bench_cfg.items, "synthetic items");
  bench->add_option("--bcd-iters", bench_cfg.bcd_iters, "BCD sweeps");
  bench->add_option("--reps", bench_cfg.reps, "datasets per D");
  bench->add_option("--seed", bench_cfg.seed, "RNG seed");
  bench->add_option("--sdr-m-rnd", bench_cfg.sdr.m_rnd, "rounding draws");
  std::string candidate_mode = "sdr";
  bench->add_option("--candidate-mode", candidate_mode,
                    "solver under test: sdr or exhaustive (sanity, rate 0)");
  std::string out_csv;
  bench->add_option("--out-csv", out_csv, "rate table CSV output");

  // grid-search
  auto* grid = app.add_subcommand("grid-search",
                                  "pick lambda/mu on a validation split");
  OptionSet grid_opts(grid, &cfg);
  std::string lambda_list = "0", mu_list = "0", out_table;
  double val_fraction = 0.9;
  grid->add_option("--ratings", ratings, "ratings file")->required();
  grid->add_option("--lambda-grid", lambda_list, "comma-separated values");
  grid->add_option("--mu-grid", mu_list, "comma-separated values");
  grid->add_option("--val-fraction", val_fraction,
                   "fraction kept for fitting (rest validates)");
  grid->add_option("--out-table", out_table, "grid CSV output");
  grid->add_option("--out-report", out_report, "report JSON output");
  bind_train_options(grid_opts, cfg);
  bind_eval_options(grid_opts, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // config/usage problems are exit 1
  }

  try {
    if (*train) {
      train_opts.apply_config_file();
      return cmd_train(cfg, ratings, out_model, out_trace, out_report);
    }
    if (*evaluate) {
      eval_opts.apply_config_file();
      return cmd_evaluate(cfg, model_path, ratings, out_report);
    }
    if (*predict) return cmd_predict(model_path, user, item);
    if (*rules) {
      rules_opts.apply_config_file();
      return cmd_rules(cfg, model_path, out_report);
    }
    if (*bench) {
      if (candidate_mode == "exhaustive")
        bench_cfg.candidate_mode = km::BinaryQpMode::kExhaustive;
      else if (candidate_mode != "sdr")
        throw std::invalid_argument("candidate-mode must be sdr or exhaustive");
      return cmd_bench_sdr(bench_cfg, out_csv);
    }
    if (*grid) {
      grid_opts.apply_config_file();
      return cmd_grid_search(cfg, ratings, lambda_list, mu_list, val_fraction,
                             out_table, out_report);
    }
  } catch (const km::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const km::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
