#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "predplan/costmodel.hpp"
#include "predplan/engine.hpp"
#include "predplan/evaluator.hpp"
#include "predplan/expr.hpp"
#include "predplan/generator.hpp"
#include "predplan/oracle.hpp"
#include "predplan/orderp.hpp"
#include "predplan/planner.hpp"

namespace {

using namespace predplan;

struct ModelFlags {
  std::string variant = "simplified";
  double epsilon = 1.0;
  double kappa = 0.0;
  double kappa_prime = 0.0;
  double theta = 0.9;
};

void add_model_flags(CLI::App& cmd, ModelFlags& flags) {
  cmd.add_option("--cost-model", flags.variant, "basic, simplified, or hdd")
      ->check(CLI::IsMember({"basic", "simplified", "hdd"}));
  cmd.add_option("--epsilon", flags.epsilon, "set-op/atom cost ratio (basic)");
  cmd.add_option("--kappa", flags.kappa, "per-atom overhead");
  cmd.add_option("--kappa-prime", flags.kappa_prime,
                 "per-set-op overhead (basic)");
  cmd.add_option("--theta", flags.theta, "full-scan threshold (hdd)");
}

CostModel make_model(const ModelFlags& flags, double total_records) {
  CostModel model;
  if (flags.variant == "basic") {
    model.variant = CostModel::Variant::Basic;
  } else if (flags.variant == "hdd") {
    model.variant = CostModel::Variant::Hdd;
  } else {
    model.variant = CostModel::Variant::Simplified;
  }
  model.epsilon = flags.epsilon;
  model.kappa = flags.kappa;
  model.kappa_prime = flags.kappa_prime;
  model.theta = flags.theta;
  model.total_records = total_records;
  return model;
}

struct ExprFlags {
  std::string expr;
  std::string expr_file;
};

void add_expr_flags(CLI::App& cmd, ExprFlags& flags) {
  auto* inline_opt =
      cmd.add_option("--expr", flags.expr, "predicate expression text");
  cmd.add_option("--expr-file", flags.expr_file,
                 "file holding the predicate expression")
      ->excludes(inline_opt);
}

std::string read_expr(const ExprFlags& flags) {
  if (!flags.expr.empty()) return flags.expr;
  if (flags.expr_file.empty()) {
    throw std::runtime_error("one of --expr or --expr-file is required");
  }
  std::ifstream in(flags.expr_file);
  if (!in) {
    throw std::runtime_error("cannot open expression file " + flags.expr_file);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

// Atom selectivities come from the data when a table is given; parsed
// defaults stay otherwise.
void attach_stats(PredicateTree& tree, const Table& table) {
  const ColumnStats stats = build_stats(table);
  for (int id = 1; id <= tree.atom_count(); ++id) {
    tree.atom(id).selectivity = estimate_selectivity(stats, tree.atom(id));
  }
}

Plan plan_with(const std::string& strategy, const PredicateTree& tree,
               const FractionEvaluator& evaluator, const CostModel& model) {
  if (strategy == "shallowfish") return shallow_fish(tree, evaluator, model);
  if (strategy == "deepfish") return deep_fish(tree, evaluator, model);
  if (strategy == "noforopt") {
    return execute_no_or_opt(tree, evaluator, model);
  }
  if (strategy == "oracle") {
    const OracleReport report = exhaustive_optimal(tree, evaluator, model);
    Session<FractionEvaluator> session(tree, evaluator, model);
    return execute_ordering(session, report.best_ordering, "oracle");
  }
  throw std::runtime_error("unknown strategy " + strategy);
}

template <typename E>
Plan run_with(const std::string& strategy, const PredicateTree& tree,
              const E& evaluator, const CostModel& model) {
  if (strategy == "shallowfish") return shallowfish_opt(tree, evaluator, model);
  if (strategy == "deepfish") return deep_fish(tree, evaluator, model);
  if (strategy == "noforopt") {
    return execute_no_or_opt(tree, evaluator, model);
  }
  throw std::runtime_error("unknown strategy " + strategy);
}

void write_table_csv(const Table& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.names.size(); ++c) {
    if (c) out << ',';
    out << table.names[c];
  }
  out << '\n';
  char buffer[64];
  for (std::size_t r = 0; r < table.row_count; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out << ',';
      const ColumnData& column = table.columns[c];
      if (const auto* ints = std::get_if<IntColumn>(&column)) {
        out << (*ints)[r];
      } else if (const auto* reals = std::get_if<RealColumn>(&column)) {
        std::snprintf(buffer, sizeof buffer, "%.17g", (*reals)[r]);
        out << buffer;
      } else {
        out << std::get<StringColumn>(column)[r];
      }
    }
    out << '\n';
  }
}

int cmd_gen(int depth, std::uint64_t seed, int instances, std::size_t rows,
            int n_max, double leaf_probability, const std::string& cost_mode,
            const std::string& out_dir) {
  GenConfig config;
  config.depth = depth;
  config.leaf_probability = leaf_probability;
  config.n_max = n_max;
  config.cost_mode = cost_mode == "varying" ? GenConfig::CostMode::Varying
                                            : GenConfig::CostMode::Uniform;
  std::filesystem::create_directories(out_dir);
  for (int k = 0; k < instances; ++k) {
    config.rng_seed = seed + static_cast<std::uint64_t>(k);
    const Instance instance = gen_instance(config, rows);
    const std::string stem =
        out_dir + "/instance_" + std::to_string(k);
    std::ofstream expr_out(stem + ".expr");
    expr_out << instance.tree.text() << '\n';
    std::ofstream csv_out(stem + ".csv");
    write_table_csv(instance.table, csv_out);
    if (!expr_out || !csv_out) {
      throw std::runtime_error("failed writing " + stem + ".{expr,csv}");
    }
    std::cout << stem << ".expr " << stem << ".csv atoms="
              << instance.tree.atom_count() << " rows="
              << instance.table.row_count << '\n';
  }
  return 0;
}

int cmd_plan(const ExprFlags& expr_flags, const std::string& data,
             const std::string& strategy, const ModelFlags& model_flags) {
  PredicateTree tree = compile(read_expr(expr_flags));
  double total_records = 0;
  if (!data.empty()) {
    const Table table = load_csv(data);
    attach_stats(tree, table);
    total_records = static_cast<double>(table.row_count);
  }
  const CostModel model = make_model(model_flags, total_records);
  const FractionEvaluator evaluator(tree);
  const Plan plan = plan_with(strategy, tree, evaluator, model);
  std::cout << plan_to_json(plan) << '\n';
  return 0;
}

int cmd_run(const ExprFlags& expr_flags, const std::string& data,
            const std::string& strategy, const ModelFlags& model_flags) {
  PredicateTree tree = compile(read_expr(expr_flags));
  const Table table = load_csv(data);
  attach_stats(tree, table);
  const CostModel model =
      make_model(model_flags, static_cast<double>(table.row_count));

  Metrics metrics;
  const BitmapEvaluator evaluator(tree, table, metrics);
  const auto start = std::chrono::steady_clock::now();
  const Plan plan = run_with(strategy, tree, evaluator, model);
  metrics.wall_time = std::chrono::steady_clock::now() - start;

  Metrics replay_metrics;
  const BitmapEvaluator replay_eval(tree, table, replay_metrics);
  const Bitmap final_set = replay_result(plan, replay_eval);
  const bool verified = verify_result(tree, table, final_set);

  std::printf("strategy       %s\n", plan.strategy.c_str());
  std::printf("rows           %zu\n", table.row_count);
  std::printf("selected       %llu\n",
              static_cast<unsigned long long>(final_set.count()));
  std::printf("evaluations    %llu\n",
              static_cast<unsigned long long>(metrics.evaluations));
  std::printf("total_cost     %.6f\n", plan.total_cost);
  std::printf("wall_time_s    %.6f\n", metrics.wall_time.count());
  std::printf("steps          ");
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    std::printf("%s%s", i ? " " : "",
                tree.atom(plan.steps[i].atom).text().c_str());
  }
  std::printf("\nverified       %s\n", verified ? "true" : "false");
  return verified ? 0 : 1;
}

// Fraction-model cost of the exact step sequence a strategy runs.
double estimate_strategy(const std::string& strategy,
                         const PredicateTree& tree,
                         const FractionEvaluator& evaluator,
                         const CostModel& model) {
  return plan_with(strategy, tree, evaluator, model).total_cost;
}

int cmd_bench(int depth, std::uint64_t seed, int instances, std::size_t rows,
              int n_max, double leaf_probability, const std::string& cost_mode,
              const ModelFlags& model_flags, const std::string& out_path) {
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot open " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << "instance,strategy,n_atoms,depth,evaluations,estimated_cost,"
         "wall_time\n";

  GenConfig config;
  config.depth = depth;
  config.leaf_probability = leaf_probability;
  config.n_max = n_max;
  config.cost_mode = cost_mode == "varying" ? GenConfig::CostMode::Varying
                                            : GenConfig::CostMode::Uniform;

  char cost_text[64];
  for (int k = 0; k < instances; ++k) {
    config.rng_seed = seed + static_cast<std::uint64_t>(k);
    const Instance instance = gen_instance(config, rows);
    const PredicateTree& tree = instance.tree;
    const CostModel model =
        make_model(model_flags, static_cast<double>(instance.table.row_count));
    const FractionEvaluator estimates(tree);

    std::vector<std::string> strategies = {"shallowfish", "deepfish",
                                           "noforopt"};
    if (tree.atom_count() <= 8) strategies.push_back("oracle");

    for (const std::string& strategy : strategies) {
      const auto start = std::chrono::steady_clock::now();
      std::uint64_t evaluations = 0;
      double estimated;
      if (strategy == "oracle") {
        const CachedBitmapEvaluator cached(tree, instance.table);
        const OracleReport report = exhaustive_optimal(tree, cached, model);
        Session<CachedBitmapEvaluator> best(tree, cached, model);
        const Plan plan =
            execute_ordering(best, report.best_ordering, "oracle");
        for (const PlanStep& step : plan.steps) {
          evaluations += static_cast<std::uint64_t>(
              step.est_fraction * cached.total() + 0.5);
        }
        Session<FractionEvaluator> est_session(tree, estimates, model);
        estimated = execute_ordering(est_session, report.best_ordering,
                                     "oracle")
                        .total_cost;
      } else {
        Metrics metrics;
        const BitmapEvaluator evaluator(tree, instance.table, metrics);
        run_with(strategy, tree, evaluator, model);
        evaluations = metrics.evaluations;
        estimated = estimate_strategy(strategy, tree, estimates, model);
      }
      const std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - start;
      std::snprintf(cost_text, sizeof cost_text, "%.10g", estimated);
      out << k << ',' << strategy << ',' << tree.atom_count() << ','
          << tree.depth() << ',' << evaluations << ',' << cost_text << ','
          << elapsed.count() << '\n';
    }
  }
  return 0;
}

int cmd_verify(std::uint64_t seed, int instances, int depth, int max_n,
               std::size_t rows, const ModelFlags& model_flags) {
  bool all_ok = true;

  // Execution correctness: every strategy's result matches per-record
  // evaluation on random instances.
  {
    GenConfig config;
    config.depth = depth;
    config.rng_seed = seed;
    int checked = 0;
    int ok = 0;
    for (int k = 0; k < instances; ++k) {
      config.rng_seed = seed + static_cast<std::uint64_t>(k);
      const Instance instance = gen_instance(config, rows);
      const CostModel model = make_model(
          model_flags, static_cast<double>(instance.table.row_count));
      for (const char* strategy : {"shallowfish", "deepfish", "noforopt"}) {
        Metrics metrics;
        const BitmapEvaluator evaluator(instance.tree, instance.table,
                                        metrics);
        Plan plan = run_with(strategy, instance.tree, evaluator, model);
        Metrics replay_metrics;
        const BitmapEvaluator replay_eval(instance.tree, instance.table,
                                          replay_metrics);
        const Bitmap final_set = replay_result(plan, replay_eval);
        ++checked;
        if (verify_result(instance.tree, instance.table, final_set)) ++ok;
      }
    }
    std::printf("correctness    %d/%d strategies verified\n", ok, checked);
    all_ok = all_ok && ok == checked;
  }

  // Depth-2 optimality: realized evaluation counts match the exhaustive
  // ordering minimum on factorial tables.
  {
    GenConfig config;
    config.depth = 2;
    config.n_max = std::min(max_n, 8);
    config.selectivity_choices = {0.2, 0.4, 0.5, 0.6, 0.8};
    int matched = 0;
    int produced = 0;
    std::uint64_t attempt = 0;
    while (produced < instances && attempt < 50u * instances) {
      config.rng_seed = seed + 1000003 * (attempt + 1);
      ++attempt;
      const Instance instance = gen_instance(config, rows);
      if (!instance.exact_joint) continue;
      ++produced;
      const CostModel model = make_model(
          model_flags, static_cast<double>(instance.table.row_count));
      const CachedBitmapEvaluator cached(instance.tree, instance.table);
      Session<CachedBitmapEvaluator> session(instance.tree, cached, model);
      const Plan shallow =
          execute_ordering(session, order_p(instance.tree), "shallowfish");
      const OracleReport report = exhaustive_optimal(
          instance.tree, cached, model, order_p(instance.tree));
      if (report.matched && shallow.total_cost <= report.best_cost + 1e-6) {
        ++matched;
      }
    }
    std::printf("optimality     %d/%d depth-2 instances at the oracle "
                "minimum\n", matched, produced);
    all_ok = all_ok && matched == produced && produced > 0;
  }

  // Prefix property on random pure chains.
  {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    const double choices[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    int ok = 0;
    for (int k = 0; k < instances; ++k) {
      const int n = 2 + static_cast<int>(rng() % 5);
      std::vector<std::pair<double, double>> atoms;
      for (int i = 0; i < n; ++i) {
        atoms.emplace_back(1.0 + static_cast<double>(rng() % 10),
                           choices[rng() % 9]);
      }
      const NodeKind kind = rng() % 2 ? NodeKind::And : NodeKind::Or;
      if (brute_prefix(kind, atoms).matched) ++ok;
    }
    std::printf("prefix         %d/%d chains satisfy the prefix property\n",
                ok, instances);
    all_ok = all_ok && ok == instances;
  }

  std::printf("verify         %s\n", all_ok ? "PASS" : "FAIL");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predicate expression planner and executor"};
  app.require_subcommand(1);

  ModelFlags model_flags;
  ExprFlags expr_flags;
  std::string data;
  std::string strategy = "shallowfish";
  std::string out_path;
  std::string cost_mode = "uniform";
  int depth = 2;
  int instances = 500;
  int n_max = 16;
  int max_n = 7;
  std::uint64_t seed = 0;
  std::size_t rows = 100000;
  double leaf_probability = 0.5;

  auto* gen = app.add_subcommand("gen", "write random instance files");
  gen->add_option("--depth", depth, "tree depth (2, 3, or 4)");
  gen->add_option("--seed", seed, "base rng seed");
  gen->add_option("--instances", instances, "number of instances");
  gen->add_option("--rows", rows, "rows per table");
  gen->add_option("--n-max", n_max, "atom cap per instance");
  gen->add_option("--leaf-probability", leaf_probability,
                  "chance a non-spine child is a leaf");
  gen->add_option("--cost-mode", cost_mode, "uniform or varying")
      ->check(CLI::IsMember({"uniform", "varying"}));
  gen->add_option("--out", out_path, "output directory")->required();

  auto* plan = app.add_subcommand("plan", "print a strategy's plan as JSON");
  add_expr_flags(*plan, expr_flags);
  plan->add_option("--data", data, "CSV table for selectivity stats");
  plan->add_option("--strategy", strategy,
                   "shallowfish, deepfish, noforopt, or oracle")
      ->check(CLI::IsMember({"shallowfish", "deepfish", "noforopt", "oracle"}));
  add_model_flags(*plan, model_flags);

  auto* run = app.add_subcommand("run", "execute a strategy over a table");
  add_expr_flags(*run, expr_flags);
  run->add_option("--data", data, "CSV table")->required();
  run->add_option("--strategy", strategy,
                  "shallowfish, deepfish, or noforopt")
      ->check(CLI::IsMember({"shallowfish", "deepfish", "noforopt"}));
  add_model_flags(*run, model_flags);

  auto* bench = app.add_subcommand(
      "bench", "sweep random instances across strategies, emit CSV");
  bench->add_option("--depth", depth, "tree depth (2, 3, or 4)");
  bench->add_option("--seed", seed, "base rng seed");
  bench->add_option("--instances", instances, "number of instances");
  bench->add_option("--rows", rows, "rows per table");
  bench->add_option("--n-max", n_max, "atom cap per instance");
  bench->add_option("--leaf-probability", leaf_probability,
                    "chance a non-spine child is a leaf");
  bench->add_option("--cost-mode", cost_mode, "uniform or varying")
      ->check(CLI::IsMember({"uniform", "varying"}));
  add_model_flags(*bench, model_flags);
  bench->add_option("--out", out_path, "CSV output path (default stdout)");

  auto* verify = app.add_subcommand("verify", "run the oracle suites");
  verify->add_option("--seed", seed, "base rng seed");
  verify->add_option("--instances", instances, "instances per suite")
      ->default_val(50);
  verify->add_option("--depth", depth, "correctness-suite tree depth");
  verify->add_option("--max-n", max_n, "atom cap for the optimality suite");
  verify->add_option("--rows", rows, "rows per table")->default_val(10000);
  add_model_flags(*verify, model_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_gen(depth, seed, instances, rows, n_max, leaf_probability,
                     cost_mode, out_path);
    }
    if (plan->parsed()) {
      return cmd_plan(expr_flags, data, strategy, model_flags);
    }
    if (run->parsed()) {
      return cmd_run(expr_flags, data, strategy, model_flags);
    }
    if (bench->parsed()) {
      return cmd_bench(depth, seed, instances, rows, n_max, leaf_probability,
                       cost_mode, model_flags, out_path);
    }
    if (verify->parsed()) {
      return cmd_verify(seed, instances, depth, max_n, rows, model_flags);
    }
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
  return 0;
}
