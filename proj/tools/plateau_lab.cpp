// Command-line front end: training runs, sweeps, oracle reports, transfer
// experiments, feature-learning comparisons, and plot emission.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "plab/oracle.hpp"
#include "plab/train.hpp"
#include "plab/xlab.hpp"

namespace {

std::vector<plab::TaskSpec> parse_task_list(const std::string& csv, int dim,
                                            double mu) {
  std::vector<plab::TaskSpec> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string name = csv.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!name.empty()) {
      int sparsity = 3;
      plab::TaskKind kind = plab::task_kind_from_name(name, &sparsity);
      out.push_back(plab::make_task(kind, dim, mu, sparsity));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw CLI::ValidationError("--tasks", "empty task list");
  return out;
}

plab::TrainConfig profile_config(const std::string& profile,
                                 std::uint64_t seed) {
  return profile == "paper" ? plab::TrainConfig::paper({}, seed)
                            : plab::TrainConfig::toy({}, seed);
}

void print_reports(const plab::TrainConfig& cfg, const plab::TrainResult& res) {
  std::printf("run finished at step %lld\n", res.last_step);
  for (std::size_t m = 0; m < res.reports.size(); ++m)
    std::printf("  %-8s %s\n", cfg.mixture.entries[m].task.name().c_str(),
                res.reports[m].format().c_str());
}

int cmd_train(const std::string& config_path, std::uint64_t seed,
              const std::string& out, bool have_seed) {
  plab::ExperimentConfig xc = plab::load_experiment_config(config_path);
  plab::TrainConfig cfg = xc.train;
  if (cfg.mixture.entries.empty())
    cfg.mixture = plab::MixtureSpec::even(xc.task_pool);
  cfg.seed = have_seed ? seed : xc.seeds.front();
  cfg.out_dir = out.empty() ? xc.out_dir : out;
  plab::TrainResult res = plab::train_icl(cfg);
  print_reports(cfg, res);
  std::printf("artifacts in %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_oracle(const std::string& task, int dim, double mu, int arity,
               long long samples) {
  int sparsity = arity;
  plab::TaskKind kind = plab::task_kind_from_name(task, &sparsity);
  if (arity > 0) sparsity = arity;
  plab::TaskSpec spec = plab::make_task(kind, dim, mu, sparsity);
  spec.validate();
  std::printf("task      %s (dim %d)\n", spec.name().c_str(), dim);

  plab::Rng rng(7, 1);
  plab::NormalizationReport norm =
      plab::normalization_constant(spec, samples, rng);
  std::printf("E[loss(g*)]  %.6f (stderr %.2e, %lld samples)\n",
              norm.no_context_loss, norm.std_error, norm.estimator_samples);
  std::printf("c            %.6f\n", norm.c);
  if (spec.modality() == plab::Modality::Boolean) {
    plab::Rng arng(7, 2);
    double acc = plab::no_context_accuracy(spec, samples, arng);
    std::printf("NC accuracy  %.6f\n", acc);
  }
  switch (spec.kind) {
    case plab::TaskKind::LinearRegression:
      std::printf("g*(x) = %.4f * sum(x)\n", spec.mu);
      break;
    case plab::TaskKind::SparseLinearRegression:
      std::printf("g*(x) = %.4f * sum(x)   (k/d * mu)\n",
                  spec.mu * spec.sparsity / spec.dim);
      break;
    case plab::TaskKind::QuadraticRegression:
      std::printf("g*(x) = %.4f * sum(x)^2   (mu/sqrt(d))\n",
                  spec.mu / std::sqrt(static_cast<double>(spec.dim)));
      break;
    case plab::TaskKind::SparseParity:
      std::printf("g*(x) = majority vote over all C(d,k) parity subsets\n");
      break;
    case plab::TaskKind::Parity:
      std::printf("g*(x) = +1 iff x is all ones, else -1\n");
      break;
    case plab::TaskKind::GaussianRetrieval:
      std::printf("g*(x) = 0\n");
      break;
    case plab::TaskKind::BooleanRetrieval:
      std::printf("g*(x) = -1 (ties broken to -1)\n");
      break;
    case plab::TaskKind::LeakyReLURegression:
      std::printf("g*(x) estimated by Monte Carlo (no closed form)\n");
      break;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic multi-task in-context-learning training lab"};
  app.require_subcommand(1);

  // train
  std::string train_config, train_out;
  std::uint64_t train_seed = 1;
  auto* train = app.add_subcommand("train", "run one training job from a JSON config");
  train->add_option("--config", train_config, "JSON config file")->required();
  auto* seed_opt = train->add_option("--seed", train_seed, "RNG seed override");
  train->add_option("--out", train_out, "output directory override");

  // sweep
  std::string sweep_tasks = "lr,qr,slr,lrelu,sp2,parity";
  std::string sweep_profile = "toy", sweep_out = "runs/sweep";
  std::vector<std::uint64_t> sweep_seeds = {1};
  int sweep_max_subset = 2, sweep_dim = 5;
  double sweep_mu = 1.0;
  long long sweep_steps = 0;
  auto* sweep = app.add_subcommand("sweep", "train every task subset and tabulate escape times");
  sweep->add_option("--tasks", sweep_tasks, "comma-separated task names");
  sweep->add_option("--max-subset", sweep_max_subset, "largest subset size");
  sweep->add_option("--profile", sweep_profile, "toy|paper")
      ->check(CLI::IsMember({"toy", "paper"}));
  sweep->add_option("--seeds", sweep_seeds)->delimiter(',');
  sweep->add_option("--dim", sweep_dim, "input dimension");
  sweep->add_option("--mu", sweep_mu, "task mean shift");
  sweep->add_option("--steps", sweep_steps, "step budget override");
  sweep->add_option("--out", sweep_out, "output directory");

  // oracle
  std::string oracle_task;
  int oracle_dim = 10, oracle_arity = 0;
  double oracle_mu = 1.0;
  long long oracle_samples = 100000;
  auto* oracle = app.add_subcommand("oracle", "report no-context oracle facts for one task");
  oracle->add_option("--task", oracle_task)->required();
  oracle->add_option("--dim", oracle_dim);
  oracle->add_option("--mu", oracle_mu);
  oracle->add_option("--arity", oracle_arity, "sparse parity / sparse linear arity");
  oracle->add_option("--samples", oracle_samples);

  // transfer
  std::string tr_from, tr_task, tr_profile = "toy", tr_out = "runs/transfer";
  std::uint64_t tr_seed = 1;
  int tr_dim = 5;
  double tr_mu = 1.0;
  long long tr_steps = 0;
  auto* transfer = app.add_subcommand("transfer", "train one task starting from a checkpoint");
  transfer->add_option("--from", tr_from, "source checkpoint file")->required();
  transfer->add_option("--task", tr_task)->required();
  transfer->add_option("--profile", tr_profile)->check(CLI::IsMember({"toy", "paper"}));
  transfer->add_option("--seed", tr_seed);
  transfer->add_option("--dim", tr_dim);
  transfer->add_option("--mu", tr_mu);
  transfer->add_option("--steps", tr_steps, "step budget override");
  transfer->add_option("--out", tr_out);

  // retrieval-transfer
  std::string rt_modality = "gaussian", rt_profile = "toy", rt_out = "runs/rtransfer";
  std::vector<std::uint64_t> rt_seeds = {1};
  int rt_dim = 10;
  double rt_mu = 1.0;
  long long rt_steps = 0;
  auto* rtransfer = app.add_subcommand(
      "retrieval-transfer", "train tasks from a matching-modality retrieval checkpoint");
  rtransfer->add_option("--modality", rt_modality)
      ->check(CLI::IsMember({"gaussian", "boolean"}));
  rtransfer->add_option("--profile", rt_profile)->check(CLI::IsMember({"toy", "paper"}));
  rtransfer->add_option("--seeds", rt_seeds)->delimiter(',');
  rtransfer->add_option("--dim", rt_dim);
  rtransfer->add_option("--mu", rt_mu);
  rtransfer->add_option("--steps", rt_steps, "step budget override");
  rtransfer->add_option("--out", rt_out);

  // fl
  int fl_d = 150, fl_h = 10, fl_hp = 100, fl_k = 15;
  std::string fl_mode, fl_out = "runs/fl";
  std::vector<std::uint64_t> fl_seeds = {1, 2, 3};
  long long fl_steps = 50000;
  auto* fl = app.add_subcommand("fl", "two-layer feature-learning comparison");
  fl->set_help_flag("--help", "print help");  // frees -h for the width option
  fl->add_option("--d", fl_d);
  fl->add_option("--h", fl_h);
  fl->add_option("--hp", fl_hp);
  fl->add_option("--k", fl_k);
  fl->add_option("--mode", fl_mode, "single|multi (default: run both and compare)")
      ->check(CLI::IsMember({"single", "multi"}));
  fl->add_option("--seeds", fl_seeds)->delimiter(',');
  fl->add_option("--steps", fl_steps);
  fl->add_option("--out", fl_out);

  // plot
  std::string plot_in, plot_metric = "train_loss", plot_out;
  auto* plot = app.add_subcommand("plot", "render metric curves from a metrics.jsonl");
  plot->add_option("--in", plot_in, "metrics.jsonl file")->required();
  plot->add_option("--metric", plot_metric, "train_loss|eval|nc_dist");
  plot->add_option("--out", plot_out, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train)
      return cmd_train(train_config, train_seed, train_out, seed_opt->count() > 0);

    if (*sweep) {
      plab::ExperimentConfig xc;
      xc.kind = plab::ExperimentKind::Sweep;
      xc.train = profile_config(sweep_profile, sweep_seeds.front());
      if (sweep_steps > 0) xc.train.steps = sweep_steps;
      xc.task_pool = parse_task_list(sweep_tasks, sweep_dim, sweep_mu);
      xc.seeds = sweep_seeds;
      xc.out_dir = sweep_out;
      xc.max_subset = sweep_max_subset;
      plab::SweepResult res = plab::run_sweep(xc);
      plab::write_sweep_csv(res, sweep_out + "/sweep_rows.csv",
                            sweep_out + "/sweep_aggregate.csv");
      for (const auto& a : res.aggregate)
        std::printf("size %d  %-8s escaped %d/%d  mean t_plateau %.1f\n",
                    a.subset_size, a.task.c_str(), a.escaped, a.runs,
                    a.mean_t_plateau);
      std::printf("rows: %s/sweep_rows.csv\n", sweep_out.c_str());
      return 0;
    }

    if (*oracle)
      return cmd_oracle(oracle_task, oracle_dim, oracle_mu, oracle_arity,
                        oracle_samples);

    if (*transfer) {
      int sparsity = 3;
      plab::TaskKind kind = plab::task_kind_from_name(tr_task, &sparsity);
      plab::TrainConfig cfg = profile_config(tr_profile, tr_seed);
      cfg.mixture = plab::MixtureSpec::even(
          {plab::make_task(kind, tr_dim, tr_mu, sparsity)});
      if (tr_steps > 0) cfg.steps = tr_steps;
      cfg.out_dir = tr_out;
      plab::TrainResult res =
          plab::train_icl_transfer(cfg, plab::load_checkpoint(tr_from));
      print_reports(cfg, res);
      return 0;
    }

    if (*rtransfer) {
      bool boolean = rt_modality == "boolean";
      plab::ExperimentConfig xc;
      xc.kind = plab::ExperimentKind::RetrievalTransfer;
      xc.train = profile_config(rt_profile, rt_seeds.front());
      if (rt_steps > 0) xc.train.steps = rt_steps;
      xc.seeds = rt_seeds;
      xc.out_dir = rt_out;
      std::vector<std::string> names =
          boolean ? std::vector<std::string>{"sp2", "parity"}
                  : std::vector<std::string>{"lr", "qr", "slr", "lrelu"};
      for (const auto& name : names) {
        int sparsity = 3;
        plab::TaskKind kind = plab::task_kind_from_name(name, &sparsity);
        xc.task_pool.push_back(plab::make_task(kind, rt_dim, rt_mu, sparsity));
      }
      auto cells = plab::run_retrieval_transfer(xc);
      plab::write_transfer_csv(cells, rt_out + "/retrieval_transfer.csv");
      for (const auto& c : cells) {
        if (!c.skip_reason.empty()) {
          std::printf("%-6s -> %-8s skipped: %s\n", c.from.c_str(),
                      c.to.c_str(), c.skip_reason.c_str());
        } else {
          std::printf("%-6s -> %-8s scratch %s transfer %s\n", c.from.c_str(),
                      c.to.c_str(),
                      c.scratch_t ? std::to_string(*c.scratch_t).c_str() : "-",
                      c.transfer_t ? std::to_string(*c.transfer_t).c_str() : "-");
        }
      }
      return 0;
    }

    if (*fl) {
      plab::ExperimentConfig xc;
      xc.kind = plab::ExperimentKind::FeatureLearning;
      xc.fl.net.d = fl_d;
      xc.fl.net.h = fl_h;
      xc.fl.net.hp = fl_hp;
      xc.fl.net.k = fl_k;
      xc.fl.steps = fl_steps;
      xc.seeds = fl_seeds;
      xc.out_dir = fl_out;
      if (!fl_mode.empty()) {
        // Single mode: run it alone and print escape steps.
        for (std::uint64_t seed : fl_seeds) {
          plab::FeatureTrainConfig cfg = xc.fl;
          cfg.net.multi_task = fl_mode == "multi";
          cfg.seed = seed;
          plab::FeatureTrainResult res = plab::train_featurenet(cfg);
          std::printf("seed %llu %s escape %s (plateau level %.4f)\n",
                      static_cast<unsigned long long>(seed), fl_mode.c_str(),
                      res.escape_step ? std::to_string(*res.escape_step).c_str()
                                      : ">budget",
                      res.plateau_level);
        }
        return 0;
      }
      auto rows = plab::run_feature_learning(xc);
      std::filesystem::create_directories(fl_out);
      plab::write_feature_learning_csv(rows, fl_out + "/feature_learning.csv");
      for (const auto& r : rows)
        std::printf("seed %llu  single %s  multi %s  ratio %.3f\n",
                    static_cast<unsigned long long>(r.seed),
                    r.single_escape ? std::to_string(*r.single_escape).c_str()
                                    : ">budget",
                    r.multi_escape ? std::to_string(*r.multi_escape).c_str()
                                   : ">budget",
                    r.ratio);
      return 0;
    }

    if (*plot) {
      plab::emit_plot(plot_in, plot_metric, plot_out);
      std::printf("wrote %s\n", plot_out.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
