// Command-line front end for the heart disease stacking pipeline.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "heartstack/error.hpp"
#include "heartstack/pipeline.hpp"

namespace hs = heartstack;

namespace {

struct GlobalOptions {
  std::string config = "paper-defaults";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> data;
};

hs::PipelineConfig resolve(const GlobalOptions& g) {
  hs::PipelineConfig c = hs::load_pipeline_config(g.config);
  if (g.seed) c.set_seed(*g.seed);
  if (g.out) c.output_dir = *g.out;
  if (g.data) c.dataset = *g.data;
  c.validate();
  return c;
}

void print_run(const hs::RunSummary& s) {
  std::printf("seed %llu: stacked test accuracy %s%%, best base %s %s%%\n",
              static_cast<unsigned long long>(s.seed), hs::format_percent(s.stacked_test_accuracy).c_str(),
              s.best_base.c_str(), hs::format_percent(s.best_base_test_accuracy).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heart disease prediction with a stacked ensemble"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "Config file, or 'paper-defaults' for the built-in settings");
  app.add_option("--seed", g.seed, "Seed for the split, folds and every learner (overrides the config)");
  app.add_option("--out", g.out, "Output directory (overrides the config)");
  app.add_option("--data", g.data, "Dataset CSV (overrides the config)");

  auto* analyze = app.add_subcommand("analyze", "Validation, cleaning, summary and correlation reports");
  auto* baseline = app.add_subcommand("baseline", "Tune and compare the baseline classifiers");
  auto* train = app.add_subcommand("train", "Fit the stacked ensemble and save it");
  auto* evaluate = app.add_subcommand("evaluate", "Score the test split with a saved model");
  std::optional<std::string> eval_model;
  evaluate->add_option("--model", eval_model, "Model file (default <out>/models/stack.model)");
  auto* predict = app.add_subcommand("predict", "Score a CSV with a saved model");
  std::string predict_model;
  std::string predict_input;
  std::optional<std::string> predict_output;
  predict->add_option("--model", predict_model, "Model file")->required();
  predict->add_option("--input", predict_input, "Input CSV with the 11 feature columns")->required();
  predict->add_option("--output", predict_output, "Predictions CSV (default <out>/predictions.csv)");
  auto* run = app.add_subcommand("run", "analyze, baseline, train and evaluate in sequence");
  std::size_t seeds = 0;
  run->add_option("--seeds", seeds, "Also repeat baseline/train/evaluate over N consecutive seeds");
  auto* show = app.add_subcommand("show-config", "Print the resolved configuration as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(hs::ErrorCategory::config);
  }

  try {
    const hs::PipelineConfig config = resolve(g);
    if (*show) {
      std::cout << hs::to_json(config).dump(2) << "\n";
    } else if (*analyze) {
      hs::cmd_analyze(config);
      std::printf("wrote %s\n", (config.output_dir / "analysis").string().c_str());
    } else if (*baseline) {
      const hs::BaselineResult r = hs::cmd_baseline(config);
      for (const auto& row : r.rows) {
        std::printf("%-14s cv %s%%  test %s%%\n", std::string(hs::algorithm_name(row.tuned.spec.algorithm)).c_str(),
                    hs::format_percent(row.tuned.cv.mean_accuracy).c_str(), hs::format_percent(row.test_accuracy).c_str());
      }
    } else if (*train) {
      const hs::TrainResult r = hs::cmd_train(config);
      std::printf("selected:");
      for (const auto& b : r.model.bases()) std::printf(" %s", std::string(hs::algorithm_name(b.spec().algorithm)).c_str());
      std::printf("\nwrote %s\n", r.model_path.string().c_str());
    } else if (*evaluate) {
      const hs::fs::path model = eval_model ? hs::fs::path(*eval_model) : config.output_dir / "models" / "stack.model";
      const hs::EvaluationResult r = hs::cmd_evaluate(config, model);
      for (const auto& m : r.models) {
        std::printf("%-14s accuracy %s%%  mcc %s%%  roc_auc %s%%\n", m.name.c_str(),
                    hs::format_percent(m.metrics.accuracy).c_str(), hs::format_percent(m.metrics.mcc).c_str(),
                    hs::format_percent(m.roc.area).c_str());
      }
    } else if (*predict) {
      const hs::fs::path output = predict_output ? hs::fs::path(*predict_output) : config.output_dir / "predictions.csv";
      hs::cmd_predict(predict_model, predict_input, output);
      std::printf("wrote %s\n", output.string().c_str());
    } else if (*run) {
      print_run(hs::cmd_run(config));
      if (seeds > 0) {
        for (const auto& s : hs::cmd_seed_sweep(config, seeds)) print_run(s);
      }
    }
  } catch (const hs::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", hs::category_name(e.category()), e.what());
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error [internal]: %s\n", e.what());
    return 1;
  }
  return 0;
}
