// Command-line front end. Talks to the core exclusively through the
// public C API in riskgraph.h.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riskgraph.h"

namespace {

int fail(rg_status status) {
  std::fprintf(stderr, "{\"error\": \"%s\", \"code\": %d}\n", rg_last_error(),
               static_cast<int>(status));
  return static_cast<int>(status);
}

struct PatternsDeleter {
  void operator()(rg_patterns* p) const { rg_patterns_free(p); }
};
struct ModelDeleter {
  void operator()(rg_model* m) const { rg_model_free(m); }
};
using PatternsPtr = std::unique_ptr<rg_patterns, PatternsDeleter>;
using ModelPtr = std::unique_ptr<rg_model, ModelDeleter>;

void print_metrics(const rg_eval_metrics& m) {
  std::printf(
      "{\"overall_generalization_pct\": %.4f, "
      "\"collision_generalization_pct\": %.4f, "
      "\"tp\": %ld, \"fp\": %ld, \"tn\": %ld, \"fn\": %ld, "
      "\"threshold\": %g}\n",
      m.overall_generalization_pct, m.collision_generalization_pct, m.tp,
      m.fp, m.tn, m.fn, m.threshold);
}

// "m,h" -> training-config JSON fragment values
bool parse_arch(const std::string& arch, int& m, int& h) {
  return std::sscanf(arch.c_str(), "%d,%d", &m, &h) == 2 && m >= 1 && h >= 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intersection risk assessment with recursive neural networks"};
  app.require_subcommand(1);

  // generate
  std::string gen_config, gen_out;
  int gen_count = 1000;
  std::uint64_t gen_seed = 1;
  auto* generate = app.add_subcommand("generate", "Generate a pattern set");
  generate->add_option("--config", gen_config, "Scenario config JSON (omit for the built-in default)");
  generate->add_option("--count", gen_count, "Number of patterns")->required();
  generate->add_option("--seed", gen_seed, "Base RNG seed");
  generate->add_option("--out", gen_out, "Output pattern set path")->required();

  // encode
  std::string enc_scene, enc_out;
  auto* encode = app.add_subcommand("encode", "Encode one scene as a graph");
  encode->add_option("--scene", enc_scene, "Scene JSON file")->required();
  encode->add_option("--out", enc_out, "Output graph JSON path")->required();

  // train
  std::string train_patterns, train_arch = "10,40", train_optimizer = "qnts";
  std::string train_out, train_report;
  int train_epochs = 200;
  double train_lr = 0.01, train_tolerance = 1e-3;
  std::uint64_t train_seed = 1;
  auto* train = app.add_subcommand("train", "Train a model on a pattern set");
  train->add_option("--patterns", train_patterns)->required();
  train->add_option("--arch", train_arch, "state,hidden dims (e.g. 10,40)");
  train->add_option("--optimizer", train_optimizer, "qnts | bpts");
  train->add_option("--epochs", train_epochs);
  train->add_option("--learning-rate", train_lr, "bpts step size");
  train->add_option("--tolerance", train_tolerance, "stop when error <= tol");
  train->add_option("--seed", train_seed);
  train->add_option("--out", train_out, "Checkpoint path")->required();
  train->add_option("--report", train_report, "Per-epoch JSONL report path");

  // eval
  std::string eval_patterns, eval_model;
  double eval_threshold = 0.5;
  auto* eval = app.add_subcommand("eval", "Evaluate a model");
  eval->add_option("--patterns", eval_patterns)->required();
  eval->add_option("--model", eval_model)->required();
  eval->add_option("--threshold", eval_threshold);

  // gradcheck
  std::uint64_t gc_seed = 1;
  int gc_trials = 50;
  auto* gradcheck =
      app.add_subcommand("gradcheck", "Verify gradients vs finite differences");
  gradcheck->add_option("--seed", gc_seed);
  gradcheck->add_option("--trials", gc_trials);

  // repro-tableIII
  std::uint64_t repro_seed = 1;
  int repro_count = 1000, repro_epochs = 200;
  std::string repro_report;
  auto* repro = app.add_subcommand(
      "repro-tableIII", "Desk-scale generate/split/train/eval pipeline");
  repro->add_option("--seed", repro_seed);
  repro->add_option("--count", repro_count);
  repro->add_option("--epochs", repro_epochs);
  repro->add_option("--report", repro_report, "Also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (*generate) {
    std::string config_path = gen_config;
    if (config_path.empty()) {
      config_path = gen_out + ".config.json";
      std::ofstream cfg(config_path);
      cfg << rg_default_scenario_json();
    }
    rg_patterns* raw = nullptr;
    if (auto s = rg_patterns_generate(config_path.c_str(), gen_count, gen_seed,
                                      &raw)) {
      return fail(s);
    }
    PatternsPtr patterns(raw);
    if (auto s = rg_patterns_save(patterns.get(), gen_out.c_str())) {
      return fail(s);
    }
    std::printf("{\"patterns\": %d, \"collision_fraction\": %.4f, \"out\": \"%s\"}\n",
                rg_patterns_count(patterns.get()),
                rg_patterns_collision_fraction(patterns.get()),
                gen_out.c_str());
    return 0;
  }

  if (*encode) {
    if (auto s = rg_encode_scene_file(enc_scene.c_str(), enc_out.c_str())) {
      return fail(s);
    }
    std::printf("{\"out\": \"%s\"}\n", enc_out.c_str());
    return 0;
  }

  if (*train) {
    int m = 0, h = 0;
    if (!parse_arch(train_arch, m, h)) {
      std::fprintf(stderr, "{\"error\": \"bad --arch, expected m,h\", \"code\": 2}\n");
      return 2;
    }
    rg_patterns* raw = nullptr;
    if (auto s = rg_patterns_load(train_patterns.c_str(), &raw)) return fail(s);
    PatternsPtr patterns(raw);
    char config[512];
    std::snprintf(config, sizeof(config),
                  "{\"optimizer\":\"%s\",\"m\":%d,\"h\":%d,\"max_epochs\":%d,"
                  "\"tolerance\":%g,\"learning_rate\":%g,\"seed\":%llu}",
                  train_optimizer.c_str(), m, h, train_epochs, train_tolerance,
                  train_lr, static_cast<unsigned long long>(train_seed));
    rg_model* model_raw = nullptr;
    if (auto s = rg_model_train(
            patterns.get(), config, &model_raw,
            train_report.empty() ? nullptr : train_report.c_str())) {
      return fail(s);
    }
    ModelPtr model(model_raw);
    if (auto s = rg_model_save(model.get(), train_out.c_str())) return fail(s);
    std::printf("{\"checkpoint\": \"%s\"}\n", train_out.c_str());
    return 0;
  }

  if (*eval) {
    rg_patterns* praw = nullptr;
    if (auto s = rg_patterns_load(eval_patterns.c_str(), &praw)) return fail(s);
    PatternsPtr patterns(praw);
    rg_model* mraw = nullptr;
    if (auto s = rg_model_load(eval_model.c_str(), &mraw)) return fail(s);
    ModelPtr model(mraw);
    rg_eval_metrics metrics{};
    if (auto s = rg_evaluate(patterns.get(), model.get(), eval_threshold,
                             &metrics)) {
      return fail(s);
    }
    print_metrics(metrics);
    return 0;
  }

  if (*gradcheck) {
    double max_err = 0.0;
    if (auto s = rg_gradcheck(gc_seed, gc_trials, &max_err)) return fail(s);
    std::printf("{\"trials\": %d, \"max_relative_error\": %.3e, \"pass\": %s}\n",
                gc_trials, max_err, max_err < 1e-6 ? "true" : "false");
    return max_err < 1e-6 ? 0 : 3;
  }

  if (*repro) {
    std::vector<char> buf(1 << 20);
    if (auto s = rg_repro_table3(repro_seed, repro_count, repro_epochs,
                                 buf.data(), static_cast<int>(buf.size()),
                                 nullptr)) {
      return fail(s);
    }
    std::printf("%s\n", buf.data());
    if (!repro_report.empty()) {
      std::ofstream out(repro_report);
      out << buf.data() << "\n";
    }
    return 0;
  }

  return 2;
}
