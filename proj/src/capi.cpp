#include "riskgraph.h"

#include <cstring>
#include <string>

#include "gradients.hpp"
#include "harness.hpp"
#include "ioutil.hpp"

using namespace riskgraph;

struct rg_patterns {
  PatternSet set;
};

struct rg_model {
  Checkpoint ckpt;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
rg_status wrap(Fn&& fn) {
  try {
    fn();
    return RG_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<rg_status>(static_cast<int>(e.category()));
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return RG_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RG_ERR_NUMERIC;
  }
}

rg_status require(bool ok, const char* msg) {
  if (!ok) {
    g_last_error = msg;
    return RG_ERR_CONFIG;
  }
  return RG_OK;
}

}  // namespace

extern "C" {

const char* rg_last_error(void) { return g_last_error.c_str(); }

const char* rg_default_scenario_json(void) {
  return default_scenario_json().c_str();
}

rg_status rg_patterns_generate(const char* scenario_json_path, int count,
                               uint64_t seed, rg_patterns** out) {
  if (auto s = require(scenario_json_path && out, "null argument")) return s;
  return wrap([&] {
    auto config = ScenarioConfig::from_json(
        nlohmann::json::parse(read_file(scenario_json_path)));
    auto set = generate_pattern_set(config, count, seed);
    *out = new rg_patterns{std::move(set)};
  });
}

rg_status rg_patterns_load(const char* path, rg_patterns** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return wrap([&] { *out = new rg_patterns{load_pattern_set(path)}; });
}

rg_status rg_patterns_save(const rg_patterns* patterns, const char* path) {
  if (auto s = require(patterns && path, "null argument")) return s;
  return wrap([&] { save_pattern_set(patterns->set, path); });
}

rg_status rg_patterns_split(const rg_patterns* patterns, double train_fraction,
                            uint64_t seed, rg_patterns** train_out,
                            rg_patterns** validation_out) {
  if (auto s = require(patterns && train_out && validation_out,
                       "null argument")) {
    return s;
  }
  return wrap([&] {
    auto [train_set, validation_set] =
        split(patterns->set, train_fraction, seed);
    *train_out = new rg_patterns{std::move(train_set)};
    *validation_out = new rg_patterns{std::move(validation_set)};
  });
}

int rg_patterns_count(const rg_patterns* patterns) {
  return patterns ? static_cast<int>(patterns->set.records.size()) : 0;
}

double rg_patterns_collision_fraction(const rg_patterns* patterns) {
  return patterns ? patterns->set.collision_fraction() : 0.0;
}

void rg_patterns_free(rg_patterns* patterns) { delete patterns; }

rg_status rg_encode_scene_file(const char* scene_json_path,
                               const char* graph_json_path) {
  if (auto s = require(scene_json_path && graph_json_path, "null argument")) {
    return s;
  }
  return wrap([&] {
    auto doc = nlohmann::json::parse(read_file(scene_json_path));
    auto geom = doc.contains("geometry")
                    ? IntersectionGeometry::from_json(doc["geometry"])
                    : IntersectionGeometry::defaults();
    auto frames = frames_from_json(doc.at("frames"));
    double risk_window = doc.value("risk_window_s", 1.5);
    int k = doc.value("max_out_degree", 2);
    Dpag graph = encode_scene(frames, risk_window, geom, k);
    write_file_atomic(graph_json_path, graph.to_json().dump(2) + "\n");
  });
}

rg_status rg_model_train(const rg_patterns* patterns,
                         const char* train_config_json, rg_model** out,
                         const char* report_path) {
  if (auto s = require(patterns && train_config_json && out, "null argument")) {
    return s;
  }
  return wrap([&] {
    auto config =
        TrainConfig::from_json(nlohmann::json::parse(train_config_json));
    auto [ckpt, report] = train(patterns->set, config);
    if (report_path) write_file_atomic(report_path, report.to_jsonl());
    *out = new rg_model{std::move(ckpt)};
  });
}

rg_status rg_model_load(const char* path, rg_model** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return wrap([&] { *out = new rg_model{load_checkpoint(path)}; });
}

rg_status rg_model_save(const rg_model* model, const char* path) {
  if (auto s = require(model && path, "null argument")) return s;
  return wrap([&] { save_checkpoint(model->ckpt, path); });
}

void rg_model_free(rg_model* model) { delete model; }

rg_status rg_evaluate(const rg_patterns* patterns, const rg_model* model,
                      double threshold, rg_eval_metrics* out) {
  if (auto s = require(patterns && model && out, "null argument")) return s;
  return wrap([&] {
    EvalMetrics m = evaluate(patterns->set, model->ckpt.params, threshold);
    out->overall_generalization_pct = m.overall_generalization_pct;
    out->collision_generalization_pct = m.collision_generalization_pct;
    out->tp = m.tp;
    out->fp = m.fp;
    out->tn = m.tn;
    out->fn = m.fn;
    out->threshold = m.threshold;
  });
}

rg_status rg_gradcheck(uint64_t seed, int trials, double* max_rel_error_out) {
  if (auto s = require(max_rel_error_out != nullptr, "null argument")) return s;
  return wrap([&] {
    *max_rel_error_out = gradient_check_max_rel_error(seed, trials);
  });
}

rg_status rg_repro_table3(uint64_t seed, int pattern_count, int max_epochs,
                          char* report_buf, int report_buf_size,
                          int* report_size_out) {
  return wrap([&] {
    auto report = repro_table3(seed, pattern_count, max_epochs);
    std::string text = report.dump(2);
    if (report_size_out) {
      *report_size_out = static_cast<int>(text.size()) + 1;
    }
    if (report_buf && report_buf_size > 0) {
      size_t n = std::min(text.size(),
                          static_cast<size_t>(report_buf_size) - 1);
      std::memcpy(report_buf, text.data(), n);
      report_buf[n] = '\0';
    }
  });
}

}  // extern "C"
