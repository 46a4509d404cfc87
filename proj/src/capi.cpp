#include "arbor.h"

#include <cstring>
#include <filesystem>
#include <string>

#include "arbor/gallery.hpp"
#include "arbor/json_io.hpp"
#include "arbor/pipeline.hpp"
#include "arbor/realize.hpp"

using namespace arbor;

struct arbor_system {
  TruncatedTreeSystem sys;
};

struct arbor_realization {
  Realization real;
};

struct arbor_report {
  nlohmann::json j;
  std::string text;
  bool ok = true;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
arbor_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const Error& e) {
    g_last_error = e.what();
    return ARBOR_ERR_IO;
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return ARBOR_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ARBOR_ERR_INTERNAL;
  }
}

arbor_report* make_report(const nlohmann::json& j, bool ok) {
  auto* rep = new arbor_report;
  rep->j = j;
  rep->text = j.dump(1);
  rep->ok = ok;
  return rep;
}

}  // namespace

extern "C" {

const char* arbor_last_error(void) { return g_last_error.c_str(); }

const char* arbor_version(void) { return "arbor 1.0.0"; }

void arbor_string_free(char* s) { std::free(s); }

arbor_status arbor_system_from_json(const char* json_text, arbor_system** out) {
  if (!json_text || !out) return ARBOR_ERR_USAGE;
  return guarded([&] {
    auto sys = system_from_json(nlohmann::json::parse(json_text));
    *out = new arbor_system{std::move(sys)};
    return ARBOR_OK;
  });
}

arbor_status arbor_system_load(const char* path, arbor_system** out) {
  if (!path || !out) return ARBOR_ERR_USAGE;
  return guarded([&] {
    auto dir = std::filesystem::path(path).parent_path().string();
    auto sys = system_from_json(nlohmann::json::parse(read_text_file(path)), dir);
    *out = new arbor_system{std::move(sys)};
    return ARBOR_OK;
  });
}

arbor_status arbor_system_save(const arbor_system* sys, const char* path) {
  if (!sys || !path) return ARBOR_ERR_USAGE;
  return guarded([&] {
    write_text_file(path, system_to_json(sys->sys).dump(1));
    return ARBOR_OK;
  });
}

arbor_status arbor_system_to_json(const arbor_system* sys, char** json_out) {
  if (!sys || !json_out) return ARBOR_ERR_USAGE;
  return guarded([&] {
    std::string s = system_to_json(sys->sys).dump(1);
    *json_out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(*json_out, s.c_str(), s.size() + 1);
    return ARBOR_OK;
  });
}

void arbor_system_free(arbor_system* sys) { delete sys; }

arbor_status arbor_system_generate(const char* spec_json, arbor_system** out) {
  if (!spec_json || !out) return ARBOR_ERR_USAGE;
  return guarded([&] {
    auto j = nlohmann::json::parse(spec_json);
    std::string kind = j.value("kind", "");
    int depth = j.value("depth", 3);
    std::uint64_t seed = j.value("seed", 0ull);
    TruncatedTreeSystem sys;
    if (kind == "punctured-circle") {
      CircleParams p;
      p.seed = seed;
      sys = gen_punctured_circle(depth, p).system;
    } else if (kind == "punctured-interval") {
      IntervalParams p;
      p.seed = seed;
      sys = gen_punctured_interval(depth, p).system;
    } else if (kind == "reflection-disk") {
      sys = gen_reflection_disk(depth, j.value("k", 3)).interior_system;
    } else if (kind == "labeled") {
      LabeledSpec spec;
      spec.alphabet = {1, 2};
      spec.vertex_labels = {{0, 1}, {1, 2}, {2, 1}};
      spec.edges = {{0, 1}, {1, 2}};
      for (VertexId v : {0, 1, 2})
        for (int c = 0; c < 4; ++c)
          spec.stubs.push_back({v, 1 + int((seed + c) % 2), {1, 2}});
      spec.interior_points = 6;
      sys = gen_labeled(spec);
    } else {
      g_last_error = "unknown generator kind '" + kind + "'";
      return ARBOR_ERR_USAGE;
    }
    *out = new arbor_system{std::move(sys)};
    return ARBOR_OK;
  });
}

size_t arbor_system_vertex_count(const arbor_system* sys) {
  return sys ? sys->sys.tree.vertex_count() : 0;
}

const char* arbor_report_json(const arbor_report* rep) { return rep ? rep->text.c_str() : ""; }

int arbor_report_ok(const arbor_report* rep) { return rep && rep->ok ? 1 : 0; }

void arbor_report_free(arbor_report* rep) { delete rep; }

arbor_status arbor_system_validate(const arbor_system* sys, arbor_report** out) {
  if (!sys || !out) return ARBOR_ERR_USAGE;
  return guarded([&] {
    auto rep = validate_system(sys->sys);
    *out = make_report(report_to_json(rep), rep.ok());
    return ARBOR_OK;
  });
}

arbor_status arbor_realize(const arbor_system* sys, const char* options_json,
                           arbor_realization** out) {
  if (!sys || !out) return ARBOR_ERR_USAGE;
  return guarded([&] {
    double ratio = 1.0;
    if (options_json && *options_json)
      ratio = nlohmann::json::parse(options_json).value("ratio", 1.0);
    WeightMap w = ratio >= 1.0
                      ? unit_weights(sys->sys)
                      : geometric_weights(sys->sys, sys->sys.tree.vertices().front(), ratio);
    auto real = realize_limit(sys->sys, choose_basepoints(sys->sys), w);
    *out = new arbor_realization{std::move(real)};
    return ARBOR_OK;
  });
}

size_t arbor_realization_size(const arbor_realization* r) {
  return r ? r->real.space().size() : 0;
}

double arbor_realization_error(const arbor_realization* r) { return r ? r->real.error : 0.0; }

double arbor_realization_distance(const arbor_realization* r, size_t i, size_t j) {
  if (!r || i >= r->real.space().size() || j >= r->real.space().size()) return -1.0;
  return r->real.space().dist(i, j);
}

arbor_status arbor_realization_export(const arbor_realization* r, const char* dir,
                                      const char* stem, const char* format) {
  if (!r || !dir || !stem) return ARBOR_ERR_USAGE;
  return guarded([&] {
    std::filesystem::create_directories(dir);
    auto manifest = realization_manifest(r->real, dir, stem, format ? format : "json");
    write_text_file(std::string(dir) + "/" + stem + ".json", manifest.dump(1));
    return ARBOR_OK;
  });
}

void arbor_realization_free(arbor_realization* r) { delete r; }

arbor_status arbor_compare(const arbor_realization* r, const char* target, arbor_report** out) {
  if (!r || !out) return ARBOR_ERR_USAGE;
  return guarded([&] {
    FiniteCompactum tgt;
    std::string name = target ? target : "circle256";
    if (name == "circle256") {
      tgt = unit_circle_sample(256);
    } else {
      tgt = compactum_from_json(nlohmann::json::parse(read_text_file(name)),
                                std::filesystem::path(name).parent_path().string());
    }
    auto corr = greedy_correspondence(r->real.space(), tgt);
    double bound = gh_upper(r->real.space(), tgt, corr);
    nlohmann::json j;
    j["gh_upper"] = bound;
    j["diameter"] = r->real.space().diameter();
    j["relative"] = bound / std::max(1e-300, r->real.space().diameter());
    *out = make_report(j, true);
    return ARBOR_OK;
  });
}

arbor_status arbor_run(const char* config_json, arbor_report** out) {
  if (!config_json || !out) return ARBOR_ERR_USAGE;
  *out = nullptr;
  try {
    g_last_error.clear();
    auto j = nlohmann::json::parse(config_json);
    PipelineConfig cfg;
    cfg.command = j.value("command", "");
    cfg.input = j.value("input", "");
    cfg.aux = j.value("aux", "");
    cfg.output = j.value("output", ".");
    cfg.kind = j.value("kind", "");
    cfg.against = j.value("against", "");
    cfg.format = j.value("format", "json");
    cfg.seed = j.value("seed", 0ull);
    cfg.depth = j.value("depth", 3);
    cfg.k = j.value("k", 3);
    cfg.ratio = j.value("ratio", 1.0);
    cfg.tolerance = j.value("tolerance", 1e-9);
    auto outcome = run_pipeline(cfg);
    *out = make_report(outcome.report, outcome.exit_code == 0);
    if (outcome.report.contains("error"))
      g_last_error = outcome.report.at("error").get<std::string>();
    return static_cast<arbor_status>(outcome.exit_code);
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return ARBOR_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ARBOR_ERR_INTERNAL;
  }
}

}  // extern "C"
