#include "arbor/pipeline.hpp"

#include <cstdlib>
#include <filesystem>

#include "arbor/gallery.hpp"
#include "arbor/inverse.hpp"
#include "arbor/json_io.hpp"
#include "arbor/rewrite.hpp"

namespace arbor {

namespace {

json config_json(const PipelineConfig& c) {
  return json{{"command", c.command}, {"input", c.input},     {"aux", c.aux},
              {"output", c.output},   {"kind", c.kind},       {"against", c.against},
              {"format", c.format},   {"seed", c.seed},       {"depth", c.depth},
              {"k", c.k},             {"ratio", c.ratio},     {"tolerance", c.tolerance},
              {"threads", c.threads}};
}

TruncatedTreeSystem load_system(const PipelineConfig& cfg) {
  if (cfg.input.empty()) throw Error("missing --input system file");
  auto dir = std::filesystem::path(cfg.input).parent_path().string();
  return system_from_json(json::parse(read_text_file(cfg.input)), dir);
}

std::map<VertexId, Decomposition> load_decomposition_map(const std::string& path) {
  std::map<VertexId, Decomposition> out;
  if (path.empty()) return out;
  auto j = json::parse(read_text_file(path));
  for (const auto& entry : j.at("vertices"))
    out[entry.at("vertex").get<VertexId>()] =
        decomposition_from_json(entry.at("splittings"));
  return out;
}

WeightMap pick_weights(const TruncatedTreeSystem& sys, const PipelineConfig& cfg) {
  if (cfg.ratio >= 1.0) return unit_weights(sys);
  return geometric_weights(sys, sys.tree.vertices().front(), cfg.ratio);
}

// Generators bake their scales; everything else defaults to unit weights
// unless a ratio below 1 was requested explicitly.
WeightMap generator_or_unit_weights(const TruncatedTreeSystem& sys, const PipelineConfig& cfg,
                                    bool generated) {
  if (generated) return unit_weights(sys);
  return pick_weights(sys, cfg);
}

LabeledSpec demo_labeled_spec(std::uint64_t seed) {
  LabeledSpec spec;
  spec.alphabet = {1, 2};
  spec.vertex_labels = {{0, 1}, {1, 2}, {2, 1}};
  spec.edges = {{0, 1}, {1, 2}};
  for (VertexId v : {0, 1, 2})
    for (int c = 0; c < 4; ++c)
      spec.stubs.push_back({v, 1 + int((seed + c) % 2), {1, 2}});
  spec.interior_points = 6;
  return spec;
}

json run_gen(const PipelineConfig& cfg) {
  json result;
  std::string out = cfg.output;
  if (cfg.kind == "punctured-circle") {
    CircleParams params;
    params.seed = cfg.seed;
    auto res = gen_punctured_circle(cfg.depth, params);
    write_text_file(out + "/system.json", system_to_json(res.system).dump(1));
    result["system"] = "system.json";
    result["vertices"] = res.system.tree.vertex_count();
    result["validation"] = report_to_json(validate_system(res.system));
  } else if (cfg.kind == "punctured-interval") {
    IntervalParams params;
    params.seed = cfg.seed;
    auto res = gen_punctured_interval(cfg.depth, params);
    write_text_file(out + "/system.json", system_to_json(res.system).dump(1));
    result["system"] = "system.json";
    result["vertices"] = res.system.tree.vertex_count();
    auto dim = validate_dim_hypotheses(res.system, res.retractions);
    result["validation"] = report_to_json(validate_system(res.system));
    result["retractions"] = report_to_json(dim);
  } else if (cfg.kind == "reflection-disk") {
    auto res = gen_reflection_disk(cfg.depth, cfg.k);
    write_text_file(out + "/system.json", system_to_json(res.interior_system).dump(1));
    write_text_file(out + "/template.json", system_to_json(res.template_system).dump(1));
    json dec;
    dec["ambient"] = compactum_to_json(res.cloud, out, "cloud");
    dec["splittings"] = decomposition_to_json(res.decomposition);
    write_text_file(out + "/decomposition.json", dec.dump(1));
    result["system"] = "system.json";
    result["decomposition"] = "decomposition.json";
    result["walls"] = res.decomposition.size();
    result["validation"] = report_to_json(validate_system(res.interior_system));
    result["template_match"] =
        report_to_json(check_isomorphism(res.interior_system, res.template_system,
                                         res.template_iso));
  } else if (cfg.kind == "labeled") {
    auto sys = gen_labeled(demo_labeled_spec(cfg.seed));
    write_text_file(out + "/system.json", system_to_json(sys).dump(1));
    result["system"] = "system.json";
    result["validation"] = report_to_json(validate_system(sys));
  } else {
    throw Error("unknown generator kind '" + cfg.kind + "'");
  }
  return result;
}

json run_realize(const PipelineConfig& cfg, const TruncatedTreeSystem& sys, bool generated) {
  auto w = generator_or_unit_weights(sys, cfg, generated);
  auto real = realize_limit(sys, choose_basepoints(sys), w);
  json result;
  result["manifest"] =
      realization_manifest(real, cfg.output, "realization", cfg.format);
  write_text_file(cfg.output + "/realization.json", result["manifest"].dump(1));
  result["points"] = real.space().size();
  result["error"] = real.error;
  result["diameter"] = real.space().diameter();
  return result;
}

json run_compare(const PipelineConfig& cfg, const TruncatedTreeSystem& sys) {
  auto w = generator_or_unit_weights(sys, cfg, true);
  auto real = realize_limit(sys, choose_basepoints(sys), w);
  FiniteCompactum target;
  if (cfg.against == "circle256" || cfg.against.empty()) {
    target = unit_circle_sample(256);
  } else {
    target = compactum_from_json(json::parse(read_text_file(cfg.against)),
                                 std::filesystem::path(cfg.against).parent_path().string());
  }
  auto corr = greedy_correspondence(real.space(), target);
  double bound = gh_upper(real.space(), target, corr);
  json result;
  result["gh_upper"] = bound;
  result["diameter"] = real.space().diameter();
  result["relative"] = bound / std::max(1e-300, real.space().diameter());
  result["pairs"] = corr.pairs.size();
  return result;
}

json run_inverse(const PipelineConfig& cfg, const TruncatedTreeSystem& sys) {
  auto kind = cfg.kind == "trivial" ? ExtendedFamily::Kind::Trivial
                                    : ExtendedFamily::Kind::Conical;
  auto fam = build_extended(sys, kind);
  if (kind == ExtendedFamily::Kind::Conical) build_delta_conical(sys, fam);
  json result;
  auto cert = check_fine(sys, fam, std::max(2, cfg.depth));
  result["fine"] = {{"overall_max", cert.overall_max},
                    {"zero_contracting", cert.zero_contracting}};
  if (kind == ExtendedFamily::Kind::Conical) {
    auto contracting = check_contracting(sys, fam);
    if (contracting)
      result["contracting"] = {{"c", contracting->first}, {"C", contracting->second}};
    auto chain = bfs_chain(sys.tree, sys.tree.vertices().front());
    auto bundle = build_bundle(sys, fam, chain);
    bool functorial = true;
    if (chain.size() >= 3) {
      auto direct = bundle.compose(chain.size() - 1, 0);
      auto first = bundle.compose(chain.size() - 1, chain.size() / 2);
      auto second = bundle.compose(chain.size() / 2, 0);
      for (std::size_t x = 0; x < direct.size(); ++x)
        functorial &= direct[x] == second[first[x]];
    }
    result["functorial"] = functorial;
    result["levels"] = bundle.points.size();
  }
  return result;
}

json run_threads(const PipelineConfig& cfg, const TruncatedTreeSystem& sys) {
  auto fam = build_extended(sys, ExtendedFamily::Kind::Conical);
  build_delta_conical(sys, fam);
  auto chain = bfs_chain(sys.tree, sys.tree.vertices().front());
  auto bundle = build_bundle(sys, fam, chain);
  auto real = realize_limit(sys, choose_basepoints(sys),
                            generator_or_unit_weights(sys, cfg, true));
  auto ev = evaluate_threads(sys, fam, bundle, real);
  json result;
  result["check"] = report_to_json(ev.report);
  result["threads"] = ev.threads.size();
  result["end_threads"] = ev.end_tags.size();
  return result;
}

}  // namespace

PipelineOutcome run_pipeline(const PipelineConfig& config) {
  PipelineConfig cfg = config;
  if (const char* t = std::getenv("ARBOR_THREADS")) cfg.threads = std::max(1, std::atoi(t));
  cfg.threads = std::min(cfg.threads, 1);  // all pipelines are sequential

  PipelineOutcome out;
  json report;
  report["schema"] = "arbor/report/v1";
  report["command"] = cfg.command;
  report["config"] = config_json(cfg);

  static const std::set<std::string> known{"gen",       "validate", "realize",  "consolidate",
                                           "subdivide", "decompose", "dualtree", "inverse",
                                           "threads",   "compare",  "saturate", "roundtrip"};
  if (!known.count(cfg.command)) {
    report["error"] = "unknown command '" + cfg.command + "'";
    out.exit_code = 2;
    out.report = report;
    return out;
  }

  bool checks_ok = true;
  try {
    std::filesystem::create_directories(cfg.output);
    json result;
    if (cfg.command == "gen") {
      result = run_gen(cfg);
      checks_ok = result.at("validation").at("ok").get<bool>();
    } else if (cfg.command == "validate") {
      auto sys = load_system(cfg);
      auto rep = validate_system(sys);
      result["validation"] = report_to_json(rep);
      checks_ok = rep.ok();
    } else if (cfg.command == "realize") {
      auto sys = load_system(cfg);
      result = run_realize(cfg, sys, !sys.tails.empty() || cfg.ratio >= 1.0);
    } else if (cfg.command == "compare") {
      auto sys = load_system(cfg);
      result = run_compare(cfg, sys);
    } else if (cfg.command == "consolidate") {
      auto sys = load_system(cfg);
      if (cfg.aux.empty()) throw Error("missing --aux partition file");
      auto j = json::parse(read_text_file(cfg.aux));
      TreePartition pi;
      for (const auto& cell : j.at("cells"))
        pi.cells.emplace_back(sys.tree, cell.get<std::vector<VertexId>>());
      auto w = generator_or_unit_weights(sys, cfg, true);
      auto cons = consolidate(sys, pi, &w);
      write_text_file(cfg.output + "/consolidated.json",
                      system_to_json(cons.system).dump(1));
      result["system"] = "consolidated.json";
      result["cells"] = pi.cells.size();
      auto rep = validate_system(cons.system);
      result["validation"] = report_to_json(rep);
      checks_ok = rep.ok();
    } else if (cfg.command == "subdivide") {
      auto sys = load_system(cfg);
      auto c = load_decomposition_map(cfg.aux);
      auto sub = subdivide(sys, c);
      write_text_file(cfg.output + "/subdivided.json", system_to_json(sub.system).dump(1));
      result["system"] = "subdivided.json";
      result["vertices"] = sub.system.tree.vertex_count();
      result["clim"] = report_to_json(sub.clim.report);
      auto rep = validate_system(sub.system);
      result["validation"] = report_to_json(rep);
      checks_ok = rep.ok() && sub.clim.report.ok();
    } else if (cfg.command == "decompose") {
      auto j = json::parse(read_text_file(cfg.input));
      auto ambient = compactum_from_json(
          j.at("ambient"), std::filesystem::path(cfg.input).parent_path().string());
      auto c = decomposition_from_json(j.at("splittings"));
      Report all;
      for (std::size_t i = 0; i < c.size(); ++i) {
        auto rep = validate_splitting(ambient, c[i]);
        for (const auto& v : rep.violations)
          all.fail(v.code, "splitting " + std::to_string(i) + ": " + v.message);
      }
      for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t k2 = i + 1; k2 < c.size(); ++k2)
          if (!noncross(c[i], c[k2]))
            all.fail("crossing", "splittings " + std::to_string(i) + " and " +
                                     std::to_string(k2) + " cross");
      auto discrete = is_discrete(c);
      auto fine = is_fine(ambient, c);
      result["discrete"] = report_to_json(discrete);
      result["fine"] = report_to_json(fine);
      if (all.ok()) {
        auto recon = reconstruct_check(ambient, c);
        result["reconstruct"] = report_to_json(recon);
        checks_ok = recon.ok();
      }
      result["validation"] = report_to_json(all);
      checks_ok = checks_ok && all.ok();
    } else if (cfg.command == "dualtree") {
      auto j = json::parse(read_text_file(cfg.input));
      auto ambient = compactum_from_json(
          j.at("ambient"), std::filesystem::path(cfg.input).parent_path().string());
      auto c = decomposition_from_json(j.at("splittings"));
      auto dual = dual_tree(ambient, c);
      write_text_file(cfg.output + "/dualtree.dot", to_dot(dual.tree));
      result["dot"] = "dualtree.dot";
      result["domains"] = dual.domains.size();
      result["splittings"] = c.size();
    } else if (cfg.command == "inverse") {
      auto sys = load_system(cfg);
      result = run_inverse(cfg, sys);
    } else if (cfg.command == "threads") {
      auto sys = load_system(cfg);
      result = run_threads(cfg, sys);
      checks_ok = result.at("check").at("ok").get<bool>();
    } else if (cfg.command == "saturate") {
      auto sys = load_system(cfg);
      auto res = saturate(sys);
      write_text_file(cfg.output + "/saturated.json", system_to_json(res.system).dump(1));
      write_text_file(cfg.output + "/rewrite-log.json", rewrite_log_to_json(res.log).dump(1));
      result["system"] = "saturated.json";
      result["log"] = "rewrite-log.json";
      result["two_saturated"] = is_2_saturated(res.system);
      checks_ok = is_2_saturated(res.system);
    } else if (cfg.command == "roundtrip") {
      auto sys = load_system(cfg);
      auto c = load_decomposition_map(cfg.aux);
      auto rep = roundtrip_check(sys, c, cfg.tolerance);
      result["check"] = report_to_json(rep);
      checks_ok = rep.ok();
    }
    report["result"] = result;
    report["ok"] = checks_ok;
    out.exit_code = checks_ok ? 0 : 1;
  } catch (const Error& err) {
    report["error"] = err.what();
    report["ok"] = false;
    out.exit_code = 3;
  } catch (const json::exception& err) {
    report["error"] = std::string("json: ") + err.what();
    report["ok"] = false;
    out.exit_code = 3;
  }
  try {
    std::filesystem::create_directories(cfg.output);
    write_text_file(cfg.output + "/" + cfg.command + "-report.json", report.dump(1) + "\n");
  } catch (const Error&) {
    out.exit_code = 3;
  }
  out.report = report;
  return out;
}

}  // namespace arbor
