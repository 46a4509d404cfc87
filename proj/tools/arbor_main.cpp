// arbor command-line front end. Talks to the engine exclusively through the
// C API in arbor.h; every subcommand writes a JSON report into --output.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "arbor.h"

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arbor: finite tree systems of metric compacta"};

  std::string input, aux, output = ".", kind, against, format = "json";
  unsigned long long seed = 0;
  int depth = 3, k = 3;
  double ratio = 1.0, tolerance = 1e-9;

  app.add_option("--input", input, "input file (system or decomposition JSON)");
  app.add_option("--aux", aux, "secondary input (partition / decomposition map JSON)");
  app.add_option("--output", output, "output directory");
  app.add_option("--seed", seed, "seed for randomized choices");
  app.add_option("--depth", depth, "generator or search depth");
  app.add_option("--k", k, "reflection-disk boundary disk count");
  app.add_option("--ratio", ratio, "weight ratio (>= 1 keeps unit weights)");
  app.add_option("--tolerance", tolerance, "comparison tolerance");
  app.add_option("--format", format, "export format: json, dot, obj");
  app.add_option("--against", against, "compare target (circle256 or compactum JSON)");

  std::vector<std::string> names{"gen",       "validate",  "realize",  "consolidate",
                                 "subdivide", "decompose", "dualtree", "inverse",
                                 "threads",   "compare",   "saturate", "roundtrip"};
  std::string command, positional_kind;
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("kind", positional_kind, "generator / family kind");
    sub->callback([&command, name] { command = name; });
  }

  CLI11_PARSE(app, argc, argv);
  if (command.empty()) {
    std::fprintf(stderr, "usage: arbor <command> [kind] [flags]; commands:");
    for (const auto& n : names) std::fprintf(stderr, " %s", n.c_str());
    std::fprintf(stderr, "\n");
    return 2;
  }
  if (!positional_kind.empty()) kind = positional_kind;

  char buf[4096];
  std::snprintf(buf, sizeof buf,
                "{\"command\":\"%s\",\"input\":\"%s\",\"aux\":\"%s\",\"output\":\"%s\","
                "\"kind\":\"%s\",\"against\":\"%s\",\"format\":\"%s\",\"seed\":%llu,"
                "\"depth\":%d,\"k\":%d,\"ratio\":%.17g,\"tolerance\":%.17g}",
                command.c_str(), json_escape(input).c_str(), json_escape(aux).c_str(),
                json_escape(output).c_str(), json_escape(kind).c_str(),
                json_escape(against).c_str(), json_escape(format).c_str(), seed, depth, k, ratio,
                tolerance);

  arbor_report* report = nullptr;
  arbor_status status = arbor_run(buf, &report);
  if (report) {
    std::printf("%s\n", arbor_report_json(report));
    arbor_report_free(report);
  }
  if (status != ARBOR_OK && arbor_last_error()[0] != '\0')
    std::fprintf(stderr, "arbor: %s\n", arbor_last_error());
  return static_cast<int>(status);
}
