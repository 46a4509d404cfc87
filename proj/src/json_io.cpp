#include "arbor/json_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace arbor {

namespace {

void write_matrix_binary(const std::string& path, const FiniteCompactum& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  // Row-major float64, little-endian host assumed.
  static_assert(sizeof(double) == 8);
  os.write(reinterpret_cast<const char*>(m.raw().data()),
           static_cast<std::streamsize>(m.raw().size() * sizeof(double)));
}

std::vector<double> read_matrix_binary(const std::string& path, std::size_t n) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path);
  std::vector<double> d(n * n);
  is.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(n * n * sizeof(double)));
  if (!is) throw Error("matrix sidecar truncated: " + path);
  return d;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json tree_to_json(const Tree& t) {
  json j;
  j["vertices"] = t.vertices();
  json edges = json::array();
  std::set<EdgeId> seen;
  for (EdgeId e : t.oriented_edges()) {
    for (EdgeId id : {e, t.bar(e)}) {
      if (seen.count(id)) continue;
      seen.insert(id);
      edges.push_back({{"id", id},
                       {"alpha", t.alpha(id)},
                       {"omega", t.omega(id)},
                       {"bar", t.bar(id)}});
    }
  }
  j["edges"] = edges;
  j["stubs"] = t.stub_edges();
  return j;
}

Tree tree_from_json(const json& j) {
  Tree t;
  for (VertexId v : j.at("vertices")) t.add_vertex(v);
  std::set<EdgeId> stubs;
  for (EdgeId e : j.at("stubs")) stubs.insert(e);
  std::set<EdgeId> done;
  std::map<EdgeId, json> by_id;
  for (const auto& e : j.at("edges")) by_id[e.at("id").get<EdgeId>()] = e;
  for (const auto& [id, e] : by_id) {
    if (done.count(id)) continue;
    EdgeId bar = e.at("bar").get<EdgeId>();
    done.insert(id);
    done.insert(bar);
    VertexId a = e.at("alpha").get<VertexId>(), o = e.at("omega").get<VertexId>();
    if (stubs.count(id)) {
      t.add_stub_with_ids(a, o, id, bar);
    } else if (stubs.count(bar)) {
      const auto& b = by_id.at(bar);
      t.add_stub_with_ids(b.at("alpha").get<VertexId>(), b.at("omega").get<VertexId>(), bar, id);
    } else {
      t.add_edge_with_ids(a, o, id, bar);
    }
  }
  return t;
}

json compactum_to_json(const FiniteCompactum& m, const std::string& sidecar_dir,
                       const std::string& sidecar_stem) {
  json j;
  j["n"] = m.size();
  j["resolution"] = m.resolution;
  if (sidecar_stem.empty()) {
    j["dist"] = m.raw();
  } else {
    std::string file = sidecar_stem + ".f64";
    write_matrix_binary(sidecar_dir.empty() ? file : sidecar_dir + "/" + file, m);
    j["dist"] = {{"path", file}, {"format", "float64le"}};
  }
  if (!m.coords.empty()) {
    json coords = json::array();
    for (auto [x, y] : m.coords) coords.push_back({x, y});
    j["coords"] = coords;
  }
  return j;
}

FiniteCompactum compactum_from_json(const json& j, const std::string& base_dir) {
  std::size_t n = j.at("n").get<std::size_t>();
  std::vector<double> d;
  if (j.at("dist").is_array()) {
    d = j.at("dist").get<std::vector<double>>();
  } else {
    std::string path = j.at("dist").at("path").get<std::string>();
    if (!base_dir.empty()) path = base_dir + "/" + path;
    d = read_matrix_binary(path, n);
  }
  FiniteCompactum m(n, std::move(d));
  if (j.contains("resolution")) m.resolution = j.at("resolution").get<double>();
  if (j.contains("coords"))
    for (const auto& c : j.at("coords")) m.coords.push_back({c.at(0), c.at(1)});
  return m;
}

json system_to_json(const TruncatedTreeSystem& sys) {
  json j;
  j["schema"] = "arbor/system/v1";
  j["tree"] = tree_to_json(sys.tree);
  json constituents = json::array();
  for (const auto& [v, k] : sys.constituents)
    constituents.push_back({{"vertex", v}, {"compactum", compactum_to_json(k)}});
  j["constituents"] = constituents;
  json peripherals = json::array();
  for (const auto& [e, sigma] : sys.peripherals)
    peripherals.push_back({{"edge", e}, {"points", sigma}});
  j["peripherals"] = peripherals;
  json connectors = json::array();
  for (const auto& [e, conn] : sys.connectors) {
    json pairs = json::array();
    for (auto [a, b] : conn) pairs.push_back({a, b});
    connectors.push_back({{"edge", e}, {"pairs", pairs}});
  }
  j["connectors"] = connectors;
  json tails = json::array();
  for (const auto& [e, sigma] : sys.tails) tails.push_back({{"edge", e}, {"sigma", sigma}});
  j["tails"] = tails;
  if (!sys.labels.empty()) {
    json labels = json::array();
    for (const auto& [v, l] : sys.labels) labels.push_back({{"vertex", v}, {"label", l}});
    j["labels"] = labels;
    j["oriented"] = sys.orientation_all_oriented;
  }
  if (!sys.stub_promises.empty()) {
    json promises = json::array();
    for (const auto& [e, pr] : sys.stub_promises)
      promises.push_back({{"edge", e}, {"child", pr.child_label}, {"beyond", pr.labels_beyond}});
    j["promises"] = promises;
  }
  if (sys.declared_density_resolution) j["density_resolution"] = *sys.declared_density_resolution;
  return j;
}

TruncatedTreeSystem system_from_json(const json& j, const std::string& base_dir) {
  if (j.value("schema", "") != "arbor/system/v1") throw Error("unknown system schema");
  TruncatedTreeSystem sys;
  sys.tree = tree_from_json(j.at("tree"));
  for (const auto& c : j.at("constituents"))
    sys.constituents[c.at("vertex").get<VertexId>()] =
        compactum_from_json(c.at("compactum"), base_dir);
  for (const auto& p : j.at("peripherals"))
    sys.peripherals[p.at("edge").get<EdgeId>()] = p.at("points").get<PointSet>();
  for (const auto& c : j.at("connectors")) {
    Connector conn;
    for (const auto& pr : c.at("pairs"))
      conn.push_back({pr.at(0).get<std::size_t>(), pr.at(1).get<std::size_t>()});
    sys.connectors[c.at("edge").get<EdgeId>()] = conn;
  }
  for (const auto& t : j.at("tails"))
    sys.tails[t.at("edge").get<EdgeId>()] = t.at("sigma").get<double>();
  if (j.contains("labels")) {
    for (const auto& l : j.at("labels"))
      sys.labels[l.at("vertex").get<VertexId>()] = l.at("label").get<int>();
    sys.orientation_all_oriented = j.value("oriented", true);
  }
  if (j.contains("promises")) {
    for (const auto& p : j.at("promises")) {
      StubPromise pr;
      pr.child_label = p.at("child").get<int>();
      pr.labels_beyond = p.at("beyond").get<std::vector<int>>();
      sys.stub_promises[p.at("edge").get<EdgeId>()] = pr;
    }
  }
  if (j.contains("density_resolution"))
    sys.declared_density_resolution = j.at("density_resolution").get<double>();
  return sys;
}

json splitting_to_json(const Splitting& s) { return json{{"A", s.a}, {"Y", s.y}, {"Z", s.z}}; }

Splitting splitting_from_json(const json& j) {
  Splitting s;
  s.a = j.at("A").get<PointSet>();
  s.y = j.at("Y").get<PointSet>();
  s.z = j.at("Z").get<PointSet>();
  std::sort(s.a.begin(), s.a.end());
  std::sort(s.y.begin(), s.y.end());
  std::sort(s.z.begin(), s.z.end());
  return s;
}

json decomposition_to_json(const Decomposition& c) {
  json out = json::array();
  for (const auto& s : c) out.push_back(splitting_to_json(s));
  return out;
}

Decomposition decomposition_from_json(const json& j) {
  Decomposition c;
  for (const auto& s : j) c.push_back(splitting_from_json(s));
  return c;
}

json report_to_json(const Report& r) {
  json j;
  json v = json::array();
  for (const auto& item : r.violations)
    v.push_back({{"code", item.code}, {"message", item.message}});
  j["violations"] = v;
  j["stats"] = r.stats;
  j["notes"] = r.notes;
  j["ok"] = r.ok();
  return j;
}

json rewrite_log_to_json(const RewriteLog& log) {
  json out = json::array();
  for (const auto& step : log)
    out.push_back({{"op", step.op}, {"params", step.params}, {"axiom", step.axiom}});
  return out;
}

std::string realization_obj(const Realization& r) {
  std::ostringstream os;
  os << "# arbor realization point cloud\n";
  for (auto [x, y] : r.space().coords) os << "v " << x << " " << y << " 0\n";
  return os.str();
}

json realization_manifest(const Realization& r, const std::string& dir, const std::string& stem,
                          const std::string& format) {
  json j;
  j["schema"] = "arbor/realization/v1";
  j["points"] = r.space().size();
  j["error"] = r.error;
  json markers = json::array();
  for (const auto& [e, cls] : r.end_markers) markers.push_back({{"edge", e}, {"class", cls}});
  j["end_markers"] = markers;
  write_matrix_binary(dir + "/" + stem + ".f64", r.space());
  j["dist"] = {{"path", stem + ".f64"}, {"format", "float64le"}};
  json prov = json::array();
  for (const auto& members : r.glued.members) {
    json cls = json::array();
    for (auto [v, i] : members) cls.push_back({{"vertex", v}, {"point", i}});
    prov.push_back(cls);
  }
  j["provenance"] = prov;
  if (!r.space().coords.empty() && format.find("obj") != std::string::npos) {
    write_text_file(dir + "/" + stem + ".obj", realization_obj(r));
    j["obj"] = stem + ".obj";
  }
  return j;
}

}  // namespace arbor
