#include "omr/config.hpp"

#include "omr/fragment.hpp"
#include "omr/presets.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace omr {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) {
      std::string names;
      for (const auto& k : ok) names += (names.empty() ? "" : ", ") + k;
      fail(join(path, key), "unknown key (valid: " + names + ")");
    }
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

double get_positive(const json& v, const std::string& path) {
  const double x = get_number(v, path);
  if (!(x > 0)) fail(path, "must be positive");
  return x;
}

std::int64_t get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

Vec3 get_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected [x, y, z]");
  return Vec3(get_number(v[0], path + "[0]"), get_number(v[1], path + "[1]"), get_number(v[2], path + "[2]"));
}

template <class T, class Parse>
std::vector<T> one_or_many(const json& v, const std::string& path, Parse parse) {
  std::vector<T> out;
  auto add = [&](const json& item, const std::string& p) {
    const auto text = get_string(item, p);
    T x{};
    try {
      x = parse(text);
    } catch (const ConfigError& e) {
      fail(p, e.what());
    }
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  };
  if (v.is_array()) {
    if (v.empty()) fail(path, "must not be empty");
    for (std::size_t k = 0; k < v.size(); ++k) add(v[k], path + "[" + std::to_string(k) + "]");
  } else {
    add(v, path);
  }
  return out;
}

TechId tech_by_name(const TechnologyCatalog& catalog, const std::string& name, const std::string& path) {
  for (std::size_t k = 0; k < catalog.size(); ++k)
    if (catalog[k].name == name) return static_cast<TechId>(k);
  fail(path, "unknown technology '" + name + "'");
}

NodeId get_node_id(const json& v, const std::string& path) {
  const auto id = get_int(v, path);
  if (id < 1 || id > 255) fail(path, "node ids must lie in 1..255");
  return static_cast<NodeId>(id);
}

ScenarioParams parse_generate(const json& g, const std::string& path) {
  reject_unknown(g, path,
                 {"node_count", "width", "length", "depth", "horizontal_obstacles", "vertical_obstacles",
                  "obstacle_min_length", "obstacle_max_length", "assignment", "sink_has_all_technologies",
                  "max_attempts"});
  ScenarioParams p;
  if (g.contains("node_count")) {
    const auto n = get_int(g["node_count"], join(path, "node_count"));
    if (n < 2 || n > 255) fail(join(path, "node_count"), "must lie in 2..255");
    p.node_count = static_cast<int>(n);
  }
  if (g.contains("width")) p.width = get_positive(g["width"], join(path, "width"));
  if (g.contains("length")) p.length = get_positive(g["length"], join(path, "length"));
  if (g.contains("depth")) p.depth = get_positive(g["depth"], join(path, "depth"));
  auto count = [&](const char* key, int& dst) {
    if (!g.contains(key)) return;
    const auto n = get_int(g[key], join(path, key));
    if (n < 0) fail(join(path, key), "must be non-negative");
    dst = static_cast<int>(n);
  };
  count("horizontal_obstacles", p.horizontal_obstacles);
  count("vertical_obstacles", p.vertical_obstacles);
  if (g.contains("obstacle_min_length"))
    p.obstacle_min_length = get_positive(g["obstacle_min_length"], join(path, "obstacle_min_length"));
  if (g.contains("obstacle_max_length"))
    p.obstacle_max_length = get_positive(g["obstacle_max_length"], join(path, "obstacle_max_length"));
  if (p.obstacle_max_length < p.obstacle_min_length)
    fail(join(path, "obstacle_max_length"), "must not be below obstacle_min_length");
  if (g.contains("assignment")) {
    const auto a = get_string(g["assignment"], join(path, "assignment"));
    if (a == "subset")
      p.assignment = TechAssignment::UniformSubset;
    else if (a == "all")
      p.assignment = TechAssignment::All;
    else
      fail(join(path, "assignment"), "expected 'subset' or 'all'");
  }
  if (g.contains("sink_has_all_technologies"))
    p.sink_has_all_technologies = get_bool(g["sink_has_all_technologies"], join(path, "sink_has_all_technologies"));
  if (g.contains("max_attempts")) {
    const auto n = get_int(g["max_attempts"], join(path, "max_attempts"));
    if (n < 1) fail(join(path, "max_attempts"), "must be at least 1");
    p.max_attempts = static_cast<int>(n);
  }
  return p;
}

TopologyGraph parse_graph(const json& g, const std::string& path) {
  reject_unknown(g, path, {"nodes", "sink", "links", "upstream", "obstacles"});
  const auto catalog = default_catalog();
  if (!g.contains("nodes") || !g["nodes"].is_array() || g["nodes"].empty()) fail(join(path, "nodes"), "expected a non-empty array");
  std::vector<NodeSpec> nodes;
  for (std::size_t k = 0; k < g["nodes"].size(); ++k) {
    const auto p = join(path, "nodes") + "[" + std::to_string(k) + "]";
    const auto& n = g["nodes"][k];
    reject_unknown(n, p, {"id", "position", "technologies"});
    if (!n.contains("id")) fail(join(p, "id"), "required");
    if (!n.contains("position")) fail(join(p, "position"), "required");
    if (!n.contains("technologies") || !n["technologies"].is_array())
      fail(join(p, "technologies"), "expected an array of technology names");
    NodeSpec spec;
    spec.id = get_node_id(n["id"], join(p, "id"));
    spec.position = get_vec3(n["position"], join(p, "position"));
    for (std::size_t t = 0; t < n["technologies"].size(); ++t) {
      const auto tp = join(p, "technologies") + "[" + std::to_string(t) + "]";
      spec.technologies.push_back(tech_by_name(catalog, get_string(n["technologies"][t], tp), tp));
    }
    nodes.push_back(std::move(spec));
  }
  if (!g.contains("sink")) fail(join(path, "sink"), "required");
  const NodeId sink = get_node_id(g["sink"], join(path, "sink"));

  std::optional<std::vector<Link>> links;
  if (g.contains("links")) {
    const auto& arr = g["links"];
    if (!arr.is_array()) fail(join(path, "links"), "expected an array of [a, b, technology]");
    links.emplace();
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const auto p = join(path, "links") + "[" + std::to_string(k) + "]";
      if (!arr[k].is_array() || arr[k].size() != 3) fail(p, "expected [a, b, technology]");
      links->push_back({get_node_id(arr[k][0], p + "[0]"), get_node_id(arr[k][1], p + "[1]"),
                        tech_by_name(catalog, get_string(arr[k][2], p + "[2]"), p + "[2]")});
    }
  }
  std::optional<NeighborMap> upstream;
  if (g.contains("upstream")) {
    const auto& obj = g["upstream"];
    if (!obj.is_object()) fail(join(path, "upstream"), "expected an object mapping node id to a list");
    upstream.emplace();
    for (const auto& [key, value] : obj.items()) {
      const auto p = join(path, "upstream") + "." + key;
      int id = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
      if (ec != std::errc() || ptr != key.data() + key.size() || id < 1 || id > 255) fail(p, "key must be a node id");
      if (!value.is_array()) fail(p, "expected a list of node ids");
      auto& y = (*upstream)[static_cast<NodeId>(id)];
      for (std::size_t k = 0; k < value.size(); ++k) y.push_back(get_node_id(value[k], p + "[" + std::to_string(k) + "]"));
    }
  }
  ObstacleField obstacles;
  if (g.contains("obstacles")) {
    const auto& arr = g["obstacles"];
    if (!arr.is_array()) fail(join(path, "obstacles"), "expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const auto p = join(path, "obstacles") + "[" + std::to_string(k) + "]";
      reject_unknown(arr[k], p, {"a", "b", "orientation"});
      ObstacleSegment o;
      if (!arr[k].contains("a") || !arr[k].contains("b")) fail(p, "needs endpoints a and b");
      o.a = get_vec3(arr[k]["a"], join(p, "a"));
      o.b = get_vec3(arr[k]["b"], join(p, "b"));
      const auto orient = arr[k].contains("orientation") ? get_string(arr[k]["orientation"], join(p, "orientation"))
                                                         : std::string("horizontal");
      if (orient == "horizontal")
        o.orientation = ObstacleOrientation::Horizontal;
      else if (orient == "vertical")
        o.orientation = ObstacleOrientation::Vertical;
      else
        fail(join(p, "orientation"), "expected 'horizontal' or 'vertical'");
      obstacles.push_back(o);
    }
  }
  try {
    return build_graph(catalog, std::move(nodes), sink, std::move(obstacles), std::move(links), std::move(upstream));
  } catch (const TopologyError& e) {
    fail(path, e.what());
  }
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json graph_json(const TopologyGraph& g) {
  json out;
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json techs = json::array();
    for (auto t : n.technologies) techs.push_back(g.technologies[t].name);
    nodes.push_back({{"id", n.id}, {"position", vec_json(n.position)}, {"technologies", techs}});
  }
  out["nodes"] = nodes;
  out["sink"] = g.sink;
  json links = json::array();
  for (const auto& l : g.links) links.push_back(json::array({l.a, l.b, g.technologies[l.tech].name}));
  out["links"] = links;
  json up = json::object();
  for (const auto& [i, y] : g.upstream) up[std::to_string(i)] = y;
  out["upstream"] = up;
  json obstacles = json::array();
  for (const auto& o : g.obstacles)
    obstacles.push_back({{"a", vec_json(o.a)},
                         {"b", vec_json(o.b)},
                         {"orientation", o.orientation == ObstacleOrientation::Horizontal ? "horizontal" : "vertical"}});
  out["obstacles"] = obstacles;
  return out;
}

json params_json(const ScenarioParams& p) {
  return {{"node_count", p.node_count},
          {"width", p.width},
          {"length", p.length},
          {"depth", p.depth},
          {"horizontal_obstacles", p.horizontal_obstacles},
          {"vertical_obstacles", p.vertical_obstacles},
          {"obstacle_min_length", p.obstacle_min_length},
          {"obstacle_max_length", p.obstacle_max_length},
          {"assignment", p.assignment == TechAssignment::All ? "all" : "subset"},
          {"sink_has_all_technologies", p.sink_has_all_technologies},
          {"max_attempts", p.max_attempts}};
}

}  // namespace

SeedRange parse_seed_range(const std::string& text) {
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
      throw ConfigError("seed: expected n or a..b, got '" + text + "'");
    return v;
  };
  const auto dots = text.find("..");
  SeedRange r;
  if (dots == std::string::npos) {
    r.first = r.last = number(text);
  } else {
    r.first = number(std::string_view(text).substr(0, dots));
    r.last = number(std::string_view(text).substr(dots + 2));
  }
  if (r.last < r.first) throw ConfigError("seed: empty range '" + text + "'");
  return r;
}

void refresh_hash(RunConfig& cfg) {
  json c;
  c["version"] = cfg.version;
  if (auto p = std::get_if<PresetSource>(&cfg.topology)) c["topology"] = {{"preset", p->name}};
  if (auto g = std::get_if<GenerateSource>(&cfg.topology)) c["topology"] = {{"generate", params_json(g->params)}};
  if (auto g = std::get_if<GraphSource>(&cfg.topology)) c["topology"] = {{"graph", graph_json(g->graph)}};
  json protocols = json::array();
  for (auto p : cfg.protocols) protocols.push_back(to_string(p));
  json macs = json::array();
  for (auto m : cfg.macs) macs.push_back(to_string(m));
  c["protocol"] = protocols;
  c["mac"] = macs;
  c["lambda_per_min"] = cfg.lambda_per_min;
  c["t_net"] = cfg.t_net;
  c["period_u"] = cfg.period_u;
  c["max_message_bits"] = cfg.max_message_bits;
  c["sound_speed"] = cfg.sound_speed;
  c["ack_timeout_factor"] = cfg.ack_timeout_factor;
  c["backoff_frames"] = cfg.backoff_frames;
  c["retry_cap"] = cfg.retry_cap;
  c["fair_share_index"] = cfg.fair_share_index == FairShareIndex::Downstream ? "downstream" : "upstream";
  c["flood_dedup"] = cfg.flood_dedup;
  c["flood_acks"] = cfg.flood_acks;
  c["max_datagram_bits"] = cfg.max_datagram_bits;
  c["seed"] = std::to_string(cfg.seeds.first) + ".." + std::to_string(cfg.seeds.last);
  cfg.canonical = c.dump();
  cfg.hash = fnv1a64({reinterpret_cast<const std::uint8_t*>(cfg.canonical.data()), cfg.canonical.size()});
}

RunConfig load_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed document: ") + e.what());
  }
  reject_unknown(doc, "",
                 {"version", "topology", "protocol", "mac", "lambda_per_min", "t_net", "period_u", "max_message_bits",
                  "sound_speed", "ack_timeout_factor", "backoff_frames", "retry_cap", "fair_share_index", "flood_dedup", "flood_acks",
                  "max_datagram_bits", "seed", "out", "workers"});
  RunConfig cfg;
  if (doc.contains("version")) {
    cfg.version = static_cast<int>(get_int(doc["version"], "version"));
    if (cfg.version != 1) fail("version", "unsupported version " + std::to_string(cfg.version) + " (supported: 1)");
  }
  if (!doc.contains("topology")) fail("topology", "required");
  const auto& topo = doc["topology"];
  if (topo.is_string()) {
    cfg.topology = PresetSource{topo.get<std::string>()};
  } else if (topo.is_object()) {
    if (topo.size() != 1) fail("topology", "needs exactly one of preset, generate, graph");
    reject_unknown(topo, "topology", {"preset", "generate", "graph"});
    if (topo.contains("preset")) cfg.topology = PresetSource{get_string(topo["preset"], "topology.preset")};
    if (topo.contains("generate")) cfg.topology = GenerateSource{parse_generate(topo["generate"], "topology.generate")};
    if (topo.contains("graph")) cfg.topology = GraphSource{parse_graph(topo["graph"], "topology.graph")};
  } else {
    fail("topology", "expected a preset name or an object");
  }
  if (auto p = std::get_if<PresetSource>(&cfg.topology)) {
    try {
      if (!preset_is_random(p->name)) make_preset(p->name);
    } catch (const ConfigError& e) {
      fail("topology", e.what());
    }
  }
  if (doc.contains("protocol")) cfg.protocols = one_or_many<Protocol>(doc["protocol"], "protocol", parse_protocol);
  if (doc.contains("mac")) cfg.macs = one_or_many<Mac>(doc["mac"], "mac", parse_mac);
  if (doc.contains("lambda_per_min")) cfg.lambda_per_min = get_positive(doc["lambda_per_min"], "lambda_per_min");
  if (doc.contains("t_net")) cfg.t_net = get_positive(doc["t_net"], "t_net");
  if (doc.contains("period_u")) cfg.period_u = get_positive(doc["period_u"], "period_u");
  if (doc.contains("max_message_bits")) {
    cfg.max_message_bits = get_int(doc["max_message_bits"], "max_message_bits");
    if (cfg.max_message_bits < 8) fail("max_message_bits", "must be at least 8");
  }
  if (doc.contains("sound_speed")) cfg.sound_speed = get_positive(doc["sound_speed"], "sound_speed");
  if (doc.contains("ack_timeout_factor")) {
    cfg.ack_timeout_factor = get_number(doc["ack_timeout_factor"], "ack_timeout_factor");
    if (cfg.ack_timeout_factor < 1) fail("ack_timeout_factor", "must be at least 1");
  }
  if (doc.contains("backoff_frames")) {
    cfg.backoff_frames = get_number(doc["backoff_frames"], "backoff_frames");
    if (cfg.backoff_frames < 0) fail("backoff_frames", "must be non-negative");
  }
  if (doc.contains("retry_cap")) {
    const auto r = get_int(doc["retry_cap"], "retry_cap");
    if (r < -1) fail("retry_cap", "use -1 for unlimited or a non-negative cap");
    cfg.retry_cap = static_cast<int>(r);
  }
  if (doc.contains("fair_share_index")) {
    const auto s = get_string(doc["fair_share_index"], "fair_share_index");
    if (s == "downstream")
      cfg.fair_share_index = FairShareIndex::Downstream;
    else if (s == "upstream")
      cfg.fair_share_index = FairShareIndex::UpstreamLiteral;
    else
      fail("fair_share_index", "expected 'downstream' or 'upstream'");
  }
  if (doc.contains("flood_dedup")) cfg.flood_dedup = get_bool(doc["flood_dedup"], "flood_dedup");
  if (doc.contains("flood_acks")) cfg.flood_acks = get_bool(doc["flood_acks"], "flood_acks");
  if (doc.contains("max_datagram_bits")) {
    const auto& m = doc["max_datagram_bits"];
    if (!m.is_object()) fail("max_datagram_bits", "expected an object mapping technology to bits");
    const auto catalog = default_catalog();
    for (const auto& [name, v] : m.items()) {
      const auto p = "max_datagram_bits." + name;
      tech_by_name(catalog, name, p);
      const auto bits = get_int(v, p);
      if (bits < 8) fail(p, "must be at least 8");
      cfg.max_datagram_bits[name] = bits;
    }
  }
  if (doc.contains("seed")) {
    const auto& s = doc["seed"];
    if (s.is_number_unsigned()) {
      cfg.seeds.first = cfg.seeds.last = s.get<std::uint64_t>();
    } else if (s.is_string()) {
      cfg.seeds = parse_seed_range(s.get<std::string>());
    } else {
      fail("seed", "expected a non-negative integer or \"a..b\"");
    }
  }
  if (doc.contains("out")) cfg.out = get_string(doc["out"], "out");
  if (doc.contains("workers")) {
    const auto w = get_int(doc["workers"], "workers");
    if (w < 1) fail("workers", "must be at least 1");
    cfg.workers = static_cast<int>(w);
  }
  refresh_hash(cfg);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

TopologyGraph topology_for_seed(const RunConfig& cfg, std::uint64_t seed) {
  TopologyGraph g;
  if (auto p = std::get_if<PresetSource>(&cfg.topology)) g = make_preset(p->name, seed);
  if (auto s = std::get_if<GenerateSource>(&cfg.topology)) g = generate_connected_topology(s->params, seed);
  if (auto s = std::get_if<GraphSource>(&cfg.topology)) g = s->graph;
  for (auto& t : g.technologies) {
    auto it = cfg.max_datagram_bits.find(t.name);
    if (it != cfg.max_datagram_bits.end()) t.max_datagram_bits = it->second;
  }
  return g;
}

std::string dump_graph(const TopologyGraph& graph) { return graph_json(graph).dump(2) + "\n"; }

SimConfig make_sim_config(const RunConfig& cfg, TopologyGraph graph, Protocol protocol, Mac mac) {
  SimConfig s;
  s.graph = std::move(graph);
  s.protocol = protocol;
  s.mac = mac;
  s.lambda_per_min = cfg.lambda_per_min;
  s.t_net = cfg.t_net;
  s.period_u = cfg.period_u;
  s.max_message_bits = cfg.max_message_bits;
  s.sound_speed = cfg.sound_speed;
  s.ack_timeout_factor = cfg.ack_timeout_factor;
  s.backoff_frames = cfg.backoff_frames;
  s.retry_cap = cfg.retry_cap;
  s.fair_share_index = cfg.fair_share_index;
  s.flood_dedup = cfg.flood_dedup;
  s.flood_acks = cfg.flood_acks;
  s.config_hash = cfg.hash;
  return s;
}

}  // namespace omr
