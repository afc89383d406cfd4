#include "omr/config.hpp"
#include "omr/presets.hpp"

#include <doctest.h>

using namespace omr;

namespace {

std::string error_of(const std::string& doc) {
  try {
    load_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal document takes the defaults") {
  const auto c = load_config(R"({"topology": "fig1", "protocol": "omr-ff", "mac": "ideal", "seed": 1})");
  CHECK(std::get<PresetSource>(c.topology).name == "fig1");
  CHECK(c.protocols == std::vector<Protocol>{Protocol::OmrFF});
  CHECK(c.macs == std::vector<Mac>{Mac::Ideal});
  CHECK(c.lambda_per_min == 3.0);
  CHECK(c.t_net == 600.0);
  CHECK(c.period_u == 60.0);
  CHECK(c.max_message_bits == 64000);
  CHECK(c.seeds.size() == 1);
  CHECK(c.canonical.find("\"t_net\"") != std::string::npos);
}

TEST_CASE("validation names the field") {
  CHECK(error_of(R"({"topology": "fig1", "protocol": "omr"})").find("omr-ff, omr-pf, flooding") != std::string::npos);
  CHECK(error_of(R"({"topology": "fig1", "protocol": "omr"})").rfind("protocol", 0) == 0);
  CHECK(error_of(R"({"topology": "fig1", "colour": 1})").find("colour") != std::string::npos);
  CHECK(error_of(R"({"topology": "fig1", "t_net": -1})").rfind("t_net", 0) == 0);
  CHECK(error_of(R"({"topology": "fig1", "seed": "5..2"})").rfind("seed", 0) == 0);
  CHECK(error_of(R"({"topology": "fig1", "version": 2})").rfind("version", 0) == 0);
  CHECK(error_of(R"({"topology": "nowhere"})").find("fig1") != std::string::npos);
  CHECK(error_of(R"({"topology": {"preset": "fig1", "generate": {}}})").rfind("topology", 0) == 0);
  CHECK(error_of(R"({"topology": {"generate": {"node_count": "ten"}}})").rfind("topology.generate.node_count", 0) == 0);
  CHECK_FALSE(error_of("{ not json").empty());
}

TEST_CASE("seed ranges") {
  CHECK(parse_seed_range("1..100").size() == 100);
  CHECK(parse_seed_range("7").first == 7);
  CHECK(parse_seed_range("7").size() == 1);
  CHECK_THROWS_AS(parse_seed_range("3..1"), ConfigError);
  CHECK_THROWS_AS(parse_seed_range("a..b"), ConfigError);
  CHECK(load_config(R"({"topology": "fig1", "seed": "1..100"})").seeds.size() == 100);
}

TEST_CASE("lists of protocols and MACs") {
  const auto c = load_config(R"({"topology": "fig1", "protocol": ["omr-ff", "flooding"], "mac": ["ideal", "immediate"]})");
  CHECK(c.protocols.size() == 2);
  CHECK(c.macs.size() == 2);
}

TEST_CASE("hash ignores output location and worker count") {
  const auto a = load_config(R"({"topology": "fig1", "seed": 3, "out": "x", "workers": 1})");
  const auto b = load_config(R"({"topology": "fig1", "seed": 3, "out": "y", "workers": 4})");
  const auto c = load_config(R"({"topology": "fig1", "seed": 4})");
  CHECK(a.hash == b.hash);
  CHECK(a.hash != c.hash);
}

TEST_CASE("a dumped graph loads back unchanged") {
  const auto g = make_preset("paper-random", 12);
  const auto doc = R"({"topology": {"graph": )" + dump_graph(g) + "}}";
  const auto c = load_config(doc);
  const auto back = topology_for_seed(c, 1);
  CHECK(back.links == g.links);
  CHECK(back.upstream == g.upstream);
  CHECK(back.sink == g.sink);
  REQUIRE(back.size() == g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(back.nodes[k].technologies == g.nodes[k].technologies);
    CHECK((back.nodes[k].position - g.nodes[k].position).norm() < 1e-9);
  }
}

TEST_CASE("graph documents are checked") {
  const auto bad_link = R"({"topology": {"graph": {"nodes": [
      {"id": 1, "position": [0, 0, 0], "technologies": ["LF"]},
      {"id": 2, "position": [10, 0, 0], "technologies": ["MF"]}],
      "sink": 2, "links": [[1, 2, "LF"]]}}})";
  CHECK_FALSE(error_of(bad_link).empty());
  const auto bad_tech = R"({"topology": {"graph": {"nodes": [
      {"id": 1, "position": [0, 0, 0], "technologies": ["XF"]}], "sink": 1}}})";
  CHECK(error_of(bad_tech).find("topology.graph.nodes[0].technologies[0]") == 0);
}

TEST_CASE("datagram caps override the catalog") {
  const auto c = load_config(R"({"topology": "chain-2", "max_datagram_bits": {"LF": 4800}})");
  CHECK(topology_for_seed(c, 1).technologies[0].max_datagram_bits == 4800);
  CHECK_FALSE(error_of(R"({"topology": "fig1", "max_datagram_bits": {"ZZ": 4800}})").empty());
}

TEST_CASE("random sources draw a topology per seed") {
  const auto c = load_config(R"({"topology": "paper-random"})");
  CHECK(topology_for_seed(c, 1).links != topology_for_seed(c, 2).links);
  const auto gen = load_config(R"({"topology": {"generate": {"node_count": 6}}})");
  CHECK(topology_for_seed(gen, 1).size() == 6);
}

TEST_CASE("presets") {
  CHECK(preset_names().size() == 4);
  CHECK(preset_is_random("paper-random"));
  CHECK_FALSE(preset_is_random("fig1"));

  const auto fig1 = make_preset("fig1");
  CHECK(fig1.sink == 6);
  CHECK(fig1.upstream_of(1) == std::vector<NodeId>{5});
  CHECK(fig1.upstream_of(4) == std::vector<NodeId>{2, 5});
  CHECK(fig1.upstream_of(5) == std::vector<NodeId>{2, 3});
  CHECK(fig1.upstream_of(2) == std::vector<NodeId>{6});
  CHECK(fig1.upstream_of(3) == std::vector<NodeId>{6});
  const auto lf = *fig1.find_technology("LF");
  const auto mf = *fig1.find_technology("MF");
  CHECK(fig1.link_technologies(3, 5) == std::vector<TechId>{lf, mf});
  CHECK(fig1.link_technologies(2, 5) == std::vector<TechId>{mf});
  CHECK(fig1.node(5).technologies == std::vector<TechId>{lf, mf});

  const auto chain = make_preset("chain-3");
  CHECK(chain.upstream_of(1) == std::vector<NodeId>{2});
  CHECK(chain.upstream_of(2) == std::vector<NodeId>{3});
  const auto diamond = make_preset("diamond");
  CHECK(diamond.upstream_of(1) == std::vector<NodeId>{2, 3});
  CHECK_THROWS_AS(make_preset("chain-1"), ConfigError);
  CHECK_THROWS_AS(make_preset("hexagon"), ConfigError);
}
