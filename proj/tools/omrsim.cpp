#include "omr/batch.hpp"
#include "omr/config.hpp"
#include "omr/presets.hpp"
#include "omr/verify.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    if (end > start) out.push_back(s.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Overrides {
  std::string config;
  std::string seed;
  std::string protocol;
  std::string mac;
  std::string out;
  int workers = 0;
};

omr::RunConfig resolve(const Overrides& o) {
  auto cfg = o.config.empty() ? omr::load_config(R"({"topology": "fig1"})") : omr::load_config_file(o.config);
  if (!o.seed.empty()) cfg.seeds = omr::parse_seed_range(o.seed);
  if (!o.protocol.empty()) {
    cfg.protocols.clear();
    for (const auto& p : split_list(o.protocol)) cfg.protocols.push_back(omr::parse_protocol(p));
  }
  if (!o.mac.empty()) {
    cfg.macs.clear();
    for (const auto& m : split_list(o.mac)) cfg.macs.push_back(omr::parse_mac(m));
  }
  if (cfg.protocols.empty() || cfg.macs.empty()) throw omr::ConfigError("protocol and mac lists must not be empty");
  if (!o.out.empty()) cfg.out = o.out;
  if (o.workers > 0) cfg.workers = o.workers;
  omr::refresh_hash(cfg);
  return cfg;
}

void add_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->envname("OMRSIM_CONFIG");
  cmd->add_option("--seed", o.seed, "seed n or range a..b")->envname("OMRSIM_SEED");
  cmd->add_option("--protocol", o.protocol, "omr-ff, omr-pf, flooding (comma separated)")->envname("OMRSIM_PROTOCOL");
  cmd->add_option("--mac", o.mac, "ideal, immediate (comma separated)")->envname("OMRSIM_MAC");
  cmd->add_option("--out", o.out, "output directory")->envname("OMRSIM_OUT");
  cmd->add_option("--workers", o.workers, "parallel cells")->envname("OMRSIM_WORKERS")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-modal converge-cast routing simulator"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "run every (seed, protocol, mac) cell of a configuration");
  add_flags(run, run_opts);

  Overrides verify_opts;
  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "audit stored traces against the protocol invariants");
  add_flags(verify, verify_opts);
  verify->add_option("dir", verify_dir, "trace directory (defaults to the configured output)");

  auto* preset = app.add_subcommand("preset", "inspect preset topologies");
  preset->require_subcommand(1);
  auto* list = preset->add_subcommand("list", "list preset names");
  std::string dump_name;
  std::uint64_t dump_seed = 1;
  auto* dump = preset->add_subcommand("dump", "print a preset as a graph document");
  dump->add_option("name", dump_name, "preset name")->required();
  dump->add_option("--seed", dump_seed, "seed for random presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve(run_opts);
      const auto result = omr::run_batch(cfg);
      std::cout << omr::batch_summary(cfg, result);
      return result.ok() ? 0 : 1;
    }
    if (*verify) {
      std::string dir = verify_dir;
      if (dir.empty()) dir = resolve(verify_opts).out;
      const auto audit = omr::audit_directory(dir);
      std::cout << omr::format_audit(audit);
      return audit.passed() ? 0 : 1;
    }
    if (*list) {
      for (const auto& name : omr::preset_names()) std::cout << name << "\n";
      return 0;
    }
    if (*dump) {
      std::cout << omr::dump_graph(omr::make_preset(dump_name, dump_seed));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
