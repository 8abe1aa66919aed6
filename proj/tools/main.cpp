#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mra/errors.hpp"

int main(int argc, char** argv) {
  using namespace mra::cli;
  CLI::App app{"Coded downlink massive random access: sources, bounds and simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<unsigned> workers;

  using Command = int (*)(const RunConfig&, const std::filesystem::path&, std::ostream&);
  const std::map<std::string, std::pair<Command, std::string>> commands = {
      {"source-info", {cmd_source_info, "type table, entropy and exchangeability check"}},
      {"bounds", {cmd_bounds, "exact divergence, H(T) and every applicable bound"}},
      {"simulate", {cmd_simulate, "Monte Carlo encode/decode runs against the exact law"}},
      {"definetti", {cmd_definetti, "de Finetti lower-bound search and chain-inequality grid"}},
      {"codes", {cmd_codes, "Elias gamma/delta conformance table"}},
      {"codewords", {cmd_codewords, "codeword dump (t, position, symbol)"}},
  };
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->add_option("-c,--config", config_path, "JSON config file")->required();
    sub->add_option("-o,--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override master seed");
    sub->add_option("--trials", trials, "override trial count");
    sub->add_option("--workers", workers, "worker threads (never changes outputs)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = load_config(config_path, Overrides{seed, trials, workers});
    return commands.at(name).first(cfg, out_dir, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mra::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mra::CapabilityError& e) {
    std::cerr << "capability exceeded: " << e.what() << '\n';
    return kExitCapability;
  } catch (const mra::BudgetExhausted& e) {
    std::cerr << "budget exhausted: " << e.what() << '\n';
    return kExitViolation;
  } catch (const mra::DecodeMismatch& e) {
    std::cerr << "decode mismatch: " << e.what() << '\n';
    return kExitViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
