#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

#include "nss/commands.hpp"

namespace {

void usage(std::ostream& os) {
  os << "usage: nss <verb> --config FILE [--out DIR] [--seed N] [--quiet]\n"
        "\n"
        "verbs:\n"
        "  simulate            run the implicit fluid-particle solver\n"
        "  stationary          compute the steady state and its residuals\n"
        "  validate-potential  check the confinement hypotheses\n"
        "  asymptotics         run and compare against the steady state\n"
        "  sweep-delta         rerun over the artificial-pressure schedule\n"
        "\n"
        "flags:\n"
        "  --config FILE  configuration file (required)\n"
        "  --out DIR      override run.out_dir\n"
        "  --seed N       override initial.seed\n"
        "  --quiet        suppress progress notes\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::string verb, config_path, out_dir, seed_str;
  bool quiet = false;

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--help" || arg == "-h") {
      usage(std::cout);
      return 0;
    }
    if (arg == "--quiet") {
      quiet = true;
      continue;
    }
    if (arg == "--config" || arg == "--out" || arg == "--seed") {
      if (i + 1 >= argc) {
        std::cerr << "error: " << arg << " needs a value\n";
        return nss::kExitConfig;
      }
      const std::string val = argv[++i];
      if (arg == "--config")
        config_path = val;
      else if (arg == "--out")
        out_dir = val;
      else
        seed_str = val;
      continue;
    }
    if (!arg.empty() && arg[0] == '-') {
      std::cerr << "error: unknown flag '" << arg << "'\n";
      usage(std::cerr);
      return nss::kExitConfig;
    }
    if (!verb.empty()) {
      std::cerr << "error: more than one verb ('" << verb << "', '" << arg
                << "')\n";
      return nss::kExitConfig;
    }
    verb = arg;
  }

  if (verb.empty()) {
    usage(std::cerr);
    return nss::kExitConfig;
  }
  if (config_path.empty()) {
    std::cerr << "error: --config is required\n";
    return nss::kExitConfig;
  }

  nss::RunConfig cfg;
  try {
    cfg = nss::parse_config_file(config_path);
    if (!out_dir.empty()) cfg.run.out_dir = out_dir;
    if (!seed_str.empty()) {
      size_t pos = 0;
      cfg.initial.seed = std::stoull(seed_str, &pos);
      if (pos != seed_str.size())
        throw nss::ConfigError("--seed value '" + seed_str +
                               "' is not a nonnegative integer");
      cfg.initial.seed_set = true;
    }
  } catch (const nss::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nss::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: --seed value '" << seed_str << "': " << e.what()
              << "\n";
    return nss::kExitConfig;
  }

  if (verb == "simulate") return nss::cmd_simulate(cfg, std::cout, quiet);
  if (verb == "stationary") return nss::cmd_stationary(cfg, std::cout, quiet);
  if (verb == "validate-potential")
    return nss::cmd_validate_potential(cfg, std::cout, quiet);
  if (verb == "asymptotics") return nss::cmd_asymptotics(cfg, std::cout, quiet);
  if (verb == "sweep-delta") return nss::cmd_sweep_delta(cfg, std::cout, quiet);

  std::cerr << "error: unknown verb '" << verb << "'\n";
  usage(std::cerr);
  return nss::kExitConfig;
}
