#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "cdlab/tools/commands.hpp"

int main(int argc, char** argv) {
  using namespace cdlab::tools;
  CLI::App app{"cdlab: quasi-homogeneous operator laboratory"};
  app.require_subcommand(1);

  RunOptions options;
  std::size_t trunc = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  const std::map<std::string, std::string> descriptions{
      {"classify", "tag each connector as bounded or forced to zero"},
      {"assemble", "assemble the truncated operator and check the intertwining identity"},
      {"geometry", "Grammian, curvature and second fundamental form on a disc grid"},
      {"sylvester", "closed-form Sylvester solves over a parameter box"},
      {"reduce", "similarity reduction to the block-diagonal model"},
      {"commutant", "commutant elements from polynomials in the operator"},
      {"powerbound", "norm growth of powers"},
      {"suite", "run the acceptance battery"},
      {"validate", "check a config and exit"},
  };
  for (const std::string& name : command_names()) {
    const auto it = descriptions.find(name);
    CLI::App* sub = app.add_subcommand(name, it == descriptions.end() ? std::string() : it->second);
    sub->add_option("--config", options.config_path, "experiment config (JSON)");
    if (name != "validate") {
      sub->add_option("--out", options.out_dir, "output directory")->required();
      sub->add_option("--trunc", trunc, "per-atom truncation override");
      sub->add_option("--seed", seed, "seed override");
      sub->add_option("--tol", tol, "tolerance override");
    }
    if (name != "suite") sub->get_option("--config")->required();
    sub->callback([&options, name] { options.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalidInput;
  }
  CLI::App* used = app.get_subcommands().front();
  auto given = [used](const char* flag) {
    const CLI::Option* opt = used->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--trunc")) options.overrides.trunc = trunc;
  if (given("--seed")) options.overrides.seed = seed;
  if (given("--tol")) options.overrides.tol = tol;
  return run(options, std::cerr);
}
