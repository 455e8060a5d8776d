// kds params|trap|qnm|certify --config <file> [--seed N] [--out dir]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kds/commands.hpp"
#include "kds/errors.hpp"
#include "kds/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kerr-de Sitter trapping and quasinormal-mode toolkit"};
  app.set_version_flag("--version", kds::io::tool_version());
  app.require_subcommand(1, 1);

  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  for (const char* name : {"params", "trap", "qnm", "certify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration or a manifest from an earlier run")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--out", out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kds::cli::kUsage;
  }

  const auto* sub = app.get_subcommands().front();
  kds::cli::RunOptions opt;
  opt.out = out_dir;
  if (sub->count("--seed")) opt.seed = seed;

  kds::io::json config;
  try {
    config = kds::io::load_config(config_path);
  } catch (const kds::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kds::exit_code_for(e.code());
  }
  return kds::cli::run_command(sub->get_name(), config, opt, std::cout);
}
