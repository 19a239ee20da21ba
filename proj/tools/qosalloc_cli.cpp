#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "qosalloc/harness.hpp"

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  qosalloc::harness::Overrides overrides;
};

void add_common(CLI::App* cmd, Common& c, bool with_output) {
  cmd->add_option("--config", c.config, "INI configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.overrides.seed, "Master seed");
  cmd->add_option("--frames", c.overrides.frames, "Frames to simulate");
  cmd->add_option("--threads", c.overrides.threads, "Worker threads");
  cmd->add_option("--mode", c.overrides.mode, "Allocation policy")
      ->check(CLI::IsMember({"finite", "large-nt", "constant-rate"}));
  if (with_output) cmd->add_option("--out", c.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  namespace h = qosalloc::harness;
  CLI::App app{"QoS-constrained downlink resource allocation experiments"};
  app.set_version_flag("--version", std::string(h::version()));
  app.require_subcommand(1);

  Common c;
  bool channel_trace = false;
  auto* validate_config = app.add_subcommand("validate-config", "Print the normalized SI view of a config");
  add_common(validate_config, c, false);
  auto* validate_bound = app.add_subcommand("validate-bound", "Delay CCDF vs M/D/1 and the exponential bound");
  add_common(validate_bound, c, true);
  auto* table2 = app.add_subcommand("table2", "Normalized power and resource ratios per antenna count");
  add_common(table2, c, true);
  table2->add_flag("--channel-trace", channel_trace, "Also write channel.csv with the block gains");
  auto* resources = app.add_subcommand("required-resources", "Transmit power and bandwidth bounds vs reliability");
  add_common(resources, c, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kConfigError;
  }

  if (validate_config->parsed()) return h::cmd_validate_config(c.config, c.overrides, std::cout);
  if (validate_bound->parsed()) return h::cmd_validate_bound(c.config, c.overrides, c.out, std::cerr);
  if (table2->parsed()) return h::cmd_table2(c.config, c.overrides, c.out, std::cerr, channel_trace);
  return h::cmd_required_resources(c.config, c.overrides, c.out, std::cerr);
}
