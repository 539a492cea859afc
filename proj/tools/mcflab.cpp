#include <string>
#include <utility>

#include "CLI11.hpp"
#include "mcflab/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mcflab: graph mean curvature flow with prescribed contact angle"};
  app.require_subcommand(1);
  mcflab::CliOptions opt;
  const std::pair<const char*, const char*> commands[] = {
      {"flow", "run the parabolic flow and its monitors"},
      {"translator", "solve for the translating solution and its speed"},
      {"verify", "flow plus translator with the full monitor table"},
      {"sweep", "repeat flow or translator over a parameter list"},
      {"cheeger", "length over area of geodesic balls"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "scenario file (YAML)")->required();
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--jobs", opt.jobs, "concurrent sweep points")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", opt.quiet, "no tables on stdout");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mcflab::kExitConfig;
  }
  return mcflab::run_command(app.get_subcommands().front()->get_name(), opt);
}
