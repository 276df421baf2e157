// Generates the built-in demonstration worlds and their scenario files.
//
//   ffnav-worldgen --preset corridor --seed 3 --out-dir scenarios
//   ffnav-worldgen --all --out-dir scenarios
//
// Each preset produces <name>.world.json and <name>.scenario.json in the
// output directory; the scenario references the world by relative path, so
// the pair can be moved together.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ffnav/errors.hpp"
#include "ffnav/presets.hpp"

namespace
{

void write_bundle(const std::string & name, std::uint64_t seed, const std::string & out_dir)
{
  namespace fs = std::filesystem;
  ffnav::PresetBundle bundle = ffnav::make_preset(name, seed);
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ffnav::IoError("cannot create output directory: " + out_dir);
  }
  const std::string world_name = name + ".world.json";
  bundle.scenario.world_file = world_name;
  ffnav::save_world(bundle.world, (dir / world_name).string());
  ffnav::save_scenario(bundle.scenario, (dir / (name + ".scenario.json")).string());
  std::printf(
    "wrote %s (%zu landmarks)\n", (dir / (name + ".scenario.json")).string().c_str(),
    bundle.world.landmarks.size());
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"demonstration world generator"};
  std::string preset;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  bool all = false;
  app.add_option("--preset", preset, "preset name (see --list)");
  app.add_flag("--all", all, "generate every preset");
  app.add_flag_callback(
    "--list",
    [] {
      for (const auto & name : ffnav::preset_names()) {
        std::printf("%s\n", name.c_str());
      }
      std::exit(0);
    },
    "list preset names and exit");
  app.add_option("--seed", seed, "base RNG seed");
  app.add_option("--out-dir", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  if (!all && preset.empty()) {
    std::fprintf(stderr, "ffnav-worldgen: pass --preset NAME or --all\n");
    return 64;
  }

  try {
    if (all) {
      for (const auto & name : ffnav::preset_names()) {
        write_bundle(name, seed, out_dir);
      }
    } else {
      write_bundle(preset, seed, out_dir);
    }
  } catch (const ffnav::IoError & e) {
    std::fprintf(stderr, "ffnav-worldgen: %s\n", e.what());
    return 66;
  } catch (const ffnav::Error & e) {
    std::fprintf(stderr, "ffnav-worldgen: %s\n", e.what());
    return 65;
  }
  return 0;
}
