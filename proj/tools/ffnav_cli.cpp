// Command-line front end for the teach-and-repeat pipeline:
//   ffnav teach        drive the taught route and write the keyframe map
//   ffnav repeat       replay a map in closed loop and write the run log
//   ffnav eval         compare a repeat log against its teach log
//   ffnav gen-traj-lib precompute the trajectory candidate library
//   ffnav trace        convert a run log into a flat CSV trace
//
// Exit codes: 0 success, 64 usage error, 65 malformed/incompatible data,
// 66 file I/O failure.

#include <cmath>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "ffnav/errors.hpp"
#include "ffnav/local_planner.hpp"
#include "ffnav/sim.hpp"
#include "ffnav/teach_map.hpp"
#include "ffnav/world.hpp"

namespace
{

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitIo = 66;

ffnav::World world_for(const ffnav::Scenario & scenario, const std::string & scenario_path)
{
  return ffnav::load_world(ffnav::path_relative_to(scenario_path, scenario.world_file));
}

int run_teach_cmd(
  const std::string & scenario_path, const std::string & map_out, const std::string & log_out)
{
  const ffnav::Scenario scenario = ffnav::load_scenario(scenario_path);
  const ffnav::World world = world_for(scenario, scenario_path);
  const ffnav::TeachResult result = ffnav::run_teach(world, scenario);
  ffnav::save_map(result.map, map_out);
  if (!log_out.empty()) {
    ffnav::save_run_log(result.log, log_out);
  }
  std::printf(
    "{\"keyframes\": %zu, \"ticks\": %zu}\n", result.map.keyframes.size(),
    result.log.records.size());
  return 0;
}

int run_repeat_cmd(
  const std::string & map_path, const std::string & scenario_path, const std::string & log_out,
  const std::string & lib_path)
{
  const ffnav::Scenario scenario = ffnav::load_scenario(scenario_path);
  const ffnav::World world = world_for(scenario, scenario_path);
  const ffnav::KeyframeMap map = ffnav::load_map(map_path);
  const ffnav::CandidateLibrary library = lib_path.empty()
    ? ffnav::generate_library(scenario.planner)
    : ffnav::load_library(lib_path);
  const ffnav::RepeatResult result = ffnav::run_repeat(world, scenario, map, library);
  ffnav::save_run_log(result.log, log_out);
  std::printf(
    "{\"status\": \"%s\", \"completed\": %s, \"ticks\": %zu, \"mean_tick_ms\": %.3f}\n",
    ffnav::to_string(result.final_status), result.completed ? "true" : "false",
    result.log.records.size(), result.mean_tick_ms);
  return 0;
}

int run_eval_cmd(const std::string & repeat_path, const std::string & teach_path)
{
  const ffnav::RunLog repeat_log = ffnav::load_run_log(repeat_path);
  const ffnav::RunLog teach_log = ffnav::load_run_log(teach_path);
  const ffnav::Metrics m = ffnav::evaluate(repeat_log, teach_log);
  std::printf(
    "{\"end_point_distance\": %.6f, \"path_completed\": %s, \"min_clearance\": %s, "
    "\"collision\": %s}\n",
    m.end_point_distance, m.path_completed ? "true" : "false",
    std::isfinite(m.min_clearance) ? std::to_string(m.min_clearance).c_str() : "null",
    m.collision ? "true" : "false");
  return 0;
}

int run_gen_lib_cmd(const ffnav::PlannerConfig & config, const std::string & out_path)
{
  const ffnav::CandidateLibrary library = ffnav::generate_library(config);
  ffnav::save_library(library, out_path);
  std::printf("{\"candidates\": %zu}\n", library.candidates.size());
  return 0;
}

int run_trace_cmd(const std::string & log_path, const std::string & out_path)
{
  ffnav::write_trace_csv(ffnav::load_run_log(log_path), out_path);
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"feature-flow teach-and-repeat navigation"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string map_path;
  std::string lib_path;
  std::string log_path;
  std::string teach_log_path;
  std::string out_path;
  ffnav::PlannerConfig planner;

  auto * teach = app.add_subcommand("teach", "drive the taught route and build the map");
  teach->add_option("--scenario", scenario_path, "scenario file")->required();
  teach->add_option("--out", out_path, "map output file")->required();
  teach->add_option("--log", log_path, "optional teach run log output");

  auto * repeat = app.add_subcommand("repeat", "repeat a taught route in closed loop");
  repeat->add_option("--map", map_path, "keyframe map file")->required();
  repeat->add_option("--scenario", scenario_path, "scenario file")->required();
  repeat->add_option("--out", out_path, "run log output file")->required();
  repeat->add_option("--lib", lib_path, "candidate library file (default: generated)");

  auto * eval = app.add_subcommand("eval", "score a repeat run against its teach run");
  eval->add_option("--repeat", log_path, "repeat run log")->required();
  eval->add_option("--teach", teach_log_path, "teach run log")->required();

  auto * gen = app.add_subcommand("gen-traj-lib", "write the trajectory candidate library");
  gen->add_option("--out", out_path, "library output file")->required();
  gen->add_option("--segment-count", planner.segment_count, "segments per candidate");
  gen->add_option("--segment-length", planner.segment_length, "meters per segment");
  gen->add_option("--linear-speed", planner.linear_speed, "candidate linear speed [m/s]");
  gen->add_option("--max-angular-speed", planner.max_angular_speed, "angular range [rad/s]");
  gen->add_option("--angular-samples", planner.angular_sample_count, "angular rates per segment");
  gen->add_option("--sample-period", planner.sample_period, "pose sample period [s]");
  gen->add_option("--grid-extent", planner.grid_extent, "occupancy grid side length [m]");
  gen->add_option("--grid-resolution", planner.grid_resolution, "occupancy cell size [m]");
  gen->add_option("--inflation-radius", planner.inflation_radius, "obstacle inflation [m]");

  auto * trace = app.add_subcommand("trace", "convert a run log to CSV");
  trace->add_option("--log", log_path, "run log file")->required();
  trace->add_option("--out", out_path, "CSV output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (teach->parsed()) {
      return run_teach_cmd(scenario_path, out_path, log_path);
    }
    if (repeat->parsed()) {
      return run_repeat_cmd(map_path, scenario_path, out_path, lib_path);
    }
    if (eval->parsed()) {
      return run_eval_cmd(log_path, teach_log_path);
    }
    if (gen->parsed()) {
      return run_gen_lib_cmd(planner, out_path);
    }
    if (trace->parsed()) {
      return run_trace_cmd(log_path, out_path);
    }
  } catch (const ffnav::IoError & e) {
    std::fprintf(stderr, "ffnav: %s\n", e.what());
    return kExitIo;
  } catch (const ffnav::Error & e) {
    std::fprintf(stderr, "ffnav: %s\n", e.what());
    return kExitData;
  } catch (const std::exception & e) {
    std::fprintf(stderr, "ffnav: internal error: %s\n", e.what());
    return 1;
  }
  return kExitUsage;
}
