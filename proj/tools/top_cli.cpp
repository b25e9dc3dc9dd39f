#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "top/cli.hpp"
#include "top/evaluation.hpp"
#include "top/io_formats.hpp"

using namespace top;
using namespace top::cli;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("top");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("TOP_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept exact names.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

struct GlobalFlags {
  std::string config;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::string bounds;
  int n = 0;
  double divergence = 0.0;
  double lambda_occ = 0.0;
  CLI::Option* o_config = nullptr;
  CLI::Option* o_threads = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_bounds = nullptr;
  CLI::Option* o_n = nullptr;
  CLI::Option* o_divergence = nullptr;
  CLI::Option* o_lambda = nullptr;

  void attach(CLI::App& app) {
    o_config = app.add_option("--config", config, "YAML run configuration");
    o_threads = app.add_option("--threads", threads, "worker threads (default: all cores)")
                    ->check(CLI::PositiveNumber);
    o_seed = app.add_option("--seed", seed, "random seed");
    o_bounds = app.add_option("--bounds", bounds, "crop box x0,x1,y0,y1,z0,z1 in meters");
    o_n = app.add_option("--n", n, "adjacent scans on each side")->check(CLI::PositiveNumber);
    o_divergence = app.add_option("--divergence", divergence, "beam divergence angle (rad)");
    o_lambda = app.add_option("--lambda-occ", lambda_occ, "occupied confidence threshold");
  }

  RunConfig resolve() const {
    Overrides o;
    if (o_threads->count()) o.threads = threads;
    if (o_seed->count()) o.seed = seed;
    if (o_bounds->count()) o.bounds = parse_bounds(bounds);
    if (o_n->count()) o.n_adjacent = n;
    if (o_divergence->count()) o.divergence = divergence;
    if (o_lambda->count()) o.lambda_occ = lambda_occ;
    std::optional<fs::path> file;
    if (o_config->count()) file = config;
    return resolve_config(file, o);
  }
};

void add_sequence_options(CLI::App* cmd, SequenceInput& seq, std::string& times) {
  cmd->add_option("--scans", seq.scan_dir, "directory of NNNNNN.bin scans")->required();
  cmd->add_option("--poses", seq.pose_file, "pose file, one 3x4 matrix per line")->required();
  cmd->add_option("--times", times, "timestamps, one per line");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Temporal overlap extraction and moving-object evaluation tools"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags flags;
  flags.attach(app);

  SequenceInput seq;
  std::string times;
  std::string out_dir;
  bool balance = false;
  auto* extract = app.add_subcommand("extract", "temporal overlap points and recon samples per scan");
  add_sequence_options(extract, seq, times);
  extract->add_option("--out", out_dir, "output directory")->required();
  extract->add_flag("--balance", balance, "store the class-balanced subset");

  SimulateInput sim;
  std::string lidar_file;
  std::string trajectory_file;
  auto* simulate = app.add_subcommand("simulate", "ray-cast a synthetic sequence");
  simulate->add_option("--scene", sim.scene_file, "scene YAML")->required();
  simulate->add_option("--lidar", lidar_file, "YAML with a lidar section");
  simulate->add_option("--trajectory", trajectory_file, "YAML with a trajectory section");
  simulate->add_option("--out", out_dir, "output directory")->required();

  std::string boxes;
  auto* label = app.add_subcommand("label", "per-point motion labels from box annotations");
  add_sequence_options(label, seq, times);
  label->add_option("--boxes", boxes, "box annotations (JSON lines)")->required();
  label->add_option("--out", out_dir, "output directory")->required();

  EvalFiles ev;
  std::string ego_dir;
  std::string report_path;
  auto* eval = app.add_subcommand("eval", "Recall_obj and IoU report");
  add_sequence_options(eval, seq, times);
  eval->add_option("--boxes", boxes, "box annotations (JSON lines)")->required();
  eval->add_option("--labels", ev.label_dir, "ground-truth label directory")->required();
  eval->add_option("--predictions", ev.prediction_dir, "predicted label directory")->required();
  eval->add_option("--ego", ego_dir, "ego-mask directory");
  eval->add_option("--report", report_path, "write the JSON report here instead of stdout");

  std::string counts_file;
  std::string csv_path;
  std::string label_dir;
  auto* stats = app.add_subcommand("stats", "object-size distribution of moving objects");
  stats->add_option("--counts", counts_file, "points per object, one per line");
  stats->add_option("--scans", seq.scan_dir, "directory of NNNNNN.bin scans");
  stats->add_option("--poses", seq.pose_file, "pose file");
  stats->add_option("--times", times, "timestamps, one per line");
  stats->add_option("--boxes", boxes, "box annotations (JSON lines)");
  stats->add_option("--labels", label_dir, "ground-truth label directory");
  stats->add_option("--csv", csv_path, "also write the CDF as CSV");

  LossCheckInput loss;
  std::string recon_file;
  std::string recon_preds;
  auto* loss_check = app.add_subcommand("loss-check", "evaluate both pre-training losses on stored predictions");
  loss_check->add_option("--overlaps", loss.overlap_file, "overlap set file")->required();
  loss_check->add_option("--overlap-predictions", loss.overlap_predictions, "probability file")->required();
  loss_check->add_option("--recon", recon_file, "recon sample file");
  loss_check->add_option("--recon-predictions", recon_preds, "probability file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    const RunConfig cfg = flags.resolve();
    if (!times.empty()) seq.times_file = times;

    if (*extract) {
      const auto r = cmd_extract(cfg, seq, out_dir, balance);
      spdlog::info("processed {} scans: {} overlap points, {} recon samples", r.processed.size(),
                   r.overlap_points, r.recon_samples);
    } else if (*simulate) {
      if (!lidar_file.empty()) sim.lidar_file = lidar_file;
      if (!trajectory_file.empty()) sim.trajectory_file = trajectory_file;
      const auto n = cmd_simulate(cfg, sim, out_dir);
      spdlog::info("simulated {} scans into {}", n, out_dir);
    } else if (*label) {
      const auto n = cmd_label(cfg, seq, boxes, out_dir);
      spdlog::info("labeled {} scans", n);
    } else if (*eval) {
      ev.sequence = seq;
      ev.boxes_file = boxes;
      if (!ego_dir.empty()) ev.ego_dir = ego_dir;
      const std::string json = io::report_to_json(cmd_eval(cfg, ev));
      if (report_path.empty()) {
        std::cout << json;
      } else {
        io::write_file(report_path, json);
      }
    } else if (*stats) {
      std::vector<std::uint64_t> counts;
      if (!counts_file.empty()) {
        counts = read_counts(counts_file);
      } else {
        if (seq.scan_dir.empty() || seq.pose_file.empty() || boxes.empty() || label_dir.empty()) {
          std::cerr << "stats needs --counts, or --scans, --poses, --boxes and --labels\n";
          return kExitUsage;
        }
        ev.sequence = seq;
        ev.boxes_file = boxes;
        ev.label_dir = label_dir;
        counts = object_point_counts(load_eval_input(cfg, ev, false));
      }
      const auto cdf = object_size_cdf(std::move(counts));
      std::cout << format_size_cdf(cdf);
      if (!csv_path.empty()) io::write_file(csv_path, format_size_csv(cdf));
    } else if (*loss_check) {
      if (!recon_file.empty()) loss.recon_file = recon_file;
      if (!recon_preds.empty()) loss.recon_predictions = recon_preds;
      std::cout << format_loss(cmd_loss_check(cfg, loss));
    }
  } catch (const Error& e) {
    spdlog::error("{}: {}", error_name(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    spdlog::critical("internal error: {}", e.what());
    return kExitInternal;
  }
  return kExitOk;
}
