#include <unistd.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "actionscore/analysis.hpp"
#include "actionscore/ledger.hpp"
#include "actionscore/render.hpp"
#include "actionscore/toy_trainer.hpp"
#include "actionscore/trace.hpp"
#include "gallery.hpp"

namespace {

namespace fs = std::filesystem;
using namespace actionscore;

// Exit codes: 0 success, 1 domain error, 2 I/O or usage error.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

bool use_color() {
  return ::isatty(STDOUT_FILENO) != 0 && std::getenv("NO_COLOR") == nullptr;
}

ActionTable load_table(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_action_table(in);
}

LabelMap load_labels(const std::string& path) {
  std::ifstream in = open_input(path);
  return load_label_map(in);
}

struct ValidateOpts {
  std::string trace_path;
};

int cmd_validate(const ValidateOpts& opts) {
  std::ifstream in = open_input(opts.trace_path);
  const ValidationSummary summary = validate_trace(in);
  std::string text = render_validation_summary(summary);
  if (use_color()) {
    const std::string plain = summary.valid() ? "status: VALID" : "status: INVALID";
    const std::string colored = summary.valid() ? "status: \033[32mVALID\033[0m"
                                                : "status: \033[31mINVALID\033[0m";
    if (auto pos = text.rfind(plain); pos != std::string::npos) {
      text.replace(pos, plain.size(), colored);
    }
  }
  std::cout << text;
  return summary.valid() ? 0 : 1;
}

struct ScoreOpts {
  std::string trace_path;
  std::string out_path;
  ScoreMode mode = ScoreMode::sum;
  CoverageRule coverage = CoverageRule::allow;
};

ActionTable score_trace(std::istream& in, FinalizePolicy policy) {
  TraceReader reader(in);
  const std::set<std::string> declared(
      reader.header().declared_components.begin(),
      reader.header().declared_components.end());
  ActionLedger ledger;
  while (auto record = reader.next()) {
    if (!declared.contains(record->component)) {
      throw Error("line " + std::to_string(reader.line()) + ": component \"" +
                  record->component + "\" is not declared in the header");
    }
    try {
      ledger.accumulate(*record);
    } catch (const Error& e) {
      throw Error("line " + std::to_string(reader.line()) + ": " + e.what());
    }
  }
  return ledger.finalize(policy);
}

void print_score_summary(const ActionTable& table) {
  std::cout << "scored " << table.rows.size() << " samples (policy "
            << score_mode_name(table.policy.mode) << ", coverage "
            << coverage_rule_name(table.policy.coverage) << ")\n";
  for (const auto& component : table.components) {
    std::size_t count = 0;
    double sum = 0.0, lo = 0.0, hi = 0.0;
    for (const auto& [sample, row] : table.rows) {
      auto it = row.per_component.find(component);
      if (it == row.per_component.end()) continue;
      if (count == 0) {
        lo = hi = it->second;
      } else {
        lo = std::min(lo, it->second);
        hi = std::max(hi, it->second);
      }
      sum += it->second;
      ++count;
    }
    char line[160];
    std::snprintf(line, sizeof(line),
                  "  %s: samples=%zu mean=%.6g min=%.6g max=%.6g",
                  component.c_str(), count,
                  count ? sum / static_cast<double>(count) : 0.0, lo, hi);
    std::cout << line << "\n";
  }
}

int cmd_score(const ScoreOpts& opts) {
  std::ifstream in = open_input(opts.trace_path);
  const ActionTable table = score_trace(in, {opts.mode, opts.coverage});
  std::ofstream out = open_output(opts.out_path);
  write_action_table(out, table);
  print_score_summary(table);
  std::cout << "wrote " << opts.out_path << "\n";
  return 0;
}

struct RankOpts {
  std::string table_path;
  std::string labels_path;
  std::string component = std::string(kTotalComponent);
  Direction direction = Direction::hardest;
  std::int64_t k = 7;
};

int cmd_rank(const RankOpts& opts) {
  const ActionTable table = load_table(opts.table_path);
  LabelMap labels;
  const bool have_labels = !opts.labels_path.empty();
  if (have_labels) labels = load_labels(opts.labels_path);
  const RankReport report = rank(table, opts.component, opts.direction, opts.k,
                                 have_labels ? &labels : nullptr);
  std::cout << render_rank_report(report);
  std::cout << rank_report_lines(report);
  return 0;
}

struct ReportOpts {
  std::string table_path;
  std::string labels_path;
  std::string component = std::string(kTotalComponent);
  std::int64_t k = 7;
};

int cmd_report(const ReportOpts& opts) {
  const ActionTable table = load_table(opts.table_path);
  const LabelMap labels = load_labels(opts.labels_path);
  const ClassStats stats = class_stats(table, labels, opts.component);
  const EnrichmentReport hardest =
      extreme_enrichment(table, labels, opts.component, Direction::hardest, opts.k);
  const EnrichmentReport easiest =
      extreme_enrichment(table, labels, opts.component, Direction::easiest, opts.k);
  std::cout << render_class_stats(stats) << "\n"
            << render_enrichment(hardest) << "\n"
            << render_enrichment(easiest);
  std::cout << class_stats_lines(stats) << enrichment_lines(hardest)
            << enrichment_lines(easiest);
  return 0;
}

struct GalleryOpts {
  std::string table_path;
  std::string labels_path;
  std::string component = std::string(kTotalComponent);
  std::int64_t k = 7;
  std::string out_path;
};

int cmd_gallery(const GalleryOpts& opts) {
  const ActionTable table = load_table(opts.table_path);
  LabelMap labels;
  const bool have_labels = !opts.labels_path.empty();
  if (have_labels) labels = load_labels(opts.labels_path);
  const GalleryManifest manifest = build_gallery(
      table, opts.component, opts.k, have_labels ? &labels : nullptr);
  if (manifest.easiest_count < opts.k || manifest.hardest_count < opts.k) {
    std::cerr << "warning: gallery truncated (hardest row "
              << manifest.hardest_count << ", easiest row "
              << manifest.easiest_count << ", requested k=" << opts.k << ")\n";
  }
  const std::string lines = gallery_lines(manifest);
  if (opts.out_path.empty()) {
    std::cout << lines;
  } else {
    std::ofstream out = open_output(opts.out_path);
    out << lines;
    if (!out) throw IoError("failed writing " + opts.out_path);
    std::cout << "wrote " << opts.out_path << " (" << manifest.hardest_count
              << " hardest + " << manifest.easiest_count << " easiest)\n";
  }
  return 0;
}

struct DemoOpts {
  std::string preset = "classify";
  std::uint64_t seed = 1;
  double noise = 0.1;
  std::string out_dir;
};

toy::ToyTrainConfig demo_config(const DemoOpts& opts) {
  toy::ToyTrainConfig config;
  config.dim = 2;
  config.classes = 4;
  config.spread = 5.0;
  config.noise_rate = opts.noise;
  config.learning_rate = 0.05;
  config.batch_size = 32;
  config.seed = opts.seed;
  if (opts.preset == "classify") {
    config.task = toy::Task::classify;
    config.points_per_class = 100;
    config.epochs = 100;
  } else {
    config.task = toy::Task::multitask;
    config.points_per_class = 50;
    config.epochs = 60;
  }
  return config;
}

int cmd_demo(const DemoOpts& opts) {
  const toy::ToyTrainConfig config = demo_config(opts);
  const fs::path dir(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());

  const toy::ToyDataset dataset = toy::generate_blobs(config);
  const LabelMap class_labels = toy::dataset_labels(dataset);

  {
    std::ofstream out = open_output((dir / "labels.aclm").string());
    save_label_map(out, class_labels);
  }
  {
    std::ofstream out = open_output((dir / "noise_flagged.txt").string());
    for (const auto& id : toy::flagged_sample_ids(dataset)) out << id << "\n";
    if (!out) throw IoError("failed writing noise_flagged.txt");
  }

  TraceHeader header;
  header.run_id = "demo-" + opts.preset + "-seed" + std::to_string(opts.seed);
  header.split = "train";
  header.declared_components = toy::task_components(config.task);
  header.label_map_path = "labels.aclm";
  {
    std::ofstream out = open_output((dir / "trace.aclt").string());
    TraceWriter writer(out, header);
    toy::train_and_trace(config, dataset, writer);
    std::cout << "trained " << config.epochs << " epochs over "
              << dataset.points.size() << " samples; " << writer.records_written()
              << " trace records\n";
  }

  ActionTable table;
  {
    std::ifstream in = open_input((dir / "trace.aclt").string());
    table = score_trace(in, FinalizePolicy{});
  }
  {
    std::ofstream out = open_output((dir / "table.acts").string());
    write_action_table(out, table);
  }

  const std::int64_t k = 7;
  for (Direction direction : {Direction::hardest, Direction::easiest}) {
    const RankReport report = rank(table, std::string(kTotalComponent),
                                   direction, k, &class_labels);
    const std::string name =
        std::string("rank_") + std::string(direction_name(direction)) + ".txt";
    std::ofstream out = open_output((dir / name).string());
    out << render_rank_report(report);
    if (!out) throw IoError("failed writing " + name);
  }

  const auto write_report = [&](const LabelMap& labels, const std::string& name) {
    const ClassStats stats =
        class_stats(table, labels, std::string(kTotalComponent));
    const EnrichmentReport hardest = extreme_enrichment(
        table, labels, std::string(kTotalComponent), Direction::hardest, k);
    const EnrichmentReport easiest = extreme_enrichment(
        table, labels, std::string(kTotalComponent), Direction::easiest, k);
    std::ofstream out = open_output((dir / name).string());
    out << render_class_stats(stats) << "\n"
        << render_enrichment(hardest) << "\n"
        << render_enrichment(easiest);
    if (!out) throw IoError("failed writing " + name);
  };
  write_report(class_labels, "report_classes.txt");

  LabelMap noise_labels;
  for (std::size_t i = 0; i < dataset.points.size(); ++i) {
    noise_labels.entries[toy::sample_id(i, dataset.points.size())] = {
        dataset.noise_flags[i] ? "noisy" : "clean", ""};
  }
  write_report(noise_labels, "report_noise.txt");

  for (const char* name :
       {"trace.aclt", "labels.aclm", "noise_flagged.txt", "table.acts",
        "rank_hardest.txt", "rank_easiest.txt", "report_classes.txt",
        "report_noise.txt"}) {
    std::cout << "wrote " << (dir / name).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"per-sample difficulty scores from training loss traces"};
  app.require_subcommand(1);

  const std::map<std::string, ScoreMode> policy_map{
      {"sum", ScoreMode::sum}, {"mean", ScoreMode::mean}};
  const std::map<std::string, CoverageRule> coverage_map{
      {"allow", CoverageRule::allow}, {"full", CoverageRule::require_full}};
  const std::map<std::string, Direction> direction_map{
      {"hardest", Direction::hardest}, {"easiest", Direction::easiest}};

  int exit_code = 0;

  ValidateOpts validate_opts;
  auto* validate = app.add_subcommand("validate", "check a trace file");
  validate->add_option("trace", validate_opts.trace_path, "trace file (.aclt)")
      ->required();
  validate->callback([&] { exit_code = cmd_validate(validate_opts); });

  ScoreOpts score_opts;
  auto* score = app.add_subcommand("score", "accumulate a trace into an action table");
  score->add_option("trace", score_opts.trace_path, "trace file (.aclt)")
      ->required();
  score->add_option("-o,--output", score_opts.out_path, "action table output (.acts)")
      ->required();
  score->add_option("--policy", score_opts.mode, "sum (default) or mean")
      ->transform(CLI::CheckedTransformer(policy_map));
  score->add_option("--coverage", score_opts.coverage,
                    "allow (default) or full epoch coverage")
      ->transform(CLI::CheckedTransformer(coverage_map));
  score->callback([&] { exit_code = cmd_score(score_opts); });

  RankOpts rank_opts;
  auto* rank_cmd = app.add_subcommand("rank", "hardest/easiest samples by action");
  rank_cmd->add_option("table", rank_opts.table_path, "action table (.acts)")
      ->required();
  rank_cmd->add_option("--component", rank_opts.component, "component or total");
  rank_cmd->add_option("--direction", rank_opts.direction, "hardest (default) or easiest")
      ->transform(CLI::CheckedTransformer(direction_map));
  rank_cmd->add_option("-k", rank_opts.k, "entries to report (default 7)");
  rank_cmd->add_option("--labels", rank_opts.labels_path, "label map (.aclm)");
  rank_cmd->callback([&] { exit_code = cmd_rank(rank_opts); });

  ReportOpts report_opts;
  auto* report = app.add_subcommand("report", "class stats and extreme-set enrichment");
  report->add_option("table", report_opts.table_path, "action table (.acts)")
      ->required();
  report->add_option("--labels", report_opts.labels_path, "label map (.aclm)")
      ->required();
  report->add_option("--component", report_opts.component, "component or total");
  report->add_option("-k", report_opts.k, "extreme-set size (default 7)");
  report->callback([&] { exit_code = cmd_report(report_opts); });

  GalleryOpts gallery_opts;
  auto* gallery = app.add_subcommand("gallery", "hardest/easiest gallery manifest");
  gallery->add_option("table", gallery_opts.table_path, "action table (.acts)")
      ->required();
  gallery->add_option("--labels", gallery_opts.labels_path, "label map (.aclm)");
  gallery->add_option("--component", gallery_opts.component, "component or total");
  gallery->add_option("-k", gallery_opts.k, "entries per row (default 7)");
  gallery->add_option("-o,--output", gallery_opts.out_path, "manifest output path");
  gallery->callback([&] { exit_code = cmd_gallery(gallery_opts); });

  DemoOpts demo_opts;
  auto* demo = app.add_subcommand("demo", "train the built-in toy model and analyze its trace");
  demo->add_option("--preset", demo_opts.preset, "classify (default) or multitask")
      ->check(CLI::IsMember({"classify", "multitask"}));
  demo->add_option("--seed", demo_opts.seed, "RNG seed (default 1)");
  demo->add_option("--noise", demo_opts.noise, "label noise rate (default 0.1)")
      ->check(CLI::Range(0.0, 0.999));
  demo->add_option("-o,--output", demo_opts.out_dir, "output directory")
      ->required();
  demo->callback([&] { exit_code = cmd_demo(demo_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
