// Command-line driver: detect, synth, evaluate, sweep, report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cameo/config.hpp"
#include "cameo/io.hpp"
#include "cameo/log.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::optional<std::string> config_path;
    bool print_config = false;
    std::vector<std::pair<std::string, std::string>> overrides;
};

// Registers a flag bound to a config key; values land in overrides so
// flag > file > default precedence is a single application order.
void add_key_flag(CLI::App* cmd, CommonFlags& flags, const std::string& flag,
                  const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
           flag,
           [&flags, key](const std::string& value) {
               flags.overrides.emplace_back(key, value);
           },
           help)
        ->type_name("VALUE");
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "config file (key = value lines)");
    cmd->add_flag("--print-config", flags.print_config,
                  "print the fully resolved configuration and exit");
    add_key_flag(cmd, flags, "--events", "events", "events JSONL path");
    add_key_flag(cmd, flags, "--roster", "roster", "roster CSV path");
    add_key_flag(cmd, flags, "--out", "out", "output directory");
    add_key_flag(cmd, flags, "--seed", "seed", "generator seed");
    add_key_flag(cmd, flags, "--jobs", "jobs", "worker count (0 = all cores, 1 = serial)");
    add_key_flag(cmd, flags, "--cutoff-seconds", "cutoff_seconds", "Filter 2 cutoff");
    add_key_flag(cmd, flags, "--pi-threshold", "pi_threshold", "Filter 1 proportion bound");
    add_key_flag(cmd, flags, "--confidence", "confidence", "Filter 1 posterior confidence");
    add_key_flag(cmd, flags, "--alpha", "alpha", "Beta prior alpha");
    add_key_flag(cmd, flags, "--beta", "beta", "Beta prior beta");
    add_key_flag(cmd, flags, "--max-group", "max_group_accounts", "Filter 5 group limit");
}

// Defaults, then file, then flags. Returns false (after printing) when
// resolution failed.
bool resolve(cameo::RunConfig& config, const CommonFlags& flags) {
    try {
        if (flags.config_path) {
            std::ifstream in(*flags.config_path);
            if (!in) {
                std::cerr << "error: cannot open config file " << *flags.config_path << '\n';
                return false;
            }
            cameo::load_config_file(in, config);
        }
        for (const auto& [key, value] : flags.overrides) {
            if (!cameo::apply_config_value(config, key, value))
                throw std::invalid_argument("unknown config key " + key);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return false;
    }
    if (flags.print_config) cameo::print_config(std::cout, config);
    return true;
}

unsigned effective_jobs(const cameo::RunConfig& config) {
    if (config.jobs != 0) return config.jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

struct LoadedCorpus {
    cameo::LoadResult load;
    cameo::IpGroupPartition partition;
};

// Exits nonzero through the caller on any load failure.
std::optional<LoadedCorpus> load_inputs(const cameo::RunConfig& config) {
    if (config.events_path.empty() || config.roster_path.empty()) {
        std::cerr << "error: --events and --roster are required\n";
        return std::nullopt;
    }
    std::ifstream events(config.events_path);
    if (!events) {
        std::cerr << "error: cannot open events file " << config.events_path << '\n';
        return std::nullopt;
    }
    std::ifstream roster(config.roster_path);
    if (!roster) {
        std::cerr << "error: cannot open roster file " << config.roster_path << '\n';
        return std::nullopt;
    }
    LoadedCorpus corpus;
    try {
        corpus.load = cameo::load_corpus(events, roster, config.load);
    } catch (const std::exception& e) {
        std::cerr << "error: load failed: " << e.what() << '\n';
        return std::nullopt;
    }
    corpus.partition = cameo::build_partition(corpus.load.courses);
    return corpus;
}

int cmd_detect(const cameo::RunConfig& config) {
    auto corpus = load_inputs(config);
    if (!corpus) return 1;

    cameo::DetectResult result;
    try {
        result = cameo::detect(corpus->load.courses, corpus->load.roster, corpus->partition,
                               config.filter, effective_jobs(config));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const std::vector<cameo::Detection> flagged = result.detections();

    fs::create_directories(config.out_dir);
    cameo::write_file((fs::path(config.out_dir) / "detections.jsonl").string(),
                      [&](std::ostream& out) { cameo::write_detections_jsonl(out, flagged); });
    cameo::write_file((fs::path(config.out_dir) / "summary.csv").string(),
                      [&](std::ostream& out) { cameo::write_summary_csv(out, result.report); });
    if (config.export_ip_groups)
        cameo::write_file((fs::path(config.out_dir) / "ip_groups.csv").string(),
                          [&](std::ostream& out) {
                              cameo::write_ip_groups_csv(out, corpus->partition);
                          });

    for (const auto& [course, summary] : result.report.per_course)
        std::cout << course << ": " << summary.cameo_count << " CAMEO masters / "
                  << summary.certified_count << " certified\n";
    std::cout << "cameo_certificates=" << result.report.cameo_certificates
              << " unique_cameo_users=" << result.report.unique_cameo_users
              << " harvester_accounts=" << result.report.harvester_accounts << '\n';
    return 0;
}

int cmd_synth(const cameo::RunConfig& config) {
    cameo::SynthConfig synth = config.synth;
    synth.seed = config.seed;
    cameo::SynthCorpus corpus;
    try {
        corpus = cameo::generate_corpus(synth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    fs::create_directories(config.out_dir);
    cameo::write_file((fs::path(config.out_dir) / "events.jsonl").string(),
                      [&](std::ostream& out) { cameo::write_events_jsonl(out, corpus.events); });
    cameo::write_file((fs::path(config.out_dir) / "roster.csv").string(),
                      [&](std::ostream& out) { cameo::write_roster_csv(out, corpus.roster); });
    cameo::write_file((fs::path(config.out_dir) / "truth.json").string(),
                      [&](std::ostream& out) { cameo::write_truth_json(out, corpus.truth); });
    std::cout << "wrote " << corpus.events.size() << " events, " << corpus.roster.size()
              << " roster entries, " << corpus.truth.planted.size() << " planted pairs\n";
    return 0;
}

int cmd_evaluate(const cameo::RunConfig& config) {
    if (config.detections_path.empty() || config.truth_path.empty()) {
        std::cerr << "error: --detections and --truth are required\n";
        return 1;
    }
    std::vector<cameo::Detection> detections;
    cameo::GroundTruth truth;
    try {
        std::ifstream det_in(config.detections_path);
        if (!det_in)
            throw std::runtime_error("cannot open " + config.detections_path);
        detections = cameo::read_detections_jsonl(det_in);
        std::ifstream truth_in(config.truth_path);
        if (!truth_in) throw std::runtime_error("cannot open " + config.truth_path);
        truth = cameo::read_truth_json(truth_in);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const cameo::EvalReport report = cameo::evaluate(detections, truth);
    std::printf("precision=%.6f recall=%.6f tp=%zu fp=%zu fn=%zu%s\n", report.precision,
                report.recall, report.true_positives, report.false_positives.size(),
                report.false_negatives.size(),
                report.zero_predictions ? " (zero predictions)" : "");
    for (const cameo::Detection& det : report.false_positives)
        std::cout << "false positive: (" << det.harvester << ", " << det.master << ", "
                  << det.course << ") n=" << det.n << " x=" << det.x
                  << " p90=" << det.p90_seconds << '\n';
    for (const auto& [h, m, c] : report.false_negatives)
        std::cout << "false negative: (" << h << ", " << m << ", " << c << ")\n";
    return 0;
}

int cmd_sweep(const cameo::RunConfig& config) {
    auto corpus = load_inputs(config);
    if (!corpus) return 1;
    cameo::DetectResult result;
    try {
        result = cameo::detect(corpus->load.courses, corpus->load.roster, corpus->partition,
                               config.filter, effective_jobs(config));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const auto grid =
        cameo::default_sweep_grid(config.sweep_max_seconds, config.sweep_step_seconds);
    const cameo::SweepResult sweep =
        cameo::cutoff_sweep(cameo::sweep_eligible(result.classified), grid);
    fs::create_directories(config.out_dir);
    cameo::write_file((fs::path(config.out_dir) / "sweep.csv").string(),
                      [&](std::ostream& out) { cameo::write_sweep_csv(out, sweep); });
    std::cout << "sweep over " << sweep.grid.size() << " cutoffs; detections at "
              << config.filter.cutoff_seconds << " s = " << result.detections().size()
              << '\n';
    return 0;
}

int cmd_report(const cameo::RunConfig& config) {
    if (config.detections_path.empty() || config.roster_path.empty()) {
        std::cerr << "error: --detections and --roster are required\n";
        return 1;
    }
    std::vector<cameo::Detection> detections;
    cameo::CertificationRoster roster;
    try {
        std::ifstream det_in(config.detections_path);
        if (!det_in)
            throw std::runtime_error("cannot open " + config.detections_path);
        detections = cameo::read_detections_jsonl(det_in);
        std::ifstream roster_in(config.roster_path);
        if (!roster_in) throw std::runtime_error("cannot open " + config.roster_path);
        std::vector<cameo::RecordError> errors;
        std::size_t accepted = 0;
        cameo::load_roster(roster_in, roster, errors, accepted);
        if (!errors.empty())
            throw std::runtime_error("roster: " + errors.front().str());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    const auto rows = cameo::multi_cert_table(detections, roster, config.cert_thresholds);
    fs::create_directories(config.out_dir);
    cameo::write_file((fs::path(config.out_dir) / "multicert.csv").string(),
                      [&](std::ostream& out) { cameo::write_multicert_csv(out, rows); });
    for (const cameo::MultiCertRow& row : rows)
        std::printf(">=%zu certificates: %zu earners, %zu with CAMEO (%.1f%%)\n",
                    row.min_certificates, row.earners, row.earners_with_cameo,
                    row.fraction * 100.0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CAMEO clickstream forensics"};
    app.require_subcommand(1);

    cameo::RunConfig config;
    CommonFlags flags;

    CLI::App* detect = app.add_subcommand("detect", "run the five-filter detector");
    add_common_flags(detect, flags);
    add_key_flag(detect, flags, "--min-common-items", "min_common_items",
                 "structural floor on common items");
    add_key_flag(detect, flags, "--timestamp-policy", "timestamp_policy",
                 "earliest|latest canonical event time");
    add_key_flag(detect, flags, "--max-error-rate", "max_error_rate",
                 "tolerated record error fraction");
    detect->add_flag_callback(
        "--export-ip-groups",
        [&flags] { flags.overrides.emplace_back("export_ip_groups", "true"); },
        "write ip_groups.csv audit file");

    CLI::App* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    add_common_flags(synth, flags);
    for (const char* key :
         {"synth_courses", "synth_items", "synth_benign_independent",
          "synth_benign_synchronized", "synth_benign_offset", "synth_cafe_accounts",
          "synth_cameo_pairs", "synth_cameo_items", "synth_lag_mean_seconds",
          "synth_lag_kind", "synth_window_seconds", "synth_participation",
          "synth_sync_jitter_seconds", "synth_offset_seconds",
          "synth_offset_jitter_seconds"}) {
        std::string flag = "--" + std::string(key);
        for (auto& c : flag)
            if (c == '_') c = '-';
        add_key_flag(synth, flags, flag, key, key);
    }

    CLI::App* evaluate = app.add_subcommand("evaluate", "score detections against ground truth");
    add_common_flags(evaluate, flags);
    add_key_flag(evaluate, flags, "--detections", "detections", "detections JSONL path");
    add_key_flag(evaluate, flags, "--truth", "truth", "ground-truth JSON path");

    CLI::App* sweep = app.add_subcommand("sweep", "Filter 2 cutoff sensitivity curve");
    add_common_flags(sweep, flags);
    add_key_flag(sweep, flags, "--sweep-max-seconds", "sweep_max_seconds", "grid upper bound");
    add_key_flag(sweep, flags, "--sweep-step-seconds", "sweep_step_seconds", "grid step");

    CLI::App* report = app.add_subcommand("report", "multi-certificate aggregation");
    add_common_flags(report, flags);
    add_key_flag(report, flags, "--detections", "detections", "detections JSONL path");
    add_key_flag(report, flags, "--thresholds", "cert_thresholds",
                 "comma-separated certificate thresholds");

    CLI11_PARSE(app, argc, argv);

    if (!resolve(config, flags)) return 1;
    if (flags.print_config) return 0;

    if (detect->parsed()) return cmd_detect(config);
    if (synth->parsed()) return cmd_synth(config);
    if (evaluate->parsed()) return cmd_evaluate(config);
    if (sweep->parsed()) return cmd_sweep(config);
    if (report->parsed()) return cmd_report(config);
    return 1;
}
