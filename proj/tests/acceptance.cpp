// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Usage: cameo_acceptance --cli /path/to/cameo

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "cameo/analytics.hpp"
#include "cameo/bayes.hpp"
#include "cameo/detector.hpp"
#include "cameo/synthgen.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Criterion {
    int number;
    std::string title;
    std::function<bool(std::string&)> run;
};

bool check(bool ok, std::string& detail, const std::string& message) {
    if (!ok && detail.empty()) detail = message;
    return ok;
}

// --- criterion 1: Filter-1 boundary ---------------------------------------

bool criterion_filter1_boundary(std::string& detail) {
    const auto start = Clock::now();
    const bool verdict = cameo::passes_filter1(12, 12);
    const double elapsed = seconds_since(start);
    bool ok = check(!verdict, detail, "passes_filter1(12,12) returned true");
    ok &= check(elapsed < 1e-3, detail,
                "runtime " + std::to_string(elapsed) + " s exceeds 1 ms");
    const double prob = cameo::prob_pi_exceeds(0.9, cameo::posterior(12, 12, {}));
    detail = "P(pi>0.9 | 12/12) = " + std::to_string(prob) + " < 0.9, " +
             std::to_string(elapsed * 1e6) + " us" + (ok ? "" : "; " + detail);
    return ok;
}

// --- criterion 2: incomplete-beta oracle grid ------------------------------

bool criterion_beta_oracle(std::string& detail) {
    const auto start = Clock::now();
    std::vector<double> shapes;
    for (double v = 0.5; v <= 50.0; v += 4.5) shapes.push_back(v);  // 12 values
    const std::vector<double> zs = {0.01, 0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 0.99};
    std::size_t points = 0;
    double worst = 0.0;
    for (double a : shapes) {
        for (double b : shapes) {
            const double norm = oracles::beta_norm_quadrature(a, b);
            for (double z : zs) {
                const double impl = cameo::reg_inc_beta(z, a, b);
                const double oracle = oracles::beta_cdf_quadrature(z, a, b, norm);
                worst = std::max(worst, std::fabs(impl - oracle));
                ++points;
            }
        }
    }
    const double elapsed = seconds_since(start);
    char err_text[32];
    std::snprintf(err_text, sizeof(err_text), "%.2e", worst);
    bool ok = check(points >= 1000, detail, "grid too small");
    ok &= check(worst <= 1e-9, detail,
                "max |impl - oracle| = " + std::string(err_text));
    ok &= check(elapsed < 10.0, detail,
                "runtime " + std::to_string(elapsed) + " s exceeds 10 s");
    if (ok)
        detail = std::to_string(points) + " points, max abs err " + err_text + ", " +
                 std::to_string(elapsed) + " s";
    return ok;
}

// --- criterion 3: transitive-closure oracle --------------------------------

bool criterion_closure_oracle(std::string& detail) {
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    for (int graph = 0; graph < 200; ++graph) {
        std::uniform_int_distribution<std::size_t> node_counts(1, 100);
        const std::size_t accounts = node_counts(rng);
        const std::size_t ips = node_counts(rng);  // accounts + ips <= 200 nodes
        std::uniform_int_distribution<std::size_t> edge_count(0, accounts * 3);
        std::vector<cameo::ModalIpRecord> records;
        const std::size_t edges = edge_count(rng);
        for (std::size_t e = 0; e < edges; ++e)
            records.push_back({"a" + std::to_string(rng() % accounts),
                               "c" + std::to_string(rng() % 4),
                               "ip" + std::to_string(rng() % ips), 1});
        const cameo::IpGroupPartition part = cameo::build_ip_groups(records);
        std::set<std::set<std::string>> got;
        for (const auto& [gid, members] : part.members) got.insert(members);
        if (got != oracles::bfs_components(records)) {
            detail = "partition mismatch on graph " + std::to_string(graph);
            return false;
        }
    }
    const double elapsed = seconds_since(start);
    if (!check(elapsed < 5.0, detail,
               "runtime " + std::to_string(elapsed) + " s exceeds 5 s"))
        return false;
    detail = "200 graphs, " + std::to_string(elapsed) + " s";
    return true;
}

// --- criteria 4/5 share the corpus recipe ----------------------------------

cameo::SynthConfig planted_config(std::uint64_t seed) {
    cameo::SynthConfig config;
    config.courses = 1;
    config.items_per_course = 141;
    config.benign_independent = 300;
    config.benign_synchronized = 100;
    config.benign_offset = 100;
    config.cameo_pairs = 50;   // both strategies, alternating by index
    config.cameo_items = 45;   // n >= 40
    config.lag.kind = cameo::LagDistribution::Kind::Exponential;
    config.lag.seconds = 30.0;
    config.offset_seconds = 7200.0;
    config.seed = seed;
    return config;
}

struct DetectedCorpus {
    cameo::SynthCorpus corpus;
    cameo::DetectResult result;
};

DetectedCorpus detect_planted(std::uint64_t seed) {
    DetectedCorpus out;
    out.corpus = cameo::generate_corpus(planted_config(seed));
    const auto courses = out.corpus.to_courses();
    const auto roster = out.corpus.to_roster();
    const auto partition = cameo::build_partition(courses);
    out.result = cameo::detect(courses, roster, partition, cameo::FilterConfig{}, 4);
    return out;
}

bool criterion_planted_recovery(std::string& detail) {
    double worst_recall = 1.0;
    std::size_t total_fp = 0;
    double slowest = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto start = Clock::now();
        const DetectedCorpus run = detect_planted(seed);
        const double elapsed = seconds_since(start);
        slowest = std::max(slowest, elapsed);
        const cameo::EvalReport report =
            cameo::evaluate(run.result.detections(), run.corpus.truth);
        worst_recall = std::min(worst_recall, report.recall);
        total_fp += report.false_positives.size();
        if (elapsed >= 60.0) {
            detail = "seed " + std::to_string(seed) + " took " +
                     std::to_string(elapsed) + " s";
            return false;
        }
    }
    bool ok = check(worst_recall >= 0.90, detail,
                    "worst recall " + std::to_string(worst_recall));
    ok &= check(total_fp == 0, detail,
                std::to_string(total_fp) + " false positives across seeds");
    if (ok)
        detail = "10 seeds, worst recall " + std::to_string(worst_recall) +
                 ", 0 false positives, slowest seed " + std::to_string(slowest) + " s";
    return ok;
}

bool criterion_elbow(std::string& detail) {
    const DetectedCorpus run = detect_planted(99);
    const auto grid = cameo::default_sweep_grid(3600.0, 30.0);
    const cameo::SweepResult sweep =
        cameo::cutoff_sweep(cameo::sweep_eligible(run.result.classified), grid);

    for (std::size_t i = 1; i < sweep.cumulative.size(); ++i) {
        if (sweep.cumulative[i] < sweep.cumulative[i - 1]) {
            detail = "cumulative curve decreases at grid index " + std::to_string(i);
            return false;
        }
    }
    auto value_at = [&](double g) -> double {
        const auto it = std::find(grid.begin(), grid.end(), g);
        return static_cast<double>(
            sweep.cumulative[static_cast<std::size_t>(it - grid.begin())]);
    };
    const std::size_t detect_count = run.result.detections().size();
    if (!check(value_at(300.0) == static_cast<double>(detect_count), detail,
               "sweep(300) = " + std::to_string(value_at(300.0)) + " but detect found " +
                   std::to_string(detect_count)))
        return false;

    const double slope_head = (value_at(300.0) - value_at(0.0)) / 300.0;
    const double slope_tail = (value_at(3600.0) - value_at(300.0)) / 3300.0;
    if (!check(slope_tail < 0.10 * slope_head, detail,
               "tail slope " + std::to_string(slope_tail) + " vs head slope " +
                   std::to_string(slope_head)))
        return false;
    detail = "sweep(300) = " + std::to_string(detect_count) + ", head slope " +
             std::to_string(slope_head) + "/s, tail slope " + std::to_string(slope_tail) +
             "/s";
    return true;
}

// --- criterion 6: conjunction order-invariance -----------------------------

bool criterion_order_invariance(std::string& detail) {
    std::mt19937_64 rng(4242);
    std::vector<int> order = {1, 2, 3, 4, 5};
    for (std::uint64_t corpus_seed = 0; corpus_seed < 100; ++corpus_seed) {
        const cameo::SynthCorpus corpus = oracles::random_corpus(corpus_seed);
        const auto courses = corpus.to_courses();
        const auto roster = corpus.to_roster();
        const auto partition = cameo::build_partition(courses);
        const auto expected = oracles::flagged_keys(
            cameo::detect(courses, roster, partition, cameo::FilterConfig{}).classified);
        for (int perm = 0; perm < 10; ++perm) {
            std::shuffle(order.begin(), order.end(), rng);
            const auto staged = oracles::staged_detect(courses, roster, partition,
                                                       cameo::FilterConfig{}, order);
            if (staged != expected) {
                detail = "corpus " + std::to_string(corpus_seed) + " permutation " +
                         std::to_string(perm) + " diverged";
                return false;
            }
        }
    }
    detail = "100 corpora x 10 permutations";
    return true;
}

// --- criterion 7: brute-force pipeline equivalence --------------------------

bool criterion_brute_force(std::string& detail) {
    for (std::uint64_t seed = 300; seed < 330; ++seed) {
        const cameo::SynthCorpus corpus = oracles::random_corpus(seed);
        const auto courses = corpus.to_courses();
        std::size_t accounts = 0;
        for (const auto& [course, store] : courses) accounts += store.accounts.size();
        if (accounts > 50) {
            detail = "corpus " + std::to_string(seed) + " has " +
                     std::to_string(accounts) + " accounts";
            return false;
        }
        const auto roster = corpus.to_roster();
        const auto partition = cameo::build_partition(courses);
        const auto pruned = oracles::flagged_keys(
            cameo::detect(courses, roster, partition, cameo::FilterConfig{}).classified);
        const auto brute =
            oracles::brute_force_detect(courses, roster, partition, cameo::FilterConfig{});
        if (pruned != brute) {
            detail = "pruned and brute-force sets differ on corpus " + std::to_string(seed);
            return false;
        }
    }
    detail = "30 corpora, <= 50 accounts each";
    return true;
}

// --- criterion 8: CLI determinism -------------------------------------------

std::string g_cli_path;

int run_checked(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool criterion_cli_determinism(std::string& detail) {
    if (g_cli_path.empty()) {
        detail = "--cli not supplied";
        return false;
    }
    const fs::path dir = fs::temp_directory_path() / "cameo_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string corpus = (dir / "corpus").string();
    const std::string quiet = " > /dev/null 2>&1";
    if (run_checked("CAMEO_LOG=error " + g_cli_path + " synth --seed 7" +
                    " --synth-benign-independent 40 --synth-benign-synchronized 10" +
                    " --synth-benign-offset 10 --synth-cameo-pairs 5" +
                    " --synth-items 60 --synth-cameo-items 20 --out '" + corpus + "'" +
                    quiet) != 0) {
        detail = "synth run failed";
        return false;
    }
    const std::string detect_base = "CAMEO_LOG=error " + g_cli_path +
                                    " detect --events '" + corpus + "/events.jsonl'" +
                                    " --roster '" + corpus + "/roster.csv'";
    if (run_checked(detect_base + " --out '" + (dir / "a").string() + "'" + quiet) != 0 ||
        run_checked(detect_base + " --out '" + (dir / "b").string() + "'" + quiet) != 0) {
        detail = "detect run failed";
        return false;
    }
    for (const char* artifact : {"detections.jsonl", "summary.csv"}) {
        const std::string a = file_bytes(dir / "a" / artifact);
        const std::string b = file_bytes(dir / "b" / artifact);
        if (a.empty() && artifact == std::string("summary.csv")) {
            detail = "summary.csv missing";
            return false;
        }
        if (a != b) {
            detail = std::string(artifact) + " differs between runs";
            return false;
        }
    }
    detail = "two runs, byte-identical artifacts";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") g_cli_path = argv[i + 1];

    const std::vector<Criterion> criteria = {
        {1, "Filter-1 boundary: 12/12 positives fail the criterion",
         criterion_filter1_boundary},
        {2, "Incomplete-beta oracle equivalence (<= 1e-9 on >= 1000 points)",
         criterion_beta_oracle},
        {3, "Union-find equals BFS components on 200 random graphs",
         criterion_closure_oracle},
        {4, "Planted-cheater recovery: recall >= 0.90, zero false positives",
         criterion_planted_recovery},
        {5, "Cutoff sweep elbow: flat tail past five minutes", criterion_elbow},
        {6, "Five-filter conjunction is order-invariant", criterion_order_invariance},
        {7, "Pruned pipeline equals brute-force evaluation", criterion_brute_force},
        {8, "cmd_detect is byte-deterministic", criterion_cli_determinism},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion.number,
                    criterion.title.c_str(), detail.empty() ? "" : " -- ",
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
