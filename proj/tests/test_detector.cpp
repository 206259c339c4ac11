#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "cameo/detector.hpp"
#include "cameo/synthgen.hpp"
#include "oracles.hpp"

using cameo::CertificationRoster;
using cameo::CourseMap;
using cameo::CourseStore;
using cameo::Detection;
using cameo::Event;
using cameo::EventKind;
using cameo::FilterConfig;
using cameo::IpGroupPartition;
using cameo::Micros;

namespace {

constexpr Micros kSec = cameo::kMicrosPerSecond;

struct Fixture {
    CourseMap courses;
    CertificationRoster roster;
    IpGroupPartition partition;

    void add_event(const std::string& account, const std::string& course,
                   const std::string& item, EventKind kind, Micros secs,
                   const std::string& ip) {
        CourseStore& store = courses[course];
        store.course = course;
        store.accounts.insert(account);
        store.events.push_back({account, course, item, kind, secs * kSec, ip});
    }

    void finish() {
        for (auto& [course, store] : courses)
            std::stable_sort(store.events.begin(), store.events.end(),
                             [](const Event& a, const Event& b) { return a.time < b.time; });
        partition = cameo::build_partition(courses);
    }
};

// A harvester/master pair with n all-positive lags of lag_s seconds.
void plant_pair(Fixture& fx, const std::string& course, const std::string& h,
                const std::string& m, const std::string& ip, int n, double lag_s = 10.0) {
    for (int i = 0; i < n; ++i) {
        const Micros base = 1000 + i * 200;
        fx.add_event(h, course, "p" + std::to_string(i), EventKind::ShowAnswer, base, ip);
        fx.add_event(m, course, "p" + std::to_string(i), EventKind::CorrectSubmission,
                     base + static_cast<Micros>(lag_s), ip);
    }
    fx.roster.insert(h, course, false);
    fx.roster.insert(m, course, true);
}

Fixture synth_fixture(const cameo::SynthCorpus& corpus) {
    Fixture fx;
    fx.courses = corpus.to_courses();
    fx.roster = corpus.to_roster();
    fx.partition = cameo::build_partition(fx.courses);
    return fx;
}

}  // namespace

TEST_CASE("filter config validation") {
    FilterConfig config;
    CHECK_NOTHROW(config.validate());
    config.cutoff_seconds = 0.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = FilterConfig{};
    config.max_group_accounts = 1;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = FilterConfig{};
    config.criterion.confidence = 1.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("candidates honor Filter 3 direction") {
    Fixture fx;
    // Three accounts on one IP, one certified.
    for (const char* account : {"a", "b", "c"})
        fx.add_event(account, "c1", "p0", EventKind::ShowAnswer, 10, "ip0");
    fx.add_event("a", "c1", "p0", EventKind::CorrectSubmission, 20, "ip0");
    fx.add_event("b", "c1", "p0", EventKind::CorrectSubmission, 21, "ip0");
    fx.add_event("c", "c1", "p0", EventKind::CorrectSubmission, 22, "ip0");
    fx.roster.insert("a", "c1", true);
    fx.roster.insert("b", "c1", false);
    fx.roster.insert("c", "c1", false);
    fx.finish();

    const auto pairs = cameo::generate_candidates(fx.courses.at("c1"), fx.roster,
                                                  fx.partition, FilterConfig{});
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == std::pair<std::string, std::string>{"b", "a"});
    CHECK(pairs[1] == std::pair<std::string, std::string>{"c", "a"});
}

TEST_CASE("candidates require a shared IP group") {
    Fixture fx;
    fx.add_event("h", "c1", "p0", EventKind::ShowAnswer, 10, "ip1");
    fx.add_event("m", "c1", "p0", EventKind::CorrectSubmission, 20, "ip2");
    fx.roster.insert("h", "c1", false);
    fx.roster.insert("m", "c1", true);
    fx.finish();
    CHECK(cameo::generate_candidates(fx.courses.at("c1"), fx.roster, fx.partition,
                                     FilterConfig{})
              .empty());
}

TEST_CASE("candidates exclude large IP groups") {
    Fixture fx;
    // Twelve accounts on one router.
    for (int i = 0; i < 12; ++i) {
        const std::string account = "u" + std::to_string(i);
        fx.add_event(account, "c1", "p0", EventKind::ShowAnswer, 10 + i, "cafe");
        fx.add_event(account, "c1", "p0", EventKind::CorrectSubmission, 30 + i, "cafe");
        fx.roster.insert(account, "c1", i % 2 == 0);
    }
    fx.finish();
    CHECK(cameo::generate_candidates(fx.courses.at("c1"), fx.roster, fx.partition,
                                     FilterConfig{})
              .empty());

    // The relaxed comparison direction admits a group of exactly 12.
    FilterConfig relaxed;
    relaxed.max_group_accounts = 12;
    relaxed.group_exclude_at_threshold = false;
    CHECK_FALSE(cameo::generate_candidates(fx.courses.at("c1"), fx.roster, fx.partition,
                                           relaxed)
                    .empty());
}

TEST_CASE("a planted alternating pair passes all five filters") {
    cameo::SynthCourse course;
    course.course = "c1";
    for (int i = 0; i < 60; ++i) course.items.push_back("p" + std::to_string(i));
    cameo::CameoPlan plan;
    plan.strategy = cameo::CameoPlan::Strategy::Alternating;
    plan.items = 50;
    plan.shared_ip = "198.51.100.7";
    const cameo::CameoBatch batch = cameo::gen_cameo(plan, course, 99, "harv", "mast");

    Fixture fx;
    for (const Event& ev : batch.events) {
        CourseStore& store = fx.courses[ev.course];
        store.course = ev.course;
        store.accounts.insert(ev.account);
        store.events.push_back(ev);
    }
    for (const auto& entry : batch.roster)
        fx.roster.insert(entry.account, entry.course, entry.certified);
    fx.finish();

    const Detection det = cameo::classify_pair("harv", "mast", fx.courses.at("c1"),
                                               fx.roster, fx.partition, FilterConfig{});
    CHECK(det.n == 50);
    CHECK(det.x == 50);
    CHECK(det.f1);
    CHECK(det.f2);
    CHECK(det.f3);
    CHECK(det.f4);
    CHECK(det.f5);
    CHECK(det.is_cameo());
    CHECK(det.name_similarity < 0.5);
}

TEST_CASE("a synchronized pair fails the Bayesian criterion") {
    cameo::SynthConfig config;
    config.items_per_course = 80;
    config.benign_independent = 0;
    config.benign_synchronized = 2;
    config.benign_offset = 0;
    config.participation = 1.0;
    config.seed = 5;
    const Fixture fx = synth_fixture(cameo::generate_corpus(config));

    const Detection det = cameo::classify_pair("c0_syn0", "c0_syn1", fx.courses.at("course0"),
                                               fx.roster, fx.partition, FilterConfig{});
    CHECK(det.n == 80);
    CHECK_FALSE(det.f1);
    CHECK(det.f3);
    CHECK(det.f4);
    CHECK(det.f5);
    CHECK_FALSE(det.is_cameo());
    // Roughly half the deltas are positive.
    CHECK(det.x > det.n / 5);
    CHECK(det.x < det.n * 4 / 5);
}

TEST_CASE("a two-hour offset pair fails only the cutoff") {
    cameo::SynthConfig config;
    config.items_per_course = 40;
    config.benign_independent = 0;
    config.benign_synchronized = 0;
    config.benign_offset = 2;
    config.participation = 1.0;
    config.offset_seconds = 7200.0;
    config.offset_jitter_seconds = 30.0;
    config.seed = 6;
    const Fixture fx = synth_fixture(cameo::generate_corpus(config));

    const Detection det = cameo::classify_pair("c0_off0", "c0_off1", fx.courses.at("course0"),
                                               fx.roster, fx.partition, FilterConfig{});
    CHECK(det.n == 40);
    CHECK(det.x == 40);
    CHECK(det.f1);
    CHECK_FALSE(det.f2);
    CHECK(det.p90_seconds >= 7200.0 - 30.0);
    CHECK(det.p90_seconds <= 7200.0 + 30.0);
    CHECK(det.f3);
    CHECK(det.f4);
    CHECK(det.f5);
    CHECK_FALSE(det.is_cameo());
}

TEST_CASE("pairs with no common items fail filters 1 and 2") {
    Fixture fx;
    fx.add_event("h", "c1", "p1", EventKind::ShowAnswer, 10, "ip0");
    fx.add_event("m", "c1", "p2", EventKind::CorrectSubmission, 20, "ip0");
    fx.roster.insert("h", "c1", false);
    fx.roster.insert("m", "c1", true);
    fx.finish();

    const Detection det = cameo::classify_pair("h", "m", fx.courses.at("c1"), fx.roster,
                                               fx.partition, FilterConfig{});
    CHECK(det.n == 0);
    CHECK_FALSE(det.f1);
    CHECK_FALSE(det.f2);
    CHECK(std::isnan(det.p90_seconds));
    CHECK(det.f3);
    CHECK(det.f4);

    // min_common_items = 0 still classifies such pairs instead of erroring.
    FilterConfig zero_floor;
    zero_floor.min_common_items = 0;
    const auto pairs = cameo::generate_candidates(fx.courses.at("c1"), fx.roster,
                                                  fx.partition, zero_floor);
    REQUIRE(pairs.size() == 1);
}

TEST_CASE("one master with two harvesters counts once") {
    Fixture fx;
    // h1 feeds items p0..p14, h2 feeds a disjoint block q0..q14.
    plant_pair(fx, "c1", "h1", "m", "ip0", 15);
    for (int i = 0; i < 15; ++i) {
        const Micros base = 50000 + i * 200;
        fx.add_event("h2", "c1", "q" + std::to_string(i), EventKind::ShowAnswer, base,
                     "ip0");
        fx.add_event("m", "c1", "q" + std::to_string(i), EventKind::CorrectSubmission,
                     base + 5, "ip0");
    }
    fx.roster.insert("h2", "c1", false);
    fx.finish();

    const auto result = cameo::detect(fx.courses, fx.roster, fx.partition, FilterConfig{});
    const auto flagged = result.detections();
    REQUIRE(flagged.size() == 2);
    CHECK(result.report.cameo_certificates == 1);
    CHECK(result.report.unique_cameo_users == 1);
    CHECK(result.report.harvester_accounts == 2);
    CHECK(result.report.per_course.at("c1").cameo_count == 1);
    CHECK(result.report.per_course.at("c1").certified_count == 1);
}

TEST_CASE("empty corpus gives an all-zero report") {
    const auto result =
        cameo::detect(CourseMap{}, CertificationRoster{}, IpGroupPartition{}, FilterConfig{});
    CHECK(result.classified.empty());
    CHECK(result.report.cameo_certificates == 0);
    CHECK(result.report.unique_cameo_users == 0);
    CHECK(result.report.harvester_accounts == 0);
    CHECK(result.report.per_course.empty());
}

TEST_CASE("structural pruning equals brute force on random corpora") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const Fixture fx = synth_fixture(oracles::random_corpus(seed));
        const auto result = cameo::detect(fx.courses, fx.roster, fx.partition, FilterConfig{});
        const auto pruned = oracles::flagged_keys(result.classified);
        const auto brute =
            oracles::brute_force_detect(fx.courses, fx.roster, fx.partition, FilterConfig{});
        INFO("seed=" << seed);
        CHECK(pruned == brute);
    }
}

TEST_CASE("filter evaluation order cannot change the detection set") {
    std::mt19937_64 rng(41);
    std::vector<int> order = {1, 2, 3, 4, 5};
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const Fixture fx = synth_fixture(oracles::random_corpus(seed));
        const auto expected =
            oracles::flagged_keys(cameo::detect(fx.courses, fx.roster, fx.partition,
                                                FilterConfig{})
                                      .classified);
        for (int round = 0; round < 4; ++round) {
            std::shuffle(order.begin(), order.end(), rng);
            CHECK(oracles::staged_detect(fx.courses, fx.roster, fx.partition, FilterConfig{},
                                         order) == expected);
        }
    }
}

TEST_CASE("detection output is deterministic and jobs-invariant") {
    const Fixture fx = synth_fixture(oracles::random_corpus(77));
    const auto first = cameo::detect(fx.courses, fx.roster, fx.partition, FilterConfig{}, 1);
    const auto second = cameo::detect(fx.courses, fx.roster, fx.partition, FilterConfig{}, 1);
    const auto parallel = cameo::detect(fx.courses, fx.roster, fx.partition, FilterConfig{}, 8);

    auto key_list = [](const std::vector<Detection>& dets) {
        std::vector<std::tuple<std::string, std::string, std::string, std::size_t,
                               std::size_t, double, bool>>
            out;
        for (const auto& det : dets)
            out.push_back({det.course, det.master, det.harvester, det.n, det.x,
                           det.posterior_prob, det.is_cameo()});
        return out;
    };
    CHECK(key_list(first.classified) == key_list(second.classified));
    CHECK(key_list(first.classified) == key_list(parallel.classified));
}

TEST_CASE("relaxing the cutoff never removes a detection") {
    for (std::uint64_t seed = 200; seed < 206; ++seed) {
        const Fixture fx = synth_fixture(oracles::random_corpus(seed));
        std::set<oracles::PairKey> previous;
        for (double cutoff : {30.0, 120.0, 300.0, 1200.0, 7200.0}) {
            FilterConfig config;
            config.cutoff_seconds = cutoff;
            const auto flagged = oracles::flagged_keys(
                cameo::detect(fx.courses, fx.roster, fx.partition, config).classified);
            CHECK(std::includes(flagged.begin(), flagged.end(), previous.begin(),
                                previous.end()));
            previous = flagged;
        }
    }
}
