#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "cameo/detector.hpp"
#include "cameo/event.hpp"

namespace cameo {

// Fig.-2-style benign behavior profiles.
enum class BenignKind { IndependentAsync, Synchronized, OrderedOffset };

struct BenignProfile {
    BenignKind kind = BenignKind::IndependentAsync;
    double window_seconds = 30.0 * 86400.0;  // session window
    double participation = 0.8;              // fraction of items attempted
    double sync_jitter_seconds = 10.0;       // Synchronized: per-event jitter
    double offset_seconds = 7200.0;          // OrderedOffset: constant lag
    double offset_jitter_seconds = 30.0;     // OrderedOffset: per-item spread

    void validate() const {
        if (!(window_seconds > 0.0) || !(sync_jitter_seconds > 0.0) ||
            !(offset_seconds > 0.0) || !(offset_jitter_seconds > 0.0))
            throw std::invalid_argument("benign profile parameters must be positive");
        if (!(participation > 0.0) || participation > 1.0)
            throw std::invalid_argument("participation outside (0,1]");
    }
};

struct LagDistribution {
    enum class Kind { Exponential, Fixed };
    Kind kind = Kind::Exponential;
    double seconds = 30.0;  // mean (Exponential) or exact value (Fixed)
};

struct CameoPlan {
    enum class Strategy { Alternating, Clustered };
    Strategy strategy = Strategy::Alternating;
    LagDistribution lag;
    std::size_t items = 50;
    std::string shared_ip;

    void validate() const {
        if (items == 0) throw std::invalid_argument("cameo plan needs at least one item");
        if (!(lag.seconds > 0.0)) throw std::invalid_argument("lag must be positive");
        if (shared_ip.empty()) throw std::invalid_argument("cameo plan needs a shared IP");
    }
};

struct PlantedPair {
    std::string harvester;
    std::string master;
    std::string course;

    auto key() const { return std::tie(harvester, master, course); }
};

enum class AccountLabel { Benign, CameoMaster, CameoHarvester };

inline const char* to_string(AccountLabel label) {
    switch (label) {
        case AccountLabel::CameoMaster: return "cameo-master";
        case AccountLabel::CameoHarvester: return "cameo-harvester";
        default: return "benign";
    }
}

struct GroundTruth {
    std::set<std::tuple<std::string, std::string, std::string>> planted;
    std::map<std::string, AccountLabel> labels;
};

struct RosterEntry {
    std::string account;
    std::string course;
    bool certified = false;
};

// Shared context for generating one synthetic course.
struct SynthCourse {
    std::string course;
    std::vector<std::string> items;
    Micros start_time = 1393632000LL * kMicrosPerSecond;  // 2014-03-01T00:00:00Z
};

// Deterministic unique IPv4 strings.
class IpPool {
   public:
    std::string fresh() {
        const std::uint32_t v = next_++;
        return "10." + std::to_string((v >> 16) & 0xff) + '.' +
               std::to_string((v >> 8) & 0xff) + '.' + std::to_string(v & 0xff);
    }

   private:
    std::uint32_t next_ = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Micros offset_us(Micros base, double seconds) {
    return base + static_cast<Micros>(std::llround(seconds * kMicrosPerSecond));
}

// Strictly positive lag; rounds to microseconds, floored at 1 ms so a
// sampled lag never collapses to a zero delta.
inline double sample_lag(const LagDistribution& lag, std::mt19937_64& rng) {
    double s = lag.seconds;
    if (lag.kind == LagDistribution::Kind::Exponential)
        s = std::exponential_distribution<double>(1.0 / lag.seconds)(rng);
    return std::max(s, 1e-3);
}

}  // namespace detail

struct GenBatch {
    std::vector<Event> events;
    std::vector<RosterEntry> roster;
    std::vector<std::string> accounts;
};

// Benign accounts. IndependentAsync draws each account's times
// independently over the window; Synchronized and OrderedOffset pair
// consecutive accounts (a trailing odd account behaves independently).
// Pairs share an IP drawn from the pool; independent accounts get their
// own unless shared_ip pins all of them to one router.
inline GenBatch gen_benign(const BenignProfile& profile, std::size_t n_accounts,
                           const SynthCourse& course, std::uint64_t seed,
                           const std::string& account_prefix, IpPool& ips,
                           const std::string& shared_ip = {}) {
    profile.validate();
    GenBatch batch;
    std::mt19937_64 rng(detail::splitmix64(seed));
    std::uniform_real_distribution<double> in_window(0.0, profile.window_seconds);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto add_account = [&](std::size_t idx, bool certified) {
        std::string name = account_prefix + std::to_string(idx);
        batch.accounts.push_back(name);
        batch.roster.push_back({name, course.course, certified});
        return name;
    };
    auto emit = [&](const std::string& account, EventKind kind, const std::string& item,
                    double at_seconds, const std::string& ip) {
        batch.events.push_back({account, course.course, item, kind,
                                detail::offset_us(course.start_time, at_seconds), ip});
    };

    if (profile.kind == BenignKind::IndependentAsync) {
        for (std::size_t i = 0; i < n_accounts; ++i) {
            const std::string name = add_account(i, i % 2 == 0);
            const std::string ip = shared_ip.empty() ? ips.fresh() : shared_ip;
            for (const std::string& item : course.items) {
                if (unit(rng) > profile.participation) continue;
                emit(name, EventKind::CorrectSubmission, item, in_window(rng), ip);
                emit(name, EventKind::ShowAnswer, item, in_window(rng), ip);
            }
        }
        return batch;
    }

    std::uniform_real_distribution<double> jitter(-profile.sync_jitter_seconds,
                                                  profile.sync_jitter_seconds);
    std::uniform_real_distribution<double> offset_jitter(-profile.offset_jitter_seconds,
                                                         profile.offset_jitter_seconds);
    std::uniform_real_distribution<double> work(1.0, 5.0);

    std::size_t i = 0;
    for (; i + 1 < n_accounts; i += 2) {
        // First of the pair is uncertified, second certified, so the
        // pair reaches Filter 3 and the later filters must reject it.
        const std::string first = add_account(i, false);
        const std::string second = add_account(i + 1, true);
        const std::string ip = shared_ip.empty() ? ips.fresh() : shared_ip;
        for (const std::string& item : course.items) {
            if (unit(rng) > profile.participation) continue;
            const double base = in_window(rng);
            if (profile.kind == BenignKind::Synchronized) {
                emit(first, EventKind::CorrectSubmission, item, base + jitter(rng), ip);
                emit(first, EventKind::ShowAnswer, item, base + jitter(rng), ip);
                emit(second, EventKind::CorrectSubmission, item, base + jitter(rng), ip);
                emit(second, EventKind::ShowAnswer, item, base + jitter(rng), ip);
            } else {  // OrderedOffset
                const double late = base + profile.offset_seconds + offset_jitter(rng);
                emit(first, EventKind::ShowAnswer, item, base, ip);
                emit(first, EventKind::CorrectSubmission, item, base + work(rng), ip);
                emit(second, EventKind::CorrectSubmission, item, late, ip);
                emit(second, EventKind::ShowAnswer, item, late + work(rng), ip);
            }
        }
    }
    if (i < n_accounts) {
        // Leftover account: independent behavior, own IP.
        const std::string name = add_account(i, false);
        const std::string ip = shared_ip.empty() ? ips.fresh() : shared_ip;
        for (const std::string& item : course.items) {
            if (unit(rng) > profile.participation) continue;
            emit(name, EventKind::CorrectSubmission, item, in_window(rng), ip);
            emit(name, EventKind::ShowAnswer, item, in_window(rng), ip);
        }
    }
    return batch;
}

struct CameoBatch {
    std::vector<Event> events;
    std::vector<RosterEntry> roster;
    PlantedPair pair;
    std::vector<double> lags;  // sampled per-item lags, in emission order
};

// One planted CAMEO pair. Alternating interleaves show/correct per
// item; Clustered harvests a block of items and then submits the block.
// Either way every per-item delta equals its sampled lag and both
// accounts ride the shared IP.
inline CameoBatch gen_cameo(const CameoPlan& plan, const SynthCourse& course,
                            std::uint64_t seed, const std::string& harvester,
                            const std::string& master) {
    plan.validate();
    if (plan.items > course.items.size())
        throw std::invalid_argument("cameo plan wants more items than the course has");
    CameoBatch batch;
    batch.pair = {harvester, master, course.course};
    batch.roster.push_back({harvester, course.course, false});
    batch.roster.push_back({master, course.course, true});

    std::mt19937_64 rng(detail::splitmix64(seed));
    std::vector<std::string> items = course.items;
    std::shuffle(items.begin(), items.end(), rng);
    items.resize(plan.items);

    std::uniform_real_distribution<double> think(5.0, 60.0);
    std::uniform_real_distribution<double> intra(2.0, 10.0);
    std::uniform_real_distribution<double> session_start(0.0, 6.0 * 3600.0);

    auto emit = [&](const std::string& account, EventKind kind, const std::string& item,
                    double at_seconds) {
        batch.events.push_back({account, course.course, item, kind,
                                detail::offset_us(course.start_time, at_seconds),
                                plan.shared_ip});
    };

    double cursor = session_start(rng);
    if (plan.strategy == CameoPlan::Strategy::Alternating) {
        for (const std::string& item : items) {
            const double lag = detail::sample_lag(plan.lag, rng);
            batch.lags.push_back(lag);
            // A failed guess precedes the reveal; Other events carry IP
            // observations but never enter the delta series.
            emit(harvester, EventKind::Other, item, cursor - 2.0);
            emit(harvester, EventKind::ShowAnswer, item, cursor);
            emit(master, EventKind::CorrectSubmission, item, cursor + lag);
            cursor += lag + think(rng);
        }
    } else {
        constexpr std::size_t cluster_size = 5;
        for (std::size_t c = 0; c < items.size(); c += cluster_size) {
            const std::size_t end = std::min(c + cluster_size, items.size());
            double latest = cursor;
            for (std::size_t k = c; k < end; ++k) {
                const double lag = detail::sample_lag(plan.lag, rng);
                batch.lags.push_back(lag);
                const double show_at = cursor + static_cast<double>(k - c) * intra(rng);
                emit(harvester, EventKind::ShowAnswer, items[k], show_at);
                emit(master, EventKind::CorrectSubmission, items[k], show_at + lag);
                latest = std::max(latest, show_at + lag);
            }
            cursor = latest + think(rng);
        }
    }
    return batch;
}

// Pair-level evaluation on (harvester, master, course) triples.
struct EvalReport {
    double precision = 1.0;
    double recall = 1.0;
    std::size_t true_positives = 0;
    std::vector<Detection> false_positives;
    std::vector<std::tuple<std::string, std::string, std::string>> false_negatives;
    bool zero_predictions = false;  // precision reported as 1.0 by convention
};

inline EvalReport evaluate(const std::vector<Detection>& detections, const GroundTruth& truth) {
    EvalReport report;
    std::set<std::tuple<std::string, std::string, std::string>> predicted;
    for (const Detection& det : detections) {
        if (!det.is_cameo()) continue;
        auto key = std::make_tuple(det.harvester, det.master, det.course);
        if (!predicted.insert(key).second) continue;
        if (truth.planted.count(key) > 0)
            ++report.true_positives;
        else
            report.false_positives.push_back(det);
    }
    for (const auto& key : truth.planted)
        if (predicted.count(key) == 0) report.false_negatives.push_back(key);

    report.zero_predictions = predicted.empty();
    report.precision = predicted.empty()
                           ? 1.0
                           : static_cast<double>(report.true_positives) /
                                 static_cast<double>(predicted.size());
    report.recall = truth.planted.empty()
                        ? 1.0
                        : static_cast<double>(report.true_positives) /
                              static_cast<double>(truth.planted.size());
    return report;
}

// Whole-corpus generation knobs. Counts are per course.
struct SynthConfig {
    std::size_t courses = 1;
    std::size_t items_per_course = 141;  // typical graded-item count
    std::size_t benign_independent = 300;
    std::size_t benign_synchronized = 100;
    std::size_t benign_offset = 100;
    std::size_t cafe_accounts = 0;  // one shared-router group per course
    std::size_t cameo_pairs = 0;
    std::size_t cameo_items = 50;
    LagDistribution lag;
    double window_seconds = 30.0 * 86400.0;
    double participation = 0.8;
    double sync_jitter_seconds = 10.0;
    double offset_seconds = 7200.0;
    double offset_jitter_seconds = 30.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (courses == 0 || items_per_course == 0)
            throw std::invalid_argument("synth config needs courses and items");
        if (cameo_pairs > 0 && cameo_items > items_per_course)
            throw std::invalid_argument("cameo_items exceeds items_per_course");
    }
};

struct SynthCorpus {
    std::vector<Event> events;  // time-sorted, ties keep emission order
    std::vector<RosterEntry> roster;
    GroundTruth truth;

    CourseMap to_courses() const {
        CourseMap map;
        for (const Event& ev : events) {
            CourseStore& store = map[ev.course];
            store.course = ev.course;
            store.accounts.insert(ev.account);
            store.events.push_back(ev);
        }
        return map;
    }

    CertificationRoster to_roster() const {
        CertificationRoster out;
        for (const RosterEntry& entry : roster) out.insert(entry.account, entry.course, entry.certified);
        return out;
    }
};

// Deterministic in seed + config. Course sub-seeds derive from
// splitmix64(seed + course index); generator streams within a course
// advance a stream counter through the same mix.
inline SynthCorpus generate_corpus(const SynthConfig& config) {
    config.validate();
    SynthCorpus corpus;
    IpPool ips;

    for (std::size_t ci = 0; ci < config.courses; ++ci) {
        const std::uint64_t course_seed = detail::splitmix64(config.seed + ci);
        std::uint64_t stream = 0;
        auto next_seed = [&] { return detail::splitmix64(course_seed + ++stream); };

        SynthCourse course;
        course.course = "course" + std::to_string(ci);
        course.items.reserve(config.items_per_course);
        for (std::size_t k = 0; k < config.items_per_course; ++k)
            course.items.push_back("item" + std::to_string(k));

        const std::string prefix = "c" + std::to_string(ci) + "_";
        auto absorb = [&](GenBatch&& batch, AccountLabel label) {
            for (const std::string& account : batch.accounts)
                corpus.truth.labels.emplace(account, label);
            corpus.events.insert(corpus.events.end(),
                                 std::make_move_iterator(batch.events.begin()),
                                 std::make_move_iterator(batch.events.end()));
            corpus.roster.insert(corpus.roster.end(), batch.roster.begin(),
                                 batch.roster.end());
        };

        BenignProfile profile;
        profile.window_seconds = config.window_seconds;
        profile.participation = config.participation;
        profile.sync_jitter_seconds = config.sync_jitter_seconds;
        profile.offset_seconds = config.offset_seconds;
        profile.offset_jitter_seconds = config.offset_jitter_seconds;

        profile.kind = BenignKind::IndependentAsync;
        absorb(gen_benign(profile, config.benign_independent, course, next_seed(),
                          prefix + "ind", ips),
               AccountLabel::Benign);
        profile.kind = BenignKind::Synchronized;
        absorb(gen_benign(profile, config.benign_synchronized, course, next_seed(),
                          prefix + "syn", ips),
               AccountLabel::Benign);
        profile.kind = BenignKind::OrderedOffset;
        absorb(gen_benign(profile, config.benign_offset, course, next_seed(),
                          prefix + "off", ips),
               AccountLabel::Benign);
        if (config.cafe_accounts > 0) {
            profile.kind = BenignKind::IndependentAsync;
            absorb(gen_benign(profile, config.cafe_accounts, course, next_seed(),
                              prefix + "cafe", ips, ips.fresh()),
                   AccountLabel::Benign);
        }

        for (std::size_t k = 0; k < config.cameo_pairs; ++k) {
            CameoPlan plan;
            plan.strategy = k % 2 == 0 ? CameoPlan::Strategy::Alternating
                                       : CameoPlan::Strategy::Clustered;
            plan.lag = config.lag;
            plan.items = config.cameo_items;
            plan.shared_ip = ips.fresh();
            const std::string base = prefix + "twin" + std::to_string(k);
            CameoBatch batch = gen_cameo(plan, course, next_seed(), base + "a", base + "b");
            corpus.truth.planted.insert(batch.pair.key());
            corpus.truth.labels.emplace(batch.pair.harvester, AccountLabel::CameoHarvester);
            corpus.truth.labels.emplace(batch.pair.master, AccountLabel::CameoMaster);
            corpus.events.insert(corpus.events.end(),
                                 std::make_move_iterator(batch.events.begin()),
                                 std::make_move_iterator(batch.events.end()));
            corpus.roster.insert(corpus.roster.end(), batch.roster.begin(),
                                 batch.roster.end());
        }
    }

    std::stable_sort(corpus.events.begin(), corpus.events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
    std::sort(corpus.roster.begin(), corpus.roster.end(),
              [](const RosterEntry& a, const RosterEntry& b) {
                  return std::tie(a.account, a.course) < std::tie(b.account, b.course);
              });
    return corpus;
}

}  // namespace cameo
