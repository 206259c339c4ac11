#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cameo/bayes.hpp"
#include "cameo/event.hpp"
#include "cameo/ip_linkage.hpp"
#include "cameo/log.hpp"
#include "cameo/pairgen.hpp"
#include "cameo/similarity.hpp"

namespace cameo {

struct FilterConfig {
    PriorConfig prior;
    CriterionConfig criterion;
    double percentile_q = 0.9;
    double cutoff_seconds = 300.0;  // Filter 2, strict <
    std::size_t max_group_accounts = 10;
    // Filter 5 default excludes groups with count >= max (the stricter
    // "10 accounts or more" reading); false excludes only count > max.
    bool group_exclude_at_threshold = true;
    std::size_t min_common_items = 1;
    TimestampPolicy timestamp_policy = TimestampPolicy::Earliest;

    void validate() const {
        if (!(cutoff_seconds > 0.0))
            throw std::invalid_argument("cutoff_seconds must be positive");
        if (max_group_accounts < 2)
            throw std::invalid_argument("max_group_accounts must be >= 2");
        if (!(percentile_q > 0.0) || percentile_q > 1.0)
            throw std::invalid_argument("percentile_q outside (0,1]");
        if (!(criterion.pi_threshold > 0.0) || !(criterion.pi_threshold < 1.0))
            throw std::invalid_argument("pi_threshold outside (0,1)");
        if (!(criterion.confidence > 0.0) || !(criterion.confidence < 1.0))
            throw std::invalid_argument("confidence outside (0,1)");
        if (!(prior.alpha > 0.0) || !(prior.beta > 0.0))
            throw std::invalid_argument("prior parameters must be positive");
    }
};

// One classified (CH, CM, course) pair with per-filter verdicts.
struct Detection {
    std::string course;
    std::string harvester;
    std::string master;
    std::size_t n = 0;
    std::size_t x = 0;
    double p90_seconds = std::numeric_limits<double>::quiet_NaN();
    double posterior_prob = 0.0;
    bool f1 = false;
    bool f2 = false;
    bool f3 = false;
    bool f4 = false;
    bool f5 = false;
    double name_similarity = 0.0;

    bool is_cameo() const { return f1 && f2 && f3 && f4 && f5; }
};

// Per-course canonical item times, computed once and shared.
struct CourseTimes {
    std::map<std::string, ItemTimes> by_account;

    static CourseTimes build(const CourseStore& store, TimestampPolicy policy) {
        return {all_item_times(store, policy)};
    }

    const ItemTimes& of(const std::string& account) const {
        static const ItemTimes empty;
        auto it = by_account.find(account);
        return it == by_account.end() ? empty : it->second;
    }
};

namespace detail {

inline bool group_passes_filter5(std::size_t count, const FilterConfig& config) {
    return config.group_exclude_at_threshold ? count < config.max_group_accounts
                                             : count <= config.max_group_accounts;
}

}  // namespace detail

// All five verdicts for an arbitrary ordered pair. Pairs from
// generate_candidates already satisfy f3/f4/f5; computing them fresh
// keeps the verdicts usable on any pair (the filters are conjunctive,
// so evaluation order is immaterial).
inline Detection classify_pair(const std::string& ch, const std::string& cm,
                               const std::string& course, const CourseTimes& times,
                               const CertificationRoster& roster,
                               const IpGroupPartition& partition,
                               const FilterConfig& config) {
    Detection det;
    det.course = course;
    det.harvester = ch;
    det.master = cm;

    const DeltaSeries series = delta_series(times.of(ch), times.of(cm));
    det.n = series.n();
    det.x = series.x;
    det.posterior_prob =
        prob_pi_exceeds(config.criterion.pi_threshold, posterior(det.x, det.n, config.prior));
    if (det.n == 0) {
        log_debug("pair (" + ch + ", " + cm + ") in " + course +
                  " has no common items; filters 1 and 2 fail");
        det.f1 = false;
        det.f2 = false;
    } else {
        det.f1 = det.posterior_prob >= config.criterion.confidence;
        det.p90_seconds = percentile(series, config.percentile_q);
        det.f2 = det.p90_seconds < config.cutoff_seconds;
    }

    det.f3 = roster.certified(cm, course) && !roster.certified(ch, course);
    det.f4 = shares_ip_history(ch, cm, partition);
    det.f5 = detail::group_passes_filter5(partition.group_size(ch), config) &&
             detail::group_passes_filter5(partition.group_size(cm), config);
    det.name_similarity = username_similarity(ch, cm);
    return det;
}

inline Detection classify_pair(const std::string& ch, const std::string& cm,
                               const CourseStore& store, const CertificationRoster& roster,
                               const IpGroupPartition& partition, const FilterConfig& config) {
    return classify_pair(ch, cm, store.course,
                         CourseTimes::build(store, config.timestamp_policy), roster,
                         partition, config);
}

// Ordered (CH, CM) pairs surviving the cheap structural filters: CM
// certified, CH not (Filter 3), same IP group (Filter 4), group small
// enough (Filter 5), and n >= min_common_items. Filters 1-2 stay with
// classify_pair; conjunctive filters make this pruning invisible in the
// final detection set.
inline std::vector<std::pair<std::string, std::string>> generate_candidates(
    const CourseStore& store, const CertificationRoster& roster,
    const IpGroupPartition& partition, const FilterConfig& config,
    const CourseTimes& times) {
    std::map<std::string, std::vector<std::string>> in_course_groups;
    for (const std::string& account : store.accounts) {
        auto it = partition.group_of.find(account);
        if (it == partition.group_of.end()) continue;
        if (!detail::group_passes_filter5(partition.group_account_count.at(it->second), config))
            continue;
        in_course_groups[it->second].push_back(account);
    }

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& [gid, accounts] : in_course_groups) {
        if (accounts.size() < 2) continue;
        for (const std::string& ch : accounts) {
            if (roster.certified(ch, store.course)) continue;
            for (const std::string& cm : accounts) {
                if (cm == ch || !roster.certified(cm, store.course)) continue;
                const DeltaSeries series = delta_series(times.of(ch), times.of(cm));
                if (series.n() < config.min_common_items) continue;
                pairs.emplace_back(ch, cm);
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

inline std::vector<std::pair<std::string, std::string>> generate_candidates(
    const CourseStore& store, const CertificationRoster& roster,
    const IpGroupPartition& partition, const FilterConfig& config) {
    return generate_candidates(store, roster, partition, config,
                               CourseTimes::build(store, config.timestamp_policy));
}

struct CourseSummary {
    std::size_t certified_count = 0;
    std::size_t cameo_count = 0;  // distinct flagged masters
    double cameo_fraction = 0.0;
};

struct AggregateReport {
    std::size_t cameo_certificates = 0;   // distinct flagged (master, course)
    std::size_t unique_cameo_users = 0;   // distinct masters
    std::size_t harvester_accounts = 0;   // distinct harvesters
    std::map<std::string, CourseSummary> per_course;
};

struct DetectResult {
    // Every classified candidate pair, sorted by (course, master, harvester).
    std::vector<Detection> classified;
    AggregateReport report;

    std::vector<Detection> detections() const {
        std::vector<Detection> out;
        for (const Detection& det : classified)
            if (det.is_cameo()) out.push_back(det);
        return out;
    }
};

// A (master, course) certificate counts once however many harvesters
// serve it; users and harvester accounts are counted globally.
inline AggregateReport aggregate_detections(const std::vector<Detection>& detections,
                                            const CertificationRoster& roster,
                                            const CourseMap& courses) {
    AggregateReport report;
    std::set<std::pair<std::string, std::string>> master_course;
    std::set<std::string> masters, harvesters;
    std::map<std::string, std::set<std::string>> masters_per_course;
    for (const Detection& det : detections) {
        if (!det.is_cameo()) continue;
        master_course.insert({det.master, det.course});
        masters.insert(det.master);
        harvesters.insert(det.harvester);
        masters_per_course[det.course].insert(det.master);
    }
    report.cameo_certificates = master_course.size();
    report.unique_cameo_users = masters.size();
    report.harvester_accounts = harvesters.size();
    for (const auto& [course, store] : courses) {
        CourseSummary summary;
        summary.certified_count = roster.certified_count_in_course(course);
        auto it = masters_per_course.find(course);
        summary.cameo_count = it == masters_per_course.end() ? 0 : it->second.size();
        summary.cameo_fraction =
            summary.certified_count == 0
                ? 0.0
                : static_cast<double>(summary.cameo_count) /
                      static_cast<double>(summary.certified_count);
        report.per_course.emplace(course, summary);
    }
    return report;
}

namespace detail {

// Runs fn(i) for i in [0, count), jobs workers. Worker exceptions are
// rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    const unsigned n = static_cast<unsigned>(
        std::min<std::size_t>(jobs, count));
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Full five-filter detection over every course. Courses are independent
// work units; the merged output is sorted, so the result is identical
// for any jobs value.
inline DetectResult detect(const CourseMap& courses, const CertificationRoster& roster,
                           const IpGroupPartition& partition, const FilterConfig& config,
                           unsigned jobs = 1) {
    config.validate();
    std::vector<const CourseStore*> stores;
    stores.reserve(courses.size());
    for (const auto& [course, store] : courses) stores.push_back(&store);

    std::vector<std::vector<Detection>> per_course(stores.size());
    detail::parallel_for(stores.size(), jobs, [&](std::size_t i) {
        const CourseStore& store = *stores[i];
        const CourseTimes times = CourseTimes::build(store, config.timestamp_policy);
        for (const auto& [ch, cm] :
             generate_candidates(store, roster, partition, config, times))
            per_course[i].push_back(
                classify_pair(ch, cm, store.course, times, roster, partition, config));
    });

    DetectResult result;
    for (auto& dets : per_course)
        result.classified.insert(result.classified.end(),
                                 std::make_move_iterator(dets.begin()),
                                 std::make_move_iterator(dets.end()));
    std::sort(result.classified.begin(), result.classified.end(),
              [](const Detection& a, const Detection& b) {
                  return std::tie(a.course, a.master, a.harvester) <
                         std::tie(b.course, b.master, b.harvester);
              });
    result.report = aggregate_detections(result.classified, roster, courses);
    return result;
}

// Builds the cross-course partition from per-course modal IPs.
inline IpGroupPartition build_partition(const CourseMap& courses) {
    std::vector<ModalIpRecord> records;
    for (const auto& [course, store] : courses)
        for (ModalIpRecord& rec : modal_ips(store)) records.push_back(std::move(rec));
    return build_ip_groups(records);
}

}  // namespace cameo
