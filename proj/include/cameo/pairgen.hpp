#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cameo/event.hpp"

namespace cameo {

// Which of several qualifying events defines an item's canonical time.
enum class TimestampPolicy { Earliest, Latest };

// Per-account canonical timestamps: show[i] is the harvest-side time,
// correct[i] the submission-side time. Items lacking a kind are absent.
struct ItemTimes {
    std::map<std::string, Micros> show;
    std::map<std::string, Micros> correct;
};

inline ItemTimes item_times(const CourseStore& store, const std::string& account,
                            TimestampPolicy policy = TimestampPolicy::Earliest) {
    ItemTimes out;
    auto keep = [policy](std::map<std::string, Micros>& m, const std::string& item, Micros t) {
        auto [it, inserted] = m.try_emplace(item, t);
        if (!inserted) {
            if (policy == TimestampPolicy::Earliest ? t < it->second : t > it->second)
                it->second = t;
        }
    };
    for (const Event& ev : store.events) {
        if (ev.account != account) continue;
        if (ev.kind == EventKind::ShowAnswer)
            keep(out.show, ev.item, ev.time);
        else if (ev.kind == EventKind::CorrectSubmission)
            keep(out.correct, ev.item, ev.time);
    }
    return out;
}

// Single pass over the course for every account at once; used by the
// detector so pair classification never rescans the event log.
inline std::map<std::string, ItemTimes> all_item_times(
    const CourseStore& store, TimestampPolicy policy = TimestampPolicy::Earliest) {
    std::map<std::string, ItemTimes> out;
    auto keep = [policy](std::map<std::string, Micros>& m, const std::string& item, Micros t) {
        auto [it, inserted] = m.try_emplace(item, t);
        if (!inserted) {
            if (policy == TimestampPolicy::Earliest ? t < it->second : t > it->second)
                it->second = t;
        }
    };
    for (const Event& ev : store.events) {
        if (ev.kind == EventKind::Other) continue;
        ItemTimes& times = out[ev.account];
        if (ev.kind == EventKind::ShowAnswer)
            keep(times.show, ev.item, ev.time);
        else
            keep(times.correct, ev.item, ev.time);
    }
    return out;
}

// Delta values in seconds for one (CH, CM) pair over common items.
// x counts strictly positive deltas; a delta of exactly 0 is non-positive.
struct DeltaSeries {
    std::vector<double> deltas;
    std::size_t x = 0;

    std::size_t n() const { return deltas.size(); }
};

// delta[i] = cm.correct[i] - ch.show[i] over items present in both.
inline DeltaSeries delta_series(const ItemTimes& ch_times, const ItemTimes& cm_times) {
    DeltaSeries out;
    auto show_it = ch_times.show.begin();
    auto correct_it = cm_times.correct.begin();
    while (show_it != ch_times.show.end() && correct_it != cm_times.correct.end()) {
        if (show_it->first < correct_it->first) {
            ++show_it;
        } else if (correct_it->first < show_it->first) {
            ++correct_it;
        } else {
            const Micros diff = correct_it->second - show_it->second;
            out.deltas.push_back(micros_to_seconds(diff));
            if (diff > 0) ++out.x;
            ++show_it;
            ++correct_it;
        }
    }
    return out;
}

// Nearest-rank percentile: element at rank ceil(q*n) of the sorted
// deltas, 1-indexed. q in (0, 1].
inline double percentile(const DeltaSeries& series, double q) {
    if (series.n() == 0) throw std::domain_error("percentile of empty series");
    if (!(q > 0.0) || q > 1.0) throw std::domain_error("percentile fraction out of (0,1]");
    std::vector<double> sorted = series.deltas;
    std::sort(sorted.begin(), sorted.end());
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    if (rank < 1) rank = 1;
    if (rank > sorted.size()) rank = sorted.size();
    return sorted[rank - 1];
}

}  // namespace cameo
