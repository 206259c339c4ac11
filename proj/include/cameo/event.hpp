#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cameo/time.hpp"

namespace cameo {

enum class EventKind { ShowAnswer, CorrectSubmission, Other };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::ShowAnswer: return "show_answer";
        case EventKind::CorrectSubmission: return "correct_submission";
        default: return "other";
    }
}

// Unknown event-type strings map to Other; Other events still carry IP
// observations but never contribute to the delta analysis.
inline EventKind event_kind_from_string(std::string_view s) {
    if (s == "show_answer") return EventKind::ShowAnswer;
    if (s == "correct_submission") return EventKind::CorrectSubmission;
    return EventKind::Other;
}

// One timestamped account action.
struct Event {
    std::string account;
    std::string course;
    std::string item;  // may be empty when kind == Other
    EventKind kind = EventKind::Other;
    Micros time = 0;
    std::string ip;

    friend bool operator==(const Event&, const Event&) = default;
};

// (account, course) -> certified. Each pair appears at most once.
class CertificationRoster {
   public:
    // Returns false when the (account, course) pair is already present.
    bool insert(const std::string& account, const std::string& course, bool certified) {
        auto [it, inserted] = entries_.try_emplace({account, course}, certified);
        (void)it;
        return inserted;
    }

    bool certified(const std::string& account, const std::string& course) const {
        auto it = entries_.find({account, course});
        return it != entries_.end() && it->second;
    }

    bool contains(const std::string& account, const std::string& course) const {
        return entries_.count({account, course}) > 0;
    }

    // Number of courses in which the account holds a certificate.
    std::size_t certificate_count(const std::string& account) const {
        std::size_t count = 0;
        for (auto it = entries_.lower_bound({account, ""});
             it != entries_.end() && it->first.first == account; ++it)
            if (it->second) ++count;
        return count;
    }

    std::size_t certified_count_in_course(const std::string& course) const {
        std::size_t count = 0;
        for (const auto& [key, cert] : entries_)
            if (cert && key.second == course) ++count;
        return count;
    }

    std::set<std::string> accounts_with_certificates() const {
        std::set<std::string> out;
        for (const auto& [key, cert] : entries_)
            if (cert) out.insert(key.first);
        return out;
    }

    const std::map<std::pair<std::string, std::string>, bool>& entries() const {
        return entries_;
    }

    std::size_t size() const { return entries_.size(); }

   private:
    std::map<std::pair<std::string, std::string>, bool> entries_;
};

// All events of one course, ordered by time (ties keep input order).
// Immutable after load; safe to read from concurrent workers.
struct CourseStore {
    std::string course;
    std::vector<Event> events;
    std::set<std::string> accounts;
};

using CourseMap = std::map<std::string, CourseStore>;

}  // namespace cameo
