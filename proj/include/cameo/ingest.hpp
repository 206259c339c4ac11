#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cameo/event.hpp"
#include "cameo/log.hpp"

namespace cameo {

// A rejected input record. Loading collects these instead of aborting.
struct RecordError {
    std::string source;  // "events" or "roster"
    std::size_t line_no = 0;
    std::string message;

    std::string str() const {
        return source + ":" + std::to_string(line_no) + ": " + message;
    }
};

struct LoadOptions {
    // Load fails when bad records exceed this fraction of total records.
    double max_error_rate = 0.0;
    // Optional analysis window; events outside are record-level errors.
    std::optional<Micros> window_min;
    std::optional<Micros> window_max;
};

struct LoadResult {
    CourseMap courses;
    CertificationRoster roster;
    std::vector<RecordError> errors;
    std::size_t parsed_events = 0;
    std::size_t parsed_roster_entries = 0;
};

class LoadError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Wire format: JSON-lines, fields account, course, item (optional for
// kind "other"), kind, time (RFC 3339 string or number), ip.
inline Event parse_event_line(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");

    auto require_string = [&](const char* field) -> std::string {
        if (!j.contains(field)) throw std::invalid_argument(std::string("missing ") + field);
        if (!j[field].is_string())
            throw std::invalid_argument(std::string(field) + " is not a string");
        return j[field].get<std::string>();
    };

    Event ev;
    ev.account = require_string("account");
    ev.course = require_string("course");
    if (ev.account.empty()) throw std::invalid_argument("empty account");
    if (ev.course.empty()) throw std::invalid_argument("empty course");

    if (!j.contains("kind")) throw std::invalid_argument("missing kind");
    if (!j["kind"].is_string()) throw std::invalid_argument("kind is not a string");
    ev.kind = event_kind_from_string(j["kind"].get<std::string>());

    if (!j.contains("time")) throw std::invalid_argument("missing time");
    const auto& t = j["time"];
    if (t.is_string()) {
        ev.time = parse_timestamp(t.get<std::string>());
    } else if (t.is_number_integer()) {
        const std::int64_t secs = t.get<std::int64_t>();
        if (secs > 999'999'999'999LL || secs < -999'999'999'999LL)
            throw std::invalid_argument("unparseable timestamp: epoch out of range");
        ev.time = secs * kMicrosPerSecond;
    } else if (t.is_number()) {
        // Decimal epoch seconds; reparse the token to keep exact micros.
        ev.time = parse_timestamp(t.dump());
    } else {
        throw std::invalid_argument("time is neither string nor number");
    }

    if (!j.contains("ip")) throw std::invalid_argument("missing ip");
    if (!j["ip"].is_string()) throw std::invalid_argument("ip is not a string");
    ev.ip = j["ip"].get<std::string>();

    if (j.contains("item")) {
        if (!j["item"].is_string()) throw std::invalid_argument("item is not a string");
        ev.item = j["item"].get<std::string>();
    }
    if (ev.item.empty() && ev.kind != EventKind::Other)
        throw std::invalid_argument("missing item for kind " +
                                    std::string(to_string(ev.kind)));
    return ev;
}

inline std::string serialize_event(const Event& ev) {
    nlohmann::json j;
    j["account"] = ev.account;
    j["course"] = ev.course;
    if (!ev.item.empty()) j["item"] = ev.item;
    j["kind"] = to_string(ev.kind);
    j["time"] = format_timestamp(ev.time);
    j["ip"] = ev.ip;
    return j.dump();
}

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::optional<bool> parse_certified(std::string_view s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    return std::nullopt;
}

}  // namespace detail

// Roster wire format: CSV with header `account,course,certified`.
// Returns the number of data lines seen (accepted or not).
inline std::size_t load_roster(std::istream& in, CertificationRoster& roster,
                               std::vector<RecordError>& errors, std::size_t& accepted) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t data_lines = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (!saw_header) {
            saw_header = true;
            if (t != "account,course,certified") {
                errors.push_back({"roster", line_no,
                                  "bad header, expected account,course,certified"});
            }
            continue;
        }
        ++data_lines;
        std::size_t c1 = t.find(',');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos : t.find(',', c1 + 1);
        if (c2 == std::string::npos) {
            errors.push_back({"roster", line_no, "expected 3 fields"});
            continue;
        }
        std::string account = detail::trim(t.substr(0, c1));
        std::string course = detail::trim(t.substr(c1 + 1, c2 - c1 - 1));
        std::string cert_text = detail::trim(t.substr(c2 + 1));
        if (account.empty() || course.empty()) {
            errors.push_back({"roster", line_no, "empty account or course"});
            continue;
        }
        auto cert = detail::parse_certified(cert_text);
        if (!cert) {
            errors.push_back({"roster", line_no, "bad certified value '" + cert_text + "'"});
            continue;
        }
        if (!roster.insert(account, course, *cert)) {
            errors.push_back({"roster", line_no,
                              "duplicate roster entry (" + account + ", " + course + ")"});
            continue;
        }
        ++accepted;
    }
    return data_lines;
}

// Partitions events by course and sorts each course by time; ties keep
// input order. Throws LoadError when the record error rate exceeds
// options.max_error_rate.
inline LoadResult load_corpus(std::istream& events, std::istream& roster,
                              const LoadOptions& options = {}) {
    LoadResult result;
    std::string line;
    std::size_t line_no = 0;
    std::size_t total_records = 0;

    struct Indexed {
        Event ev;
        std::size_t seq;
    };
    std::map<std::string, std::vector<Indexed>> by_course;

    while (std::getline(events, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        ++total_records;
        try {
            Event ev = parse_event_line(line);
            if ((options.window_min && ev.time < *options.window_min) ||
                (options.window_max && ev.time > *options.window_max))
                throw std::invalid_argument("time outside analysis window");
            by_course[ev.course].push_back({std::move(ev), line_no});
        } catch (const std::exception& e) {
            result.errors.push_back({"events", line_no, e.what()});
            continue;
        }
        ++result.parsed_events;
    }
    if (total_records == 0) log_warn("event stream is empty");

    total_records +=
        load_roster(roster, result.roster, result.errors, result.parsed_roster_entries);

    if (!result.errors.empty()) {
        for (const auto& err : result.errors) log_warn(err.str());
        const double rate = total_records == 0
                                ? 1.0
                                : static_cast<double>(result.errors.size()) /
                                      static_cast<double>(total_records);
        if (rate > options.max_error_rate) {
            std::ostringstream msg;
            msg << result.errors.size() << " bad records out of " << total_records
                << " (error rate " << rate << " exceeds " << options.max_error_rate
                << "); first: " << result.errors.front().str();
            throw LoadError(msg.str());
        }
    }

    for (auto& [course, indexed] : by_course) {
        std::stable_sort(indexed.begin(), indexed.end(),
                         [](const Indexed& a, const Indexed& b) { return a.ev.time < b.ev.time; });
        CourseStore store;
        store.course = course;
        store.events.reserve(indexed.size());
        for (auto& rec : indexed) {
            store.accounts.insert(rec.ev.account);
            store.events.push_back(std::move(rec.ev));
        }
        result.courses.emplace(course, std::move(store));
    }
    for (const auto& [course, store] : result.courses)
        log_info("course " + course + ": " + std::to_string(store.events.size()) + " events, " +
                 std::to_string(store.accounts.size()) + " accounts");
    return result;
}

}  // namespace cameo
