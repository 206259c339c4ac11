#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cameo/analytics.hpp"
#include "cameo/detector.hpp"
#include "cameo/ingest.hpp"
#include "cameo/synthgen.hpp"

namespace cameo {

inline void write_events_jsonl(std::ostream& out, const std::vector<Event>& events) {
    for (const Event& ev : events) out << serialize_event(ev) << '\n';
}

inline void write_roster_csv(std::ostream& out, const std::vector<RosterEntry>& roster) {
    out << "account,course,certified\n";
    for (const RosterEntry& entry : roster)
        out << entry.account << ',' << entry.course << ','
            << (entry.certified ? "true" : "false") << '\n';
}

inline nlohmann::json detection_to_json(const Detection& det) {
    nlohmann::json j;
    j["course"] = det.course;
    j["harvester"] = det.harvester;
    j["master"] = det.master;
    j["n"] = det.n;
    j["x"] = det.x;
    if (std::isnan(det.p90_seconds))
        j["p90_seconds"] = nullptr;
    else
        j["p90_seconds"] = det.p90_seconds;
    j["posterior_prob"] = det.posterior_prob;
    j["f1"] = det.f1;
    j["f2"] = det.f2;
    j["f3"] = det.f3;
    j["f4"] = det.f4;
    j["f5"] = det.f5;
    j["is_cameo"] = det.is_cameo();
    j["name_similarity"] = det.name_similarity;
    return j;
}

inline Detection detection_from_json(const nlohmann::json& j) {
    Detection det;
    det.course = j.at("course").get<std::string>();
    det.harvester = j.at("harvester").get<std::string>();
    det.master = j.at("master").get<std::string>();
    det.n = j.at("n").get<std::size_t>();
    det.x = j.at("x").get<std::size_t>();
    det.p90_seconds = j.at("p90_seconds").is_null()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : j.at("p90_seconds").get<double>();
    det.posterior_prob = j.at("posterior_prob").get<double>();
    det.f1 = j.at("f1").get<bool>();
    det.f2 = j.at("f2").get<bool>();
    det.f3 = j.at("f3").get<bool>();
    det.f4 = j.at("f4").get<bool>();
    det.f5 = j.at("f5").get<bool>();
    det.name_similarity = j.value("name_similarity", 0.0);
    return det;
}

inline void write_detections_jsonl(std::ostream& out, const std::vector<Detection>& dets) {
    for (const Detection& det : dets) out << detection_to_json(det).dump() << '\n';
}

inline std::vector<Detection> read_detections_jsonl(std::istream& in) {
    std::vector<Detection> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(detection_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error("detections line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    return out;
}

inline void write_summary_csv(std::ostream& out, const AggregateReport& report) {
    out << "course,certified_count,cameo_count,cameo_fraction\n";
    for (const auto& [course, summary] : report.per_course)
        out << course << ',' << summary.certified_count << ',' << summary.cameo_count << ','
            << summary.cameo_fraction << '\n';
}

inline void write_truth_json(std::ostream& out, const GroundTruth& truth) {
    nlohmann::json j;
    j["planted"] = nlohmann::json::array();
    for (const auto& [harvester, master, course] : truth.planted)
        j["planted"].push_back(
            {{"harvester", harvester}, {"master", master}, {"course", course}});
    j["labels"] = nlohmann::json::object();
    for (const auto& [account, label] : truth.labels)
        j["labels"][account] = to_string(label);
    out << j.dump(2) << '\n';
}

inline GroundTruth read_truth_json(std::istream& in) {
    nlohmann::json j = nlohmann::json::parse(in);
    GroundTruth truth;
    for (const auto& entry : j.at("planted"))
        truth.planted.insert({entry.at("harvester").get<std::string>(),
                              entry.at("master").get<std::string>(),
                              entry.at("course").get<std::string>()});
    if (j.contains("labels")) {
        for (const auto& [account, label] : j.at("labels").items()) {
            const std::string text = label.get<std::string>();
            AccountLabel parsed = AccountLabel::Benign;
            if (text == "cameo-master") parsed = AccountLabel::CameoMaster;
            else if (text == "cameo-harvester") parsed = AccountLabel::CameoHarvester;
            truth.labels.emplace(account, parsed);
        }
    }
    return truth;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "cutoff_seconds,cumulative,histogram_bin\n";
    for (std::size_t i = 0; i < sweep.grid.size(); ++i)
        out << sweep.grid[i] << ',' << sweep.cumulative[i] << ',' << sweep.histogram[i]
            << '\n';
}

inline void write_multicert_csv(std::ostream& out, const std::vector<MultiCertRow>& rows) {
    out << "min_certificates,earners,earners_with_cameo,fraction\n";
    for (const MultiCertRow& row : rows)
        out << row.min_certificates << ',' << row.earners << ',' << row.earners_with_cameo
            << ',' << row.fraction << '\n';
}

// Overwrites path; throws on I/O failure so a partial artifact never
// looks complete.
template <typename WriteFn>
void write_file(const std::string& path, WriteFn&& fn) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    fn(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    return content;
}

}  // namespace cameo
