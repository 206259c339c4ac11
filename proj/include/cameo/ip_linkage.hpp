#pragma once

#include <cstddef>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cameo/event.hpp"
#include "cameo/log.hpp"

namespace cameo {

// An account's most frequent IP within one course.
struct ModalIpRecord {
    std::string account;
    std::string course;
    std::string ip;
    std::size_t observation_count = 0;
};

namespace detail {

struct IpTally {
    std::size_t count = 0;
    Micros first_seen = 0;
};

// Highest count wins; ties go to the earliest first occurrence, then
// lexicographically smallest IP.
inline bool tally_beats(const IpTally& lhs, const std::string& lhs_ip, const IpTally& rhs,
                        const std::string& rhs_ip) {
    if (lhs.count != rhs.count) return lhs.count > rhs.count;
    if (lhs.first_seen != rhs.first_seen) return lhs.first_seen < rhs.first_seen;
    return lhs_ip < rhs_ip;
}

}  // namespace detail

// Modal IPs for every account in the course that has at least one event
// with a non-empty IP. Events of any kind count as observations.
inline std::vector<ModalIpRecord> modal_ips(const CourseStore& store) {
    std::map<std::string, std::map<std::string, detail::IpTally>> tallies;
    for (const Event& ev : store.events) {
        if (ev.ip.empty()) continue;
        auto [it, inserted] = tallies[ev.account].try_emplace(ev.ip);
        if (inserted) it->second.first_seen = ev.time;
        ++it->second.count;
    }
    std::vector<ModalIpRecord> out;
    out.reserve(tallies.size());
    for (const auto& [account, ips] : tallies) {
        const std::string* best_ip = nullptr;
        const detail::IpTally* best = nullptr;
        for (const auto& [ip, tally] : ips) {
            if (best == nullptr || detail::tally_beats(tally, ip, *best, *best_ip)) {
                best = &tally;
                best_ip = &ip;
            }
        }
        out.push_back({account, store.course, *best_ip, best->count});
    }
    return out;
}

inline ModalIpRecord modal_ip(const CourseStore& store, const std::string& account) {
    for (ModalIpRecord& rec : modal_ips(store))
        if (rec.account == account) return rec;
    throw std::runtime_error("no IP data for account " + account + " in course " +
                             store.course);
}

// Disjoint-set partition of accounts connected through shared modal IPs
// across courses. Group identifiers are the lexicographically smallest
// member account.
struct IpGroupPartition {
    std::map<std::string, std::string> group_of;
    std::map<std::string, std::set<std::string>> members;
    std::map<std::string, std::size_t> group_account_count;

    bool contains(const std::string& account) const { return group_of.count(account) > 0; }

    std::size_t group_size(const std::string& account) const {
        auto it = group_of.find(account);
        if (it == group_of.end()) return 1;  // no IP data: the account stands alone
        return group_account_count.at(it->second);
    }
};

namespace detail {

// Union-find with path halving and union by size.
class DisjointSet {
   public:
    explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t v) {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

   private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

}  // namespace detail

// Connected components of the bipartite account/modal-IP graph.
// Iterating merge-by-IP and merge-by-account to a fixpoint computes the
// same transitive closure; union-find reaches it in near-linear time.
inline IpGroupPartition build_ip_groups(const std::vector<ModalIpRecord>& records) {
    std::map<std::string, std::size_t> account_index;
    for (const ModalIpRecord& rec : records)
        account_index.try_emplace(rec.account, account_index.size());

    detail::DisjointSet dsu(account_index.size());
    std::map<std::string, std::size_t> ip_anchor;  // ip -> first account index
    for (const ModalIpRecord& rec : records) {
        const std::size_t idx = account_index.at(rec.account);
        auto [it, inserted] = ip_anchor.try_emplace(rec.ip, idx);
        if (!inserted) dsu.unite(it->second, idx);
    }

    // Group id = smallest account in the component. account_index is
    // ordered, so the first account seen per root is the smallest.
    std::map<std::size_t, std::string> root_id;
    IpGroupPartition part;
    for (const auto& [account, idx] : account_index) {
        const std::size_t root = dsu.find(idx);
        auto [it, inserted] = root_id.try_emplace(root, account);
        const std::string& gid = it->second;
        part.group_of[account] = gid;
        part.members[gid].insert(account);
    }
    for (const auto& [gid, accounts] : part.members)
        part.group_account_count[gid] = accounts.size();
    return part;
}

// True iff the two accounts fall in the same transitive-closure group.
// Accounts absent from the partition had no IP data; that is reported
// as a diagnostic, not an error.
inline bool shares_ip_history(const std::string& a, const std::string& b,
                              const IpGroupPartition& part) {
    auto ita = part.group_of.find(a);
    auto itb = part.group_of.find(b);
    if (ita == part.group_of.end() || itb == part.group_of.end()) {
        log_debug("shares_ip_history: account without IP data (" +
                  (ita == part.group_of.end() ? a : b) + ")");
        return false;
    }
    return ita->second == itb->second;
}

// Audit export: account,group_id,group_size rows sorted by account.
inline void write_ip_groups_csv(std::ostream& out, const IpGroupPartition& part) {
    out << "account,group_id,group_size\n";
    for (const auto& [account, gid] : part.group_of)
        out << account << ',' << gid << ',' << part.group_account_count.at(gid) << '\n';
}

}  // namespace cameo
