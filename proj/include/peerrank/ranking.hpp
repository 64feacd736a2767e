#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "peerrank/errors.hpp"

namespace peerrank {

/// Identifier of a ranked model / solution author.
using ModelId = std::string;

/// A ranking is an ordered sequence of tie groups, best group first.
/// Position 1 is best. A linear (strict) ranking has singleton groups only.
/// Members inside a tie group are kept sorted lexicographically so that two
/// rankings expressing the same order compare and serialize identically.
class Ranking {
 public:
  using Group = std::vector<ModelId>;

  Ranking() = default;

  /// Strict ranking from best to worst.
  static Ranking linear(std::vector<ModelId> order) {
    std::vector<Group> groups;
    groups.reserve(order.size());
    for (auto& id : order) groups.push_back(Group{std::move(id)});
    return from_groups(std::move(groups));
  }

  /// Ranking from tie groups. Validates uniqueness and non-empty groups,
  /// then canonicalizes group members lexicographically.
  static Ranking from_groups(std::vector<Group> groups) {
    Ranking r;
    r.groups_ = std::move(groups);
    r.canonicalize();
    return r;
  }

  /// Ranking from tie groups that must cover `candidates` exactly.
  static Ranking over(std::vector<Group> groups,
                      const std::vector<ModelId>& candidates) {
    Ranking r = from_groups(std::move(groups));
    std::set<ModelId> want(candidates.begin(), candidates.end());
    for (const auto& g : r.groups_)
      for (const auto& id : g)
        if (!want.erase(id))
          fail(Errc::unknown_model, "ranking names '" + id +
                                        "' which is not a candidate");
    if (!want.empty())
      fail(Errc::missing_candidate,
           "ranking omits candidate '" + *want.begin() + "'");
    return r;
  }

  const std::vector<Group>& groups() const noexcept { return groups_; }
  bool empty() const noexcept { return groups_.empty(); }
  std::size_t group_count() const noexcept { return groups_.size(); }

  std::size_t candidate_count() const noexcept {
    std::size_t n = 0;
    for (const auto& g : groups_) n += g.size();
    return n;
  }

  bool is_linear() const noexcept {
    for (const auto& g : groups_)
      if (g.size() != 1) return false;
    return true;
  }

  bool contains(const ModelId& id) const noexcept {
    for (const auto& g : groups_)
      if (std::binary_search(g.begin(), g.end(), id)) return true;
    return false;
  }

  /// All ranked ids, sorted lexicographically.
  std::vector<ModelId> candidates() const {
    std::vector<ModelId> ids;
    ids.reserve(candidate_count());
    for (const auto& g : groups_) ids.insert(ids.end(), g.begin(), g.end());
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  /// Mid-rank position of every ranked id: a tie group spanning positions
  /// s+1..s+t gets position s+(t+1)/2 for each member.
  std::map<ModelId, double> positions() const {
    std::map<ModelId, double> pos;
    std::size_t seen = 0;
    for (const auto& g : groups_) {
      double mid = static_cast<double>(seen) + (static_cast<double>(g.size()) + 1.0) / 2.0;
      for (const auto& id : g) pos[id] = mid;
      seen += g.size();
    }
    return pos;
  }

  /// Twice the mid-rank position, which is always integral. Using doubled
  /// positions lets callers compare and sum positions without float error.
  std::map<ModelId, std::int64_t> doubled_positions() const {
    std::map<ModelId, std::int64_t> pos;
    std::int64_t seen = 0;
    for (const auto& g : groups_) {
      std::int64_t dbl = 2 * seen + static_cast<std::int64_t>(g.size()) + 1;
      for (const auto& id : g) pos[id] = dbl;
      seen += static_cast<std::int64_t>(g.size());
    }
    return pos;
  }

  /// Index of the tie group holding each of `cands`, or -1 when absent.
  std::vector<int> group_index_over(const std::vector<ModelId>& cands) const {
    std::vector<int> out(cands.size(), -1);
    for (std::size_t gi = 0; gi < groups_.size(); ++gi)
      for (const auto& id : groups_[gi])
        for (std::size_t ci = 0; ci < cands.size(); ++ci)
          if (cands[ci] == id) out[ci] = static_cast<int>(gi);
    return out;
  }

  /// Doubled mid-rank per candidate in `cands`, or -1 when absent.
  std::vector<std::int64_t> doubled_positions_over(
      const std::vector<ModelId>& cands) const {
    std::vector<std::int64_t> out(cands.size(), -1);
    std::int64_t seen = 0;
    for (const auto& g : groups_) {
      std::int64_t dbl = 2 * seen + static_cast<std::int64_t>(g.size()) + 1;
      for (const auto& id : g)
        for (std::size_t ci = 0; ci < cands.size(); ++ci)
          if (cands[ci] == id) out[ci] = dbl;
      seen += static_cast<std::int64_t>(g.size());
    }
    return out;
  }

  /// Copy with `id` removed from its group; an emptied group is dropped.
  Ranking without(const ModelId& id) const {
    std::vector<Group> out;
    out.reserve(groups_.size());
    for (const auto& g : groups_) {
      Group kept;
      for (const auto& m : g)
        if (m != id) kept.push_back(m);
      if (!kept.empty()) out.push_back(std::move(kept));
    }
    Ranking r;
    r.groups_ = std::move(out);
    return r;  // already canonical
  }

  Ranking reversed() const {
    Ranking r;
    r.groups_.assign(groups_.rbegin(), groups_.rend());
    return r;
  }

  /// Copy with every id replaced through `rename`; ids absent from the map
  /// are kept. Groups are re-canonicalized under the new names.
  Ranking relabeled(const std::map<ModelId, ModelId>& rename) const {
    std::vector<Group> out;
    out.reserve(groups_.size());
    for (const auto& g : groups_) {
      Group ng;
      ng.reserve(g.size());
      for (const auto& id : g) {
        auto it = rename.find(id);
        ng.push_back(it == rename.end() ? id : it->second);
      }
      out.push_back(std::move(ng));
    }
    return from_groups(std::move(out));
  }

  /// "a > b = c > d" rendering, ties joined with '='.
  std::string to_string() const {
    std::string s;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      if (gi) s += " > ";
      for (std::size_t mi = 0; mi < groups_[gi].size(); ++mi) {
        if (mi) s += " = ";
        s += groups_[gi][mi];
      }
    }
    return s;
  }

  friend bool operator==(const Ranking& a, const Ranking& b) {
    return a.groups_ == b.groups_;
  }
  friend bool operator!=(const Ranking& a, const Ranking& b) {
    return !(a == b);
  }

 private:
  void canonicalize() {
    std::set<ModelId> seen;
    for (auto& g : groups_) {
      if (g.empty()) fail(Errc::empty_group, "ranking contains an empty tie group");
      std::sort(g.begin(), g.end());
      for (const auto& id : g)
        if (!seen.insert(id).second)
          fail(Errc::duplicate_candidate,
               "candidate '" + id + "' appears twice in one ranking");
    }
  }

  std::vector<Group> groups_;
};

/// Validating constructor matching the documented contract: `groups` must
/// partition `candidates` exactly.
inline Ranking make_ranking(std::vector<Ranking::Group> groups,
                            const std::vector<ModelId>& candidates) {
  return Ranking::over(std::move(groups), candidates);
}

}  // namespace peerrank
