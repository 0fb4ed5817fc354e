#pragma once

// Social Rating Network data model: users, items, sparse observed ratings and
// directed social ties between users.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace socmf {

struct UserId {
  std::uint32_t value = 0;
  friend auto operator<=>(const UserId&, const UserId&) = default;
};

struct ItemId {
  std::uint32_t value = 0;
  friend auto operator<=>(const ItemId&, const ItemId&) = default;
};

/// Bijection between external string labels and dense indices [0, n).
/// Indices are handed out in first-appearance order.
class LabelIndex {
 public:
  LabelIndex() = default;

  /// Default labels `<prefix>0 .. <prefix>(n-1)`.
  static LabelIndex numbered(std::size_t n, std::string_view prefix);

  /// Returns the index of `label`, assigning the next free one if unseen.
  std::uint32_t intern(std::string_view label);
  std::optional<std::uint32_t> find(std::string_view label) const;
  const std::string& label(std::uint32_t index) const;

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  friend bool operator==(const LabelIndex& a, const LabelIndex& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> by_label_;
};

/// Rating scale of a dataset. Only used for clamping predictions and for the
/// last-resort Naive fallback; stored ratings are not required to lie in it.
struct RatingScale {
  double min = 1.0;
  double max = 5.0;

  double midpoint() const noexcept { return 0.5 * (min + max); }
  double clamp(double v) const noexcept;
  void validate() const;
};

struct Rating {
  UserId user;
  ItemId item;
  double value = 0.0;
};

/// Sparse observed ratings. Presence of (x, j) is the observation mask; entries
/// are kept sorted by (user, item).
class RatingsTable {
 public:
  RatingsTable() = default;

  /// Throws DataError on an out-of-range index, a duplicate (user, item)
  /// pair, or a negative / non-finite value.
  RatingsTable(std::size_t n_users, std::size_t n_items, std::vector<Rating> entries);

  std::size_t n_users() const noexcept { return n_users_; }
  std::size_t n_items() const noexcept { return n_items_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const Rating> entries() const noexcept { return entries_; }

  std::optional<double> find(UserId x, ItemId j) const;
  bool contains(UserId x, ItemId j) const { return find(x, j).has_value(); }

  /// Entries of user x, sorted by item.
  std::span<const Rating> user_entries(UserId x) const;

  /// Same entries over a larger index space.
  RatingsTable with_dimensions(std::size_t n_users, std::size_t n_items) const;

  friend bool operator==(const RatingsTable& a, const RatingsTable& b);

 private:
  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  std::vector<Rating> entries_;
  std::vector<std::size_t> user_offsets_{0};
};

/// Directed social ties. Parallel duplicate edges collapse into one.
class SocialGraph {
 public:
  SocialGraph() = default;

  /// Throws DataError on out-of-range endpoints or self-loops.
  SocialGraph(std::size_t n_users, std::vector<std::pair<UserId, UserId>> edges);

  std::size_t n_users() const noexcept { return n_users_; }
  std::size_t edge_count() const noexcept { return out_targets_.size(); }
  bool empty() const noexcept { return out_targets_.empty(); }

  /// Out-neighbors of x (users x has a tie to), sorted ascending.
  std::span<const UserId> neighbors(UserId x) const;
  /// In-neighbors of x (users that have a tie to x), sorted ascending.
  std::span<const UserId> followers(UserId x) const;
  bool has_edge(UserId from, UserId to) const;

  /// All edges in (from, to) lexicographic order.
  std::vector<std::pair<UserId, UserId>> edges() const;

  /// Adds the reverse of every edge.
  SocialGraph symmetrized() const;
  SocialGraph with_users(std::size_t n_users) const;

  friend bool operator==(const SocialGraph& a, const SocialGraph& b) {
    return a.n_users_ == b.n_users_ && a.out_offsets_ == b.out_offsets_ &&
           a.out_targets_ == b.out_targets_;
  }

 private:
  std::size_t n_users_ = 0;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<UserId> out_targets_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<UserId> in_sources_;
};

/// Ratings plus social graph over one shared user index space, with labels.
class SocialRatingNetwork {
 public:
  SocialRatingNetwork() = default;

  const RatingsTable& ratings() const noexcept { return ratings_; }
  const SocialGraph& social() const noexcept { return social_; }
  const LabelIndex& users() const noexcept { return users_; }
  const LabelIndex& items() const noexcept { return items_; }
  std::size_t n_users() const noexcept { return ratings_.n_users(); }
  std::size_t n_items() const noexcept { return ratings_.n_items(); }

  /// Same network and labels, different ratings (e.g. a training split).
  SocialRatingNetwork with_ratings(RatingsTable ratings) const;

  friend bool operator==(const SocialRatingNetwork&, const SocialRatingNetwork&) = default;

 private:
  friend SocialRatingNetwork build_srn(RatingsTable, SocialGraph, LabelIndex, LabelIndex);

  RatingsTable ratings_;
  SocialGraph social_;
  LabelIndex users_;
  LabelIndex items_;
};

/// Validates and assembles an SRN. Labels default to u0.., i0.. when omitted.
SocialRatingNetwork build_srn(RatingsTable ratings, SocialGraph social);
SocialRatingNetwork build_srn(RatingsTable ratings, SocialGraph social, LabelIndex users,
                              LabelIndex items);

/// { y : (x, y) is an edge }. Throws DataError if x is out of range.
std::span<const UserId> neighborhood(const SocialRatingNetwork& srn, UserId x);

struct SrnStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t ratings = 0;
  std::size_t edges = 0;
  double density = 0.0;  // ratings / (users * items); 0 when either is 0
};

SrnStats srn_stats(const SocialRatingNetwork& srn);

}  // namespace socmf
