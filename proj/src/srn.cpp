#include "socmf/srn.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "socmf/error.hpp"

namespace socmf {

LabelIndex LabelIndex::numbered(std::size_t n, std::string_view prefix) {
  LabelIndex index;
  for (std::size_t i = 0; i < n; ++i) {
    index.intern(std::string(prefix) + std::to_string(i));
  }
  return index;
}

std::uint32_t LabelIndex::intern(std::string_view label) {
  std::string key(label);
  auto [it, inserted] = by_label_.try_emplace(key, static_cast<std::uint32_t>(labels_.size()));
  if (inserted) labels_.push_back(std::move(key));
  return it->second;
}

std::optional<std::uint32_t> LabelIndex::find(std::string_view label) const {
  auto it = by_label_.find(std::string(label));
  if (it == by_label_.end()) return std::nullopt;
  return it->second;
}

const std::string& LabelIndex::label(std::uint32_t index) const {
  if (index >= labels_.size()) {
    throw DataError("label index " + std::to_string(index) + " out of range");
  }
  return labels_[index];
}

double RatingScale::clamp(double v) const noexcept { return std::clamp(v, min, max); }

void RatingScale::validate() const {
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max)) {
    throw ConfigError("rating scale requires finite min < max");
  }
}

// ---------------------------------------------------------------------------
// RatingsTable

RatingsTable::RatingsTable(std::size_t n_users, std::size_t n_items, std::vector<Rating> entries)
    : n_users_(n_users), n_items_(n_items), entries_(std::move(entries)) {
  for (const Rating& r : entries_) {
    if (r.user.value >= n_users_ || r.item.value >= n_items_) {
      throw DataError("rating (" + std::to_string(r.user.value) + ", " +
                      std::to_string(r.item.value) + ") out of range for " +
                      std::to_string(n_users_) + "x" + std::to_string(n_items_) + " table");
    }
    if (!std::isfinite(r.value) || r.value < 0.0) {
      throw DataError("rating value must be a finite non-negative real");
    }
  }
  std::stable_sort(entries_.begin(), entries_.end(), [](const Rating& a, const Rating& b) {
    return std::tie(a.user, a.item) < std::tie(b.user, b.item);
  });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].user == entries_[i - 1].user && entries_[i].item == entries_[i - 1].item) {
      throw DataError("duplicate rating for (user " + std::to_string(entries_[i].user.value) +
                      ", item " + std::to_string(entries_[i].item.value) + ")");
    }
  }
  user_offsets_.assign(n_users_ + 1, 0);
  for (const Rating& r : entries_) ++user_offsets_[r.user.value + 1];
  for (std::size_t x = 0; x < n_users_; ++x) user_offsets_[x + 1] += user_offsets_[x];
}

std::span<const Rating> RatingsTable::user_entries(UserId x) const {
  if (x.value >= n_users_) return {};
  return std::span<const Rating>(entries_).subspan(
      user_offsets_[x.value], user_offsets_[x.value + 1] - user_offsets_[x.value]);
}

std::optional<double> RatingsTable::find(UserId x, ItemId j) const {
  auto row = user_entries(x);
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const Rating& r, ItemId item) { return r.item < item; });
  if (it == row.end() || it->item != j) return std::nullopt;
  return it->value;
}

RatingsTable RatingsTable::with_dimensions(std::size_t n_users, std::size_t n_items) const {
  return RatingsTable(n_users, n_items, entries_);
}

bool operator==(const RatingsTable& a, const RatingsTable& b) {
  if (a.n_users_ != b.n_users_ || a.n_items_ != b.n_items_ ||
      a.entries_.size() != b.entries_.size()) {
    return false;
  }
  return std::equal(a.entries_.begin(), a.entries_.end(), b.entries_.begin(),
                    [](const Rating& l, const Rating& r) {
                      return l.user == r.user && l.item == r.item && l.value == r.value;
                    });
}

// ---------------------------------------------------------------------------
// SocialGraph

namespace {

void build_csr(std::size_t n, std::vector<std::pair<UserId, UserId>> edges,
               std::vector<std::size_t>& offsets, std::vector<UserId>& targets) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  offsets.assign(n + 1, 0);
  targets.clear();
  targets.reserve(edges.size());
  for (const auto& [from, to] : edges) {
    ++offsets[from.value + 1];
    targets.push_back(to);
  }
  for (std::size_t x = 0; x < n; ++x) offsets[x + 1] += offsets[x];
}

}  // namespace

SocialGraph::SocialGraph(std::size_t n_users, std::vector<std::pair<UserId, UserId>> edges)
    : n_users_(n_users) {
  for (const auto& [from, to] : edges) {
    if (from.value >= n_users || to.value >= n_users) {
      throw DataError("edge (" + std::to_string(from.value) + ", " + std::to_string(to.value) +
                      ") out of range for " + std::to_string(n_users) + " users");
    }
    if (from == to) {
      throw DataError("self-loop on user " + std::to_string(from.value));
    }
  }
  std::vector<std::pair<UserId, UserId>> reversed;
  reversed.reserve(edges.size());
  for (const auto& [from, to] : edges) reversed.emplace_back(to, from);
  build_csr(n_users, std::move(edges), out_offsets_, out_targets_);
  build_csr(n_users, std::move(reversed), in_offsets_, in_sources_);
}

std::span<const UserId> SocialGraph::neighbors(UserId x) const {
  if (x.value >= n_users_) return {};
  return std::span<const UserId>(out_targets_)
      .subspan(out_offsets_[x.value], out_offsets_[x.value + 1] - out_offsets_[x.value]);
}

std::span<const UserId> SocialGraph::followers(UserId x) const {
  if (x.value >= n_users_) return {};
  return std::span<const UserId>(in_sources_)
      .subspan(in_offsets_[x.value], in_offsets_[x.value + 1] - in_offsets_[x.value]);
}

bool SocialGraph::has_edge(UserId from, UserId to) const {
  auto n = neighbors(from);
  return std::binary_search(n.begin(), n.end(), to);
}

std::vector<std::pair<UserId, UserId>> SocialGraph::edges() const {
  std::vector<std::pair<UserId, UserId>> out;
  out.reserve(out_targets_.size());
  for (std::uint32_t x = 0; x < n_users_; ++x) {
    for (UserId y : neighbors(UserId{x})) out.emplace_back(UserId{x}, y);
  }
  return out;
}

SocialGraph SocialGraph::symmetrized() const {
  auto e = edges();
  const std::size_t n = e.size();
  for (std::size_t i = 0; i < n; ++i) e.emplace_back(e[i].second, e[i].first);
  return SocialGraph(n_users_, std::move(e));
}

SocialGraph SocialGraph::with_users(std::size_t n_users) const {
  return SocialGraph(n_users, edges());
}

// ---------------------------------------------------------------------------
// SocialRatingNetwork

SocialRatingNetwork SocialRatingNetwork::with_ratings(RatingsTable ratings) const {
  return build_srn(std::move(ratings), social_, users_, items_);
}

SocialRatingNetwork build_srn(RatingsTable ratings, SocialGraph social) {
  auto users = LabelIndex::numbered(ratings.n_users(), "u");
  auto items = LabelIndex::numbered(ratings.n_items(), "i");
  return build_srn(std::move(ratings), std::move(social), std::move(users), std::move(items));
}

SocialRatingNetwork build_srn(RatingsTable ratings, SocialGraph social, LabelIndex users,
                              LabelIndex items) {
  if (ratings.n_users() != social.n_users()) {
    throw DataError("ratings cover " + std::to_string(ratings.n_users()) +
                    " users but social graph covers " + std::to_string(social.n_users()));
  }
  if (users.size() != ratings.n_users() || items.size() != ratings.n_items()) {
    throw DataError("label count does not match ratings dimensions");
  }
  SocialRatingNetwork srn;
  srn.ratings_ = std::move(ratings);
  srn.social_ = std::move(social);
  srn.users_ = std::move(users);
  srn.items_ = std::move(items);
  return srn;
}

std::span<const UserId> neighborhood(const SocialRatingNetwork& srn, UserId x) {
  if (x.value >= srn.n_users()) {
    throw DataError("user " + std::to_string(x.value) + " out of range");
  }
  return srn.social().neighbors(x);
}

SrnStats srn_stats(const SocialRatingNetwork& srn) {
  SrnStats s;
  s.users = srn.n_users();
  s.items = srn.n_items();
  s.ratings = srn.ratings().size();
  s.edges = srn.social().edge_count();
  const double cells = static_cast<double>(s.users) * static_cast<double>(s.items);
  s.density = cells > 0.0 ? static_cast<double>(s.ratings) / cells : 0.0;
  return s;
}

}  // namespace socmf
