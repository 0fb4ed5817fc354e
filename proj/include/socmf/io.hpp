#pragma once

// Text file formats and the synthetic community SRN generator.
//
// Ratings file: `user<TAB>item<TAB>rating` per line.
// Edges file:   `from_user<TAB>to_user` per line.
// Lines starting with '#' and blank lines are ignored in both.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "socmf/matrix.hpp"
#include "socmf/srn.hpp"

namespace socmf {

struct ParsedRatings {
  RatingsTable table;
  LabelIndex users;
  LabelIndex items;
};

/// Labels are indexed in first-appearance order. Throws DataError naming the
/// line for malformed records and duplicate ratings.
ParsedRatings parse_ratings(std::istream& in, const std::string& source = "<ratings>");
ParsedRatings parse_ratings(const std::string& path);

/// Resolves user labels through `users`, appending labels not seen before.
/// Throws DataError naming the line for malformed records and self-loops.
SocialGraph parse_edges(std::istream& in, LabelIndex& users, bool symmetrize,
                        const std::string& source = "<edges>");
SocialGraph parse_edges(const std::string& path, LabelIndex& users, bool symmetrize);

/// Ratings plus optional edges (empty path = no ties) as one network. Users that
/// appear only in the edges file get an index but no ratings.
SocialRatingNetwork load_srn(const std::string& ratings_path, const std::string& edges_path,
                             bool symmetrize);

void write_ratings(std::ostream& out, const SocialRatingNetwork& srn);
void write_edges(std::ostream& out, const SocialRatingNetwork& srn);
void save_srn(const SocialRatingNetwork& srn, const std::string& ratings_path,
              const std::string& edges_path);

/// True when both networks hold the same labelled ratings and ties, regardless
/// of how indices were assigned.
bool same_network(const SocialRatingNetwork& a, const SocialRatingNetwork& b);

struct SyntheticParams {
  std::size_t users = 40;
  std::size_t items = 60;
  std::size_t communities = 4;
  double edge_probability = 0.5;  // per within-community unordered pair
  double cross_edge_probability = 0.0;  // per cross-community unordered pair
  double noise = 0.25;            // sd of Gaussian rating noise
  double taste_spread = 0.0;      // sd of each user's deviation from the community taste
  double density = 0.2;
  RatingScale scale;
  bool disjoint_items = false;    // each community rates only its own item block
  std::uint64_t seed = 1;

  void validate() const;
};

/// Users are split into contiguous communities. Each community has a Gaussian
/// taste vector (one dimension per community), optionally perturbed per user by
/// `taste_spread`; every item has a Gaussian type vector, and a rating is
/// clip(midpoint + taste . type + noise). Ties are symmetric pairs, drawn with
/// `edge_probability` within a community and `cross_edge_probability` across.
/// Every user and every item receives at least one rating; the rating count
/// is round(density * cells) per block of user/item pairs allowed to be rated.
SocialRatingNetwork generate_synthetic(const SyntheticParams& params);

/// Generator output together with the ground truth it sampled from.
struct SyntheticNetwork {
  SocialRatingNetwork srn;
  Matrix user_tastes;  // users x communities
  Matrix item_types;   // items x communities
  std::vector<std::size_t> community;  // per user
};

SyntheticNetwork generate_synthetic_with_truth(const SyntheticParams& params);

/// Community of user x under `params` (contiguous blocks).
std::size_t community_of(const SyntheticParams& params, std::size_t user);

}  // namespace socmf
