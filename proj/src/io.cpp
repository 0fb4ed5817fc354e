#include "socmf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <string_view>
#include <tuple>

#include "socmf/error.hpp"

namespace socmf {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] void fail_line(const std::string& source, std::size_t line_no, const std::string& msg) {
  throw DataError(source + ":" + std::to_string(line_no) + ": " + msg);
}

// Calls `on_record(fields, line_no)` for every non-comment, non-blank line.
template <typename F>
void for_each_record(std::istream& in, F&& on_record) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    on_record(split_tabs(view), line_no);
  }
}

void write_double(std::ostream& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, end - buf);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

ParsedRatings parse_ratings(std::istream& in, const std::string& source) {
  ParsedRatings parsed;
  std::vector<Rating> entries;
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for_each_record(in, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.size() != 3) fail_line(source, line_no, "expected user<TAB>item<TAB>rating");
    if (f[0].empty() || f[1].empty()) fail_line(source, line_no, "empty label");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), value);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size()) {
      fail_line(source, line_no, "rating '" + std::string(f[2]) + "' is not a number");
    }
    if (!std::isfinite(value) || value < 0.0) {
      fail_line(source, line_no, "rating must be a finite non-negative real");
    }
    const std::uint32_t user = parsed.users.intern(f[0]);
    const std::uint32_t item = parsed.items.intern(f[1]);
    if (!seen.emplace(user, item).second) {
      fail_line(source, line_no,
                "duplicate rating for (" + std::string(f[0]) + ", " + std::string(f[1]) + ")");
    }
    entries.push_back({UserId{user}, ItemId{item}, value});
  });
  parsed.table = RatingsTable(parsed.users.size(), parsed.items.size(), std::move(entries));
  return parsed;
}

ParsedRatings parse_ratings(const std::string& path) {
  auto in = open_input(path);
  return parse_ratings(in, path);
}

SocialGraph parse_edges(std::istream& in, LabelIndex& users, bool symmetrize,
                        const std::string& source) {
  std::vector<std::pair<UserId, UserId>> edges;
  for_each_record(in, [&](const std::vector<std::string_view>& f, std::size_t line_no) {
    if (f.size() != 2) fail_line(source, line_no, "expected from_user<TAB>to_user");
    if (f[0].empty() || f[1].empty()) fail_line(source, line_no, "empty label");
    if (f[0] == f[1]) fail_line(source, line_no, "self-loop on user '" + std::string(f[0]) + "'");
    const UserId from{users.intern(f[0])};
    const UserId to{users.intern(f[1])};
    edges.emplace_back(from, to);
    if (symmetrize) edges.emplace_back(to, from);
  });
  return SocialGraph(users.size(), std::move(edges));
}

SocialGraph parse_edges(const std::string& path, LabelIndex& users, bool symmetrize) {
  auto in = open_input(path);
  return parse_edges(in, users, symmetrize, path);
}

SocialRatingNetwork load_srn(const std::string& ratings_path, const std::string& edges_path,
                             bool symmetrize) {
  ParsedRatings parsed = parse_ratings(ratings_path);
  SocialGraph social;
  if (!edges_path.empty()) {
    social = parse_edges(edges_path, parsed.users, symmetrize);
  }
  const std::size_t n_users = parsed.users.size();
  RatingsTable ratings = parsed.table.n_users() == n_users
                             ? std::move(parsed.table)
                             : parsed.table.with_dimensions(n_users, parsed.table.n_items());
  if (social.n_users() != n_users) social = social.with_users(n_users);
  return build_srn(std::move(ratings), std::move(social), std::move(parsed.users),
                   std::move(parsed.items));
}

void write_ratings(std::ostream& out, const SocialRatingNetwork& srn) {
  for (const Rating& r : srn.ratings().entries()) {
    out << srn.users().label(r.user.value) << '\t' << srn.items().label(r.item.value) << '\t';
    write_double(out, r.value);
    out << '\n';
  }
}

void write_edges(std::ostream& out, const SocialRatingNetwork& srn) {
  for (const auto& [from, to] : srn.social().edges()) {
    out << srn.users().label(from.value) << '\t' << srn.users().label(to.value) << '\n';
  }
}

void save_srn(const SocialRatingNetwork& srn, const std::string& ratings_path,
              const std::string& edges_path) {
  {
    auto out = open_output(ratings_path);
    write_ratings(out, srn);
    if (!out) throw DataError("failed writing '" + ratings_path + "'");
  }
  auto out = open_output(edges_path);
  write_edges(out, srn);
  if (!out) throw DataError("failed writing '" + edges_path + "'");
}

bool same_network(const SocialRatingNetwork& a, const SocialRatingNetwork& b) {
  if (a.n_users() != b.n_users() || a.n_items() != b.n_items()) return false;
  using LabelledRating = std::tuple<std::string, std::string, double>;
  auto ratings_of = [](const SocialRatingNetwork& s) {
    std::set<LabelledRating> out;
    for (const Rating& r : s.ratings().entries()) {
      out.emplace(s.users().label(r.user.value), s.items().label(r.item.value), r.value);
    }
    return out;
  };
  auto ties_of = [](const SocialRatingNetwork& s) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& [x, y] : s.social().edges()) {
      out.emplace(s.users().label(x.value), s.users().label(y.value));
    }
    return out;
  };
  auto labels_of = [](const LabelIndex& index) {
    return std::set<std::string>(index.labels().begin(), index.labels().end());
  };
  return labels_of(a.users()) == labels_of(b.users()) &&
         labels_of(a.items()) == labels_of(b.items()) && ratings_of(a) == ratings_of(b) &&
         ties_of(a) == ties_of(b);
}

// ---------------------------------------------------------------------------
// Synthetic generator

void SyntheticParams::validate() const {
  if (users == 0 || items == 0) throw ConfigError("synthetic: users and items must be >= 1");
  if (communities == 0 || communities > users) {
    throw ConfigError("synthetic: communities must be in [1, users]");
  }
  if (disjoint_items && communities > items) {
    throw ConfigError("synthetic: disjoint item blocks need communities <= items");
  }
  if (!(edge_probability >= 0.0 && edge_probability <= 1.0) ||
      !(cross_edge_probability >= 0.0 && cross_edge_probability <= 1.0)) {
    throw ConfigError("synthetic: edge probabilities must be in [0, 1]");
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("synthetic: noise must be >= 0");
  if (!(taste_spread >= 0.0) || !std::isfinite(taste_spread)) {
    throw ConfigError("synthetic: taste spread must be >= 0");
  }
  if (!(density > 0.0 && density <= 1.0)) throw ConfigError("synthetic: density must be in (0, 1]");
  scale.validate();
  if (scale.min < 0.0) throw ConfigError("synthetic: rating scale must be non-negative");
}

std::size_t community_of(const SyntheticParams& params, std::size_t user) {
  return user * params.communities / params.users;
}

namespace {

std::size_t item_block(const SyntheticParams& params, std::size_t item) {
  return params.disjoint_items ? item * params.communities / params.items : 0;
}

}  // namespace

SyntheticNetwork generate_synthetic_with_truth(const SyntheticParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t dims = params.communities;

  Matrix community_taste(params.communities, dims);
  for (double& v : community_taste.values()) v = gauss(rng);

  SyntheticNetwork out;
  out.community.resize(params.users);
  out.user_tastes = Matrix(params.users, dims);
  for (std::size_t u = 0; u < params.users; ++u) {
    const std::size_t c = community_of(params, u);
    out.community[u] = c;
    for (std::size_t f = 0; f < dims; ++f) {
      out.user_tastes(u, f) = community_taste(c, f) + params.taste_spread * gauss(rng);
    }
  }
  out.item_types = Matrix(params.items, dims);
  const double type_scale = 1.0 / std::sqrt(static_cast<double>(dims));
  for (double& v : out.item_types.values()) v = type_scale * gauss(rng);

  // Rated cells, block by block. A block is one community's users with the
  // items they may rate (all items unless disjoint_items).
  const std::size_t blocks = params.disjoint_items ? params.communities : 1;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> cells;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<std::uint32_t> block_users, block_items;
    for (std::uint32_t u = 0; u < params.users; ++u) {
      if (!params.disjoint_items || community_of(params, u) == b) block_users.push_back(u);
    }
    for (std::uint32_t j = 0; j < params.items; ++j) {
      if (item_block(params, j) == b) block_items.push_back(j);
    }
    const std::size_t nu = block_users.size(), ni = block_items.size();
    if (nu == 0 || ni == 0) continue;

    std::shuffle(block_users.begin(), block_users.end(), rng);
    std::shuffle(block_items.begin(), block_items.end(), rng);
    std::vector<char> taken(nu * ni, 0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> block_cells;
    // Coverage: pairs (t mod nu, t mod ni) are distinct and touch every row and column.
    for (std::size_t t = 0; t < std::max(nu, ni); ++t) {
      const std::size_t a = t % nu, c = t % ni;
      taken[a * ni + c] = 1;
      block_cells.emplace_back(block_users[a], block_items[c]);
    }
    const auto target = std::max<std::size_t>(
        block_cells.size(),
        static_cast<std::size_t>(std::llround(params.density * static_cast<double>(nu * ni))));
    std::vector<std::size_t> order(nu * ni);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      if (block_cells.size() >= target) break;
      if (taken[idx]) continue;
      taken[idx] = 1;
      block_cells.emplace_back(block_users[idx / ni], block_items[idx % ni]);
    }
    cells.insert(cells.end(), block_cells.begin(), block_cells.end());
  }
  std::sort(cells.begin(), cells.end());

  std::vector<Rating> entries;
  entries.reserve(cells.size());
  for (const auto& [u, j] : cells) {
    const double clean =
        params.scale.midpoint() + dot(out.user_tastes.row(u), out.item_types.row(j));
    const double value = params.scale.clamp(clean + params.noise * gauss(rng));
    entries.push_back({UserId{u}, ItemId{j}, value});
  }

  std::vector<std::pair<UserId, UserId>> edges;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::uint32_t a = 0; a < params.users; ++a) {
    for (std::uint32_t b = a + 1; b < params.users; ++b) {
      const double prob = out.community[a] == out.community[b] ? params.edge_probability
                                                                : params.cross_edge_probability;
      if (coin(rng) < prob) {
        edges.emplace_back(UserId{a}, UserId{b});
        edges.emplace_back(UserId{b}, UserId{a});
      }
    }
  }

  out.srn = build_srn(RatingsTable(params.users, params.items, std::move(entries)),
                      SocialGraph(params.users, std::move(edges)));
  return out;
}

SocialRatingNetwork generate_synthetic(const SyntheticParams& params) {
  return generate_synthetic_with_truth(params).srn;
}

}  // namespace socmf
