#pragma once

// Pairwise user similarities (profile content and message-graph Jaccard),
// same-gender projection networks and CCDF tables.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "recip/core_model.hpp"

namespace recip {

// Nominal bucketing of a numeric attribute: bucket = floor((v - origin) / width).
struct BinSpec {
  double origin = 0.0;
  double width = 1.0;

  std::int64_t bucket(double v) const { return static_cast<std::int64_t>(std::floor((v - origin) / width)); }
  friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

class BinConfig {
 public:
  BinConfig() = default;
  explicit BinConfig(std::map<std::string, BinSpec, std::less<>> specs, BinSpec fallback = {})
      : specs_(std::move(specs)), fallback_(fallback) {
    for (const auto& [name, spec] : specs_)
      if (!(spec.width > 0)) throw Error("bin width for '" + name + "' must be positive");
  }

  // Age groups 20-24, 25-29, ...; 5-unit buckets for height, weight and photo count.
  static BinConfig defaults() {
    return BinConfig({{"age", {20.0, 5.0}}, {"height", {0.0, 5.0}}, {"weight", {0.0, 5.0}}, {"photos", {0.0, 5.0}}});
  }

  const BinSpec& spec(std::string_view attribute) const {
    auto it = specs_.find(attribute);
    return it == specs_.end() ? fallback_ : it->second;
  }

  void set(std::string name, BinSpec spec) {
    if (!(spec.width > 0)) throw Error("bin width for '" + name + "' must be positive");
    specs_[std::move(name)] = spec;
  }

 private:
  std::map<std::string, BinSpec, std::less<>> specs_;
  BinSpec fallback_;
};

// Layout plus, per numeric attribute, the largest absolute difference between
// any two known values (the Q normalizer). Nominal or never-known attributes
// have no spread.
struct AttributeSchema {
  AttributeLayout layout;
  std::vector<std::optional<double>> spread;
};

inline AttributeSchema build_schema(const Population& pop) {
  AttributeSchema schema{pop.layout(), std::vector<std::optional<double>>(pop.layout().size())};
  for (std::size_t a = 0; a < schema.layout.size(); ++a) {
    if (schema.layout[a].kind != AttributeKind::Numeric) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const UserProfile& p : pop.profiles()) {
      if (const auto* v = std::get_if<double>(&p.attributes[a])) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    }
    if (lo <= hi) schema.spread[a] = hi - lo;
  }
  return schema;
}

namespace detail {

inline bool same_nominal(const AttributeValue& x, const AttributeValue& y) {
  return std::get<std::string>(x) == std::get<std::string>(y);
}

template <class PerAttribute>
double mean_over_shared(const UserProfile& x, const UserProfile& y, const AttributeLayout& layout,
                        PerAttribute&& score) {
  double sum = 0.0;
  std::size_t shared = 0;
  for (std::size_t a = 0; a < layout.size(); ++a) {
    if (!is_known(x.attributes[a]) || !is_known(y.attributes[a])) continue;
    ++shared;
    sum += score(a);
  }
  return shared == 0 ? 0.0 : sum / static_cast<double>(shared);
}

}  // namespace detail

// Fraction of shared known attributes whose (bucketed, for numerics) values agree.
inline double content_similarity_a(const UserProfile& x, const UserProfile& y, const AttributeSchema& schema,
                                   const BinConfig& bins) {
  return detail::mean_over_shared(x, y, schema.layout, [&](std::size_t a) {
    const AttributeDef& def = schema.layout[a];
    if (def.kind == AttributeKind::Nominal) return detail::same_nominal(x.attributes[a], y.attributes[a]) ? 1.0 : 0.0;
    const BinSpec& spec = bins.spec(def.name);
    return spec.bucket(std::get<double>(x.attributes[a])) == spec.bucket(std::get<double>(y.attributes[a])) ? 1.0
                                                                                                             : 0.0;
  });
}

// Like content_similarity_a, but numeric attributes score
// (spread - |vx - vy|) / spread instead of a bucket match.
inline double content_similarity_b(const UserProfile& x, const UserProfile& y, const AttributeSchema& schema) {
  return detail::mean_over_shared(x, y, schema.layout, [&](std::size_t a) {
    if (schema.layout[a].kind == AttributeKind::Nominal)
      return detail::same_nominal(x.attributes[a], y.attributes[a]) ? 1.0 : 0.0;
    const double spread = schema.spread[a].value_or(0.0);
    if (spread == 0.0) return 1.0;
    const double diff = std::abs(std::get<double>(x.attributes[a]) - std::get<double>(y.attributes[a]));
    return (spread - diff) / spread;
  });
}

// |A ∩ B| for ascending sequences.
inline std::size_t intersection_size(std::span<const UserIndex> a, std::span<const UserIndex> b) {
  std::size_t n = 0;
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n, ++i, ++j;
    }
  }
  return n;
}

// Jaccard index from the shared count and the two set sizes; 0 on an empty union.
inline double jaccard(std::size_t shared, std::size_t size_a, std::size_t size_b) {
  const std::size_t uni = size_a + size_b - shared;
  return uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
}

namespace detail {
inline void require_same_gender(const InteractionGraph& g, UserIndex x, UserIndex y, const char* what) {
  if (g.population().gender(x) != g.population().gender(y))
    throw Error(std::string(what) + " is only defined for users of the same gender");
}
}  // namespace detail

// Overlap of the users x and y initially contacted.
inline double interest_similarity(const InteractionGraph& g, UserIndex x, UserIndex y) {
  detail::require_same_gender(g, x, y, "interest similarity");
  auto sx = g.sent_to(x), sy = g.sent_to(y);
  return jaccard(intersection_size(sx, sy), sx.size(), sy.size());
}

// Overlap of the users who initially contacted x and y.
inline double attractiveness_similarity(const InteractionGraph& g, UserIndex x, UserIndex y) {
  detail::require_same_gender(g, x, y, "attractiveness similarity");
  auto rx = g.received_from(x), ry = g.received_from(y);
  return jaccard(intersection_size(rx, ry), rx.size(), ry.size());
}

enum class Direction : std::uint8_t { Sending, Receiving };

inline std::string_view direction_name(Direction d) { return d == Direction::Sending ? "sending" : "receiving"; }

// Neighbor set whose overlap a projection counts: Se for Sending, Re for Receiving.
inline std::span<const UserIndex> projection_neighbors(const InteractionGraph& g, Direction d, UserIndex u) {
  return d == Direction::Sending ? g.sent_to(u) : g.received_from(u);
}

// Inverse relation of projection_neighbors.
inline std::span<const UserIndex> projection_inverse(const InteractionGraph& g, Direction d, UserIndex w) {
  return d == Direction::Sending ? g.received_from(w) : g.sent_to(w);
}

// One row of a projection network: for a user u, every same-gender v that
// shares at least one neighbor, with the shared count. Reusable scratch space;
// one instance per thread.
class SharedNeighborCounter {
 public:
  explicit SharedNeighborCounter(std::size_t users) : counts_(users, 0) {}

  struct Entry {
    UserIndex user;
    std::uint32_t shared;
  };

  // Ascending by user; includes u itself when its neighbor set is non-empty.
  const std::vector<Entry>& row(const InteractionGraph& g, Direction d, UserIndex u) {
    for (UserIndex v : touched_) counts_[v] = 0;
    touched_.clear();
    for (UserIndex w : projection_neighbors(g, d, u))
      for (UserIndex v : projection_inverse(g, d, w))
        if (counts_[v]++ == 0) touched_.push_back(v);
    std::sort(touched_.begin(), touched_.end());
    entries_.clear();
    entries_.reserve(touched_.size());
    for (UserIndex v : touched_) entries_.push_back({v, counts_[v]});
    return entries_;
  }

 private:
  std::vector<std::uint32_t> counts_;
  std::vector<UserIndex> touched_;
  std::vector<Entry> entries_;
};

struct ProjectionEdge {
  UserIndex u;  // u < v
  UserIndex v;
  std::uint32_t weight;
  friend bool operator==(const ProjectionEdge&, const ProjectionEdge&) = default;
};

struct ProjectionNetwork {
  Gender gender = Gender::Male;
  Direction direction = Direction::Sending;
  // Sorted by (u, v); only positive weights.
  std::vector<ProjectionEdge> edges;

  std::optional<std::uint32_t> weight(UserIndex a, UserIndex b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{a, b}, [](const ProjectionEdge& e, auto key) {
      return std::pair{e.u, e.v} < key;
    });
    if (it == edges.end() || it->u != a || it->v != b) return std::nullopt;
    return it->weight;
  }

  // Number of incident edges per node that has at least one.
  std::map<UserIndex, std::size_t> degrees() const {
    std::map<UserIndex, std::size_t> deg;
    for (const auto& e : edges) {
      ++deg[e.u];
      ++deg[e.v];
    }
    return deg;
  }
};

inline ProjectionNetwork build_projection(const InteractionGraph& g, Gender gender, Direction direction) {
  ProjectionNetwork net{gender, direction, {}};
  SharedNeighborCounter counter(g.user_count());
  for (UserIndex u = 0; u < g.user_count(); ++u) {
    if (g.population().gender(u) != gender) continue;
    for (const auto& entry : counter.row(g, direction, u))
      if (entry.user > u) net.edges.push_back({u, entry.user, entry.shared});
  }
  return net;
}

struct CcdfRow {
  double value;
  double fraction;  // share of observations >= value
  friend bool operator==(const CcdfRow&, const CcdfRow&) = default;
};

using CcdfTable = std::vector<CcdfRow>;

inline CcdfTable ccdf(std::vector<double> values) {
  CcdfTable table;
  if (values.empty()) return table;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    table.push_back({values[i], static_cast<double>(values.size() - i) / n});
    i = j;
  }
  return table;
}

inline void write_projection_csv(std::ostream& out, const InteractionGraph& g, const ProjectionNetwork& net) {
  out << "u,v,weight\n";
  for (const auto& e : net.edges)
    out << g.population()[e.u].id.value << ',' << g.population()[e.v].id.value << ',' << e.weight << '\n';
}

inline void write_ccdf_csv(std::ostream& out, const CcdfTable& table) {
  out << "value,ccdf\n";
  for (const auto& row : table) out << text::format_double(row.value) << ',' << text::format_double(row.fraction) << '\n';
}

}  // namespace recip
