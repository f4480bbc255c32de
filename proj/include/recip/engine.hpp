#pragma once

// Reciprocal scoring: two directed compatible scores combined by their
// harmonic mean, parameterized by neighbor direction and similarity function
// on each side, plus top-K list generation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "recip/core_model.hpp"
#include "recip/parallel.hpp"
#include "recip/similarity.hpp"

namespace recip {

enum class NeighborKind : std::uint8_t { Se, Re };
enum class SimilarityKind : std::uint8_t { ContentA, ContentB, Interest, Attractiveness };

inline std::string_view neighbor_name(NeighborKind k) { return k == NeighborKind::Se ? "Se" : "Re"; }

inline std::optional<NeighborKind> parse_neighbor(std::string_view s) {
  if (s == "Se" || s == "se" || s == "out") return NeighborKind::Se;
  if (s == "Re" || s == "re" || s == "in") return NeighborKind::Re;
  return std::nullopt;
}

inline std::string_view similarity_name(SimilarityKind k) {
  switch (k) {
    case SimilarityKind::ContentA: return "content-a";
    case SimilarityKind::ContentB: return "content-b";
    case SimilarityKind::Interest: return "interest";
    case SimilarityKind::Attractiveness: return "attractiveness";
  }
  return "?";
}

inline std::optional<SimilarityKind> parse_similarity(std::string_view s) {
  for (auto k : {SimilarityKind::ContentA, SimilarityKind::ContentB, SimilarityKind::Interest,
                 SimilarityKind::Attractiveness})
    if (s == similarity_name(k)) return k;
  return std::nullopt;
}

inline bool is_content(SimilarityKind k) { return k == SimilarityKind::ContentA || k == SimilarityKind::ContentB; }

struct AlgorithmConfig {
  std::string name;
  NeighborKind neighbor1 = NeighborKind::Se;
  NeighborKind neighbor2 = NeighborKind::Se;
  SimilarityKind similarity1 = SimilarityKind::Attractiveness;
  SimilarityKind similarity2 = SimilarityKind::Attractiveness;

  bool uses_content() const { return is_content(similarity1) || is_content(similarity2); }
  friend bool operator==(const AlgorithmConfig&, const AlgorithmConfig&) = default;
};

inline const std::array<AlgorithmConfig, 6>& presets() {
  using N = NeighborKind;
  using S = SimilarityKind;
  static const std::array<AlgorithmConfig, 6> all{{
      {"CB1", N::Se, N::Se, S::ContentA, S::ContentA},
      {"CB2", N::Se, N::Se, S::ContentB, S::ContentB},
      {"CF1", N::Se, N::Se, S::Attractiveness, S::Attractiveness},
      {"CF2", N::Re, N::Re, S::Interest, S::Interest},
      {"CF3", N::Se, N::Re, S::Attractiveness, S::Interest},
      {"CF4", N::Re, N::Se, S::Interest, S::Attractiveness},
  }};
  return all;
}

inline std::optional<AlgorithmConfig> find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  return std::nullopt;
}

// Everything a similarity function may read. Holds a reference to the graph.
class ScoringContext {
 public:
  ScoringContext(const InteractionGraph& graph, BinConfig bins = BinConfig::defaults())
      : graph_(graph), schema_(build_schema(graph.population())), bins_(std::move(bins)) {
    encode_profiles();
  }

  const InteractionGraph& graph() const noexcept { return graph_; }
  const AttributeSchema& schema() const noexcept { return schema_; }
  const BinConfig& bins() const noexcept { return bins_; }

  std::span<const UserIndex> neighbors(NeighborKind k, UserIndex u) const {
    return k == NeighborKind::Se ? graph_.sent_to(u) : graph_.received_from(u);
  }

  double similarity(SimilarityKind k, UserIndex a, UserIndex b) const {
    switch (k) {
      case SimilarityKind::ContentA: return encoded_content(a, b, false);
      case SimilarityKind::ContentB: return encoded_content(a, b, true);
      case SimilarityKind::Interest: return interest_similarity(graph_, a, b);
      case SimilarityKind::Attractiveness: return attractiveness_similarity(graph_, a, b);
    }
    return 0.0;
  }

  // True when at least one user has a known attribute.
  bool has_profile_content() const {
    return std::find(known_.begin(), known_.end(), true) != known_.end();
  }

 private:
  // Flat per-user copies of the attributes: a bucket or token code for exact
  // matching plus the raw numeric value. Same arithmetic as
  // content_similarity_a / content_similarity_b, without variant access.
  void encode_profiles() {
    const Population& pop = graph_.population();
    const std::size_t n_attr = schema_.layout.size();
    codes_.assign(pop.size() * n_attr, 0);
    values_.assign(pop.size() * n_attr, 0.0);
    known_.assign(pop.size() * n_attr, false);
    std::vector<std::map<std::string, std::int64_t, std::less<>>> tokens(n_attr);
    for (std::size_t a = 0; a < n_attr; ++a) {
      const AttributeDef& def = schema_.layout[a];
      const BinSpec& spec = bins_.spec(def.name);
      for (UserIndex u = 0; u < pop.size(); ++u) {
        const AttributeValue& v = pop[u].attributes[a];
        const std::size_t slot = u * n_attr + a;
        if (!is_known(v)) continue;
        known_[slot] = true;
        if (def.kind == AttributeKind::Nominal) {
          const auto& token = std::get<std::string>(v);
          codes_[slot] = tokens[a].try_emplace(token, static_cast<std::int64_t>(tokens[a].size())).first->second;
        } else {
          values_[slot] = std::get<double>(v);
          codes_[slot] = spec.bucket(values_[slot]);
        }
      }
    }
  }

  double encoded_content(UserIndex x, UserIndex y, bool graded) const {
    const std::size_t n_attr = schema_.layout.size();
    const std::size_t bx = x * n_attr, by = y * n_attr;
    double sum = 0.0;
    std::size_t shared = 0;
    for (std::size_t a = 0; a < n_attr; ++a) {
      if (!known_[bx + a] || !known_[by + a]) continue;
      ++shared;
      if (graded && schema_.layout[a].kind == AttributeKind::Numeric) {
        const double spread = schema_.spread[a].value_or(0.0);
        if (spread == 0.0) {
          sum += 1.0;
        } else {
          const double diff = std::abs(values_[bx + a] - values_[by + a]);
          sum += (spread - diff) / spread;
        }
      } else {
        sum += codes_[bx + a] == codes_[by + a] ? 1.0 : 0.0;
      }
    }
    return shared == 0 ? 0.0 : sum / static_cast<double>(shared);
  }

  const InteractionGraph& graph_;
  AttributeSchema schema_;
  BinConfig bins_;
  std::vector<std::int64_t> codes_;
  std::vector<double> values_;
  std::vector<bool> known_;
};

// s(x, y): mean similarity between x and the selected neighbors of y; 0 when y
// has none.
inline double compatible_score(const ScoringContext& ctx, UserIndex x, UserIndex y, NeighborKind neighbor,
                               SimilarityKind sim) {
  const auto hood = ctx.neighbors(neighbor, y);
  if (hood.empty()) return 0.0;
  double sum = 0.0;
  for (UserIndex u : hood) sum += ctx.similarity(sim, x, u);
  return sum / static_cast<double>(hood.size());
}

// Harmonic mean of the two directed scores, or 0 if either is 0.
inline double harmonic_score(double s_xy, double s_yx) {
  if (!(s_xy > 0.0 && s_yx > 0.0)) return 0.0;
  // The reciprocals can round the result an ulp below min(s_xy, s_yx).
  const double lo = std::min(s_xy, s_yx);
  return std::clamp(2.0 / (1.0 / s_xy + 1.0 / s_yx), lo, 2.0 * lo);
}

struct ScoredCandidate {
  UserId candidate;
  UserIndex index = 0;
  double reciprocal_score = 0.0;
  double s_xy = 0.0;
  double s_yx = 0.0;
};

inline ScoredCandidate reciprocal_score(const ScoringContext& ctx, const AlgorithmConfig& cfg, UserIndex x,
                                        UserIndex y) {
  ScoredCandidate c;
  c.candidate = ctx.graph().population()[y].id;
  c.index = y;
  c.s_xy = compatible_score(ctx, x, y, cfg.neighbor1, cfg.similarity1);
  c.s_yx = compatible_score(ctx, y, x, cfg.neighbor2, cfg.similarity2);
  c.reciprocal_score = harmonic_score(c.s_xy, c.s_yx);
  return c;
}

// Which opposite-gender users may be recommended to a service user.
struct CandidatePolicy {
  enum class Kind : std::uint8_t {
    ExcludeContacted,  // drop users x already messaged (contacted or replied to)
    IncludeAll,
    PoolOnly,  // only users flagged in `pool`, minus those x already messaged
  };
  Kind kind = Kind::ExcludeContacted;
  std::vector<bool> pool;

  static CandidatePolicy exclude_contacted() { return {}; }
  static CandidatePolicy include_all() { return {Kind::IncludeAll, {}}; }
  static CandidatePolicy pool_only(std::vector<bool> pool) { return {Kind::PoolOnly, std::move(pool)}; }
};

inline std::string_view policy_name(CandidatePolicy::Kind k) {
  switch (k) {
    case CandidatePolicy::Kind::ExcludeContacted: return "exclude-contacted";
    case CandidatePolicy::Kind::IncludeAll: return "include-all";
    case CandidatePolicy::Kind::PoolOnly: return "test-pool";
  }
  return "?";
}

// Users already messaged by x in g: Se(x) plus users whose contact x answered.
inline std::vector<UserIndex> already_messaged(const InteractionGraph& g, UserIndex x) {
  std::vector<UserIndex> out;
  const auto sent = g.sent_to(x);
  const auto answered = g.answered(x);
  out.reserve(sent.size() + answered.size());
  std::set_union(sent.begin(), sent.end(), answered.begin(), answered.end(), std::back_inserter(out));
  return out;
}

struct RecommendationList {
  UserId service_user;
  std::string config;
  // Descending score, ties by ascending id; only positive scores.
  std::vector<ScoredCandidate> ranked;
};

// Orders by descending score, then ascending user.
inline bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.reciprocal_score != b.reciprocal_score) return a.reciprocal_score > b.reciprocal_score;
  return a.index < b.index;
}

// Batch scorer. Instead of scoring pair by pair, it scatters
// each similarity term into every candidate it contributes to, which turns
// the per-service-user cost into a walk over a few projection rows. Terms are
// accumulated in ascending neighbor order so sums match the per-pair path.
class Recommender {
 public:
  Recommender(const ScoringContext& ctx, AlgorithmConfig cfg) : ctx_(ctx), cfg_(std::move(cfg)) {
    if (cfg_.uses_content() && !ctx_.has_profile_content())
      throw Error("algorithm " + cfg_.name + " needs profile attributes, but no user has any");
  }

  const AlgorithmConfig& config() const noexcept { return cfg_; }
  const ScoringContext& context() const noexcept { return ctx_; }

  // Per-thread scratch space.
  class Workspace {
   public:
    explicit Workspace(std::size_t users) : counter(users), s_xy(users), s_yx(users), eligible(users) {}

   private:
    friend class Recommender;
    SharedNeighborCounter counter;
    std::vector<double> s_xy, s_yx;
    std::vector<char> eligible;
  };

  Workspace make_workspace() const { return Workspace(ctx_.graph().user_count()); }

  // Scores every eligible candidate of x (zeros included), ascending by user.
  std::vector<ScoredCandidate> score_all(UserIndex x, const CandidatePolicy& policy, Workspace& ws) const {
    const InteractionGraph& g = ctx_.graph();
    mark_eligible(x, policy, ws);
    fill_forward(x, ws);
    fill_backward(x, ws);
    std::vector<ScoredCandidate> out;
    const Population& pop = g.population();
    for (UserIndex y = 0; y < g.user_count(); ++y) {
      if (!ws.eligible[y]) continue;
      out.push_back({pop[y].id, y, harmonic_score(ws.s_xy[y], ws.s_yx[y]), ws.s_xy[y], ws.s_yx[y]});
    }
    return out;
  }

  RecommendationList top_k(UserIndex x, std::size_t k, const CandidatePolicy& policy, Workspace& ws) const {
    if (k == 0) throw Error("K must be at least 1");
    RecommendationList list{ctx_.graph().population()[x].id, cfg_.name, {}};
    auto all = score_all(x, policy, ws);
    std::erase_if(all, [](const ScoredCandidate& c) { return !(c.reciprocal_score > 0.0); });
    const std::size_t keep = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), ranks_before);
    all.resize(keep);
    list.ranked = std::move(all);
    return list;
  }

  RecommendationList top_k(UserId x, std::size_t k, const CandidatePolicy& policy) const {
    auto idx = ctx_.graph().population().find(x);
    if (!idx) throw Error("unknown service user " + std::to_string(x.value));
    auto ws = make_workspace();
    return top_k(*idx, k, policy, ws);
  }

 private:
  void mark_eligible(UserIndex x, const CandidatePolicy& policy, Workspace& ws) const {
    const InteractionGraph& g = ctx_.graph();
    const Gender want = opposite(g.population().gender(x));
    for (UserIndex y = 0; y < g.user_count(); ++y) {
      bool ok = g.population().gender(y) == want;
      if (ok && policy.kind == CandidatePolicy::Kind::PoolOnly) ok = y < policy.pool.size() && policy.pool[y];
      ws.eligible[y] = ok;
    }
    if (policy.kind != CandidatePolicy::Kind::IncludeAll)
      for (UserIndex y : already_messaged(g, x)) ws.eligible[y] = 0;
  }

  // Users y with u ∈ N(y), i.e. the inverse of the neighbor relation.
  std::span<const UserIndex> inverse(NeighborKind k, UserIndex u) const {
    return k == NeighborKind::Se ? ctx_.graph().received_from(u) : ctx_.graph().sent_to(u);
  }

  static Direction jaccard_direction(SimilarityKind k) {
    return k == SimilarityKind::Interest ? Direction::Sending : Direction::Receiving;
  }

  // s(x, y) for every y: Σ_{u ∈ N1(y)} sim1(x, u) / |N1(y)|.
  void fill_forward(UserIndex x, Workspace& ws) const {
    const InteractionGraph& g = ctx_.graph();
    std::fill(ws.s_xy.begin(), ws.s_xy.end(), 0.0);
    auto scatter = [&](UserIndex u, double sim) {
      if (sim > 0.0)
        for (UserIndex y : inverse(cfg_.neighbor1, u)) ws.s_xy[y] += sim;
    };
    if (is_content(cfg_.similarity1)) {
      const Gender gx = g.population().gender(x);
      for (UserIndex u = 0; u < g.user_count(); ++u)
        if (g.population().gender(u) == gx && !inverse(cfg_.neighbor1, u).empty())
          scatter(u, ctx_.similarity(cfg_.similarity1, x, u));
    } else {
      const Direction d = jaccard_direction(cfg_.similarity1);
      const std::size_t nx = projection_neighbors(g, d, x).size();
      for (const auto& e : ws.counter.row(g, d, x))
        scatter(e.user, jaccard(e.shared, nx, projection_neighbors(g, d, e.user).size()));
    }
    for (UserIndex y = 0; y < g.user_count(); ++y) {
      const std::size_t n = ctx_.neighbors(cfg_.neighbor1, y).size();
      if (n > 0 && ws.s_xy[y] != 0.0) ws.s_xy[y] /= static_cast<double>(n);
    }
  }

  // s(y, x) for every y: Σ_{v ∈ N2(x)} sim2(y, v) / |N2(x)|.
  void fill_backward(UserIndex x, Workspace& ws) const {
    const InteractionGraph& g = ctx_.graph();
    std::fill(ws.s_yx.begin(), ws.s_yx.end(), 0.0);
    const auto hood = ctx_.neighbors(cfg_.neighbor2, x);
    if (hood.empty()) return;
    if (is_content(cfg_.similarity2)) {
      for (UserIndex v : hood)
        for (UserIndex y = 0; y < g.user_count(); ++y)
          if (ws.eligible[y])
            if (double sim = ctx_.similarity(cfg_.similarity2, y, v); sim > 0.0) ws.s_yx[y] += sim;
    } else {
      const Direction d = jaccard_direction(cfg_.similarity2);
      for (UserIndex v : hood) {
        const std::size_t nv = projection_neighbors(g, d, v).size();
        for (const auto& e : ws.counter.row(g, d, v)) {
          const double sim = jaccard(e.shared, projection_neighbors(g, d, e.user).size(), nv);
          if (sim > 0.0) ws.s_yx[e.user] += sim;
        }
      }
    }
    const double n = static_cast<double>(hood.size());
    for (double& s : ws.s_yx)
      if (s != 0.0) s /= n;
  }

  const ScoringContext& ctx_;
  AlgorithmConfig cfg_;
};

// Reciprocal score of every (service user, opposite-gender user) pair.
inline std::map<std::pair<UserId, UserId>, double> score_matrix(const ScoringContext& ctx,
                                                                const AlgorithmConfig& cfg,
                                                                std::span<const UserId> service_users,
                                                                unsigned threads = 1) {
  if (service_users.empty()) throw Error("score_matrix needs at least one service user");
  Recommender rec(ctx, cfg);
  std::vector<UserIndex> xs;
  for (UserId id : service_users) xs.push_back(ctx.graph().population().index_of(id));
  std::vector<std::vector<ScoredCandidate>> rows(xs.size());
  std::vector<Recommender::Workspace> spaces;
  for (unsigned t = 0; t < std::max(1u, threads); ++t) spaces.push_back(rec.make_workspace());
  parallel_for(xs.size(), threads, [&](std::size_t i, unsigned w) {
    rows[i] = rec.score_all(xs[i], CandidatePolicy::include_all(), spaces[w]);
  });
  std::map<std::pair<UserId, UserId>, double> out;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (const auto& c : rows[i]) out[{service_users[i], c.candidate}] = c.reciprocal_score;
  return out;
}

inline void write_recommendations_csv(std::ostream& out, std::span<const RecommendationList> lists) {
  out << "service_user,rank,candidate,score,s_xy,s_yx\n";
  for (const auto& list : lists)
    for (std::size_t r = 0; r < list.ranked.size(); ++r) {
      const auto& c = list.ranked[r];
      out << list.service_user.value << ',' << r + 1 << ',' << c.candidate.value << ','
          << text::format_double(c.reciprocal_score) << ',' << text::format_double(c.s_xy) << ','
          << text::format_double(c.s_yx) << '\n';
    }
}

}  // namespace recip
