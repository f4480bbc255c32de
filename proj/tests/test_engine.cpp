#include <gtest/gtest.h>

#include <sstream>

#include "oracle.hpp"
#include "recip/engine.hpp"
#include "support.hpp"

using namespace recip;
using fixture::F1;
using fixture::F2;
using fixture::F3;
using fixture::M1;
using fixture::M2;
using fixture::M3;

namespace {

const AlgorithmConfig& preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw std::logic_error("no preset");
}

}  // namespace

TEST(Presets, QuadruplesAsDefined) {
  using N = NeighborKind;
  using S = SimilarityKind;
  auto check = [](std::string_view name, N n1, N n2, S s1, S s2) {
    const auto p = find_preset(name);
    ASSERT_TRUE(p);
    EXPECT_EQ(p->neighbor1, n1);
    EXPECT_EQ(p->neighbor2, n2);
    EXPECT_EQ(p->similarity1, s1);
    EXPECT_EQ(p->similarity2, s2);
  };
  check("CB1", N::Se, N::Se, S::ContentA, S::ContentA);
  check("CB2", N::Se, N::Se, S::ContentB, S::ContentB);
  check("CF1", N::Se, N::Se, S::Attractiveness, S::Attractiveness);
  check("CF2", N::Re, N::Re, S::Interest, S::Interest);
  check("CF3", N::Se, N::Re, S::Attractiveness, S::Interest);
  check("CF4", N::Re, N::Se, S::Interest, S::Attractiveness);
  EXPECT_FALSE(find_preset("CF5"));
}

TEST(CompatibleScore, MeanOverNeighborsOfCandidate) {
  // Re(x) = {F1,F2,F3}, Re(m1) = {F1,F2,F4,F5}, Re(m2) = {F1..F5}; Se(F5) = {m1, m2}.
  const UserId x{1}, m1{2}, m2{3};
  std::vector<UserProfile> ps{fixture::bare(x, Gender::Male), fixture::bare(m1, Gender::Male),
                              fixture::bare(m2, Gender::Male)};
  for (std::uint64_t f = 11; f <= 15; ++f) ps.push_back(fixture::bare(UserId{f}, Gender::Female));
  std::vector<MessageEvent> ev;
  Timestamp t = 0;
  for (std::uint64_t f : {11, 12, 13}) ev.push_back({UserId{f}, x, ++t});
  for (std::uint64_t f : {11, 12, 14, 15}) ev.push_back({UserId{f}, m1, ++t});
  for (std::uint64_t f : {11, 12, 13, 14, 15}) ev.push_back({UserId{f}, m2, ++t});
  const InteractionGraph g(AttributeLayout{}, ps, ev);
  const ScoringContext ctx(g);
  const auto& pop = g.population();
  const UserIndex ix = pop.index_of(x), y = pop.index_of(UserId{15});
  EXPECT_DOUBLE_EQ(attractiveness_similarity(g, ix, pop.index_of(m1)), 0.4);
  EXPECT_DOUBLE_EQ(attractiveness_similarity(g, ix, pop.index_of(m2)), 0.6);
  EXPECT_DOUBLE_EQ(compatible_score(ctx, ix, y, NeighborKind::Se, SimilarityKind::Attractiveness), 0.5);
}

TEST(CompatibleScore, EmptyNeighborhoodAndSingleNeighbor) {
  const auto g = fixture::sample();
  const ScoringContext ctx(g);
  const auto& pop = g.population();
  // F3's Se is empty.
  EXPECT_EQ(compatible_score(ctx, pop.index_of(M1), pop.index_of(F3), NeighborKind::Se, SimilarityKind::Interest), 0.0);
  // Re(F3) = {M2}; interest(M2, M2) = 1.
  EXPECT_EQ(compatible_score(ctx, pop.index_of(M2), pop.index_of(F3), NeighborKind::Re, SimilarityKind::Interest), 1.0);
}

TEST(HarmonicScore, Examples) {
  EXPECT_EQ(harmonic_score(0.5, 0.5), 0.5);
  EXPECT_EQ(harmonic_score(0.8, 0.0), 0.0);
  EXPECT_EQ(harmonic_score(0.0, 0.8), 0.0);
  EXPECT_NEAR(harmonic_score(0.2, 0.6), 0.3, 1e-15);
}

TEST(HarmonicScore, StaysWithinBoundsForNearlyEqualInputs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-9, 1.0);
  for (int i = 0; i < 200000; ++i) {
    const double a = u(rng);
    const double b = i % 2 ? a : std::nextafter(a, 2.0);
    const double h = harmonic_score(a, b), lo = std::min(a, b);
    ASSERT_GE(h, lo);
    ASSERT_LE(h, 2 * lo);
  }
}

TEST(Ranking, TiesByAscendingId) {
  std::vector<ScoredCandidate> cs{{UserId{9}, 9, 0.3, 0, 0}, {UserId{4}, 4, 0.1, 0, 0}, {UserId{2}, 2, 0.3, 0, 0}};
  std::sort(cs.begin(), cs.end(), ranks_before);
  EXPECT_EQ(cs[0].candidate, UserId{2});
  EXPECT_EQ(cs[1].candidate, UserId{9});
  EXPECT_EQ(cs[2].candidate, UserId{4});
}

TEST(Recommender, TieBreakInsideTopK) {
  // Swapping F1 and F2 maps the graph onto itself, so they tie for M2.
  const InteractionGraph g(AttributeLayout{}, fixture::sample_profiles(),
                           {{M1, F1, 1}, {M1, F2, 2}, {M3, F1, 3}, {M3, F2, 4}, {F1, M2, 5}, {F2, M2, 6}, {M2, F3, 7},
                            {M1, F3, 8}});
  const ScoringContext ctx(g);
  const Recommender rec(ctx, preset("CF1"));
  const auto list = rec.top_k(M2, 2, CandidatePolicy::exclude_contacted());
  ASSERT_EQ(list.ranked.size(), 2u);
  EXPECT_EQ(list.ranked[0].reciprocal_score, list.ranked[1].reciprocal_score);
  EXPECT_EQ(list.ranked[0].candidate, F1);
  EXPECT_EQ(list.ranked[1].candidate, F2);
}

TEST(Recommender, AllZeroScoresGiveEmptyList) {
  const InteractionGraph g(AttributeLayout{}, fixture::sample_profiles(), {{M1, F1, 1}});
  const ScoringContext ctx(g);
  for (const auto& p : {preset("CF1"), preset("CF2"), preset("CF3"), preset("CF4")})
    EXPECT_TRUE(Recommender(ctx, p).top_k(M2, 5, CandidatePolicy::include_all()).ranked.empty());
}

TEST(Recommender, SampleListsMatchOracle) {
  const auto g = fixture::sample();
  const ScoringContext ctx(g);
  const auto w = oracle::build(g);
  for (const auto& p : {preset("CF1"), preset("CF2"), preset("CF3"), preset("CF4")})
    for (UserId x : {M1, M2, M3, F1, F2, F3})
      for (bool exclude : {true, false}) {
        const auto list = Recommender(ctx, p).top_k(
            x, 3, exclude ? CandidatePolicy::exclude_contacted() : CandidatePolicy::include_all());
        const auto expect = oracle::top_k(w, p, x.value, 3, exclude);
        ASSERT_EQ(list.ranked.size(), expect.size()) << p.name << " user " << x;
        for (std::size_t i = 0; i < expect.size(); ++i) {
          EXPECT_EQ(list.ranked[i].candidate.value, expect[i].first);
          EXPECT_NEAR(list.ranked[i].reciprocal_score, expect[i].second, 1e-12);
        }
      }
}

TEST(Recommender, Errors) {
  const auto g = fixture::sample();
  const ScoringContext ctx(g);
  const Recommender rec(ctx, preset("CF1"));
  EXPECT_THROW(rec.top_k(UserId{42}, 3, CandidatePolicy::exclude_contacted()), Error);
  EXPECT_THROW(rec.top_k(M1, 0, CandidatePolicy::exclude_contacted()), Error);
  // The fixture has no profile attributes at all.
  EXPECT_THROW(Recommender(ctx, preset("CB2")), Error);
}

TEST(Recommender, ListInvariants) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = fixture::random_graph(seed, {.users = 120, .messages = 600});
    const ScoringContext ctx(g);
    for (const auto& p : presets()) {
      const Recommender rec(ctx, p);
      auto ws = rec.make_workspace();
      for (UserIndex x = 0; x < g.user_count(); x += 7) {
        const auto list = rec.top_k(x, 20, CandidatePolicy::exclude_contacted(), ws);
        std::set<UserIndex> seen;
        const auto skip = already_messaged(g, x);
        for (std::size_t i = 0; i < list.ranked.size(); ++i) {
          const auto& c = list.ranked[i];
          EXPECT_GT(c.reciprocal_score, 0.0);
          EXPECT_NE(g.population().gender(c.index), g.population().gender(x));
          EXPECT_TRUE(seen.insert(c.index).second);
          EXPECT_FALSE(std::binary_search(skip.begin(), skip.end(), c.index));
          if (i > 0) {
            EXPECT_TRUE(ranks_before(list.ranked[i - 1], c));
          }
        }
      }
    }
  }
}

TEST(Recommender, PoolOnlyPolicyRestrictsCandidates) {
  const auto g = fixture::random_graph(4, {.users = 60, .messages = 300});
  const ScoringContext ctx(g);
  std::vector<bool> pool(g.user_count(), false);
  for (UserIndex u = 0; u < g.user_count(); u += 2) pool[u] = true;
  const Recommender rec(ctx, preset("CF4"));
  auto ws = rec.make_workspace();
  for (UserIndex x = 0; x < g.user_count(); ++x)
    for (const auto& c : rec.top_k(x, 50, CandidatePolicy::pool_only(pool), ws).ranked) EXPECT_TRUE(pool[c.index]);
}

TEST(ScoreMatrix, SinglePairMatchesPairwiseScore) {
  const auto g = fixture::sample();
  const ScoringContext ctx(g);
  const std::vector<UserId> xs{M1};
  const auto m = score_matrix(ctx, preset("CF3"), xs);
  EXPECT_EQ(m.size(), 3u);
  const auto& pop = g.population();
  EXPECT_EQ(m.at({M1, F3}), reciprocal_score(ctx, preset("CF3"), pop.index_of(M1), pop.index_of(F3)).reciprocal_score);
  EXPECT_THROW(score_matrix(ctx, preset("CF3"), std::span<const UserId>{}), Error);
}

TEST(ScoreMatrix, ParallelEqualsSequentialAndOracle) {
  const auto g = fixture::random_graph(20, {.users = 20, .messages = 80});
  const ScoringContext ctx(g);
  const auto w = oracle::build(g);
  std::vector<UserId> xs;
  for (const auto& p : g.population().profiles()) xs.push_back(p.id);
  for (const auto& p : presets()) {
    const auto seq = score_matrix(ctx, p, xs, 1);
    const auto par = score_matrix(ctx, p, xs, 4);
    EXPECT_EQ(seq, par);
    for (const auto& [key, value] : seq) EXPECT_NEAR(value, oracle::score(w, p, key.first.value, key.second.value).score, 1e-12);
  }
}

TEST(Properties, SymmetryMirrorAndBounds) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto g = fixture::random_graph(seed, {.users = 40, .messages = 160});
    const ScoringContext ctx(g);
    const auto& pop = g.population();
    for (UserIndex x = 0; x < g.user_count(); ++x)
      for (UserIndex y = 0; y < g.user_count(); ++y) {
        if (pop.gender(x) == pop.gender(y)) continue;
        for (const auto& p : presets()) {
          const auto s = reciprocal_score(ctx, p, x, y);
          if (s.s_xy == 0 || s.s_yx == 0) {
            EXPECT_EQ(s.reciprocal_score, 0.0);
          } else {
            const double lo = std::min(s.s_xy, s.s_yx);
            EXPECT_GE(s.reciprocal_score, lo);
            EXPECT_LE(s.reciprocal_score, 2 * lo);
          }
          if (p.neighbor1 == p.neighbor2 && p.similarity1 == p.similarity2) {
            EXPECT_EQ(s.reciprocal_score, reciprocal_score(ctx, p, y, x).reciprocal_score) << p.name;
          }
        }
        EXPECT_EQ(reciprocal_score(ctx, preset("CF3"), x, y).reciprocal_score,
                  reciprocal_score(ctx, preset("CF4"), y, x).reciprocal_score);
      }
  }
}

TEST(Properties, UntouchedPairsKeepTheirScores) {
  // A message between two users outside every relevant neighbor set leaves
  // the score of an unrelated pair alone.
  const auto g = fixture::sample();
  std::vector<UserProfile> ps = fixture::sample_profiles();
  ps.push_back(fixture::bare(UserId{7}, Gender::Male));
  ps.push_back(fixture::bare(UserId{8}, Gender::Female));
  auto ev = fixture::sample_events();
  const InteractionGraph before(AttributeLayout{}, ps, ev);
  ev.push_back({UserId{7}, UserId{8}, 100});
  const InteractionGraph after(AttributeLayout{}, ps, ev);
  const ScoringContext cb(before), ca(after);
  for (const auto& p : {preset("CF1"), preset("CF2"), preset("CF3"), preset("CF4")})
    for (UserId x : {M1, M2, M3})
      for (UserId y : {F1, F2, F3})
        EXPECT_EQ(reciprocal_score(cb, p, before.population().index_of(x), before.population().index_of(y)).reciprocal_score,
                  reciprocal_score(ca, p, after.population().index_of(x), after.population().index_of(y)).reciprocal_score);
}

TEST(Properties, BatchEqualsPairwiseExactly) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = fixture::random_graph(seed, {.users = 60, .messages = 300});
    const ScoringContext ctx(g);
    for (const auto& p : presets()) {
      const Recommender rec(ctx, p);
      auto ws = rec.make_workspace();
      for (UserIndex x = 0; x < g.user_count(); ++x)
        for (const auto& c : rec.score_all(x, CandidatePolicy::include_all(), ws)) {
          const auto pair = reciprocal_score(ctx, p, x, c.index);
          EXPECT_EQ(c.s_xy, pair.s_xy);
          EXPECT_EQ(c.s_yx, pair.s_yx);
          EXPECT_EQ(c.reciprocal_score, pair.reciprocal_score);
        }
    }
  }
}

TEST(Export, RecommendationCsv) {
  const auto g = fixture::sample();
  const ScoringContext ctx(g);
  std::vector<RecommendationList> lists{Recommender(ctx, preset("CF1")).top_k(M1, 2, CandidatePolicy::include_all())};
  std::ostringstream out;
  write_recommendations_csv(out, lists);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "service_user,rank,candidate,score,s_xy,s_yx");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, lists[0].ranked.size());
}
