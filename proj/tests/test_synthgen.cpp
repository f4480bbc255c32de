#include <gtest/gtest.h>

#include <sstream>

#include "recip/synthgen.hpp"

using namespace recip;

namespace {

struct Files {
  std::string profiles, messages, latents;
};

Files render(const GenConfig& cfg) {
  const auto d = generate(cfg);
  std::ostringstream p, m, l;
  write_profiles_csv(p, d.layout, d.profiles);
  write_messages_csv(m, d.events);
  write_latents_csv(l, d.latents);
  return {p.str(), m.str(), l.str()};
}

GenConfig small(std::uint64_t seed = 1) {
  GenConfig c;
  c.seed = seed;
  c.n_male = 200;
  c.n_female = 90;
  return c;
}

}  // namespace

TEST(Synth, SameSeedSameBytes) {
  const auto a = render(small(5)), b = render(small(5));
  EXPECT_EQ(a.profiles, b.profiles);
  EXPECT_EQ(a.messages, b.messages);
  EXPECT_EQ(a.latents, b.latents);
  EXPECT_NE(a.messages, render(small(6)).messages);
}

TEST(Synth, DefaultReplyRatesLandNearTargets) {
  GenConfig c;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    c.seed = seed;
    const auto d = generate(c);
    ASSERT_GT(d.contacts_from_male, 0u);
    ASSERT_GT(d.contacts_from_female, 0u);
    const double mf = double(d.replies_to_male) / double(d.contacts_from_male);
    const double fm = double(d.replies_to_female) / double(d.contacts_from_female);
    EXPECT_GE(mf, 0.065);
    EXPECT_LE(mf, 0.125);
    EXPECT_NEAR(fm, 0.179, 0.03);
  }
}

TEST(Synth, RatesAgreeWithIngestedGraph) {
  const auto d = generate(small(3));
  const InteractionGraph g(d.layout, d.profiles, d.events);
  std::size_t from_male = 0, replied_male = 0;
  for (const auto& c : g.contacts())
    if (g.population().gender(c.from) == Gender::Male) {
      ++from_male;
      replied_male += c.replied();
    }
  EXPECT_EQ(from_male, d.contacts_from_male);
  EXPECT_EQ(replied_male, d.replies_to_male);
  EXPECT_EQ(g.contacts().size(), d.contacts_from_male + d.contacts_from_female);
}

TEST(Synth, ZeroContactRateGivesNoMessages) {
  auto c = small();
  c.contact_rate = 0.0;
  const auto d = generate(c);
  EXPECT_TRUE(d.events.empty());
  EXPECT_EQ(d.profiles.size(), 290u);
}

TEST(Synth, InvalidConfigurations) {
  auto c = small();
  c.n_female = 0;
  EXPECT_THROW(generate(c), Error);
  c = small();
  c.reply_rate_male_to_female = 1.0;
  EXPECT_THROW(generate(c), Error);
  c = small();
  c.reply_rate_female_to_male = 0.0;
  EXPECT_THROW(generate(c), Error);
  c = small();
  c.contact_rate = 1.5;
  EXPECT_THROW(generate(c), Error);
}

TEST(Synth, StructuralInvariants) {
  const auto c = small(8);
  const auto d = generate(c);
  const InteractionGraph g(d.layout, d.profiles, d.events);  // throws on non-bipartite or unknown ids
  const Timestamp end = c.start + c.registration_span + c.membership;
  std::size_t male_count = 0;
  for (const auto& p : d.profiles) male_count += p.gender == Gender::Male;
  EXPECT_EQ(male_count, c.n_male);
  for (const auto& e : g.events()) {
    EXPECT_GE(e.sent_at, c.start);
    EXPECT_LE(e.sent_at, end);
    EXPECT_GE(e.sent_at, d.profiles[e.sender.value - 1].registered_at);
  }
  for (UserIndex u = 0; u < g.user_count(); ++u) EXPECT_LE(g.sent_to(u).size(), c.max_out_degree);
}

TEST(Synth, FilesRoundTripThroughIngestion) {
  const auto f = render(small(4));
  std::istringstream p(f.profiles), m(f.messages);
  const auto table = ingest_profiles(p);
  EXPECT_EQ(table.malformed_values, 0u);
  const auto layout = synthetic_layout();
  ASSERT_EQ(table.layout.size(), layout.size());
  for (std::size_t a = 0; a < layout.size(); ++a) {
    EXPECT_EQ(table.layout[a].name, layout[a].name);
    EXPECT_EQ(table.layout[a].kind, layout[a].kind);
  }
  const auto g = ingest_messages(m, table);
  const auto d = generate(small(4));
  EXPECT_EQ(g.events().size(), d.events.size());
  EXPECT_EQ(f.latents.substr(0, f.latents.find('\n')).find("trait") != std::string::npos, true);
}
