#pragma once
// Shared fixtures for the test binaries: the six-user example graph and a
// seeded random graph builder.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "recip/core_model.hpp"

namespace fixture {

using recip::AttributeDef;
using recip::AttributeKind;
using recip::AttributeLayout;
using recip::Gender;
using recip::InteractionGraph;
using recip::MessageEvent;
using recip::UserId;
using recip::UserProfile;

inline constexpr UserId M1{1}, M2{2}, M3{3}, F1{4}, F2{5}, F3{6};

inline UserProfile bare(UserId id, Gender g, recip::Timestamp reg = 0, std::size_t attrs = 0) {
  return UserProfile{id, g, reg, std::vector<recip::AttributeValue>(attrs)};
}

inline std::vector<UserProfile> sample_profiles() {
  return {bare(M1, Gender::Male),   bare(M2, Gender::Male),   bare(M3, Gender::Male),
          bare(F1, Gender::Female), bare(F2, Gender::Female), bare(F3, Gender::Female)};
}

// M1->F1, M1->F2, M2->F2, M2->F3, M3->F1, M3->F2
inline std::vector<MessageEvent> sample_events() {
  return {{M1, F1, 10}, {M1, F2, 20}, {M2, F2, 30}, {M2, F3, 40}, {M3, F1, 50}, {M3, F2, 60}};
}

inline InteractionGraph sample() { return InteractionGraph(AttributeLayout{}, sample_profiles(), sample_events()); }

inline const char* sample_profiles_csv() {
  return "id,gender,registered_at\n1,M,0\n2,M,0\n3,M,0\n4,F,0\n5,F,0\n6,F,0\n";
}

inline const char* sample_messages_csv() {
  return "sender,receiver,sent_at\n1,4,10\n1,5,20\n2,5,30\n2,6,40\n3,4,50\n3,5,60\n";
}

inline AttributeLayout random_layout() {
  return AttributeLayout({{"age", AttributeKind::Numeric},
                          {"city", AttributeKind::Nominal},
                          {"height", AttributeKind::Numeric},
                          {"smoker", AttributeKind::Nominal}});
}

struct RandomSpec {
  std::size_t users = 30;
  std::size_t messages = 120;
  double missing = 0.2;
  double reply_chance = 0.35;
  bool with_profiles = true;
};

// Ids are assigned in descending order so that index order differs from
// construction order. Timestamps fall on a 12h grid, so ties are common.
inline InteractionGraph random_graph(std::uint64_t seed, const RandomSpec& spec = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(unif(rng) * static_cast<double>(n)) % n; };
  const AttributeLayout layout = spec.with_profiles ? random_layout() : AttributeLayout{};
  const std::size_t n = std::max<std::size_t>(spec.users, 2);
  std::vector<UserProfile> users;
  std::vector<std::size_t> males, females;
  static const char* kCities[] = {"north", "south", "east"};
  for (std::size_t i = 0; i < n; ++i) {
    const Gender g = i == 0 ? Gender::Male : i == 1 ? Gender::Female : (unif(rng) < 0.55 ? Gender::Male : Gender::Female);
    (g == Gender::Male ? males : females).push_back(i);
    UserProfile p = bare(UserId{5000 - 7 * i}, g, static_cast<recip::Timestamp>(pick(5)) * 43200, layout.size());
    if (spec.with_profiles) {
      auto known = [&] { return unif(rng) >= spec.missing; };
      if (known()) p.attributes[0] = static_cast<double>(18 + pick(40));
      if (known()) p.attributes[1] = std::string(kCities[pick(3)]);
      if (known()) p.attributes[2] = static_cast<double>(150 + pick(45));
      if (known()) p.attributes[3] = std::string(unif(rng) < 0.3 ? "yes" : "no");
    }
    users.push_back(std::move(p));
  }
  std::vector<MessageEvent> events;
  while (events.size() < spec.messages) {
    const std::size_t s = pick(n);
    const auto& pool = users[s].gender == Gender::Male ? females : males;
    const std::size_t r = pool[pick(pool.size())];
    const recip::Timestamp t = users[s].registered_at + static_cast<recip::Timestamp>(pick(40)) * 43200;
    events.push_back({users[s].id, users[r].id, t});
    if (events.size() < spec.messages && unif(rng) < spec.reply_chance) {
      const recip::Timestamp back = std::max(t, users[r].registered_at) + static_cast<recip::Timestamp>(pick(5)) * 43200;
      events.push_back({users[r].id, users[s].id, back});
    }
  }
  return InteractionGraph(layout, std::move(users), std::move(events));
}

}  // namespace fixture
