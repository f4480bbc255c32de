#pragma once

// Seeded synthetic dating network with planted two-sided preferences.
//
// Every user gets a "trait" vector (what they are) and a "taste" vector (what
// they look for), both unit vectors pulled toward one of a few community
// centers, plus a log-normal attractiveness. A sender x picks receivers y
// without replacement with weight attractiveness(y) * exp(signal * <taste_x,
// trait_y>); y answers with probability sigmoid(reply_signal * <taste_y,
// trait_x> + bias), where the bias per direction is solved so the expected
// reply rate hits its target. Out-degrees follow a power law truncated at
// max_out_degree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "recip/core_model.hpp"

namespace recip {

struct GenConfig {
  std::uint64_t seed = 1;
  std::size_t n_male = 1000;
  std::size_t n_female = 430;
  std::size_t latent_dim = 3;
  std::size_t communities = 8;
  // Spread of user vectors around their community center.
  double community_noise = 0.25;
  double signal = 12.0;
  double reply_signal = 3.0;
  double attractiveness_sigma = 0.6;
  // Probability that a user initiates any contact at all.
  double contact_rate = 0.85;
  double activity_exponent = 1.6;
  std::size_t max_out_degree = 100;
  // Female out-degrees are scaled by this factor.
  double female_activity = 0.5;
  double reply_rate_male_to_female = 0.095;
  double reply_rate_female_to_male = 0.179;
  Timestamp start = 1320105600;  // 2011-11-01T00:00:00Z
  Timestamp registration_span = 30 * kSecondsPerDay;
  // Contacts fall within this long after the sender registers.
  Timestamp membership = 56 * kSecondsPerDay;
  double mean_contact_delay_days = 12.0;
  double mean_reply_delay_days = 1.0;
  // Probability that a generated attribute ignores the latents.
  double attribute_noise = 0.3;

  void validate() const {
    if (n_male == 0 || n_female == 0) throw Error("synthetic generator needs at least one user of each gender");
    if (latent_dim == 0 || communities == 0) throw Error("latent_dim and communities must be positive");
    auto in_unit = [](double r) { return r > 0.0 && r < 1.0; };
    if (!in_unit(reply_rate_male_to_female) || !in_unit(reply_rate_female_to_male))
      throw Error("reply-rate targets must lie strictly between 0 and 1 (got " +
                  text::format_double(reply_rate_male_to_female) + ", " +
                  text::format_double(reply_rate_female_to_male) + ")");
    if (contact_rate < 0.0 || contact_rate > 1.0) throw Error("contact_rate must lie in [0, 1]");
    if (max_out_degree == 0) throw Error("max_out_degree must be positive");
    if (female_activity < 0.0) throw Error("female_activity must be non-negative");
    if (membership <= 0 || registration_span < 0) throw Error("time spans must be positive");
  }
};

struct LatentUser {
  UserId id;
  std::size_t community = 0;
  std::vector<double> trait;
  std::vector<double> taste;
  double attractiveness = 1.0;
};

struct SyntheticDataset {
  AttributeLayout layout;
  std::vector<UserProfile> profiles;
  std::vector<MessageEvent> events;
  std::vector<LatentUser> latents;
  // Realized initial contacts / replies per initiator gender.
  std::size_t contacts_from_male = 0, replies_to_male = 0;
  std::size_t contacts_from_female = 0, replies_to_female = 0;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline std::vector<double> unit_vector(std::vector<double> v) {
  double n = std::sqrt(dot(v, v));
  if (n == 0.0) {
    v.assign(v.size(), 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= n;
  return v;
}

// Bias b such that mean sigmoid(z_i + b) == target; logits must be non-empty.
inline double solve_bias(const std::vector<double>& logits, double target) {
  double lo = -60.0, hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (double z : logits) mean += sigmoid(z + mid);
    mean /= static_cast<double>(logits.size());
    (mean < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline AttributeLayout synthetic_layout() {
  return AttributeLayout({{"age", AttributeKind::Numeric},
                          {"height", AttributeKind::Numeric},
                          {"city", AttributeKind::Nominal},
                          {"education", AttributeKind::Nominal},
                          {"income", AttributeKind::Nominal},
                          {"marriage", AttributeKind::Nominal}});
}

inline SyntheticDataset generate(const GenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t n = cfg.n_male + cfg.n_female;

  SyntheticDataset out;
  out.layout = synthetic_layout();

  std::vector<std::vector<double>> centers(cfg.communities);
  for (auto& c : centers) {
    c.resize(cfg.latent_dim);
    for (double& x : c) x = normal(rng);
    c = detail::unit_vector(std::move(c));
  }
  auto near = [&](const std::vector<double>& center) {
    std::vector<double> v(center);
    for (double& x : v) x += cfg.community_noise * normal(rng);
    return detail::unit_vector(std::move(v));
  };

  const std::size_t age = *out.layout.find("age"), height = *out.layout.find("height"),
                    city = *out.layout.find("city"), education = *out.layout.find("education"),
                    income = *out.layout.find("income"), marriage = *out.layout.find("marriage");
  static const char* kEducation[] = {"high-school", "junior-college", "bachelor", "master", "doctorate"};
  static const char* kMarriage[] = {"single", "single", "single", "single", "divorced", "widowed"};

  out.latents.resize(n);
  out.profiles.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    LatentUser& lu = out.latents[i];
    const bool male = i < cfg.n_male;
    lu.id = UserId{i + 1};
    lu.community = static_cast<std::size_t>(unif(rng) * static_cast<double>(cfg.communities)) % cfg.communities;
    lu.trait = near(centers[lu.community]);
    lu.taste = near(centers[lu.community]);
    lu.attractiveness = std::exp(cfg.attractiveness_sigma * normal(rng));

    UserProfile& p = out.profiles[i];
    p.id = lu.id;
    p.gender = male ? Gender::Male : Gender::Female;
    p.registered_at = cfg.start + static_cast<Timestamp>(unif(rng) * static_cast<double>(cfg.registration_span));
    p.attributes.assign(out.layout.size(), std::monostate{});
    auto noisy = [&] { return unif(rng) < cfg.attribute_noise; };
    const double t0 = lu.trait[0];
    const double t1 = lu.trait[cfg.latent_dim > 1 ? 1 : 0];
    double a = std::round(29.0 + 6.0 * t0 + 3.0 * normal(rng));
    if (noisy()) a = std::round(20.0 + unif(rng) * 40.0);
    p.attributes[age] = std::clamp(a, 18.0, 70.0);
    p.attributes[height] = std::round((male ? 172.0 : 161.0) + 5.0 * t1 + 4.0 * normal(rng));
    std::size_t c = noisy() ? static_cast<std::size_t>(unif(rng) * 12.0) % 12 : lu.community % 12;
    p.attributes[city] = "city" + std::to_string(c);
    std::size_t e = static_cast<std::size_t>(std::clamp(std::floor((t0 + 1.0) * 2.5), 0.0, 4.0));
    if (noisy()) e = static_cast<std::size_t>(unif(rng) * 5.0) % 5;
    p.attributes[education] = std::string(kEducation[e]);
    std::size_t inc = static_cast<std::size_t>(std::clamp(std::floor(2.0 + 1.5 * std::log(lu.attractiveness)), 0.0, 5.0));
    if (noisy()) inc = static_cast<std::size_t>(unif(rng) * 6.0) % 6;
    p.attributes[income] = "level" + std::to_string(inc);
    p.attributes[marriage] = std::string(kMarriage[static_cast<std::size_t>(unif(rng) * 6.0) % 6]);
    // A few profiles leave fields blank.
    if (unif(rng) < 0.05) p.attributes[height] = std::monostate{};
    if (unif(rng) < 0.05) p.attributes[income] = std::monostate{};
  }

  // Truncated power-law out-degree.
  std::vector<double> degree_weights(cfg.max_out_degree);
  for (std::size_t d = 1; d <= cfg.max_out_degree; ++d)
    degree_weights[d - 1] = std::pow(static_cast<double>(d), -cfg.activity_exponent);
  std::discrete_distribution<std::size_t> degree_dist(degree_weights.begin(), degree_weights.end());
  std::exponential_distribution<double> contact_delay(1.0 / (cfg.mean_contact_delay_days * kSecondsPerDay));
  std::exponential_distribution<double> reply_delay(1.0 / (cfg.mean_reply_delay_days * kSecondsPerDay));

  struct Intent {
    std::size_t from, to;
    Timestamp at;
  };
  std::vector<Intent> intents;
  std::vector<std::pair<double, std::size_t>> keys;
  for (std::size_t x = 0; x < n; ++x) {
    const bool male = x < cfg.n_male;
    if (!(unif(rng) < cfg.contact_rate)) continue;
    std::size_t d = degree_dist(rng) + 1;
    if (!male) d = static_cast<std::size_t>(std::round(static_cast<double>(d) * cfg.female_activity));
    const std::size_t lo = male ? cfg.n_male : 0, hi = male ? n : cfg.n_male;
    d = std::min(d, hi - lo);
    if (d == 0) continue;
    // Weighted sampling without replacement: largest log(u) / w.
    keys.clear();
    for (std::size_t y = lo; y < hi; ++y) {
      const double w =
          out.latents[y].attractiveness * std::exp(cfg.signal * detail::dot(out.latents[x].taste, out.latents[y].trait));
      keys.emplace_back(std::log(std::max(unif(rng), 1e-300)) / w, y);
    }
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(d - 1), keys.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (std::size_t k = 0; k < d; ++k) {
      double delay = contact_delay(rng);
      while (delay >= static_cast<double>(cfg.membership)) delay = contact_delay(rng);
      // Both sides must be registered before the first message.
      const std::size_t y = keys[k].second;
      const Timestamp from = std::max(out.profiles[x].registered_at, out.profiles[y].registered_at);
      intents.push_back({x, y, from + static_cast<Timestamp>(delay)});
    }
  }
  std::stable_sort(intents.begin(), intents.end(), [](const Intent& a, const Intent& b) { return a.at < b.at; });

  // A pair keeps only its earliest intent.
  std::vector<Intent> contacts;
  {
    std::vector<std::uint64_t> seen;
    seen.reserve(intents.size());
    for (const Intent& it : intents) {
      const std::uint64_t key = (std::uint64_t{std::min(it.from, it.to)} << 32) | std::max(it.from, it.to);
      seen.push_back(key);
    }
    std::vector<std::size_t> order(intents.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return seen[a] < seen[b]; });
    std::vector<bool> keep(intents.size(), false);
    for (std::size_t i = 0; i < order.size(); ++i)
      if (i == 0 || seen[order[i]] != seen[order[i - 1]]) keep[order[i]] = true;
    for (std::size_t i = 0; i < intents.size(); ++i)
      if (keep[i]) contacts.push_back(intents[i]);
  }

  // Calibrate one reply bias per initiator gender on the realized contacts.
  std::vector<double> logits_m, logits_f;
  std::vector<double> logit(contacts.size());
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const Intent& c = contacts[i];
    logit[i] = cfg.reply_signal * detail::dot(out.latents[c.to].taste, out.latents[c.from].trait);
    (c.from < cfg.n_male ? logits_m : logits_f).push_back(logit[i]);
  }
  const double bias_m = logits_m.empty() ? 0.0 : detail::solve_bias(logits_m, cfg.reply_rate_male_to_female);
  const double bias_f = logits_f.empty() ? 0.0 : detail::solve_bias(logits_f, cfg.reply_rate_female_to_male);

  const Timestamp horizon_end = cfg.start + cfg.registration_span + cfg.membership;
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const Intent& c = contacts[i];
    const bool from_male = c.from < cfg.n_male;
    out.events.push_back({out.profiles[c.from].id, out.profiles[c.to].id, c.at});
    (from_male ? out.contacts_from_male : out.contacts_from_female)++;
    const double p = detail::sigmoid(logit[i] + (from_male ? bias_m : bias_f));
    if (unif(rng) < p) {
      const Timestamp at = std::min(horizon_end, c.at + 1 + static_cast<Timestamp>(reply_delay(rng)));
      out.events.push_back({out.profiles[c.to].id, out.profiles[c.from].id, std::max(at, c.at + 1)});
      (from_male ? out.replies_to_male : out.replies_to_female)++;
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const MessageEvent& a, const MessageEvent& b) { return a.sent_at < b.sent_at; });
  return out;
}

inline void write_profiles_csv(std::ostream& out, const AttributeLayout& layout, std::span<const UserProfile> profiles) {
  out << "id,gender,registered_at";
  for (const AttributeDef& d : layout.defs()) out << ',' << d.name << ':' << kind_name(d.kind);
  out << '\n';
  for (const UserProfile& p : profiles) {
    out << p.id.value << ',' << gender_code(p.gender) << ',' << p.registered_at;
    for (const AttributeValue& v : p.attributes) {
      out << ',';
      if (const auto* s = std::get_if<std::string>(&v)) out << *s;
      if (const auto* d = std::get_if<double>(&v)) out << text::format_double(*d);
    }
    out << '\n';
  }
}

inline void write_messages_csv(std::ostream& out, std::span<const MessageEvent> events) {
  out << "sender,receiver,sent_at\n";
  for (const MessageEvent& e : events) out << e.sender.value << ',' << e.receiver.value << ',' << e.sent_at << '\n';
}

inline void write_latents_csv(std::ostream& out, std::span<const LatentUser> latents) {
  out << "id,community,attractiveness";
  const std::size_t dim = latents.empty() ? 0 : latents.front().trait.size();
  for (std::size_t k = 0; k < dim; ++k) out << ",trait" << k;
  for (std::size_t k = 0; k < dim; ++k) out << ",taste" << k;
  out << '\n';
  for (const LatentUser& u : latents) {
    out << u.id.value << ',' << u.community << ',' << text::format_double(u.attractiveness);
    for (double v : u.trait) out << ',' << text::format_double(v);
    for (double v : u.taste) out << ',' << text::format_double(v);
    out << '\n';
  }
}

}  // namespace recip
