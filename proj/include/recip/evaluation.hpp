#pragma once

// Train/test protocol, ranking metrics and attribute-distribution diagnostics.

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "recip/core_model.hpp"
#include "recip/engine.hpp"
#include "recip/parallel.hpp"
#include "recip/similarity.hpp"

namespace recip {

struct SplitSpec {
  Timestamp training_window = 10 * kSecondsPerDay;
  std::size_t min_activity = 5;

  void validate() const {
    if (training_window <= 0) throw Error("training window must be positive");
    if (min_activity < 1) throw Error("min_activity must be at least 1");
  }
};

struct TrainTestSplit {
  InteractionGraph train;
  // Per event of the source graph (time order): true when it belongs to training.
  std::vector<bool> in_training;
  std::vector<MessageEvent> test_events;
};

// An event is training data when it was sent within the window after the
// sender registered.
inline TrainTestSplit split_train_test(const InteractionGraph& g, const SplitSpec& spec) {
  spec.validate();
  const Population& pop = g.population();
  std::vector<MessageEvent> train_events, test_events;
  std::vector<bool> in_training(g.events().size());
  for (std::size_t e = 0; e < g.events().size(); ++e) {
    const MessageEvent& ev = g.events()[e];
    const Timestamp reg = pop[g.event_sender(e)].registered_at;
    if (ev.sent_at < reg)
      throw Error("message from " + std::to_string(ev.sender.value) + " at " + std::to_string(ev.sent_at) +
                  " predates the sender's registration");
    in_training[e] = ev.sent_at - reg <= spec.training_window;
    (in_training[e] ? train_events : test_events).push_back(ev);
  }
  return {InteractionGraph(g.shared_population(), std::move(train_events)), std::move(in_training),
          std::move(test_events)};
}

// Users whose initial contacts plus replies in training reach min_activity.
inline std::vector<UserIndex> select_service_users(const InteractionGraph& train, const SplitSpec& spec) {
  std::vector<UserIndex> out;
  for (UserIndex u = 0; u < train.user_count(); ++u)
    if (train.sent_to(u).size() + train.replies_sent(u) >= spec.min_activity) out.push_back(u);
  return out;
}

// Ground truth for one service user, both ascending.
struct EvalSets {
  std::vector<UserIndex> contacted;  // I
  std::vector<UserIndex> replied;    // R ⊆ I
};

// I(x): users x initiated contact with during the test period; R(x): those who
// answered. Contacts are derived on the full log, so a pair that already
// exchanged messages in training never reappears as a test contact.
inline std::vector<EvalSets> build_eval_sets(const InteractionGraph& full, const TrainTestSplit& split,
                                             std::span<const UserIndex> service_users,
                                             bool receivers_must_be_service_users = false) {
  std::vector<std::int64_t> slot(full.user_count(), -1);
  for (std::size_t i = 0; i < service_users.size(); ++i) slot[service_users[i]] = static_cast<std::int64_t>(i);
  std::vector<EvalSets> sets(service_users.size());
  for (const Contact& c : full.contacts()) {
    if (slot[c.from] < 0 || split.in_training[c.event]) continue;
    if (receivers_must_be_service_users && slot[c.to] < 0) continue;
    auto& s = sets[static_cast<std::size_t>(slot[c.from])];
    s.contacted.push_back(c.to);
    if (c.replied()) s.replied.push_back(c.to);
  }
  for (auto& s : sets) {
    std::sort(s.contacted.begin(), s.contacted.end());
    std::sort(s.replied.begin(), s.replied.end());
  }
  return sets;
}

struct RankingMetrics {
  std::optional<double> i_precision, i_recall, r_precision, r_recall;
};

// Set metrics of a recommended list T against I and R (both ascending).
// I-metrics are absent when I is empty, R-metrics when R is empty. An empty T
// scores precision 0.
inline RankingMetrics metrics_at_k(std::span<const UserIndex> recommended, const EvalSets& truth) {
  std::size_t hit_i = 0, hit_r = 0;
  for (UserIndex y : recommended) {
    hit_i += std::binary_search(truth.contacted.begin(), truth.contacted.end(), y);
    hit_r += std::binary_search(truth.replied.begin(), truth.replied.end(), y);
  }
  const double t = static_cast<double>(recommended.size());
  auto precision = [&](std::size_t hits) { return recommended.empty() ? 0.0 : static_cast<double>(hits) / t; };
  RankingMetrics m;
  if (!truth.contacted.empty()) {
    m.i_precision = precision(hit_i);
    m.i_recall = static_cast<double>(hit_i) / static_cast<double>(truth.contacted.size());
  }
  if (!truth.replied.empty()) {
    m.r_precision = precision(hit_r);
    m.r_recall = static_cast<double>(hit_r) / static_cast<double>(truth.replied.size());
  }
  return m;
}

// Sum and count of normalized 1-based positions p / |list| of relevant entries.
struct PositionTally {
  double sum = 0.0;
  std::size_t count = 0;

  std::optional<double> mean() const {
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  }
  PositionTally& operator+=(const PositionTally& o) {
    sum += o.sum;
    count += o.count;
    return *this;
  }
};

inline PositionTally relevant_positions(std::span<const UserIndex> list, std::span<const UserIndex> relevant) {
  PositionTally tally;
  for (std::size_t p = 0; p < list.size(); ++p)
    if (std::binary_search(relevant.begin(), relevant.end(), list[p])) {
      tally.sum += static_cast<double>(p + 1) / static_cast<double>(list.size());
      ++tally.count;
    }
  return tally;
}

// Mean normalized position over many lists; absent when nothing is relevant.
inline std::optional<double> relevant_positions(std::span<const std::vector<UserIndex>> lists,
                                                std::span<const std::vector<UserIndex>> relevant) {
  if (lists.size() != relevant.size()) throw Error("lists and relevant sets differ in length");
  PositionTally total;
  for (std::size_t i = 0; i < lists.size(); ++i) total += relevant_positions(lists[i], relevant[i]);
  return total.mean();
}

// ---------------------------------------------------------------------------
// Attribute distributions

struct BinKey {
  bool numeric = false;
  std::int64_t bucket = 0;
  std::string token;
  friend auto operator<=>(const BinKey&, const BinKey&) = default;
};

using Histogram = std::map<BinKey, double>;

struct Distribution {
  std::vector<std::string> bins;
  std::vector<double> mass;
};

// Weighted histogram of one attribute over `users`. With weight_by_received,
// each user counts once per message they received.
inline Histogram attribute_histogram(const InteractionGraph& g, std::span<const UserIndex> users,
                                     std::string_view attribute, const BinConfig& bins, bool weight_by_received) {
  if (users.empty()) throw Error("attribute distribution over an empty user set");
  const auto a = g.population().layout().find(attribute);
  if (!a) throw Error("unknown attribute '" + std::string(attribute) + "'");
  const AttributeDef& def = g.population().layout()[*a];
  Histogram h;
  bool any_known = false;
  for (UserIndex u : users) {
    const AttributeValue& v = g.population()[u].attributes[*a];
    if (!is_known(v)) continue;
    any_known = true;
    const double w = weight_by_received ? static_cast<double>(g.messages_received(u)) : 1.0;
    if (w == 0.0) continue;
    BinKey key;
    if (def.kind == AttributeKind::Numeric) {
      key.numeric = true;
      key.bucket = bins.spec(def.name).bucket(std::get<double>(v));
    } else {
      key.token = std::get<std::string>(v);
    }
    h[key] += w;
  }
  if (!any_known) throw Error("attribute '" + std::string(attribute) + "' is missing for every selected user");
  if (h.empty()) throw Error("attribute distribution has zero total weight");
  return h;
}

inline std::string bin_label(const BinKey& key, const BinSpec& spec) {
  if (!key.numeric) return key.token;
  const double lo = spec.origin + static_cast<double>(key.bucket) * spec.width;
  return "[" + text::format_double(lo) + "," + text::format_double(lo + spec.width) + ")";
}

// Normalizes `h` over the bins of `domain` (which must cover h's keys).
inline Distribution normalize(const Histogram& h, const Histogram& domain, const BinSpec& spec) {
  double total = 0.0;
  for (const auto& [k, w] : h) total += w;
  if (!(total > 0.0)) throw Error("cannot normalize an empty histogram");
  Distribution d;
  for (const auto& [k, unused] : domain) {
    d.bins.push_back(bin_label(k, spec));
    auto it = h.find(k);
    d.mass.push_back(it == h.end() ? 0.0 : it->second / total);
  }
  return d;
}

inline Distribution attribute_distribution(const InteractionGraph& g, std::span<const UserIndex> users,
                                           std::string_view attribute, const BinConfig& bins,
                                           bool weight_by_received) {
  const Histogram h = attribute_histogram(g, users, attribute, bins, weight_by_received);
  return normalize(h, h, bins.spec(attribute));
}

// -ln Σ sqrt(p_i q_i); +inf for disjoint supports.
inline double bhattacharyya_distance(const Distribution& p, const Distribution& q) {
  if (p.bins != q.bins || p.mass.size() != q.mass.size() || p.mass.size() != p.bins.size())
    throw Error("Bhattacharyya distance needs distributions over the same bins");
  double sp = 0.0, sq = 0.0, coefficient = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    if (p.mass[i] < 0.0 || q.mass[i] < 0.0) throw Error("negative probability mass");
    sp += p.mass[i];
    sq += q.mass[i];
    coefficient += std::sqrt(p.mass[i] * q.mass[i]);
  }
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9) throw Error("distribution does not sum to 1");
  if (coefficient <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(0.0, -std::log(coefficient));
}

// ---------------------------------------------------------------------------
// Experiment runner

inline const std::vector<std::size_t>& default_ks() {
  static const std::vector<std::size_t> ks{1, 5, 10, 20, 50, 100};
  return ks;
}

struct EvalOptions {
  SplitSpec split;
  std::vector<std::size_t> ks = default_ks();
  CandidatePolicy::Kind policy = CandidatePolicy::Kind::ExcludeContacted;
  // Restrict I/R to receivers that are service users too.
  bool receivers_must_be_service_users = false;
  // Average over every service user, scoring users without I (or R) as 0.
  bool count_inactive_as_zero = false;
  unsigned threads = 1;
  BinConfig bins = BinConfig::defaults();
};

struct EvalRow {
  std::string config;
  Gender gender = Gender::Male;
  std::size_t k = 0;
  std::size_t service_users = 0;
  std::size_t users_with_i = 0;
  std::size_t users_with_r = 0;
  double i_precision = 0, i_recall = 0, r_precision = 0, r_recall = 0;
  std::optional<double> mean_relevant_position;
  std::size_t relevant = 0;
};

// Sum-then-divide accumulator for one (gender, K) cell.
struct MetricSums {
  std::size_t users = 0, users_i = 0, users_r = 0;
  double ip = 0, ir = 0, rp = 0, rr = 0;
  PositionTally positions;

  void add(const RankingMetrics& m, const PositionTally& pos, bool inactive_as_zero) {
    ++users;
    if (m.i_precision) {
      ++users_i;
      ip += *m.i_precision;
      ir += *m.i_recall;
    } else if (inactive_as_zero) {
      ++users_i;
    }
    if (m.r_precision) {
      ++users_r;
      rp += *m.r_precision;
      rr += *m.r_recall;
    } else if (inactive_as_zero) {
      ++users_r;
    }
    positions += pos;
  }
};

// Holds the split, service users and ground truth for one dataset; every
// algorithm is evaluated against the same protocol.
class Experiment {
 public:
  Experiment(const InteractionGraph& full, EvalOptions options)
      : full_(full), options_(std::move(options)), split_(split_train_test(full, options_.split)) {
    if (options_.ks.empty()) throw Error("at least one K is required");
    for (std::size_t k : options_.ks)
      if (k < 1) throw Error("K values must be at least 1");
    std::sort(options_.ks.begin(), options_.ks.end());
    options_.ks.erase(std::unique(options_.ks.begin(), options_.ks.end()), options_.ks.end());
    service_users_ = select_service_users(split_.train, options_.split);
    truth_ = build_eval_sets(full_, split_, service_users_, options_.receivers_must_be_service_users);
    policy_.kind = options_.policy;
    if (policy_.kind == CandidatePolicy::Kind::PoolOnly) {
      policy_.pool.assign(full.user_count(), false);
      for (const MessageEvent& e : split_.test_events) {
        policy_.pool[full.population().index_of(e.sender)] = true;
        policy_.pool[full.population().index_of(e.receiver)] = true;
      }
    }
    context_.emplace(split_.train, options_.bins);
  }

  Experiment(const Experiment&) = delete;
  Experiment& operator=(const Experiment&) = delete;

  const EvalOptions& options() const noexcept { return options_; }
  const TrainTestSplit& split() const noexcept { return split_; }
  const InteractionGraph& train() const noexcept { return split_.train; }
  std::span<const UserIndex> service_users() const noexcept { return service_users_; }
  std::span<const EvalSets> truth() const noexcept { return truth_; }
  const ScoringContext& context() const { return *context_; }
  const CandidatePolicy& policy() const noexcept { return policy_; }
  std::size_t max_k() const { return options_.ks.back(); }

  // Ranked candidate ids per service user, up to max K.
  std::vector<std::vector<UserIndex>> recommend(const AlgorithmConfig& cfg) const {
    Recommender rec(*context_, cfg);
    std::vector<std::vector<UserIndex>> lists(service_users_.size());
    const unsigned threads = std::max(1u, options_.threads);
    std::vector<Recommender::Workspace> spaces;
    for (unsigned t = 0; t < threads; ++t) spaces.push_back(rec.make_workspace());
    parallel_for(service_users_.size(), threads, [&](std::size_t i, unsigned w) {
      auto list = rec.top_k(service_users_[i], max_k(), policy_, spaces[w]);
      for (const auto& c : list.ranked) lists[i].push_back(c.index);
    });
    return lists;
  }

  // Uniformly shuffled eligible candidates per service user.
  std::vector<std::vector<UserIndex>> random_ranking(std::uint64_t seed) const {
    const InteractionGraph& g = split_.train;
    std::vector<std::vector<UserIndex>> lists(service_users_.size());
    for (std::size_t i = 0; i < service_users_.size(); ++i) {
      const UserIndex x = service_users_[i];
      std::vector<UserIndex> pool;
      const auto skip = already_messaged(g, x);
      const Gender want = opposite(g.population().gender(x));
      for (UserIndex y = 0; y < g.user_count(); ++y) {
        if (g.population().gender(y) != want) continue;
        if (policy_.kind == CandidatePolicy::Kind::PoolOnly && !policy_.pool[y]) continue;
        if (policy_.kind != CandidatePolicy::Kind::IncludeAll && std::binary_search(skip.begin(), skip.end(), y))
          continue;
        pool.push_back(y);
      }
      std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (x + 1)));
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(std::min(pool.size(), max_k()));
      lists[i] = std::move(pool);
    }
    return lists;
  }

  // Rows for (gender, K) in gender-then-K order.
  std::vector<EvalRow> score(const std::string& name, std::span<const std::vector<UserIndex>> lists) const {
    if (lists.size() != service_users_.size()) throw Error("one list per service user expected");
    const auto& ks = options_.ks;
    std::vector<MetricSums> sums(2 * ks.size());
    for (std::size_t i = 0; i < service_users_.size(); ++i) {
      const std::size_t g = full_.population().gender(service_users_[i]) == Gender::Male ? 0 : 1;
      for (std::size_t j = 0; j < ks.size(); ++j) {
        const auto prefix = std::span(lists[i]).first(std::min(ks[j], lists[i].size()));
        sums[g * ks.size() + j].add(metrics_at_k(prefix, truth_[i]), relevant_positions(prefix, truth_[i].replied),
                                    options_.count_inactive_as_zero);
      }
    }
    std::vector<EvalRow> rows;
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t j = 0; j < ks.size(); ++j) {
        const MetricSums& s = sums[g * ks.size() + j];
        EvalRow row;
        row.config = name;
        row.gender = g == 0 ? Gender::Male : Gender::Female;
        row.k = ks[j];
        row.service_users = s.users;
        row.users_with_i = s.users_i;
        row.users_with_r = s.users_r;
        auto mean = [](double sum, std::size_t n) { return n ? sum / static_cast<double>(n) : 0.0; };
        row.i_precision = mean(s.ip, s.users_i);
        row.i_recall = mean(s.ir, s.users_i);
        row.r_precision = mean(s.rp, s.users_r);
        row.r_recall = mean(s.rr, s.users_r);
        row.mean_relevant_position = s.positions.mean();
        row.relevant = s.positions.count;
        rows.push_back(std::move(row));
      }
    return rows;
  }

  std::vector<EvalRow> evaluate(const AlgorithmConfig& cfg) const { return score(cfg.name, recommend(cfg)); }

  // Mean I-Precision at k over all service users with test contacts.
  double overall_i_precision(std::span<const std::vector<UserIndex>> lists, std::size_t k) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < service_users_.size(); ++i) {
      auto m = metrics_at_k(std::span(lists[i]).first(std::min(k, lists[i].size())), truth_[i]);
      if (m.i_precision) {
        sum += *m.i_precision;
        ++n;
      }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
  }

 private:
  const InteractionGraph& full_;
  EvalOptions options_;
  TrainTestSplit split_;
  std::vector<UserIndex> service_users_;
  std::vector<EvalSets> truth_;
  CandidatePolicy policy_;
  std::optional<ScoringContext> context_;
};

inline void write_report_csv(std::ostream& out, std::span<const EvalRow> rows) {
  out << "config,gender,k,service_users,users_with_i,users_with_r,i_precision,i_recall,r_precision,r_recall,"
         "mean_relevant_position,relevant\n";
  for (const EvalRow& r : rows) {
    out << r.config << ',' << gender_code(r.gender) << ',' << r.k << ',' << r.service_users << ',' << r.users_with_i
        << ',' << r.users_with_r << ',' << text::fixed(r.i_precision) << ',' << text::fixed(r.i_recall) << ','
        << text::fixed(r.r_precision) << ',' << text::fixed(r.r_recall) << ','
        << (r.mean_relevant_position ? text::fixed(*r.mean_relevant_position) : std::string("NA")) << ','
        << r.relevant << '\n';
  }
}

}  // namespace recip
