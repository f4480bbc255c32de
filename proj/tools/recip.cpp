// recip: command-line driver for ingestion, recommendation, evaluation,
// projection analysis, dataset statistics and synthetic data generation.

#include <algorithm>
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "recip/core_model.hpp"
#include "recip/engine.hpp"
#include "recip/evaluation.hpp"
#include "recip/similarity.hpp"
#include "recip/synthgen.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kInputError = 2, kEmptyResult = 3 };

// Raised when a run completes but has nothing to report.
class EmptyResult : public recip::Error {
 public:
  using recip::Error::Error;
};

struct RunConfig {
  std::string profiles;
  std::string messages;
  char delimiter = ',';
  std::map<std::string, recip::AttributeKind, std::less<>> kinds;
  recip::EvalOptions eval;
  std::vector<recip::AlgorithmConfig> algorithms;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
};

recip::AlgorithmConfig parse_algorithm(const std::string& spec) {
  if (auto p = recip::find_preset(spec)) return *p;
  // "Se,Re,attractiveness,interest" or "name=Se,Re,..."
  std::string name = spec, body = spec;
  if (auto eq = spec.find('='); eq != std::string::npos) {
    name = spec.substr(0, eq);
    body = spec.substr(eq + 1);
  }
  auto parts = recip::text::split(body, ',');
  if (parts.size() != 4) throw recip::Error("unknown algorithm '" + spec + "' (use CB1..CF4 or Se,Re,sim1,sim2)");
  auto n1 = recip::parse_neighbor(parts[0]), n2 = recip::parse_neighbor(parts[1]);
  auto s1 = recip::parse_similarity(parts[2]), s2 = recip::parse_similarity(parts[3]);
  if (!n1 || !n2 || !s1 || !s2) throw recip::Error("malformed algorithm quadruple '" + spec + "'");
  return {name, *n1, *n2, *s1, *s2};
}

recip::AlgorithmConfig algorithm_from_json(const json& j) {
  if (j.is_string()) return parse_algorithm(j.get<std::string>());
  const auto name = j.value("name", std::string("custom"));
  auto field = [&](const char* key) {
    if (!j.contains(key)) throw recip::Error(std::string("algorithm entry lacks '") + key + "'");
    return j.at(key).get<std::string>();
  };
  return parse_algorithm(name + "=" + field("neighbor1") + "," + field("neighbor2") + "," + field("similarity1") +
                         "," + field("similarity2"));
}

recip::CandidatePolicy::Kind parse_policy(const std::string& s) {
  using K = recip::CandidatePolicy::Kind;
  for (K k : {K::ExcludeContacted, K::IncludeAll, K::PoolOnly})
    if (s == recip::policy_name(k)) return k;
  throw recip::Error("unknown candidate policy '" + s + "'");
}

// Fills cfg from a JSON config file; command-line flags are applied later.
void load_config(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw recip::Error("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw recip::Error("config " + path + ": " + e.what());
  }
  try {
    if (j.contains("profiles")) cfg.profiles = j["profiles"].get<std::string>();
    if (j.contains("messages")) cfg.messages = j["messages"].get<std::string>();
    if (j.contains("delimiter")) {
      auto d = j["delimiter"].get<std::string>();
      if (d.size() != 1) throw recip::Error("delimiter must be one character");
      cfg.delimiter = d == "t" ? '\t' : d[0];
    }
    if (j.contains("attribute_kinds"))
      for (auto& [name, kind] : j["attribute_kinds"].items()) {
        auto k = recip::parse_kind(kind.get<std::string>());
        if (!k) throw recip::Error("unknown attribute kind for " + name);
        cfg.kinds[name] = *k;
      }
    if (j.contains("split")) {
      const auto& s = j["split"];
      if (s.contains("window_days"))
        cfg.eval.split.training_window =
            static_cast<recip::Timestamp>(s["window_days"].get<double>() * recip::kSecondsPerDay);
      if (s.contains("min_activity")) cfg.eval.split.min_activity = s["min_activity"].get<std::size_t>();
      if (s.contains("receivers_must_be_service_users"))
        cfg.eval.receivers_must_be_service_users = s["receivers_must_be_service_users"].get<bool>();
    }
    if (j.contains("algorithms")) {
      cfg.algorithms.clear();
      for (const auto& a : j["algorithms"]) cfg.algorithms.push_back(algorithm_from_json(a));
    }
    if (j.contains("k")) cfg.eval.ks = j["k"].get<std::vector<std::size_t>>();
    if (j.contains("candidate_policy")) cfg.eval.policy = parse_policy(j["candidate_policy"].get<std::string>());
    if (j.contains("count_inactive_as_zero")) cfg.eval.count_inactive_as_zero = j["count_inactive_as_zero"].get<bool>();
    if (j.contains("bins"))
      for (auto& [name, b] : j["bins"].items())
        cfg.eval.bins.set(name, recip::BinSpec{b.value("origin", 0.0), b.value("width", 1.0)});
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) cfg.eval.threads = j["threads"].get<unsigned>();
  } catch (const json::exception& e) {
    throw recip::Error("config " + path + ": " + e.what());
  }
}

std::ifstream open_input(const std::string& path, const char* what) {
  if (path.empty()) throw recip::Error(std::string("no ") + what + " file given");
  std::ifstream in(path);
  if (!in) throw recip::Error(std::string("cannot open ") + what + " file " + path);
  return in;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  const auto path = fs::path(cfg.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw recip::Error("cannot write " + path.string());
  return out;
}

recip::InteractionGraph load_graph(const RunConfig& cfg, std::size_t* malformed = nullptr) {
  recip::IngestOptions opts{cfg.delimiter, cfg.kinds};
  auto pin = open_input(cfg.profiles, "profiles");
  auto table = [&] {
    try {
      return recip::ingest_profiles(pin, opts);
    } catch (const recip::FormatError& e) {
      throw recip::Error(cfg.profiles + ": " + e.what());
    }
  }();
  if (table.malformed_values > 0)
    std::cerr << "warning: " << table.malformed_values << " malformed attribute value(s) stored as missing\n";
  if (malformed) *malformed = table.malformed_values;
  auto min = open_input(cfg.messages, "messages");
  try {
    return recip::ingest_messages(min, std::move(table), opts);
  } catch (const recip::FormatError& e) {
    throw recip::Error(cfg.messages + ": " + e.what());
  }
}

std::string rate(std::size_t num, std::size_t den) { return recip::text::fixed(den ? double(num) / double(den) : 0.0, 4); }

int cmd_ingest(const RunConfig& cfg) {
  std::size_t malformed = 0;
  const auto g = load_graph(cfg, &malformed);
  const auto& pop = g.population();
  std::size_t mf = 0, mf_rep = 0, fm = 0, fm_rep = 0;
  for (const auto& c : g.contacts()) {
    const bool male = pop.gender(c.from) == recip::Gender::Male;
    (male ? mf : fm)++;
    if (c.replied()) (male ? mf_rep : fm_rep)++;
  }
  std::ostringstream s;
  s << "users_male " << pop.count(recip::Gender::Male) << '\n'
    << "users_female " << pop.count(recip::Gender::Female) << '\n'
    << "messages " << g.events().size() << '\n'
    << "initial_contacts " << g.contacts().size() << '\n'
    << "male_to_female_initial_contacts " << mf << '\n'
    << "male_to_female_reciprocal_links " << mf_rep << '\n'
    << "male_to_female_reply_rate " << rate(mf_rep, mf) << '\n'
    << "female_to_male_initial_contacts " << fm << '\n'
    << "female_to_male_reciprocal_links " << fm_rep << '\n'
    << "female_to_male_reply_rate " << rate(fm_rep, fm) << '\n'
    << "malformed_attribute_values " << malformed << '\n';
  {
    auto snap = open_output(cfg, "graph.snapshot");
    recip::write_snapshot(snap, g);
  }
  open_output(cfg, "summary.txt") << s.str();
  std::cout << s.str();
  return kOk;
}

int cmd_recommend(const RunConfig& cfg, std::size_t k, const std::vector<std::uint64_t>& users) {
  if (cfg.eval.policy == recip::CandidatePolicy::Kind::PoolOnly)
    throw recip::Error("the test-pool policy needs a train/test split; use it with 'evaluate'");
  const auto g = load_graph(cfg);
  const recip::ScoringContext ctx(g, cfg.eval.bins);
  const recip::CandidatePolicy policy{cfg.eval.policy, {}};
  std::vector<recip::UserIndex> xs;
  if (users.empty()) {
    for (recip::UserIndex u = 0; u < g.user_count(); ++u) xs.push_back(u);
  } else {
    for (auto id : users) xs.push_back(g.population().index_of(recip::UserId{id}));
  }
  std::vector<recip::RecommendationList> lists;
  for (const auto& algo : cfg.algorithms) {
    recip::Recommender rec(ctx, algo);
    std::vector<recip::RecommendationList> part(xs.size());
    const unsigned threads = std::max(1u, cfg.eval.threads);
    std::vector<recip::Recommender::Workspace> spaces;
    for (unsigned t = 0; t < threads; ++t) spaces.push_back(rec.make_workspace());
    recip::parallel_for(xs.size(), threads,
                        [&](std::size_t i, unsigned w) { part[i] = rec.top_k(xs[i], k, policy, spaces[w]); });
    for (auto& l : part) lists.push_back(std::move(l));
  }
  auto out = open_output(cfg, "recommendations.csv");
  out << "config,";
  std::ostringstream body;
  recip::write_recommendations_csv(body, lists);
  // Prefix each data row with its config name.
  std::istringstream rows(body.str());
  std::string line;
  std::getline(rows, line);
  out << line << '\n';
  for (const auto& l : lists)
    for (std::size_t r = 0; r < l.ranked.size(); ++r) {
      std::getline(rows, line);
      out << l.config << ',' << line << '\n';
    }
  std::cerr << "wrote recommendations for " << xs.size() << " user(s) x " << cfg.algorithms.size()
            << " algorithm(s)\n";
  if (std::all_of(lists.begin(), lists.end(), [](const auto& l) { return l.ranked.empty(); }))
    throw EmptyResult("every recommendation list is empty (no candidate scored above zero)");
  return kOk;
}

int cmd_evaluate(const RunConfig& cfg) {
  const auto g = load_graph(cfg);
  recip::Experiment exp(g, cfg.eval);
  if (exp.service_users().empty())
    throw EmptyResult("no eligible service users (min_activity " + std::to_string(cfg.eval.split.min_activity) +
                      " within the training window)");
  std::cerr << "service users: " << exp.service_users().size() << ", training messages: " << exp.train().events().size()
            << ", test messages: " << exp.split().test_events.size() << '\n';
  std::vector<recip::EvalRow> rows;
  for (const auto& algo : cfg.algorithms) {
    std::cerr << "evaluating " << algo.name << '\n';
    auto part = exp.evaluate(algo);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  {
    auto out = open_output(cfg, "report.csv");
    recip::write_report_csv(out, rows);
  }
  json summary;
  summary["service_users"] = exp.service_users().size();
  summary["training_messages"] = exp.train().events().size();
  summary["test_messages"] = exp.split().test_events.size();
  summary["candidate_policy"] = std::string(recip::policy_name(cfg.eval.policy));
  summary["k"] = exp.options().ks;
  json results = json::array();
  for (const auto& r : rows) {
    json e;
    e["config"] = r.config;
    e["gender"] = std::string(1, recip::gender_code(r.gender));
    e["k"] = r.k;
    e["service_users"] = r.service_users;
    e["users_with_i"] = r.users_with_i;
    e["users_with_r"] = r.users_with_r;
    e["i_precision"] = recip::text::fixed(r.i_precision);
    e["i_recall"] = recip::text::fixed(r.i_recall);
    e["r_precision"] = recip::text::fixed(r.r_precision);
    e["r_recall"] = recip::text::fixed(r.r_recall);
    e["mean_relevant_position"] =
        r.mean_relevant_position ? json(recip::text::fixed(*r.mean_relevant_position)) : json(nullptr);
    e["relevant"] = r.relevant;
    results.push_back(std::move(e));
  }
  summary["results"] = std::move(results);
  open_output(cfg, "report.json") << summary.dump(2) << '\n';
  return kOk;
}

std::string projection_tag(recip::Gender g, recip::Direction d) {
  return std::string(1, recip::gender_code(g)) + "_" + std::string(recip::direction_name(d));
}

struct ProjectionChoice {
  std::string gender = "all";
  std::string direction = "all";

  std::vector<std::pair<recip::Gender, recip::Direction>> expand() const {
    std::vector<std::pair<recip::Gender, recip::Direction>> out;
    for (auto g : {recip::Gender::Male, recip::Gender::Female}) {
      if (gender != "all" && recip::parse_gender(gender) != g) continue;
      for (auto d : {recip::Direction::Sending, recip::Direction::Receiving})
        if (direction == "all" || direction == recip::direction_name(d)) out.emplace_back(g, d);
    }
    if (out.empty()) throw recip::Error("no projection matches gender '" + gender + "' direction '" + direction + "'");
    return out;
  }
};

int cmd_project(const RunConfig& cfg, const ProjectionChoice& choice) {
  const auto g = load_graph(cfg);
  for (auto [gender, dir] : choice.expand()) {
    const auto net = recip::build_projection(g, gender, dir);
    auto out = open_output(cfg, "projection_" + projection_tag(gender, dir) + ".csv");
    recip::write_projection_csv(out, g, net);
    std::cerr << "projection " << projection_tag(gender, dir) << ": " << net.degrees().size() << " nodes, "
              << net.edges.size() << " edges\n";
  }
  return kOk;
}

int cmd_stats(const RunConfig& cfg, const ProjectionChoice& choice, bool per_week, double window_weeks) {
  const auto g = load_graph(cfg);
  const auto& pop = g.population();
  auto write_ccdf = [&](const std::string& name, std::vector<double> values) {
    auto out = open_output(cfg, name);
    recip::write_ccdf_csv(out, recip::ccdf(std::move(values)));
  };

  for (auto [gender, dir] : choice.expand()) {
    const auto net = recip::build_projection(g, gender, dir);
    std::vector<double> degrees, weights;
    for (auto [u, d] : net.degrees()) degrees.push_back(static_cast<double>(d));
    for (const auto& e : net.edges) weights.push_back(e.weight);
    write_ccdf("ccdf_degree_" + projection_tag(gender, dir) + ".csv", std::move(degrees));
    write_ccdf("ccdf_weight_" + projection_tag(gender, dir) + ".csv", std::move(weights));
  }

  // Messages sent / received within the first `window_weeks` of membership.
  const recip::Timestamp week = 7 * recip::kSecondsPerDay;
  const auto window = static_cast<recip::Timestamp>(window_weeks * static_cast<double>(week));
  std::map<std::pair<recip::UserIndex, recip::Timestamp>, std::size_t> sent_by_week;
  std::vector<std::size_t> sent(g.user_count()), received(g.user_count());
  for (std::size_t e = 0; e < g.events().size(); ++e) {
    const auto s = g.event_sender(e), r = g.event_receiver(e);
    const auto t = g.events()[e].sent_at;
    const auto age_s = t - pop[s].registered_at;
    if (age_s >= 0 && age_s < window) {
      ++sent[s];
      ++sent_by_week[{s, age_s / week}];
    }
    const auto age_r = t - pop[r].registered_at;
    if (age_r >= 0 && age_r < window) ++received[r];
  }
  for (auto gender : {recip::Gender::Male, recip::Gender::Female}) {
    const std::string tag(1, recip::gender_code(gender));
    std::vector<double> s_vals, r_vals;
    if (per_week) {
      for (const auto& [key, count] : sent_by_week)
        if (pop.gender(key.first) == gender) s_vals.push_back(static_cast<double>(count));
    } else {
      for (recip::UserIndex u = 0; u < g.user_count(); ++u)
        if (pop.gender(u) == gender && sent[u] > 0) s_vals.push_back(static_cast<double>(sent[u]));
    }
    for (recip::UserIndex u = 0; u < g.user_count(); ++u)
      if (pop.gender(u) == gender && received[u] > 0) r_vals.push_back(static_cast<double>(received[u]));
    write_ccdf("ccdf_sent_" + tag + ".csv", std::move(s_vals));
    write_ccdf("ccdf_received_" + tag + ".csv", std::move(r_vals));
  }

  // Attribute distributions: all users of a gender vs. the same users weighted
  // by messages received.
  auto summary = open_output(cfg, "bhattacharyya.csv");
  summary << "attribute,gender,distance\n";
  for (const auto& def : pop.layout().defs()) {
    for (auto gender : {recip::Gender::Male, recip::Gender::Female}) {
      std::vector<recip::UserIndex> users;
      for (recip::UserIndex u = 0; u < g.user_count(); ++u)
        if (pop.gender(u) == gender) users.push_back(u);
      const std::string tag(1, recip::gender_code(gender));
      try {
        const auto all = recip::attribute_histogram(g, users, def.name, cfg.eval.bins, false);
        const auto recv = recip::attribute_histogram(g, users, def.name, cfg.eval.bins, true);
        const auto& spec = cfg.eval.bins.spec(def.name);
        const auto p = recip::normalize(all, all, spec);
        const auto q = recip::normalize(recv, all, spec);
        const double d = recip::bhattacharyya_distance(p, q);
        auto out = open_output(cfg, "distribution_" + def.name + "_" + tag + ".csv");
        out << "bin,p_all,p_receivers\n";
        for (std::size_t i = 0; i < p.bins.size(); ++i)
          out << p.bins[i] << ',' << recip::text::fixed(p.mass[i]) << ',' << recip::text::fixed(q.mass[i]) << '\n';
        out << "distance," << recip::text::fixed(d) << ",\n";
        summary << def.name << ',' << tag << ',' << recip::text::fixed(d) << '\n';
      } catch (const recip::Error& e) {
        std::cerr << "skipping " << def.name << " (" << tag << "): " << e.what() << '\n';
      }
    }
  }
  return kOk;
}

int cmd_synth(const RunConfig& cfg, recip::GenConfig gen) {
  gen.seed = cfg.seed;
  const auto data = recip::generate(gen);
  {
    auto out = open_output(cfg, "profiles.csv");
    recip::write_profiles_csv(out, data.layout, data.profiles);
  }
  {
    auto out = open_output(cfg, "messages.csv");
    recip::write_messages_csv(out, data.events);
  }
  {
    auto out = open_output(cfg, "latents.csv");
    recip::write_latents_csv(out, data.latents);
  }
  std::cerr << "generated " << data.profiles.size() << " users, " << data.events.size() << " messages; reply rate M->F "
            << rate(data.replies_to_male, data.contacts_from_male) << ", F->M "
            << rate(data.replies_to_female, data.contacts_from_female) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reciprocal recommendation for two-sided dating networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, policy;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Random seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out-dir", out_dir, "Output directory");

  std::string profiles, messages, delimiter;
  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--profiles", profiles, "Profiles file");
    sub->add_option("--messages", messages, "Messages file");
    sub->add_option("--delimiter", delimiter, "Field delimiter (default ',', 't' for tab)");
  };

  auto* ingest = app.add_subcommand("ingest", "Load a dataset, write a graph snapshot and summary counts");
  add_inputs(ingest);

  std::vector<std::string> algorithms;
  std::size_t rec_k = 10;
  std::vector<std::uint64_t> rec_users;
  auto* recommend = app.add_subcommand("recommend", "Top-K lists for service users on the full graph");
  add_inputs(recommend);
  recommend->add_option("--algorithm", algorithms, "Preset (CB1..CF4) or Se|Re,Se|Re,sim1,sim2");
  recommend->add_option("--k", rec_k, "List length")->check(CLI::PositiveNumber);
  recommend->add_option("--user", rec_users, "Service user id (repeatable; default all)");
  recommend->add_option("--policy", policy, "exclude-contacted | include-all");

  std::vector<std::size_t> ks;
  double window_days = -1;
  int min_activity = -1;
  bool both_service = false, inactive_zero = false;
  auto* evaluate = app.add_subcommand("evaluate", "Train/test evaluation of one or more algorithms");
  add_inputs(evaluate);
  evaluate->add_option("--algorithm", algorithms, "Preset or quadruple (repeatable; default all six)");
  evaluate->add_option("--k", ks, "K values (repeatable)");
  evaluate->add_option("--policy", policy, "exclude-contacted | include-all | test-pool");
  evaluate->add_option("--window-days", window_days, "Training window after registration");
  evaluate->add_option("--min-activity", min_activity, "Minimum training contacts + replies");
  evaluate->add_flag("--both-service-users", both_service, "Test pairs need a service-user receiver too");
  evaluate->add_flag("--count-inactive-as-zero", inactive_zero, "Average users without test contacts as 0");

  ProjectionChoice choice;
  auto* project = app.add_subcommand("project", "Export same-gender projection networks");
  add_inputs(project);
  project->add_option("--gender", choice.gender, "M | F | all");
  project->add_option("--direction", choice.direction, "sending | receiving | all");

  bool per_week = false;
  double window_weeks = 8.0;
  auto* stats = app.add_subcommand("stats", "CCDF tables, attribute distributions and Bhattacharyya distances");
  add_inputs(stats);
  stats->add_option("--gender", choice.gender, "Projection gender: M | F | all");
  stats->add_option("--direction", choice.direction, "Projection direction: sending | receiving | all");
  stats->add_flag("--per-week", per_week, "Send CCDF over per-week counts (weeks with >= 1 message)");
  stats->add_option("--window-weeks", window_weeks, "Membership window for message counts");

  recip::GenConfig gen;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--n-male", gen.n_male, "Number of male users");
  synth->add_option("--n-female", gen.n_female, "Number of female users");
  synth->add_option("--latent-dim", gen.latent_dim, "Latent dimension");
  synth->add_option("--communities", gen.communities, "Number of taste communities");
  synth->add_option("--signal", gen.signal, "Strength of latent compatibility in contact choice");
  synth->add_option("--contact-rate", gen.contact_rate, "Probability that a user sends at all");
  synth->add_option("--activity-exponent", gen.activity_exponent, "Out-degree power-law exponent");
  synth->add_option("--max-out-degree", gen.max_out_degree, "Out-degree truncation");
  synth->add_option("--female-activity", gen.female_activity, "Female out-degree scale");
  synth->add_option("--reply-rate-mf", gen.reply_rate_male_to_female, "Target reply rate to male initiators");
  synth->add_option("--reply-rate-fm", gen.reply_rate_female_to_male, "Target reply rate to female initiators");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    RunConfig cfg;
    for (const auto& p : recip::presets()) cfg.algorithms.push_back(p);
    if (!config_path.empty()) load_config(config_path, cfg);
    if (seed_opt->count()) cfg.seed = seed;
    if (threads_opt->count()) cfg.eval.threads = threads;
    if (out_opt->count()) cfg.out_dir = out_dir;
    if (!profiles.empty()) cfg.profiles = profiles;
    if (!messages.empty()) cfg.messages = messages;
    if (!delimiter.empty()) cfg.delimiter = delimiter == "t" ? '\t' : delimiter[0];
    if (!algorithms.empty()) {
      cfg.algorithms.clear();
      for (const auto& a : algorithms) cfg.algorithms.push_back(parse_algorithm(a));
    }
    if (!policy.empty()) cfg.eval.policy = parse_policy(policy);
    if (!ks.empty()) cfg.eval.ks = ks;
    if (window_days >= 0)
      cfg.eval.split.training_window = static_cast<recip::Timestamp>(window_days * recip::kSecondsPerDay);
    if (min_activity >= 0) cfg.eval.split.min_activity = static_cast<std::size_t>(min_activity);
    if (both_service) cfg.eval.receivers_must_be_service_users = true;
    if (inactive_zero) cfg.eval.count_inactive_as_zero = true;

    if (*ingest) return cmd_ingest(cfg);
    if (*recommend) {
      if (algorithms.empty() && config_path.empty()) cfg.algorithms = {*recip::find_preset("CF4")};
      return cmd_recommend(cfg, rec_k, rec_users);
    }
    if (*evaluate) return cmd_evaluate(cfg);
    if (*project) return cmd_project(cfg, choice);
    if (*stats) return cmd_stats(cfg, choice, per_week, window_weeks);
    if (*synth) return cmd_synth(cfg, gen);
  } catch (const EmptyResult& e) {
    std::cerr << "recip: " << e.what() << '\n';
    return kEmptyResult;
  } catch (const recip::Error& e) {
    std::cerr << "recip: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "recip: unexpected failure: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
