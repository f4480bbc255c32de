#pragma once

// Domain types, delimited-text ingestion and the bipartite message graph.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace recip {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number when known.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct UserId {
  std::uint64_t value = 0;
  friend auto operator<=>(const UserId&, const UserId&) = default;
};

inline std::ostream& operator<<(std::ostream& os, UserId id) { return os << id.value; }

// Dense position of a user inside a Population; ordering matches UserId ordering.
using UserIndex = std::uint32_t;

// Integer seconds, UTC.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

enum class Gender : std::uint8_t { Male, Female };

inline Gender opposite(Gender g) { return g == Gender::Male ? Gender::Female : Gender::Male; }

inline char gender_code(Gender g) { return g == Gender::Male ? 'M' : 'F'; }

inline std::optional<Gender> parse_gender(std::string_view token) {
  if (token == "M" || token == "m" || token == "male" || token == "Male") return Gender::Male;
  if (token == "F" || token == "f" || token == "female" || token == "Female") return Gender::Female;
  return std::nullopt;
}

enum class AttributeKind : std::uint8_t { Nominal, Numeric };

inline std::string_view kind_name(AttributeKind k) {
  return k == AttributeKind::Numeric ? "numeric" : "nominal";
}

inline std::optional<AttributeKind> parse_kind(std::string_view s) {
  if (s == "numeric" || s == "num" || s == "n") return AttributeKind::Numeric;
  if (s == "nominal" || s == "nom" || s == "c" || s == "categorical") return AttributeKind::Nominal;
  return std::nullopt;
}

struct AttributeDef {
  std::string name;
  AttributeKind kind = AttributeKind::Nominal;
  friend bool operator==(const AttributeDef&, const AttributeDef&) = default;
};

// Ordered attribute schema. Attributes are kept sorted by name so that every
// consumer iterates them in the same order.
class AttributeLayout {
 public:
  AttributeLayout() = default;
  explicit AttributeLayout(std::vector<AttributeDef> defs) : defs_(std::move(defs)) {
    std::sort(defs_.begin(), defs_.end(),
              [](const AttributeDef& a, const AttributeDef& b) { return a.name < b.name; });
    for (std::size_t i = 1; i < defs_.size(); ++i)
      if (defs_[i].name == defs_[i - 1].name) throw Error("duplicate attribute '" + defs_[i].name + "'");
  }

  std::size_t size() const noexcept { return defs_.size(); }
  bool empty() const noexcept { return defs_.empty(); }
  const AttributeDef& operator[](std::size_t i) const { return defs_[i]; }
  std::span<const AttributeDef> defs() const noexcept { return defs_; }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = std::lower_bound(defs_.begin(), defs_.end(), name,
                               [](const AttributeDef& d, std::string_view n) { return d.name < n; });
    if (it == defs_.end() || it->name != name) return std::nullopt;
    return static_cast<std::size_t>(it - defs_.begin());
  }

  friend bool operator==(const AttributeLayout&, const AttributeLayout&) = default;

 private:
  std::vector<AttributeDef> defs_;
};

// Missing (monostate), nominal token, or numeric value.
using AttributeValue = std::variant<std::monostate, std::string, double>;

inline bool is_known(const AttributeValue& v) { return !std::holds_alternative<std::monostate>(v); }

struct UserProfile {
  UserId id;
  Gender gender = Gender::Male;
  Timestamp registered_at = 0;
  // Indexed by AttributeLayout position.
  std::vector<AttributeValue> attributes;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

struct MessageEvent {
  UserId sender;
  UserId receiver;
  Timestamp sent_at = 0;
  friend bool operator==(const MessageEvent&, const MessageEvent&) = default;
};

// First message of an unordered user pair, oriented initiator -> receiver.
struct Contact {
  UserIndex from = 0;
  UserIndex to = 0;
  Timestamp at = 0;
  std::optional<Timestamp> replied_at;
  // Position of the initiating message in the time-ordered event list.
  std::size_t event = 0;

  bool replied() const noexcept { return replied_at.has_value(); }
};

// Immutable set of users, sorted by id.
class Population {
 public:
  Population(AttributeLayout layout, std::vector<UserProfile> profiles)
      : layout_(std::move(layout)), profiles_(std::move(profiles)) {
    std::sort(profiles_.begin(), profiles_.end(),
              [](const UserProfile& a, const UserProfile& b) { return a.id < b.id; });
    index_.reserve(profiles_.size());
    for (std::size_t i = 0; i < profiles_.size(); ++i) {
      if (i > 0 && profiles_[i].id == profiles_[i - 1].id)
        throw Error("duplicate user id " + std::to_string(profiles_[i].id.value));
      if (profiles_[i].attributes.size() != layout_.size())
        throw Error("user " + std::to_string(profiles_[i].id.value) + " has wrong attribute count");
      index_.emplace(profiles_[i].id.value, static_cast<UserIndex>(i));
    }
  }

  const AttributeLayout& layout() const noexcept { return layout_; }
  std::size_t size() const noexcept { return profiles_.size(); }
  const UserProfile& operator[](UserIndex i) const { return profiles_[i]; }
  std::span<const UserProfile> profiles() const noexcept { return profiles_; }

  std::optional<UserIndex> find(UserId id) const {
    auto it = index_.find(id.value);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  UserIndex index_of(UserId id) const {
    auto idx = find(id);
    if (!idx) throw Error("unknown user id " + std::to_string(id.value));
    return *idx;
  }

  Gender gender(UserIndex i) const { return profiles_[i].gender; }

  std::size_t count(Gender g) const {
    return static_cast<std::size_t>(std::count_if(profiles_.begin(), profiles_.end(),
                                                  [g](const UserProfile& p) { return p.gender == g; }));
  }

 private:
  AttributeLayout layout_;
  std::vector<UserProfile> profiles_;
  std::unordered_map<std::uint64_t, UserIndex> index_;
};

// Walks a time-ordered message list and returns one Contact per unordered
// pair. The first message of a pair is the initial contact; the first later
// message in the opposite direction is its reply. Everything else between the
// same two users is ignored.
inline std::vector<Contact> derive_contacts(std::span<const UserIndex> senders,
                                            std::span<const UserIndex> receivers,
                                            std::span<const Timestamp> times) {
  std::vector<Contact> contacts;
  std::unordered_map<std::uint64_t, std::size_t> by_pair;
  by_pair.reserve(senders.size());
  for (std::size_t e = 0; e < senders.size(); ++e) {
    const UserIndex s = senders[e], r = receivers[e];
    const std::uint64_t key = (std::uint64_t{std::min(s, r)} << 32) | std::max(s, r);
    auto [it, inserted] = by_pair.try_emplace(key, contacts.size());
    if (inserted) {
      contacts.push_back(Contact{s, r, times[e], std::nullopt, e});
      continue;
    }
    Contact& c = contacts[it->second];
    if (!c.replied() && c.from == r) c.replied_at = times[e];
  }
  return contacts;
}

// Directed bipartite message graph over a shared Population. Immutable after
// construction; concurrent reads are safe.
class InteractionGraph {
 public:
  InteractionGraph(std::shared_ptr<const Population> population, std::vector<MessageEvent> events)
      : population_(std::move(population)) {
    if (!population_) throw Error("graph requires a population");
    const Population& pop = *population_;
    std::stable_sort(events.begin(), events.end(),
                     [](const MessageEvent& a, const MessageEvent& b) { return a.sent_at < b.sent_at; });
    events_ = std::move(events);
    senders_.reserve(events_.size());
    receivers_.reserve(events_.size());
    times_.reserve(events_.size());
    received_messages_.assign(pop.size(), 0);
    for (const MessageEvent& ev : events_) {
      if (ev.sender == ev.receiver)
        throw Error("user " + std::to_string(ev.sender.value) + " messages itself");
      const UserIndex s = pop.index_of(ev.sender);
      const UserIndex r = pop.index_of(ev.receiver);
      if (pop.gender(s) == pop.gender(r))
        throw Error("same-gender message " + std::to_string(ev.sender.value) + " -> " +
                    std::to_string(ev.receiver.value) + " breaks bipartiteness");
      senders_.push_back(s);
      receivers_.push_back(r);
      times_.push_back(ev.sent_at);
      ++received_messages_[r];
    }
    contacts_ = derive_contacts(senders_, receivers_, times_);
    build_adjacency();
  }

  // Convenience for building a graph together with its population.
  InteractionGraph(AttributeLayout layout, std::vector<UserProfile> profiles, std::vector<MessageEvent> events)
      : InteractionGraph(std::make_shared<const Population>(std::move(layout), std::move(profiles)),
                         std::move(events)) {}

  const Population& population() const noexcept { return *population_; }
  std::shared_ptr<const Population> shared_population() const noexcept { return population_; }
  std::size_t user_count() const noexcept { return population_->size(); }

  // Time-ordered; ties keep input order.
  std::span<const MessageEvent> events() const noexcept { return events_; }
  UserIndex event_sender(std::size_t e) const { return senders_[e]; }
  UserIndex event_receiver(std::size_t e) const { return receivers_[e]; }

  std::span<const Contact> contacts() const noexcept { return contacts_; }

  // Se(x): users x initially contacted, ascending.
  std::span<const UserIndex> sent_to(UserIndex u) const {
    return {sent_.data() + sent_offsets_[u], sent_.data() + sent_offsets_[u + 1]};
  }
  // Re(x): users who initially contacted x, ascending.
  std::span<const UserIndex> received_from(UserIndex u) const {
    return {received_.data() + received_offsets_[u], received_.data() + received_offsets_[u + 1]};
  }

  // Raw message count (including repeats and replies) addressed to u.
  std::size_t messages_received(UserIndex u) const { return received_messages_[u]; }

  // Initiators whose contact u answered, ascending.
  std::span<const UserIndex> answered(UserIndex u) const {
    return {answered_.data() + answered_offsets_[u], answered_.data() + answered_offsets_[u + 1]};
  }

  // Number of contacts u answered.
  std::size_t replies_sent(UserIndex u) const { return answered_offsets_[u + 1] - answered_offsets_[u]; }

  std::vector<std::pair<UserIndex, UserIndex>> initial_contacts() const {
    std::vector<std::pair<UserIndex, UserIndex>> out;
    out.reserve(contacts_.size());
    for (const Contact& c : contacts_) out.emplace_back(c.from, c.to);
    std::sort(out.begin(), out.end());
    return out;
  }

  // (x -> y) pairs whose initial contact x -> y was answered by y.
  std::vector<std::pair<UserIndex, UserIndex>> replies() const {
    std::vector<std::pair<UserIndex, UserIndex>> out;
    for (const Contact& c : contacts_)
      if (c.replied()) out.emplace_back(c.from, c.to);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void build_adjacency() {
    const std::size_t n = population_->size();
    sent_offsets_.assign(n + 1, 0);
    received_offsets_.assign(n + 1, 0);
    answered_offsets_.assign(n + 1, 0);
    for (const Contact& c : contacts_) {
      ++sent_offsets_[c.from + 1];
      ++received_offsets_[c.to + 1];
      if (c.replied()) ++answered_offsets_[c.to + 1];
    }
    std::partial_sum(sent_offsets_.begin(), sent_offsets_.end(), sent_offsets_.begin());
    std::partial_sum(received_offsets_.begin(), received_offsets_.end(), received_offsets_.begin());
    std::partial_sum(answered_offsets_.begin(), answered_offsets_.end(), answered_offsets_.begin());
    answered_.resize(answered_offsets_[n]);
    std::vector<std::size_t> a_fill(answered_offsets_.begin(), answered_offsets_.end() - 1);
    for (const Contact& c : contacts_)
      if (c.replied()) answered_[a_fill[c.to]++] = c.from;
    sent_.resize(contacts_.size());
    received_.resize(contacts_.size());
    std::vector<std::size_t> s_fill(sent_offsets_.begin(), sent_offsets_.end() - 1);
    std::vector<std::size_t> r_fill(received_offsets_.begin(), received_offsets_.end() - 1);
    for (const Contact& c : contacts_) {
      sent_[s_fill[c.from]++] = c.to;
      received_[r_fill[c.to]++] = c.from;
    }
    for (std::size_t u = 0; u < n; ++u) {
      std::sort(sent_.begin() + sent_offsets_[u], sent_.begin() + sent_offsets_[u + 1]);
      std::sort(received_.begin() + received_offsets_[u], received_.begin() + received_offsets_[u + 1]);
      std::sort(answered_.begin() + answered_offsets_[u], answered_.begin() + answered_offsets_[u + 1]);
    }
  }

  std::shared_ptr<const Population> population_;
  std::vector<MessageEvent> events_;
  std::vector<UserIndex> senders_;
  std::vector<UserIndex> receivers_;
  std::vector<Timestamp> times_;
  std::vector<Contact> contacts_;
  std::vector<std::size_t> sent_offsets_, received_offsets_;
  std::vector<UserIndex> sent_, received_;
  std::vector<std::size_t> answered_offsets_;
  std::vector<UserIndex> answered_;
  std::vector<std::size_t> received_messages_;
};

// derive_replies over a graph, reported with user ids.
inline std::vector<std::pair<UserId, UserId>> derive_replies(const InteractionGraph& g) {
  std::vector<std::pair<UserId, UserId>> out;
  for (auto [x, y] : g.replies()) out.emplace_back(g.population()[x].id, g.population()[y].id);
  return out;
}

// ---------------------------------------------------------------------------
// Delimited text

namespace text {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (delim == '\t') {
      out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    } else {
      out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
  s = trim(s);
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Fixed-point rendering used by reports.
inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, ptr);
}

// Reads the next line, skipping blank ones. Returns false at end of stream.
inline bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) return true;
  }
  return false;
}

}  // namespace text

// Epoch seconds, or ISO-8601 "YYYY-MM-DD[(T| )hh:mm[:ss]][Z]".
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
  s = text::trim(s);
  if (s.empty()) return std::nullopt;
  if (auto epoch = text::parse_int<Timestamp>(s)) return epoch;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = text::parse_int<int>(s.substr(0, 4));
  auto mo = text::parse_int<unsigned>(s.substr(5, 2));
  auto d = text::parse_int<unsigned>(s.substr(8, 2));
  if (!y || !mo || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{*mo}, std::chrono::day{*d}};
  if (!ymd.ok()) return std::nullopt;
  Timestamp secs = std::chrono::sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay;
  std::string_view rest = s.substr(10);
  if (rest.empty()) return secs;
  if (rest.front() != 'T' && rest.front() != ' ') return std::nullopt;
  rest.remove_prefix(1);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  if (rest.size() != 5 && rest.size() != 8) return std::nullopt;
  auto hh = text::parse_int<int>(rest.substr(0, 2));
  auto mm = text::parse_int<int>(rest.substr(3, 2));
  int ss = 0;
  if (rest[2] != ':' || !hh || !mm || *hh > 23 || *mm > 59) return std::nullopt;
  if (rest.size() == 8) {
    auto sec = text::parse_int<int>(rest.substr(6, 2));
    if (rest[5] != ':' || !sec || *sec > 60) return std::nullopt;
    ss = *sec;
  }
  return secs + *hh * 3600 + *mm * 60 + ss;
}

// ---------------------------------------------------------------------------
// Ingestion

struct IngestOptions {
  char delimiter = ',';
  // Overrides for attribute kinds declared (or not) in the header.
  std::map<std::string, AttributeKind, std::less<>> kinds;
};

struct ProfileTable {
  AttributeLayout layout;
  std::vector<UserProfile> profiles;
  // Cells that failed to parse for their attribute kind and were stored as Missing.
  std::size_t malformed_values = 0;
};

// Header: id, gender, registered_at, then one column per attribute written
// as "name" or "name:kind". Empty cells are Missing.
inline ProfileTable ingest_profiles(std::istream& in, const IngestOptions& opts = {}) {
  std::string line;
  std::size_t line_no = 0;
  if (!text::next_line(in, line, line_no)) throw FormatError("profiles file is empty", 0);
  const auto header = text::split(line, opts.delimiter);
  if (header.size() < 3 || text::trim(header[0]) != "id" || text::trim(header[1]) != "gender" ||
      text::trim(header[2]) != "registered_at")
    throw FormatError("profiles header must start with id,gender,registered_at", line_no);

  std::vector<AttributeDef> defs;
  for (std::size_t c = 3; c < header.size(); ++c) {
    std::string_view cell = text::trim(header[c]);
    AttributeDef def;
    if (auto colon = cell.find(':'); colon != std::string_view::npos) {
      auto kind = parse_kind(cell.substr(colon + 1));
      if (!kind) throw FormatError("unknown attribute kind in header cell '" + std::string(cell) + "'", line_no);
      def.name = std::string(cell.substr(0, colon));
      def.kind = *kind;
    } else {
      def.name = std::string(cell);
    }
    if (def.name.empty()) throw FormatError("empty attribute name in header", line_no);
    if (auto it = opts.kinds.find(def.name); it != opts.kinds.end()) def.kind = it->second;
    defs.push_back(std::move(def));
  }
  // Column c+3 of the file maps to column_slot[c] of the sorted layout.
  std::vector<AttributeDef> file_order = defs;
  ProfileTable table;
  try {
    table.layout = AttributeLayout(std::move(defs));
  } catch (const Error& e) {
    throw FormatError(e.what(), line_no);
  }
  std::vector<std::size_t> column_slot;
  for (const AttributeDef& d : file_order) column_slot.push_back(*table.layout.find(d.name));

  std::unordered_map<std::uint64_t, std::size_t> seen;
  while (text::next_line(in, line, line_no)) {
    const auto cells = text::split(line, opts.delimiter);
    if (cells.size() != header.size())
      throw FormatError("expected " + std::to_string(header.size()) + " columns, found " +
                            std::to_string(cells.size()),
                        line_no);
    auto id = text::parse_int<std::uint64_t>(cells[0]);
    if (!id) throw FormatError("bad user id '" + std::string(cells[0]) + "'", line_no);
    auto gender = parse_gender(text::trim(cells[1]));
    if (!gender) throw FormatError("unknown gender token '" + std::string(cells[1]) + "'", line_no);
    auto reg = parse_timestamp(cells[2]);
    if (!reg) throw FormatError("bad registered_at '" + std::string(cells[2]) + "'", line_no);
    if (auto [it, inserted] = seen.emplace(*id, line_no); !inserted)
      throw FormatError("duplicate user id " + std::to_string(*id) + " (first seen on line " +
                            std::to_string(it->second) + ")",
                        line_no);

    UserProfile p{UserId{*id}, *gender, *reg, std::vector<AttributeValue>(table.layout.size())};
    for (std::size_t c = 0; c < file_order.size(); ++c) {
      const std::string_view cell = text::trim(cells[c + 3]);
      if (cell.empty()) continue;
      AttributeValue& slot = p.attributes[column_slot[c]];
      if (file_order[c].kind == AttributeKind::Numeric) {
        if (auto v = text::parse_double(cell); v && std::isfinite(*v))
          slot = *v;
        else
          ++table.malformed_values;
      } else {
        slot = std::string(cell);
      }
    }
    table.profiles.push_back(std::move(p));
  }
  return table;
}

// Header: sender, receiver, sent_at.
inline std::vector<MessageEvent> read_messages(std::istream& in, const IngestOptions& opts = {}) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<MessageEvent> events;
  if (!text::next_line(in, line, line_no)) return events;
  const auto header = text::split(line, opts.delimiter);
  if (header.size() != 3 || text::trim(header[0]) != "sender" || text::trim(header[1]) != "receiver" ||
      text::trim(header[2]) != "sent_at")
    throw FormatError("messages header must be sender,receiver,sent_at", line_no);
  while (text::next_line(in, line, line_no)) {
    const auto cells = text::split(line, opts.delimiter);
    if (cells.size() != 3)
      throw FormatError("expected 3 columns, found " + std::to_string(cells.size()), line_no);
    auto s = text::parse_int<std::uint64_t>(cells[0]);
    auto r = text::parse_int<std::uint64_t>(cells[1]);
    auto t = parse_timestamp(cells[2]);
    if (!s || !r) throw FormatError("bad user id", line_no);
    if (!t) throw FormatError("bad sent_at '" + std::string(cells[2]) + "'", line_no);
    events.push_back(MessageEvent{UserId{*s}, UserId{*r}, *t});
  }
  return events;
}

inline InteractionGraph ingest_messages(std::istream& in, ProfileTable profiles, const IngestOptions& opts = {}) {
  auto events = read_messages(in, opts);
  return InteractionGraph(std::move(profiles.layout), std::move(profiles.profiles), std::move(events));
}

// ---------------------------------------------------------------------------
// Snapshot: tab-separated sections, used for round-trip checks and caching.

inline void write_snapshot(std::ostream& out, const InteractionGraph& g) {
  const Population& pop = g.population();
  const AttributeLayout& layout = pop.layout();
  out << "recip-graph\t1\n";
  out << "attributes\t" << layout.size() << '\n';
  for (const AttributeDef& d : layout.defs()) out << d.name << '\t' << kind_name(d.kind) << '\n';
  out << "users\t" << pop.size() << '\n';
  for (const UserProfile& p : pop.profiles()) {
    out << p.id.value << '\t' << gender_code(p.gender) << '\t' << p.registered_at;
    for (const AttributeValue& v : p.attributes) {
      out << '\t';
      if (const auto* s = std::get_if<std::string>(&v)) {
        if (s->find_first_of("\t\n") != std::string::npos)
          throw Error("nominal value of user " + std::to_string(p.id.value) + " contains a tab or newline");
        out << *s;
      } else if (const auto* d = std::get_if<double>(&v)) {
        out << text::format_double(*d);
      }
    }
    out << '\n';
  }
  out << "events\t" << g.events().size() << '\n';
  for (const MessageEvent& e : g.events())
    out << e.sender.value << '\t' << e.receiver.value << '\t' << e.sent_at << '\n';
}

inline InteractionGraph read_snapshot(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto expect_section = [&](std::string_view name) -> std::size_t {
    if (!std::getline(in, line)) throw FormatError("truncated snapshot, expected " + std::string(name), line_no);
    ++line_no;
    auto cells = text::split(line, '\t');
    if (cells.size() != 2 || cells[0] != name) throw FormatError("expected section " + std::string(name), line_no);
    auto n = text::parse_int<std::size_t>(cells[1]);
    if (!n) throw FormatError("bad section size", line_no);
    return *n;
  };
  auto next = [&]() -> std::vector<std::string_view> {
    if (!std::getline(in, line)) throw FormatError("truncated snapshot", line_no);
    ++line_no;
    return text::split(line, '\t');
  };

  if (!std::getline(in, line) || line != "recip-graph\t1") throw FormatError("not a graph snapshot", 1);
  ++line_no;
  std::vector<AttributeDef> defs;
  for (std::size_t i = 0, n = expect_section("attributes"); i < n; ++i) {
    auto cells = next();
    auto kind = cells.size() == 2 ? parse_kind(cells[1]) : std::nullopt;
    if (!kind) throw FormatError("bad attribute line", line_no);
    defs.push_back({std::string(cells[0]), *kind});
  }
  AttributeLayout layout(defs);
  std::vector<UserProfile> profiles;
  for (std::size_t i = 0, n = expect_section("users"); i < n; ++i) {
    auto cells = next();
    if (cells.size() != 3 + layout.size()) throw FormatError("bad user line", line_no);
    auto id = text::parse_int<std::uint64_t>(cells[0]);
    auto gender = parse_gender(cells[1]);
    auto reg = text::parse_int<Timestamp>(cells[2]);
    if (!id || !gender || !reg) throw FormatError("bad user line", line_no);
    UserProfile p{UserId{*id}, *gender, *reg, std::vector<AttributeValue>(layout.size())};
    for (std::size_t a = 0; a < layout.size(); ++a) {
      std::string_view cell = cells[3 + a];
      if (cell.empty()) continue;
      if (layout[a].kind == AttributeKind::Numeric) {
        auto v = text::parse_double(cell);
        if (!v) throw FormatError("bad numeric value", line_no);
        p.attributes[a] = *v;
      } else {
        p.attributes[a] = std::string(cell);
      }
    }
    profiles.push_back(std::move(p));
  }
  std::vector<MessageEvent> events;
  for (std::size_t i = 0, n = expect_section("events"); i < n; ++i) {
    auto cells = next();
    if (cells.size() != 3) throw FormatError("bad event line", line_no);
    auto s = text::parse_int<std::uint64_t>(cells[0]);
    auto r = text::parse_int<std::uint64_t>(cells[1]);
    auto t = text::parse_int<Timestamp>(cells[2]);
    if (!s || !r || !t) throw FormatError("bad event line", line_no);
    events.push_back({UserId{*s}, UserId{*r}, *t});
  }
  return InteractionGraph(std::move(layout), std::move(profiles), std::move(events));
}

}  // namespace recip

template <>
struct std::hash<recip::UserId> {
  std::size_t operator()(recip::UserId id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
