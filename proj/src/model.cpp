#include "mucalc/model.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

namespace mucalc {

std::vector<std::size_t> WorldSet::members() const {
  std::vector<std::size_t> out;
  for (auto i = bits_.find_first(); i != decltype(bits_)::npos; i = bits_.find_next(i)) out.push_back(i);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> Relation::pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < rows_.size(); ++a)
    for (auto b : rows_[a].members()) out.emplace_back(a, b);
  return out;
}

std::size_t Relation::count() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.count();
  return n;
}

Relation Relation::compose(const Relation& other) const {
  Relation out(universe());
  for (std::size_t a = 0; a < rows_.size(); ++a)
    for (auto b : rows_[a].members()) out.rows_[a] |= other.rows_[b];
  return out;
}

void Relation::make_reflexive() {
  for (std::size_t a = 0; a < rows_.size(); ++a) rows_[a].insert(a);
}

void Relation::make_transitive() {
  // Warshall
  for (std::size_t k = 0; k < rows_.size(); ++k)
    for (std::size_t a = 0; a < rows_.size(); ++a)
      if (rows_[a].contains(k)) rows_[a] |= rows_[k];
}

const char* variant_name(LogicVariant v) {
  switch (v) {
    case LogicVariant::CK: return "CK";
    case LogicVariant::IK: return "IK";
    case LogicVariant::GK: return "GK";
  }
  return "?";
}

LogicVariant parse_variant(const std::string& s) {
  std::string t;
  for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "ck") return LogicVariant::CK;
  if (t == "ik") return LogicVariant::IK;
  if (t == "gk") return LogicVariant::GK;
  throw std::invalid_argument("unknown logic variant: " + s);
}

std::size_t Model::index(const std::string& world) const {
  auto i = find(world);
  if (!i) throw std::out_of_range("unknown world: " + world);
  return *i;
}

std::optional<std::size_t> Model::find(const std::string& world) const {
  auto it = std::find(worlds.begin(), worlds.end(), world);
  if (it == worlds.end()) return std::nullopt;
  return static_cast<std::size_t>(it - worlds.begin());
}

WorldSet Model::valuation(const std::string& prop) const {
  auto it = val.find(prop);
  return it == val.end() ? WorldSet(size()) : it->second;
}

bool operator==(const Model& a, const Model& b) {
  return a.worlds == b.worlds && a.fallible == b.fallible && a.pre == b.pre && a.rel == b.rel && a.val == b.val;
}

Model make_model(std::vector<std::string> worlds) {
  Model m;
  const auto n = worlds.size();
  m.worlds = std::move(worlds);
  m.fallible = WorldSet(n);
  m.pre = Relation(n);
  m.rel = Relation(n);
  return m;
}

// ---------------------------------------------------------------------------

ValidationFailed::ValidationFailed(std::vector<Violation> report)
    : std::runtime_error([&] {
        std::string msg = "model validation failed";
        for (const auto& v : report) msg += "; " + v.message;
        return msg;
      }()),
      report_(std::move(report)) {}

std::vector<Violation> validate(const Model& m, LogicVariant variant) {
  std::vector<Violation> out;
  const auto n = m.size();
  const auto& W = m.worlds;
  auto add = [&](std::string cond, std::vector<std::string> ws, std::string msg) {
    out.push_back({std::move(cond), std::move(ws), std::move(msg)});
  };
  if (n == 0) add("non-empty", {}, "W must be non-empty");
  for (std::size_t w = 0; w < n; ++w)
    if (!m.pre.contains(w, w)) add("pre-reflexive", {W[w]}, "pre not reflexive at " + W[w]);
  for (std::size_t a = 0; a < n; ++a)
    for (auto b : m.pre.successors(a).members())
      for (auto c : m.pre.successors(b).members())
        if (!m.pre.contains(a, c))
          add("pre-transitive", {W[a], W[b], W[c]},
              "pre not transitive: " + W[a] + " ⪯ " + W[b] + " ⪯ " + W[c] + " but not " + W[a] + " ⪯ " + W[c]);
  for (const auto& [p, vp] : m.val) {
    for (auto a : vp.members())
      for (auto b : m.pre.successors(a).members())
        if (!vp.contains(b))
          add("heredity", {W[a], W[b]}, "V(" + p + ") not upward closed: " + W[a] + " ⪯ " + W[b]);
    for (auto f : m.fallible.members())
      if (!vp.contains(f)) add("fallible-valuation", {W[f]}, "fallible world " + W[f] + " not in V(" + p + ")");
  }
  for (auto f : m.fallible.members()) {
    for (auto b : m.pre.successors(f).members())
      if (!m.fallible.contains(b))
        add("fallible-pre-closed", {W[f], W[b]}, "W⊥ not closed under ⪯: " + W[f] + " ⪯ " + W[b]);
    for (auto b : m.rel.successors(f).members())
      if (!m.fallible.contains(b))
        add("fallible-rel-closed", {W[f], W[b]}, "W⊥ not closed under R: " + W[f] + " R " + W[b]);
  }
  if (variant == LogicVariant::CK) return out;

  if (!m.fallible.empty()) add("no-fallible", {}, "W⊥ = ∅ required for " + std::string(variant_name(variant)));
  // forward confluence: w ⪯ w', w R v  ⇒  ∃v'. w' R v' and v ⪯ v'
  for (std::size_t w = 0; w < n; ++w)
    for (auto w2 : m.pre.successors(w).members())
      for (auto v : m.rel.successors(w).members()) {
        bool ok = false;
        for (auto v2 : m.rel.successors(w2).members())
          if (m.pre.contains(v, v2)) ok = true;
        if (!ok)
          add("forward-confluence", {W[w], W[w2], W[v]},
              "not forward confluent at " + W[w] + " ⪯ " + W[w2] + ", " + W[w] + " R " + W[v]);
      }
  // backward confluence: w R v ⪯ v'  ⇒  ∃w'. w ⪯ w' R v'
  for (std::size_t w = 0; w < n; ++w)
    for (auto v : m.rel.successors(w).members())
      for (auto v2 : m.pre.successors(v).members()) {
        bool ok = false;
        for (auto w2 : m.pre.successors(w).members())
          if (m.rel.contains(w2, v2)) ok = true;
        if (!ok)
          add("backward-confluence", {W[w], W[v], W[v2]},
              "not backward confluent at " + W[w] + " R " + W[v] + " ⪯ " + W[v2]);
      }
  if (variant == LogicVariant::IK) return out;

  for (std::size_t w = 0; w < n; ++w)
    for (auto v : m.pre.successors(w).members())
      for (auto u : m.pre.successors(w).members())
        if (v < u && !m.pre.contains(v, u) && !m.pre.contains(u, v))
          add("local-linearity", {W[w], W[v], W[u]},
              "not locally linear at " + W[w] + ": " + W[v] + " and " + W[u] + " incomparable");
  return out;
}

Model close(Model m, const CloseOptions& options, LogicVariant variant) {
  if (options.pre) {
    m.pre.make_reflexive();
    m.pre.make_transitive();
  }
  if (options.fallible) {
    // Fallibility spreads along ⪯ and R until stable, then every fallible
    // world satisfies every proposition.
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto f : m.fallible.members()) {
        WorldSet next = m.fallible | m.pre.successors(f) | m.rel.successors(f);
        if (next != m.fallible) {
          m.fallible = next;
          changed = true;
        }
      }
    }
    for (auto& [p, vp] : m.val) vp |= m.fallible;
  }
  if (options.heredity) {
    for (auto& [p, vp] : m.val) {
      WorldSet up = vp;
      for (auto a : vp.members()) up |= m.pre.successors(a);
      // One step suffices when ⪯ is transitive; iterate otherwise.
      while (up != vp) {
        vp = up;
        for (auto a : vp.members()) up |= m.pre.successors(a);
      }
    }
  }
  auto report = validate(m, variant);
  if (!report.empty()) throw ValidationFailed(std::move(report));
  return m;
}

Relation compose_pre_rel(const Model& m) { return m.pre.compose(m.rel); }

// ---------------------------------------------------------------------------
// Enumeration

namespace {

std::vector<std::string> world_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(i));
  return out;
}

Relation relation_from_mask(std::size_t n, std::uint64_t mask) {
  Relation r(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (mask >> (a * n + b) & 1U) r.insert(a, b);
  return r;
}

WorldSet set_from_mask(std::size_t n, std::uint64_t mask) {
  WorldSet s(n);
  for (std::size_t i = 0; i < n; ++i)
    if (mask >> i & 1U) s.insert(i);
  return s;
}

bool upward_closed(const Relation& pre, const WorldSet& s) {
  for (auto a : s.members())
    if (!pre.successors(a).subset_of(s)) return false;
  return true;
}

bool frame_conditions_hold(const Model& m, LogicVariant variant) {
  if (variant == LogicVariant::CK) return true;
  for (const auto& v : validate(m, variant))
    if (v.condition == "forward-confluence" || v.condition == "backward-confluence" ||
        v.condition == "local-linearity")
      return false;
  return true;
}

}  // namespace

void for_each_model(std::size_t max_worlds, const std::vector<std::string>& props, LogicVariant variant,
                    const std::function<bool(const Model&)>& visit) {
  if (max_worlds > 4) throw std::invalid_argument("enumeration is limited to 4 worlds");
  for (std::size_t n = 1; n <= max_worlds; ++n) {
    const std::uint64_t rel_masks = std::uint64_t{1} << (n * n);
    const std::uint64_t set_masks = std::uint64_t{1} << n;
    // Preorders: reflexive and transitive relations.
    std::vector<Relation> preorders;
    for (std::uint64_t mask = 0; mask < rel_masks; ++mask) {
      Relation r = relation_from_mask(n, mask);
      Relation c = r;
      c.make_reflexive();
      c.make_transitive();
      if (c == r) preorders.push_back(std::move(r));
    }
    for (const auto& pre : preorders) {
      std::vector<WorldSet> upsets;
      for (std::uint64_t mask = 0; mask < set_masks; ++mask) {
        WorldSet s = set_from_mask(n, mask);
        if (upward_closed(pre, s)) upsets.push_back(std::move(s));
      }
      for (std::uint64_t rmask = 0; rmask < rel_masks; ++rmask) {
        Model m = make_model(world_names(n));
        m.pre = pre;
        m.rel = relation_from_mask(n, rmask);
        if (!frame_conditions_hold(m, variant)) continue;
        for (const auto& fall : upsets) {
          if (variant != LogicVariant::CK && !fall.empty()) continue;
          bool rel_closed = true;
          for (auto f : fall.members())
            if (!m.rel.successors(f).subset_of(fall)) rel_closed = false;
          if (!rel_closed) continue;
          m.fallible = fall;
          std::vector<const WorldSet*> choices;
          for (const auto& u : upsets)
            if (fall.subset_of(u)) choices.push_back(&u);
          // Odometer over one up-set per proposition.
          std::vector<std::size_t> pick(props.size(), 0);
          while (true) {
            m.val.clear();
            for (std::size_t i = 0; i < props.size(); ++i) m.val[props[i]] = *choices[pick[i]];
            if (!visit(m)) return;
            std::size_t i = 0;
            while (i < pick.size() && ++pick[i] == choices.size()) pick[i++] = 0;
            if (i == pick.size()) break;
          }
        }
      }
    }
  }
}

std::vector<Model> enumerate_models(std::size_t max_worlds, const std::vector<std::string>& props,
                                    LogicVariant variant) {
  std::vector<Model> out;
  for_each_model(max_worlds, props, variant, [&](const Model& m) {
    out.push_back(m);
    return true;
  });
  return out;
}

Model random_model(std::uint64_t seed, const RandomModelParams& params) {
  if (params.worlds == 0) throw std::invalid_argument("random_model needs at least one world");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const auto n = params.worlds;
  const bool intuitionistic = params.variant != LogicVariant::CK;
  for (std::size_t attempt = 0; attempt < params.max_attempts; ++attempt) {
    Model m = make_model(world_names(n));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b && coin(rng) < params.pre_density) m.pre.insert(a, b);
        if (coin(rng) < params.rel_density) m.rel.insert(a, b);
      }
    if (!intuitionistic)
      for (std::size_t a = 0; a < n; ++a)
        if (coin(rng) < params.fallible_density) m.fallible.insert(a);
    for (const auto& p : params.props) {
      WorldSet s(n);
      for (std::size_t a = 0; a < n; ++a)
        if (coin(rng) < params.val_density) s.insert(a);
      m.val[p] = s;
    }
    m.pre.make_reflexive();
    m.pre.make_transitive();
    if (!frame_conditions_hold(m, params.variant)) continue;
    return close(std::move(m), CloseOptions::all(), params.variant);
  }
  throw GenerationBudgetExceeded("no " + std::string(variant_name(params.variant)) + " model after " +
                                 std::to_string(params.max_attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

std::size_t world_ref(const Model& m, const json& j, const char* field) {
  if (!j.is_string()) throw ModelFormatError(std::string(field) + ": world ids must be strings");
  auto i = m.find(j.get<std::string>());
  if (!i) throw ModelFormatError(std::string(field) + ": unknown world '" + j.get<std::string>() + "'");
  return *i;
}

Relation relation_from_json(const Model& m, const json& doc, const char* field) {
  Relation r(m.size());
  if (!doc.contains(field)) return r;
  const auto& arr = doc.at(field);
  if (!arr.is_array()) throw ModelFormatError(std::string(field) + " must be an array of pairs");
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2) throw ModelFormatError(std::string(field) + " entries must be pairs");
    r.insert(world_ref(m, p[0], field), world_ref(m, p[1], field));
  }
  return r;
}

json world_list(const Model& m, const WorldSet& s) {
  json out = json::array();
  for (auto i : s.members()) out.push_back(m.worlds[i]);
  return out;
}

json pair_list(const Model& m, const Relation& r) {
  json out = json::array();
  for (auto [a, b] : r.pairs()) out.push_back(json::array({m.worlds[a], m.worlds[b]}));
  return out;
}

}  // namespace

Model model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelFormatError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("worlds") || !doc.at("worlds").is_array())
    throw ModelFormatError("model document needs a \"worlds\" array");
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& w : doc.at("worlds")) {
    if (!w.is_string()) throw ModelFormatError("world ids must be strings");
    if (!seen.insert(w.get<std::string>()).second)
      throw ModelFormatError("duplicate world '" + w.get<std::string>() + "'");
    names.push_back(w.get<std::string>());
  }
  Model m = make_model(std::move(names));
  if (doc.contains("fallible")) {
    if (!doc.at("fallible").is_array()) throw ModelFormatError("fallible must be an array");
    for (const auto& w : doc.at("fallible")) m.fallible.insert(world_ref(m, w, "fallible"));
  }
  m.pre = relation_from_json(m, doc, "pre");
  m.rel = relation_from_json(m, doc, "rel");
  if (doc.contains("val")) {
    if (!doc.at("val").is_object()) throw ModelFormatError("val must be an object");
    for (const auto& [p, ws] : doc.at("val").items()) {
      if (p.empty() || !std::islower(static_cast<unsigned char>(p[0])))
        throw ModelFormatError("proposition names must start with a lowercase letter: '" + p + "'");
      if (!ws.is_array()) throw ModelFormatError("val entries must be arrays");
      WorldSet s(m.size());
      for (const auto& w : ws) s.insert(world_ref(m, w, "val"));
      m.val[p] = s;
    }
  }
  return m;
}

std::string model_to_json(const Model& m) {
  json doc;
  doc["worlds"] = m.worlds;
  doc["fallible"] = world_list(m, m.fallible);
  doc["pre"] = pair_list(m, m.pre);
  doc["rel"] = pair_list(m, m.rel);
  json val = json::object();
  for (const auto& [p, s] : m.val) val[p] = world_list(m, s);
  doc["val"] = val;
  return doc.dump();
}

}  // namespace mucalc
