#include <algorithm>
#include <cmath>
#include <fstream>

#include "blogc/interp/interp.hpp"
#include "json.hpp"

namespace blogc::interp {

namespace {

using json = nlohmann::json;

bool same_alpha(double a, double b, double& rel) {
  rel = 0.0;
  const bool a_zero = a <= -1e307;
  const bool b_zero = b <= -1e307;
  if (a_zero || b_zero) return a_zero == b_zero;
  rel = std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
  return rel <= 1e-9;
}

std::vector<std::string> sorted_names(const Semantics& s, const std::set<Id>& ids) {
  std::vector<std::string> out;
  for (const Id& id : ids) out.push_back(s.name(id));
  std::sort(out.begin(), out.end());
  return out;
}

class Replayer {
 public:
  Replayer(const Semantics& s, ReplayReport& rep) : s_(s), rep_(rep) {}

  void init(const json& j) {
    acu_ = j.value("acu", true);
    rc_ = j.value("rc", true);
    for (const auto& e : j.at("world")) {
      const Id id = parse_id(e[0].get<std::string>());
      w_[id] = parse_value(id, e[1].get<std::string>());
    }
    const std::set<Id> keep = supported_closure(s_, w_);
    for (const auto& kv : w_)
      if (!keep.count(kv.first)) fail("initial world holds " + s_.name(kv.first) + ", which nothing supports");
  }

  void step(const json& j) {
    const std::uint64_t i = j.at("i").get<std::uint64_t>();
    where_ = "step " + std::to_string(i);
    const Id x = parse_id(j.at("var").get<std::string>());
    if (!w_.count(x)) fail(s_.name(x) + " is not in the world");
    std::map<Id, Value> proposed;
    for (const auto& e : j.at("proposed")) {
      const Id id = parse_id(e[0].get<std::string>());
      proposed[id] = parse_value(id, e[1].get<std::string>());
    }
    auto px = proposed.find(x);
    if (px == proposed.end()) fail("the trace has no proposed value for " + s_.name(x));
    std::vector<Id> extra;
    for (const auto& kv : proposed)
      if (kv.first != x && !w_.count(kv.first) && !s_.tracked(kv.first)) extra.push_back(kv.first);
    const MakeValue make = [&](const Id& id, const DistInst&) -> Value {
      auto it = proposed.find(id);
      if (it == proposed.end()) fail("w' needs " + s_.name(id) + ", which the proposal did not sample");
      return it->second;
    };
    FullStep st = full_world_proposal(s_, w_, x, px->second, make, extra);

    if (st.w_old != j.at("w").get<std::size_t>())
      fail("|w| = " + std::to_string(st.w_old) + " but the program reports " + std::to_string(j.at("w").get<std::size_t>()));
    if (!j.at("log_alpha").is_null()) {
      const double a = j.at("log_alpha").get<double>();
      double rel = 0.0;
      if (!same_alpha(a, st.log_alpha, rel))
        fail("log alpha " + rt::fmt_real(a) + " for " + s_.name(x) + " but the full-world ratio gives " +
             rt::fmt_real(st.log_alpha));
      rep_.max_rel_err = std::max(rep_.max_rel_err, rel);
      ++rep_.alpha_checks;
      if (std::isfinite(st.log_alpha) && st.w_new != j.at("w_new").get<std::size_t>())
        fail("|w'| = " + std::to_string(st.w_new) + " but the program reports " +
             std::to_string(j.at("w_new").get<std::size_t>()));
    }
    ++rep_.steps;
    if (j.at("accepted").get<bool>()) {
      w_ = std::move(st.proposed);
      ++rep_.accepted;
    }
    if (j.contains("state")) check_state(j.at("state"));
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw InterpError((where_.empty() ? std::string("init") : where_) + ": " + msg);
  }

  Id parse_id(const std::string& name) const {
    Id id;
    if (!s_.parse_name(name, id)) fail("unknown variable " + name);
    return id;
  }

  Value parse_value(const Id& id, const std::string& v) const {
    Value out;
    if (!s_.parse_value(id, v, out)) fail("bad value '" + v + "' for " + s_.name(id));
    return out;
  }

  void check_state(const json& state) {
    std::map<Id, const json*> rec;
    for (const auto& e : state) rec[parse_id(e[0].get<std::string>())] = &e;
    for (const auto& kv : w_)
      if (!rec.count(kv.first)) fail(s_.name(kv.first) + " belongs to the world but the program dropped it");
    const Structure st = structure(s_, w_);
    static const std::set<Id> none;
    for (const auto& [id, e] : rec) {
      auto it = w_.find(id);
      if (it == w_.end()) fail("the program keeps " + s_.name(id) + ", which is not in the minimal world");
      if (s_.show(id, it->second) != (*e)[1].get<std::string>())
        fail(s_.name(id) + " = " + (*e)[1].get<std::string>() + ", expected " + s_.show(id, it->second));
      auto ch = st.ch.find(id);
      const std::set<Id>& children = ch == st.ch.end() ? none : ch->second;
      if (rc_ && s_.tracked(id) && (*e)[2].get<std::size_t>() != children.size())
        fail("cnt(" + s_.name(id) + ") = " + std::to_string((*e)[2].get<int>()) + ", expected " +
             std::to_string(children.size()));
      if (acu_) {
        if ((*e)[3].get<std::vector<std::string>>() != sorted_names(s_, children))
          fail("Ch(" + s_.name(id) + ") differs from the recomputed children");
        auto co = st.cont.find(id);
        if ((*e)[4].get<std::vector<std::string>>() != sorted_names(s_, co == st.cont.end() ? none : co->second))
          fail("Cont(" + s_.name(id) + ") differs from the recomputed contingent set");
      }
    }
    ++rep_.state_checks;
  }

  const Semantics& s_;
  ReplayReport& rep_;
  WorldMap w_;
  bool acu_ = true;
  bool rc_ = true;
  std::string where_;
};

}  // namespace

std::string ReplayReport::to_json() const {
  json j;
  j["ok"] = ok();
  j["steps"] = steps;
  j["accepted"] = accepted;
  j["alpha_checks"] = alpha_checks;
  j["state_checks"] = state_checks;
  j["max_rel_err"] = max_rel_err;
  if (!ok()) j["failure"] = failure;
  return j.dump();
}

ReplayReport check_replay(const fe::TypedModel& tm, const std::string& trace_path, std::uint64_t max_steps) {
  ReplayReport rep;
  std::ifstream in(trace_path);
  if (!in) {
    rep.failure = "cannot open " + trace_path;
    return rep;
  }
  const Semantics s(tm);
  Replayer r(s, rep);
  std::string line;
  bool seen_init = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "init") {
        r.init(j);
        seen_init = true;
      } else if (kind == "step") {
        if (!seen_init) throw InterpError("trace has a step before its init record");
        if (max_steps && rep.steps >= max_steps) break;
        r.step(j);
      }
    }
    if (!seen_init) rep.failure = "trace has no init record";
  } catch (const std::exception& e) {
    rep.failure = e.what();
  }
  return rep;
}

}  // namespace blogc::interp
