#include "asyncst/jsonio.hpp"

#include <sstream>

#include <json.hpp>

#include "asyncst/pretty.hpp"

namespace asyncst {

using nlohmann::json;

namespace {

json valueToJson(const Value& v) {
  struct V {
    json operator()(Int n) const { return n; }
    json operator()(bool b) const { return b; }
    json operator()(const Unit&) const { return json{{"unit", true}}; }
    json operator()(const FutId& f) const { return json{{"fut", f.id}}; }
    json operator()(const ObjRef& o) const { return json{{"obj", o.name}}; }
    json operator()(const ListVal& l) const { return json(l.elems); }
  };
  return std::visit(V{}, v);
}

Value valueFromJson(const json& j) {
  if (j.is_number_integer()) return (Int)j.get<long long>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_array()) {
    ListVal l;
    for (const auto& e : j) l.elems.push_back(e.get<long long>());
    return l;
  }
  if (j.is_object()) {
    if (j.contains("unit")) return Unit{};
    if (j.contains("fut")) return FutId{j["fut"].get<int>()};
    if (j.contains("obj")) return ObjRef{j["obj"].get<std::string>()};
  }
  throw ParseError("unrecognized value encoding: " + j.dump(), {});
}

json eventToJson(const Event& ev) {
  json j;
  switch (ev.kind) {
    case Event::K::Invocation: {
      j["tag"] = "iEv";
      j["caller"] = ev.caller;
      j["callee"] = ev.object;
      j["fut"] = ev.fut.id;
      j["method"] = ev.method;
      json args = json::array();
      for (const auto& a : ev.args) args.push_back(valueToJson(a));
      j["args"] = args;
      break;
    }
    case Event::K::InvocationReaction:
      j["tag"] = "iREv";
      j["object"] = ev.object;
      j["fut"] = ev.fut.id;
      j["method"] = ev.method;
      break;
    case Event::K::Resolving:
      j["tag"] = "fEv";
      j["object"] = ev.object;
      j["fut"] = ev.fut.id;
      j["method"] = ev.method;
      j["value"] = valueToJson(ev.value.value_or(Unit{}));
      break;
    case Event::K::Fetch:
      j["tag"] = "fREv";
      j["object"] = ev.object;
      j["fut"] = ev.fut.id;
      j["value"] = valueToJson(ev.value.value_or(Unit{}));
      break;
    case Event::K::None:
      j["tag"] = "noEv";
      break;
  }
  return j;
}

Event eventFromJson(const json& j) {
  Event ev;
  std::string tag = j.at("tag").get<std::string>();
  if (tag == "iEv") {
    ev.kind = Event::K::Invocation;
    ev.caller = j.at("caller").get<std::string>();
    ev.object = j.at("callee").get<std::string>();
    ev.fut = FutId{j.at("fut").get<int>()};
    ev.method = j.at("method").get<std::string>();
    for (const auto& a : j.at("args")) ev.args.push_back(valueFromJson(a));
  } else if (tag == "iREv") {
    ev.kind = Event::K::InvocationReaction;
    ev.object = j.at("object").get<std::string>();
    ev.fut = FutId{j.at("fut").get<int>()};
    ev.method = j.at("method").get<std::string>();
  } else if (tag == "fEv") {
    ev.kind = Event::K::Resolving;
    ev.object = j.at("object").get<std::string>();
    ev.fut = FutId{j.at("fut").get<int>()};
    ev.method = j.at("method").get<std::string>();
    ev.value = valueFromJson(j.at("value"));
  } else if (tag == "fREv") {
    ev.kind = Event::K::Fetch;
    ev.object = j.at("object").get<std::string>();
    ev.fut = FutId{j.at("fut").get<int>()};
    ev.value = valueFromJson(j.at("value"));
  } else {
    ev.kind = Event::K::None;
  }
  return ev;
}

json configToJson(const Configuration& c) {
  json objects = json::array();
  for (const auto& o : c.objects) {
    json heap;
    for (const auto& [k, v] : o.heap) heap[k] = valueToJson(v);
    json jo{{"name", o.name}, {"heap", heap}};
    if (o.active) jo["active"] = o.active->id;
    objects.push_back(jo);
  }
  json processes = json::array();
  for (const auto& p : c.processes) {
    json store;
    for (const auto& [k, v] : p.store) store[k] = valueToJson(v);
    json jp{{"object", p.object},
            {"fut", p.fut.id},
            {"method", p.method},
            {"status", p.status == ProcessState::St::Pending   ? "pending"
                       : p.status == ProcessState::St::Running ? "running"
                                                               : "done"},
            {"store", store}};
    if (p.status == ProcessState::St::Done) jp["retval"] = valueToJson(p.retval);
    processes.push_back(jp);
  }
  return json{{"objects", objects}, {"processes", processes}};
}

Configuration configFromJson(const json& j) {
  Configuration c;
  for (const auto& jo : j.at("objects")) {
    ObjectState o;
    o.name = jo.at("name").get<std::string>();
    if (jo.contains("active")) o.active = FutId{jo["active"].get<int>()};
    for (const auto& [k, v] : jo.at("heap").items()) o.heap[k] = valueFromJson(v);
    c.objects.push_back(std::move(o));
  }
  for (const auto& jp : j.at("processes")) {
    ProcessState p;
    p.object = jp.at("object").get<std::string>();
    p.fut = FutId{jp.at("fut").get<int>()};
    p.method = jp.at("method").get<std::string>();
    std::string st = jp.at("status").get<std::string>();
    p.status = st == "pending" ? ProcessState::St::Pending
               : st == "running" ? ProcessState::St::Running
                                 : ProcessState::St::Done;
    for (const auto& [k, v] : jp.at("store").items()) p.store[k] = valueFromJson(v);
    if (jp.contains("retval")) p.retval = valueFromJson(jp["retval"]);
    c.processes.push_back(std::move(p));
  }
  return c;
}

}  // namespace

std::string traceToJsonl(const Trace& tr) {
  std::ostringstream os;
  for (const auto& p : tr) {
    json line{{"event", eventToJson(p.ev)},
              {"config", configToJson(p.config)},
              {"after", configToJson(p.after)}};
    os << line.dump() << "\n";
  }
  return os.str();
}

Trace traceFromJsonl(const std::string& text) {
  Trace tr;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    TracePair p;
    p.ev = eventFromJson(j.at("event"));
    p.config = configFromJson(j.at("config"));
    // `after` is optional in foreign traces; activity predicates then fall
    // back to the firing configuration adjusted by the event itself.
    if (j.contains("after")) {
      p.after = configFromJson(j["after"]);
    } else {
      p.after = p.config;
      if (p.ev.kind == Event::K::InvocationReaction) {
        if (ObjectState* o = p.after.object(p.ev.object)) o->active = p.ev.fut;
      } else if (p.ev.kind == Event::K::Resolving) {
        if (ObjectState* o = p.after.object(p.ev.object)) o->active.reset();
      }
    }
    tr.push_back(std::move(p));
  }
  return tr;
}

std::string reportToJson(const CheckReport& rep) {
  json j;
  j["schema"] = "asyncst-report/1";
  j["ok"] = rep.ok;
  j["unknown"] = rep.unknown;
  json errs = json::array();
  for (const auto& e : rep.errors)
    errs.push_back(json{{"rule", e.rule}, {"where", e.where}, {"message", e.message}});
  j["errors"] = errs;
  json warns = json::array();
  for (const auto& w : rep.warnings)
    warns.push_back(json{{"rule", w.rule}, {"where", w.where}, {"message", w.message}});
  j["warnings"] = warns;
  j["admissible"] = rep.adm.ok;
  j["graphNodes"] = rep.graph.graph.nodeCount();
  return j.dump(2);
}

namespace {

json lbodyToJson(const LBody& body, const std::string& self);

json litemToJson(const LItemP& it, const std::string& self) {
  json j;
  if (const auto* r = it->as<LItem::Receive>()) {
    j["kind"] = "receive";
    j["method"] = r->method;
    j["pre"] = prettyFormula(r->pre, self);
  } else if (const auto* s = it->as<LItem::Send>()) {
    j["kind"] = "send";
    j["callee"] = s->callee;
    j["method"] = s->method;
    if (s->loc) j["loc"] = *s->loc;
    j["pre"] = prettyFormula(s->pre, self);
  } else if (const auto* p = it->as<LItem::Put>()) {
    j["kind"] = "put";
    j["post"] = prettyFormula(p->post, self);
  } else if (const auto* r = it->as<LItem::Read>()) {
    j["kind"] = "read";
    j["loc"] = prettyTerm(r->locExpr, self);
  } else if (it->as<LItem::SkipI>()) {
    j["kind"] = "skip";
  } else if (const auto* rp = it->as<LItem::Repeat>()) {
    j["kind"] = "repeat";
    j["invariant"] = prettyFormula(rp->invariant, self);
    j["body"] = lbodyToJson(rp->body, self);
  } else if (const auto* sel = it->as<LItem::Select>()) {
    j["kind"] = "select";
    json branches = json::array();
    for (const auto& br : sel->branches) branches.push_back(lbodyToJson(br, self));
    j["branches"] = branches;
  } else if (const auto* off = it->as<LItem::Offer>()) {
    j["kind"] = "offer";
    j["source"] = off->srcObject + "." + off->srcMethod;
    json branches = json::array();
    for (const auto& br : off->branches)
      branches.push_back(json{{"guard", prettyFormula(br.guard, self)},
                              {"body", lbodyToJson(br.body, self)}});
    j["branches"] = branches;
  } else if (it->as<LItem::End>()) {
    j["kind"] = "end";
  }
  return j;
}

json lbodyToJson(const LBody& body, const std::string& self) {
  json items = json::array();
  for (const auto& it : body) items.push_back(litemToJson(it, self));
  return items;
}

}  // namespace

std::string localTypeToJson(const LocalType& t) {
  json j{{"object", t.object}, {"items", lbodyToJson(t.items, t.object)}};
  return j.dump(2);
}

}  // namespace asyncst
