#include "asyncst/state.hpp"

#include <sstream>

namespace asyncst {

std::string Event::str() const {
  std::ostringstream os;
  switch (kind) {
    case K::Invocation: {
      os << "iEv(" << caller << "," << object << ",fut" << fut.id << "," << method << ",[";
      for (size_t i = 0; i < args.size(); ++i) {
        if (i) os << ",";
        os << valueToString(args[i]);
      }
      os << "])";
      break;
    }
    case K::InvocationReaction:
      os << "iREv(" << object << ",fut" << fut.id << "," << method << ")";
      break;
    case K::Resolving:
      os << "fEv(" << object << ",fut" << fut.id << "," << method << ","
         << (value ? valueToString(*value) : "?") << ")";
      break;
    case K::Fetch:
      os << "fREv(" << object << ",fut" << fut.id << ","
         << (value ? valueToString(*value) : "?") << ")";
      break;
    case K::None:
      os << "noEv";
      break;
  }
  return os.str();
}

const ObjectState* Configuration::object(const std::string& x) const {
  for (const auto& o : objects)
    if (o.name == x) return &o;
  return nullptr;
}
ObjectState* Configuration::object(const std::string& x) {
  for (auto& o : objects)
    if (o.name == x) return &o;
  return nullptr;
}
const ProcessState* Configuration::process(FutId f) const {
  for (const auto& p : processes)
    if (p.fut == f) return &p;
  return nullptr;
}
ProcessState* Configuration::process(FutId f) {
  for (auto& p : processes)
    if (p.fut == f) return &p;
  return nullptr;
}
bool Configuration::terminated() const {
  for (const auto& p : processes)
    if (p.status != ProcessState::St::Done) return false;
  return true;
}
bool Configuration::activeAt(const std::string& x) const {
  const ObjectState* o = object(x);
  return o && o->active.has_value();
}

std::string actorOf(const Event& ev) {
  if (ev.kind == Event::K::Invocation) return ev.caller;
  return ev.object;
}

Trace restrictToObject(const Trace& tr, const std::string& x) {
  Trace out;
  for (const auto& p : tr)
    if (actorOf(p.ev) == x) out.push_back(p);
  return out;
}

}  // namespace asyncst
