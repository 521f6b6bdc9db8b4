#include "hybridrc/message.hpp"

#include <sstream>

namespace hybridrc {

const MessageId& message_id(const ProtocolMessage& m) {
  return std::visit([](const auto& v) -> const MessageId& { return v.id; }, m);
}

namespace {

void put_id(std::ostream& os, const MessageId& id) { os << "src=" << id.broadcaster << " m=\"" << id.payload << '"'; }

}  // namespace

std::string summary(const ProtocolMessage& m) {
  std::ostringstream os;
  if (const auto* p = std::get_if<DolevPath>(&m)) {
    os << "path ";
    put_id(os, p->id);
    os << " path=" << to_string(p->path);
  } else if (const auto* s = std::get_if<FloodSig>(&m)) {
    os << "sig ";
    put_id(os, s->id);
    os << ' ' << to_string(s->sig);
  } else {
    const auto& d = std::get<DualPath>(m);
    os << "dual ";
    put_id(os, d.id);
    os << " path=" << to_string(d.path) << " signed={";
    for (std::size_t i = 0; i < d.signed_paths.size(); ++i) {
      if (i) os << ';';
      os << to_string(d.signed_paths[i].path) << '@' << d.signed_paths[i].sig.signer;
    }
    os << '}';
  }
  return os.str();
}

}  // namespace hybridrc
