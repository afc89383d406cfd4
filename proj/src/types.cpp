#include "omr/types.hpp"

namespace omr {

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::OmrFF: return "omr-ff";
    case Protocol::OmrPF: return "omr-pf";
    case Protocol::Flooding: return "flooding";
  }
  return "?";
}

std::string to_string(Mac m) { return m == Mac::Ideal ? "ideal" : "immediate"; }

Protocol parse_protocol(const std::string& s) {
  if (s == "omr-ff") return Protocol::OmrFF;
  if (s == "omr-pf") return Protocol::OmrPF;
  if (s == "flooding") return Protocol::Flooding;
  throw ConfigError("unknown protocol '" + s + "' (valid: omr-ff, omr-pf, flooding)");
}

Mac parse_mac(const std::string& s) {
  if (s == "ideal") return Mac::Ideal;
  if (s == "immediate") return Mac::Immediate;
  throw ConfigError("unknown mac '" + s + "' (valid: ideal, immediate)");
}

}  // namespace omr
