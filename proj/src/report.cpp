#include "arbor/report.hpp"

#include <sstream>

namespace arbor {

std::string Report::summary() const {
  std::ostringstream os;
  if (ok())
    os << "ok";
  else {
    os << violations.size() << " violation(s):";
    for (const auto& v : violations) os << " [" << v.code << "] " << v.message << ";";
  }
  return os.str();
}

}  // namespace arbor
