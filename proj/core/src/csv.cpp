#include "mtjsnn/csv.hpp"

#include <cstdio>

namespace mtjsnn {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace mtjsnn
