#pragma once

#include <string>

namespace mtjsnn {

// Round-trippable decimal (%.17g).
std::string fmt_g17(double v);

}  // namespace mtjsnn
