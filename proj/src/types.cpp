#include "cforge/types.hpp"

namespace cforge {

std::string_view to_string(MemOp op) { return op == MemOp::Load ? "LD" : "ST"; }

}  // namespace cforge
