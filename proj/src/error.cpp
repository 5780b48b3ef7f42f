#include "breathflow/error.hpp"

namespace breathflow {

void require_same_size(int w1, int h1, int w2, int h2, const char* what) {
  if (w1 != w2 || h1 != h2) {
    throw DimensionError(std::string(what) + ": dimension mismatch " + std::to_string(w1) + "x" +
                         std::to_string(h1) + " vs " + std::to_string(w2) + "x" +
                         std::to_string(h2));
  }
}

}  // namespace breathflow
