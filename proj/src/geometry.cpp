#include "densan/geometry.hpp"

#include "densan/errors.hpp"

namespace densan {

Configuration Configuration::shifted(std::span<const double> direction, double s) const {
  if (direction.size() != 3 * positions_.size()) {
    throw DimensionMismatch("direction length must be 3N");
  }
  Configuration out = *this;
  for (std::size_t j = 0; j < positions_.size(); ++j) {
    for (std::size_t c = 0; c < 3; ++c) out.positions_[j][c] += s * direction[3 * j + c];
  }
  return out;
}

}  // namespace densan
