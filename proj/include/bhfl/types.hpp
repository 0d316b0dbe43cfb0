#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bhfl {

/// Model parameters, gradients and uploaded messages all share this
/// representation.
using ParamVector = std::vector<double>;

using ConstVec = std::span<const double>;
using MutVec = std::span<double>;

}  // namespace bhfl
