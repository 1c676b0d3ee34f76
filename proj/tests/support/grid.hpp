#pragma once

#include <array>

namespace test_grid {

inline constexpr std::array<double, 7> kMu{0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0};
inline constexpr std::array<double, 7> kNu{0.1, 0.3, 0.7, 1.0, 1.5, 3.0, 10.0};

}  // namespace test_grid
