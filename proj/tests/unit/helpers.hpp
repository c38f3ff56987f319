#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <doctest.h>

#include "core/error.hpp"
#include "core/mesh.hpp"

namespace testing {

// Fresh directory under the test working directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::current_path() / "scratch" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

inline michell::Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  michell::Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

template <class F>
michell::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const michell::Error& e) {
    return e.code();
  }
  FAIL("expected michell::Error");
  return michell::ErrorCode::Internal;
}

} // namespace testing
