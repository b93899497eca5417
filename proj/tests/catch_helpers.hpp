#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "ggmcov/errors.hpp"

namespace testutil {

inline auto throws_code(ggmcov::Errc c) {
  return Catch::Matchers::Predicate<ggmcov::Error>(
      [c](const ggmcov::Error& e) { return e.code() == c; },
      std::string("error code == ") + ggmcov::errc_name(c));
}

}  // namespace testutil

#define CHECK_THROWS_CODE(expr, errc) \
  CHECK_THROWS_MATCHES(expr, ggmcov::Error, testutil::throws_code(errc))
