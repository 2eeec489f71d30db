#include <gtest/gtest.h>

#include "support/properties.hpp"

namespace {

class Suite : public ::testing::TestWithParam<std::size_t> {};

}  // namespace

TEST_P(Suite, HoldsOnRandomCases) {
  const auto suite = props::acceptance_suites()[GetParam()];
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = suite(seed * 7919, 1000);
    EXPECT_GE(r.cases, 1000);
    EXPECT_EQ(r.failures, 0) << r.name << " seed " << seed << ": " << r.first_failure;
  }
}

INSTANTIATE_TEST_SUITE_P(All, Suite, ::testing::Range<std::size_t>(0, props::acceptance_suites().size()));
