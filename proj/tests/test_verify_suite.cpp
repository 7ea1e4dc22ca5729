#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "kfunc/verify_suite.hpp"
#include "support.hpp"

using namespace kfunc;
using namespace kfunc::suite;

TEST(VerifySuite, EveryRequiredIdentityHasACase) {
  std::set<std::string> ids;
  for (const auto& c : identity_cases()) ids.insert(c.id);
  for (const auto& id : required_identity_ids()) EXPECT_TRUE(ids.count(id)) << id;
}

TEST(VerifySuite, IdsAreUnique) {
  const auto cases = identity_cases();
  std::set<std::string> ids;
  for (const auto& c : cases) EXPECT_TRUE(ids.insert(c.id).second) << c.id;
}

TEST(VerifySuite, SeedZeroPasses) {
  const Report r = run_all(0);
  for (const auto& row : r.rows)
    EXPECT_TRUE(row.passed) << row.id << " residual " << row.residual << " tol " << row.tolerance
                            << " " << row.error;
  EXPECT_TRUE(r.all_passed());
}

TEST(VerifySuite, OtherSeedsPass) {
  for (std::uint64_t seed : {1u, 99u}) {
    const Report r = run_all(seed);
    for (const auto& row : r.rows) EXPECT_TRUE(row.passed) << "seed " << seed << ": " << row.id;
  }
}

TEST(VerifySuite, DeterministicForAFixedSeed) {
  const Report a = run_all(7), b = run_all(7);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].residual, b.rows[i].residual);
}

TEST(VerifySuite, FailuresBecomeRows) {
  Context ctx;
  ctx.grid = kfunc::testing::unit_grid(16);
  const std::vector<IdentityCase> cases = {
      {"too-strict", "", 0.0, Metric::Absolute, [](const Context&, std::uint64_t) { return 1e-3; }},
      {"throws", "", 1.0, Metric::Absolute,
       [](const Context&, std::uint64_t) -> double { throw Error(ErrorKind::ZeroK, "boom"); }},
      {"nan", "", 1.0, Metric::Absolute,
       [](const Context&, std::uint64_t) { return std::numeric_limits<double>::quiet_NaN(); }},
  };
  const Report r = run_cases(cases, ctx);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_FALSE(r.rows[0].passed);
  EXPECT_FALSE(r.rows[1].passed);
  EXPECT_NE(r.rows[1].error.find("boom"), std::string::npos);
  EXPECT_FALSE(r.rows[2].passed);
  EXPECT_FALSE(r.all_passed());
}

TEST(VerifySuite, BuiltinConstraints) {
  const auto cs = builtin_constraints(kfunc::testing::unit_grid());
  ASSERT_EQ(cs.size(), 5u);
  EXPECT_EQ(cs[0].name, "identity");
  EXPECT_TRUE(cs[4].linear);
}
