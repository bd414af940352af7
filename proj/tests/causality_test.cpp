#include <gtest/gtest.h>

#include "support.hpp"

namespace {

using namespace repairkit;
using rk_test::tids;

std::map<std::string, Rational> scores(const std::vector<CauseReport>& reports) {
  std::map<std::string, Rational> out;
  for (const auto& r : reports) out[r.tid.label] = r.responsibility;
  return out;
}

TEST(Causes, SampleOne) {
  const auto spec = rk_test::load_sample("example1.spec");
  const auto& qk = *spec.find_query("qk");
  const auto reports = actual_causes(spec.instance, qk);
  const std::map<std::string, Rational> expected{
      {"i1", Rational(1, 2)}, {"i3", Rational(1, 2)}, {"i4", Rational(1, 2)}, {"i6", Rational(1)}};
  EXPECT_EQ(scores(reports), expected);
  for (const auto& r : reports) {
    EXPECT_EQ(r.kind, r.tid.label == "i6" ? CauseKind::Counterfactual : CauseKind::Actual);
  }
  EXPECT_EQ(reports, causes_via_repairs(spec.instance, qk));
}

TEST(Causes, ContingencySetsAreReported) {
  const auto spec = rk_test::load_sample("example1.spec");
  const auto reports = actual_causes(spec.instance, *spec.find_query("qk"));
  std::map<std::string, TidSet> gamma;
  for (const auto& r : reports) gamma[r.tid.label] = r.min_contingency;
  EXPECT_TRUE(gamma["i6"].empty());
  EXPECT_EQ(gamma["i1"], tids({"i3"}));
  EXPECT_EQ(gamma["i4"], tids({"i3"}));
  // i3's minimum contingency sets are {i1} and {i4}.
  for (const auto& r : reports) {
    if (r.tid.label == "i3") {
      EXPECT_EQ(r.min_contingency, tids({"i1"}));
      EXPECT_EQ(r.min_contingency_count, 2u);
    }
  }
}

TEST(Causes, TupleOutsideEveryWitnessIsNoCause) {
  const auto spec = rk_test::load_sample("example1.spec");
  const auto& qk = *spec.find_query("qk");
  EXPECT_EQ(scores(actual_causes(spec.instance, qk)).count("i2"), 0u);
  EXPECT_EQ(rk_test::ref_causes(qk, spec.instance).count(Tid{"i2"}), 0u);
}

TEST(Causes, SingleWitnessIsCounterfactual) {
  const auto spec = parse_spec("relation R(A, B).\nfact R(i1; a, a).\nfact R(i2; a, b).\nquery q() : R(x, x).\n");
  const auto reports = actual_causes(spec.instance, spec.queries[0]);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].tid, Tid{"i1"});
  EXPECT_EQ(reports[0].kind, CauseKind::Counterfactual);
  EXPECT_EQ(reports[0].responsibility, Rational(1));
}

TEST(Causes, FalseQueryIsAnError) {
  const auto spec = rk_test::load_sample("example1.spec");
  const auto d1 = delete_tids(spec.instance, tids({"i6"}));
  for (auto fn : {&actual_causes, &causes_via_repairs}) {
    try {
      fn(d1, *spec.find_query("qk"));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::QueryFalseInInstance);
    }
  }
}

TEST(Causes, CardinalityRepairTuplesScoreByRepairSize) {
  const auto spec = rk_test::load_sample("example1.spec");
  const auto& qk = *spec.find_query("qk");
  const auto reports = scores(causes_via_repairs(spec.instance, qk));
  for (const auto& r : c_repairs(spec.instance, {DenialConstraint{qk.name, qk.body}})) {
    for (const auto& t : r.deleted) {
      EXPECT_EQ(reports.at(t.label), Rational(1, static_cast<std::int64_t>(r.deleted.size())));
    }
  }
}

TEST(CausesProperty, AgreesWithContingencyEnumeration) {
  rk_test::Generator gen(202);
  int checked = 0;
  for (int round = 0; round < 2000 && checked < 200; ++round) {
    const auto inst = gen.instance({.null_rate = round % 2 ? 0.2 : 0.0});
    auto q = gen.query(inst.schema(), {}, 0);
    if (!rk_test::ref_holds(q, inst)) continue;
    ++checked;
    const auto direct = actual_causes(inst, q);
    const auto via = causes_via_repairs(inst, q);
    ASSERT_EQ(direct, via);
    const auto ref = rk_test::ref_causes(q, inst);
    ASSERT_EQ(direct.size(), ref.size());
    for (const auto& r : direct) {
      const auto& o = ref.at(r.tid);
      EXPECT_EQ(r.responsibility, Rational::responsibility(o.gamma_size));
      EXPECT_EQ(r.min_contingency_count, o.count);
      EXPECT_EQ(r.min_contingency, o.first);
    }
  }
  EXPECT_GE(checked, 200);
}

}  // namespace
