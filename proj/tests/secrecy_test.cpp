#include <gtest/gtest.h>

#include "support.hpp"

namespace {

using namespace repairkit;

std::set<std::set<CellChange>> change_sets(const std::vector<SecrecyInstance>& xs) {
  std::set<std::set<CellChange>> out;
  for (const auto& s : xs) out.insert(s.changes);
  return out;
}

CellChange cell(const char* tid, const char* attr) { return CellChange{Tid{tid}, attr}; }

class SampleTwo : public ::testing::Test {
 protected:
  ProblemSpec spec = rk_test::load_sample("example2.spec");
  const ConjunctiveQuery& view() const { return *spec.find_view("vk"); }
};

TEST_F(SampleTwo, DisplayedInstancesAreAmongTheResults) {
  const auto got = change_sets(secrecy_instances(spec.instance, view()));
  EXPECT_TRUE(got.count({cell("i6", "A")}));
  EXPECT_TRUE(got.count({cell("i1", "B"), cell("i3", "B")}));
}

TEST_F(SampleTwo, AllInclusionMinimalInstances) {
  // Two view matches: (i4, i1, i6) and (i6, i3, i6). Nulling i6.A kills
  // both; otherwise one join cell of i3 and one of the first match are
  // needed.
  const std::set<std::set<CellChange>> expected{
      {cell("i6", "A")},
      {cell("i3", "A"), cell("i4", "A")},
      {cell("i3", "B"), cell("i4", "A")},
      {cell("i1", "A"), cell("i3", "A")},
      {cell("i1", "A"), cell("i3", "B")},
      {cell("i1", "B"), cell("i3", "A")},
      {cell("i1", "B"), cell("i3", "B")},
  };
  EXPECT_EQ(change_sets(secrecy_instances(spec.instance, view())), expected);
  EXPECT_EQ(rk_test::ref_secrecy(spec.instance, view()), expected);
}

TEST_F(SampleTwo, ViewIsEmptyInEveryInstance) {
  for (const auto& s : secrecy_instances(spec.instance, view())) {
    EXPECT_FALSE(evaluate(view(), s.instance).holds());
    EXPECT_EQ(s.instance, apply_cell_changes(spec.instance, s.changes));
  }
}

TEST_F(SampleTwo, SecretAnswers) {
  const auto& q = *spec.find_query("q");
  // Instance {i6.A} leaves S = {a4, a2, NULL}; instances keeping i6 but
  // nulling i4.A leave {a2, a3}.
  EXPECT_EQ(secret_answers(q, spec.instance, view()), (AnswerSet{{Value::constant("a2")}}));
  EXPECT_TRUE(secret_answers(view(), spec.instance, view()).empty());
}

TEST(Secrecy, EmptyViewNeedsNoChange) {
  const auto spec = parse_spec("relation R(A).\nfact R(t1; a).\nview secret v(x) : R(x), x = \"b\".\nquery q(x) : R(x).\n");
  const auto got = secrecy_instances(spec.instance, spec.views[0]);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_TRUE(got[0].changes.empty());
  EXPECT_EQ(secret_answers(spec.queries[0], spec.instance, spec.views[0]), (AnswerSet{{Value::constant("a")}}));
}

TEST(Secrecy, SelfJoinEitherCell) {
  const auto spec = parse_spec("relation R(A, B).\nfact R(i1; a, a).\nview secret v() : R(x, x).\n");
  const std::set<std::set<CellChange>> expected{{cell("i1", "A")}, {cell("i1", "B")}};
  EXPECT_EQ(change_sets(secrecy_instances(spec.instance, spec.views[0])), expected);
  EXPECT_EQ(rk_test::ref_secrecy(spec.instance, spec.views[0]), expected);
}

TEST(Secrecy, ExistingNullsAreFree) {
  const auto spec = parse_spec("relation R(A, B).\nfact R(i1; NULL, a).\nfact R(i2; b, a).\nview secret v(x) : R(x, y).\n");
  const auto got = change_sets(secrecy_instances(spec.instance, spec.views[0]));
  EXPECT_EQ(got, (std::set<std::set<CellChange>>{{cell("i2", "A")}}));
}

TEST(Secrecy, HeadOnlyVariablesMustAllBeHidden) {
  const auto spec = parse_spec("relation R(A, B).\nfact R(i1; a, b).\nview secret v(x, y) : R(x, y).\n");
  const std::set<std::set<CellChange>> expected{{cell("i1", "A"), cell("i1", "B")}};
  EXPECT_EQ(change_sets(secrecy_instances(spec.instance, spec.views[0])), expected);
  EXPECT_EQ(rk_test::ref_secrecy(spec.instance, spec.views[0]), expected);
}

TEST(SecrecyProperty, AgreesWithCellEnumeration) {
  rk_test::Generator gen(303);
  const rk_test::RandomOptions opts{.max_tuples = 5, .max_dcs = 1, .max_atoms = 3, .max_arity = 2, .null_rate = 0.1};
  for (int round = 0; round < 200; ++round) {
    const auto inst = gen.instance(opts);
    auto view = gen.query(inst.schema(), opts, 2);
    view.secret = true;
    const auto got = secrecy_instances(inst, view);
    ASSERT_EQ(change_sets(got), rk_test::ref_secrecy(inst, view)) << render_spec({inst, {}, {}, {view}, {}});
    for (const auto& s : got) {
      for (const auto& m : find_matches(view.body, s.instance)) ASSERT_FALSE(is_revealing(view, m));
      // Dropping any single change re-creates a revealing match.
      for (const auto& c : s.changes) {
        auto fewer = s.changes;
        fewer.erase(c);
        ASSERT_FALSE(revealing_matches(view, apply_cell_changes(inst, fewer)).empty());
      }
    }
    ASSERT_TRUE(secret_answers(view, inst, view).empty());
  }
}

}  // namespace
