#include <gtest/gtest.h>

#include "oracle.hpp"
#include "stlstar/stlstar.hpp"

using namespace stlstar;

namespace {

LinearPredicate pred(LinearPredicate::Coefficients c, double b) { return LinearPredicate(std::move(c), b); }

}  // namespace

TEST(Parse, EventuallyOfPredicate) {
  auto f = parse("F[1,5](I >= 50)");
  ASSERT_EQ(f->op(), Op::Eventually);
  EXPECT_EQ(f->interval(), (TimeInterval{1, 5}));
  ASSERT_EQ(f->child()->op(), Op::Pred);
  EXPECT_EQ(f->child()->predicate(), pred({{{0, "I"}, 1.0}}, -50.0));
}

TEST(Parse, FreezeWithDefaultIndex) {
  auto f = parse("* G[0.25,5](I* >= I)");
  ASSERT_EQ(f->op(), Op::Freeze);
  EXPECT_EQ(f->index(), 1);
  auto g = f->child();
  ASSERT_EQ(g->op(), Op::Globally);
  EXPECT_EQ(g->interval(), (TimeInterval{0.25, 5}));
  EXPECT_EQ(g->child()->predicate(), pred({{{1, "I"}, 1.0}, {{0, "I"}, -1.0}}, 0.0));

  auto explicit_index = parse("*1 G[0.25,5](I*1 >= I)");
  EXPECT_TRUE(structurally_equal(f, explicit_index));
}

TEST(Parse, StrictAndReversedInequalitiesNormalize) {
  auto lt = parse("x < 3");
  EXPECT_EQ(lt->predicate(), pred({{{0, "x"}, -1.0}}, 3.0));
  EXPECT_TRUE(structurally_equal(lt, parse("x <= 3")));
  EXPECT_TRUE(structurally_equal(parse("x > 3"), parse("x >= 3")));
  EXPECT_TRUE(structurally_equal(parse("3 <= x"), parse("x >= 3")));
}

TEST(Parse, CollectsLikeTerms) {
  auto f = parse("2*x + y*2 - x + 1 >= 3*y*2 - 4");
  EXPECT_EQ(f->predicate(), pred({{{0, "x"}, 1.0}, {{2, "y"}, -2.0}}, 5.0));
}

TEST(Parse, Rejections) {
  EXPECT_THROW(parse("x == 3"), ParseError);
  EXPECT_THROW(parse("x != 3"), ParseError);
  EXPECT_THROW(parse("x - x >= 1"), ParseError);
  EXPECT_THROW(parse("F[2,2](x >= 0)"), ParseError);
  EXPECT_THROW(parse("F[3,2](x >= 0)"), ParseError);
  EXPECT_THROW(parse("F[-1,2](x >= 0)"), ParseError);
  EXPECT_THROW(parse("F[1,5](x >= 0"), ParseError);
  EXPECT_THROW(parse("x >= "), ParseError);
  EXPECT_THROW(parse("*0 (x >= 0)"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(Parse, ErrorCarriesPosition) {
  try {
    parse("x >= 0 && && y >= 1");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 10u);
  }
}

TEST(Parse, Precedence) {
  auto f = parse("a >= 0 || b >= 0 && c >= 0");
  ASSERT_EQ(f->op(), Op::Or);
  EXPECT_EQ(f->rhs()->op(), Op::And);

  auto u = parse("a >= 0 U[0,1] b >= 0 U[0,2] c >= 0");
  ASSERT_EQ(u->op(), Op::Until);
  EXPECT_EQ(u->lhs()->op(), Op::Pred);
  EXPECT_EQ(u->rhs()->op(), Op::Until);

  auto neg = parse("!a >= 0 && b >= 0");
  ASSERT_EQ(neg->op(), Op::And);
  EXPECT_EQ(neg->lhs()->op(), Op::Not);
}

TEST(Format, Examples) {
  EXPECT_EQ(format(parse("F[1,5](I >= 50)")), "F[1, 5](I >= 50)");
  EXPECT_EQ(format(make_true()), "true");
  EXPECT_EQ(format(make_freeze(2, make_pred(pred({{{2, "x"}, 1.0}}, 0.0)))), "*2 (x*2 >= 0)");
}

TEST(Format, RoundTripOnRandomFormulas) {
  oracle::Generator g(7);
  for (int n = 0; n < 2000; ++n) {
    auto f = g.formula();
    auto text = format(f);
    auto back = parse(text);
    EXPECT_TRUE(structurally_equal(f, back)) << text << "  ->  " << format(back);
  }
}

TEST(NecessaryLength, Examples) {
  EXPECT_EQ(necessary_length(parse("F[1,5](I >= 50)")), 5.0);
  EXPECT_EQ(necessary_length(parse("G[0,300] *F[0,100](X >= Y*)")), 400.0);
  EXPECT_EQ(necessary_length(parse("x >= 1")), 0.0);
  EXPECT_EQ(necessary_length(parse("F[1,5](I >= 50 && *G[0.25,5](I* >= I))")), 10.0);
  EXPECT_EQ(necessary_length(parse("x >= 0 U[1,2] F[0,3](y >= 0)")), 5.0);
}

TEST(NecessaryLength, DesugarPreservesLengthAndFreeIndices) {
  oracle::Generator g(11);
  for (int n = 0; n < 1000; ++n) {
    auto f = g.formula();
    auto d = desugar(f);
    EXPECT_EQ(necessary_length(d), necessary_length(f));
    EXPECT_EQ(free_indices(d), free_indices(f));
  }
}

TEST(NecessaryLength, MonotoneUnderLongerSubstitution) {
  // Replacing a leaf by a longer formula never shortens the whole.
  auto longer = parse("F[0,4](x >= 0)");
  oracle::Generator g(12);
  for (int n = 0; n < 300; ++n) {
    auto f = g.formula();
    std::function<Formula(const Formula&)> graft = [&](const Formula& h) -> Formula {
      if (h->op() == Op::Pred || h->op() == Op::True) return longer;
      return with_children(h, graft(h->lhs()), h->rhs() ? graft(h->rhs()) : nullptr);
    };
    EXPECT_GE(necessary_length(graft(f)), necessary_length(f));
  }
}

TEST(FreeIndices, Examples) {
  EXPECT_EQ(free_indices(parse("x*1 >= 0")), (std::set<FrozenIndex>{1}));
  EXPECT_TRUE(free_indices(parse("*1 (x*1 >= 0)")).empty());
  EXPECT_EQ(free_indices(parse("*1 (x*1 + x*2 >= x)")), (std::set<FrozenIndex>{2}));
}

TEST(Desugar, Examples) {
  auto p = parse("x >= 0");
  auto q = parse("y >= 0");
  auto ev = desugar(make_eventually({0, 2}, p));
  EXPECT_TRUE(structurally_equal(ev, make_until({0, 2}, make_true(), p)));
  auto gl = desugar(make_globally({0, 2}, p));
  EXPECT_TRUE(structurally_equal(gl, make_not(make_until({0, 2}, make_true(), make_not(p)))));
  auto conj = desugar(make_and(p, q));
  EXPECT_TRUE(structurally_equal(conj, make_not(make_or(make_not(p), make_not(q)))));
}

TEST(Formula, NodeIdentityIsDistinct) {
  auto a = parse("F[0,1](x >= 0)");
  auto b = parse("F[0,1](x >= 0)");
  EXPECT_TRUE(structurally_equal(a, b));
  EXPECT_NE(a->id(), b->id());
}

TEST(Formula, Size) {
  EXPECT_EQ(parse("F[1,5](I >= 50)")->size(), 2u);
  EXPECT_EQ(parse("F[1,5](I >= 50 && *G[0.25,5](I* >= I))")->size(), 6u);
  EXPECT_EQ(parse("G[0,300] *F[0,100](X >= Y*)")->size(), 4u);
}

TEST(Predicate, InvalidConstruction) {
  EXPECT_THROW(pred({{{0, "x"}, 0.0}}, 1.0), FormulaError);
  EXPECT_THROW(TimeInterval(1, 1), FormulaError);
  EXPECT_THROW(make_freeze(0, make_true()), FormulaError);
}

TEST(Predicate, Denominator) {
  auto mu = pred({{{0, "x"}, 3.0}, {{0, "y"}, 4.0}, {{1, "x"}, 1.0}}, 0.0);
  EXPECT_DOUBLE_EQ(mu.denominator(), 6.0);
}
