#include <gtest/gtest.h>

#include <random>

#include "mechsimp/sponsored.hpp"
#include "oracles.hpp"

using namespace mechsimp;
using namespace mechsimp::slots;
using oracle::Q;
using oracle::Qs;

namespace {

BidMatrix gap_vcg_bids() {
  return expand_scalar(Qs({"2", "1/10", "1/10"}), BidMultiplier(CtrVector(Qs({"1", "1/2", "1/4"}))));
}

}  // namespace

TEST(CtrVector, RejectsBadShapes) {
  EXPECT_THROW(CtrVector(Qs({"1", "1"})), Error);
  EXPECT_THROW(CtrVector(Qs({"1/2", "1/4"})), Error);
  EXPECT_THROW(CtrVector(Qs({"1", "0"})), Error);
  EXPECT_NO_THROW(CtrVector(Qs({"1", "9/10", "4/5"})));
  EXPECT_NO_THROW(BidMultiplier::ones(3));
  EXPECT_THROW(BidMultiplier(Qs({"1", "2"})), Error);
}

TEST(SlotInstance, ProportionalForm) {
  const auto inst = SlotInstance::proportional(CtrVector(Qs({"1", "1/2"})), Qs({"4", "2", "1"}));
  EXPECT_EQ(inst.values(0), Qs({"4", "2"}));
  EXPECT_TRUE(inst.is_decreasing());
  EXPECT_TRUE(inst.in_theta(CtrVector(Qs({"1", "1/2"}))));
  EXPECT_FALSE(inst.in_theta(CtrVector(Qs({"1", "1/3"}))));
  EXPECT_THROW(SlotInstance::from_table({Qs({"1", "-1"})}), Error);
  EXPECT_THROW(SlotInstance::from_table({Qs({"1", "1"})}).per_click(), Error);
}

TEST(VcgSlots, ScalarInstancePrices) {
  const auto r = vcg_slots(gap_vcg_bids());
  EXPECT_EQ(r.assignment, (Assignment{0, 1, 2}));
  EXPECT_EQ(r.payments, Qs({"3/40", "1/40", "0"}));
  EXPECT_EQ(r.revenue(), Q("1/10"));
}

TEST(VcgSlots, SingleAgentPaysNothing) {
  const auto r = vcg_slots({Qs({"5"})});
  EXPECT_EQ(r.assignment, (Assignment{0}));
  EXPECT_EQ(r.payments, Qs({"0"}));
}

TEST(VcgSlots, DistinctSlotBidsPayZero) {
  const BidMatrix bids{Qs({"3", "0", "0"}), Qs({"0", "2", "0"}), Qs({"0", "0", "1"})};
  const auto r = vcg_slots(bids);
  EXPECT_EQ(r.assignment, (Assignment{0, 1, 2}));
  EXPECT_EQ(r.payments, Qs({"0", "0", "0"}));
  EXPECT_EQ(r.payments, oracle::brute_vcg_payments(bids, r.assignment));
}

TEST(VcgSlots, NegativeBidRejected) {
  EXPECT_THROW(vcg_slots({Qs({"-1"})}), Error);
  EXPECT_THROW(gsp_slots({Qs({"-1"})}), Error);
}

TEST(GspSlots, ScalarInstancePrices) {
  const BidMultiplier alpha(CtrVector(Qs({"1", "11/20", "1/2"})));
  const auto r = gsp_slots(expand_scalar(Qs({"2", "2/11", "2/11"}), alpha));
  EXPECT_EQ(r.assignment, (Assignment{0, 1, 2}));
  EXPECT_EQ(r.payments, Qs({"2/11", "1/10", "0"}));
  EXPECT_EQ(r.revenue(), Q("31/110"));
}

TEST(GspSlots, AllZeroBidsAssignByIndex) {
  const BidMatrix bids(3, Qs({"0", "0"}));
  const auto r = gsp_slots(bids);
  EXPECT_EQ(r.assignment, (Assignment{0, 1, unassigned}));
  EXPECT_EQ(r.payments, Qs({"0", "0", "0"}));
}

TEST(GspSlots, TiesGoToLowestIndex) {
  const auto r = gsp_slots({Qs({"1", "1"}), Qs({"2", "1"}), Qs({"2", "1"})});
  EXPECT_EQ(r.assignment, (Assignment{1, 0, unassigned}));
  EXPECT_EQ(r.payments, Qs({"1", "2", "0"}));
}

TEST(ExpandScalar, Rows) {
  const auto m = expand_scalar(Qs({"2", "1"}), BidMultiplier(CtrVector(Qs({"1", "1/2"}))));
  EXPECT_EQ(m, (BidMatrix{Qs({"2", "1"}), Qs({"1", "1/2"})}));
  EXPECT_EQ(expand_scalar(Qs({"0", "0"}), BidMultiplier::ones(2)), (BidMatrix{Qs({"0", "0"}), Qs({"0", "0"})}));
  EXPECT_EQ(expand_scalar(Qs({"3", "2", "1"}), BidMultiplier::ones(3)),
            (BidMatrix{Qs({"3", "3", "3"}), Qs({"2", "2", "2"}), Qs({"1", "1", "1"})}));
}

TEST(ClosedFormPrices, WorkedInstance) {
  const auto inst = SlotInstance::proportional(CtrVector(Qs({"1", "9/10", "4/5"})), Qs({"30", "20", "10"}));
  EXPECT_EQ(vcg_slot_prices(inst), Qs({"3", "1", "0"}));
  EXPECT_EQ(vcg_revenue(inst), Q("4"));
}

TEST(ClosedFormPrices, SingleAgent) {
  const auto inst = SlotInstance::proportional(CtrVector(Qs({"1"})), Qs({"7"}));
  EXPECT_EQ(vcg_slot_prices(inst), Qs({"0"}));
  EXPECT_EQ(vcg_revenue(inst), 0);
}

TEST(ClosedFormPrices, EqualValuesMatchVcg) {
  const auto inst = SlotInstance::proportional(CtrVector(Qs({"1", "1/2", "1/4"})), Qs({"2", "2", "2"}));
  EXPECT_EQ(vcg_slot_prices(inst), Qs({"3/2", "1/2", "0"}));
  EXPECT_EQ(vcg_slots(inst.values()).payments, vcg_slot_prices(inst));
}

TEST(ClosedFormPrices, ReportedInInputOrder) {
  const auto inst = SlotInstance::proportional(CtrVector(Qs({"1", "9/10", "4/5"})), Qs({"10", "30", "20"}));
  EXPECT_EQ(vcg_slot_prices(inst), Qs({"0", "3", "1"}));
  EXPECT_THROW(vcg_slot_prices(SlotInstance::from_table({Qs({"1"})})), Error);
}

TEST(SlotMechanism, ScalarMembership) {
  const auto m = SlotMechanism::scalar(Rule::gsp, BidMultiplier(CtrVector(Qs({"1", "1/2"}))));
  EXPECT_TRUE(m.admits(Qs({"2", "1"})));
  EXPECT_FALSE(m.admits(Qs({"2", "2"})));
  EXPECT_FALSE(m.admits(Qs({"2"})));
  EXPECT_THROW(m.run({Qs({"2", "2"})}), Error);
  EXPECT_EQ(m.name(), "alpha-GSP");
  EXPECT_EQ(SlotMechanism::scalar(Rule::gsp, BidMultiplier::ones(2)).name(), "1-GSP");
}

// Properties over random instances.

TEST(SlotProperties, VcgMatchesPermutationBruteForce) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> bid(0, 6), size(1, 6);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = size(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(n, 4))(rng);
    BidMatrix b(n, Row(k));
    for (auto& row : b) {
      for (auto& x : row) x = Rational(bid(rng), 2);
    }
    const auto r = vcg_slots(b);
    EXPECT_EQ(welfare_of(b, r.assignment), oracle::brute_max_welfare(b));
    EXPECT_EQ(r.payments, oracle::brute_vcg_payments(b, r.assignment));
    for (const auto& p : r.payments) EXPECT_GE(p, 0);
  }
}

TEST(SlotProperties, TruthfulVcgMatchesClosedForm) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + trial % 5;
    const std::size_t k = 1 + trial % std::min<std::size_t>(n, 3);
    const auto v = oracle::random_sorted(rng, n, 1, 40, 4, true);
    const auto inst = SlotInstance::proportional(CtrVector(oracle::random_ctr(rng, k, 10)), v);
    const auto r = vcg_slots(inst.values());
    EXPECT_EQ(welfare_of(inst.values(), r.assignment), max_welfare(inst.values()));
    EXPECT_EQ(r.payments, vcg_slot_prices(inst));
  }
}

TEST(SlotProperties, OwnBidDoesNotMoveOwnPrice) {
  std::mt19937 rng(13);
  std::uniform_int_distribution<int> bid(0, 8);
  for (int trial = 0; trial < 200; ++trial) {
    BidMatrix b(3, Row(2));
    for (auto& row : b) {
      for (auto& x : row) x = bid(rng);
    }
    for (const auto rule : {Rule::vcg, Rule::gsp}) {
      const auto mech = SlotMechanism::full(rule, 2);
      const auto r = mech.run(b);
      for (std::size_t i = 0; i < 3; ++i) {
        if (r.assignment[i] == unassigned) continue;
        auto raised = b;
        raised[i][r.assignment[i]] += 3;
        const auto r2 = mech.run(raised);
        if (r2.assignment != r.assignment) continue;
        EXPECT_EQ(r2.payments[i], r.payments[i]);
      }
    }
  }
}

TEST(SlotProperties, ExpandScalarKeepsOrder) {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> bid(0, 20);
  for (int trial = 0; trial < 100; ++trial) {
    const BidMultiplier alpha(CtrVector(oracle::random_ctr(rng, 3, 12)));
    const std::vector<Rational> b{Rational(bid(rng), 3), Rational(bid(rng), 3)};
    const auto m = expand_scalar(b, alpha);
    if (b[0] >= b[1]) {
      for (std::size_t j = 0; j < 3; ++j) EXPECT_GE(m[0][j], m[1][j]);
    }
  }
}
