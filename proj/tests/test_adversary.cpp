#include <gtest/gtest.h>

#include "ebgan/errors.hpp"
#include "ebgan/nets.hpp"

using namespace ebgan;

TEST(Discriminator, UntrainedAnswersExactlyHalf) {
  torch::NoGradGuard no_grad;
  torch::manual_seed(40);
  Discriminator d(AdversarySpec{64, 8, 64, 6, 1});
  auto images = torch::rand({4, 3, 64, 64}) * 2 - 1;
  auto probs = discriminate(d, images);
  EXPECT_EQ(probs.sizes(), (torch::IntArrayRef{4}));
  for (long i = 0; i < 4; ++i) {
    EXPECT_EQ(probs[i].item<float>(), 0.5f);
  }
}

TEST(Discriminator, SixStagesReduce128To2x2Head) {
  // 128 / 2^6 = 2, so the head consumes a 2x2 grid; a resolution that does
  // not divide by 64 cannot be built at all.
  torch::manual_seed(41);
  Discriminator d(AdversarySpec{128, 8, 32, 6, 1});
  auto images = torch::rand({1, 3, 128, 128});
  EXPECT_EQ(discriminate(d, images).sizes(), (torch::IntArrayRef{1}));
  EXPECT_THROW(ConvProbe(AdversarySpec{96, 8, 32, 6, 1}), ConfigError);
}

TEST(Discriminator, OutputsStayInOpenUnitInterval) {
  torch::NoGradGuard no_grad;
  torch::manual_seed(42);
  Discriminator d(AdversarySpec{64, 8, 64, 6, 1});
  // nudge the head off zero so outputs are not the trivial 0.5
  {
    torch::NoGradGuard g;
    for (auto& p : d->named_parameters()) {
      if (p.key().find("head") != std::string::npos) p.value().normal_(0.0, 0.5);
    }
  }
  auto probs = discriminate(d, torch::randn({8, 3, 64, 64}));
  EXPECT_GT(probs.min().item<float>(), 0.0f);
  EXPECT_LT(probs.max().item<float>(), 1.0f);
}

TEST(Discriminator, RejectsWrongResolutionAndExtraHeads) {
  torch::manual_seed(43);
  Discriminator d(AdversarySpec{64, 8, 32, 6, 1});
  EXPECT_THROW(discriminate(d, torch::rand({1, 3, 32, 32})), ValidationError);
  Discriminator two(AdversarySpec{64, 8, 32, 6, 2});
  EXPECT_THROW(discriminate(two, torch::rand({1, 3, 64, 64})), ValidationError);
}

TEST(Classifier, ZeroHeadGivesHalfEverywhereAndArityTracksN) {
  torch::NoGradGuard no_grad;
  for (long n : {1L, 2L, 5L}) {
    torch::manual_seed(44 + n);
    AttributeClassifier c(AdversarySpec{64, 8, 64, 6, n});
    auto probs = classify(c, torch::rand({3, 3, 64, 64}) * 2 - 1);
    ASSERT_EQ(probs.sizes(), (torch::IntArrayRef{3, n}));
    auto acc = probs.accessor<float, 2>();
    for (long b = 0; b < 3; ++b) {
      for (long i = 0; i < n; ++i) {
        EXPECT_EQ(acc[b][i], 0.5f) << "n=" << n;
      }
    }
  }
}

TEST(Classifier, DeterministicForFixedInput) {
  torch::NoGradGuard no_grad;
  torch::manual_seed(45);
  AttributeClassifier c(AdversarySpec{64, 8, 64, 6, 2});
  auto images = torch::rand({2, 3, 64, 64}) * 2 - 1;
  EXPECT_TRUE(torch::equal(classify(c, images), classify(c, images)));
}
