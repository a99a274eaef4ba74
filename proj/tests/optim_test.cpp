#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "morbench/optim.hpp"

using namespace morbench;

TEST(Rmsprop, FreshStateUnitGradient) {
  std::vector<double> theta = {0.0};
  std::vector<double> g = {1.0};
  RmspropState state(RmspropConfig{0.001, 0.9, 1e-7});
  rmsprop_step({theta}, {g}, state);
  EXPECT_NEAR(state.accumulators[0][0], 0.1, 1e-15);
  EXPECT_NEAR(theta[0], -0.0031623, 1e-7);
  EXPECT_DOUBLE_EQ(theta[0], -0.001 / std::sqrt(0.1 + 1e-7));
}

TEST(Rmsprop, ZeroGradientDecaysAccumulator) {
  std::vector<double> theta = {1.5, -2.0};
  std::vector<double> g = {1.0, 2.0};
  RmspropState state;
  rmsprop_step({theta}, {g}, state);
  const auto before = theta;
  const auto acc = state.accumulators[0];
  std::vector<double> zero = {0.0, 0.0};
  rmsprop_step({theta}, {zero}, state);
  EXPECT_EQ(theta, before);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(state.accumulators[0][i], 0.9 * acc[i]);
}

TEST(Rmsprop, OppositeGradientsGiveOppositeUpdates) {
  std::vector<double> a = {0.0, 0.0, 0.0}, b = {0.0, 0.0, 0.0};
  std::vector<double> g = {0.3, -1.7, 25.0}, neg = {-0.3, 1.7, -25.0};
  RmspropState sa, sb;
  rmsprop_step({a}, {g}, sa);
  rmsprop_step({b}, {neg}, sb);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a[i], -b[i]);
  EXPECT_EQ(sa.accumulators, sb.accumulators);
}

TEST(Rmsprop, AccumulatorsNonNegativeAcrossSteps) {
  std::vector<double> theta = {0.0, 0.0};
  RmspropState state;
  for (int step = 0; step < 50; ++step) {
    std::vector<double> g = {std::sin(step * 1.3), -std::cos(step * 0.7) * 3};
    rmsprop_step({theta}, {g}, state);
    for (double e : state.accumulators[0]) EXPECT_GE(e, 0.0);
  }
}

TEST(Rmsprop, RejectsNonFiniteAndShapeMismatch) {
  std::vector<double> theta = {1.0, 2.0};
  std::vector<double> bad = {0.5, std::numeric_limits<double>::quiet_NaN()};
  RmspropState state;
  EXPECT_THROW(rmsprop_step({theta}, {bad}, state), ValidationError);
  EXPECT_EQ(theta, (std::vector<double>{1.0, 2.0}));
  std::vector<double> inf = {std::numeric_limits<double>::infinity(), 0.0};
  EXPECT_THROW(rmsprop_step({theta}, {inf}, state), ValidationError);
  std::vector<double> short_g = {1.0};
  RmspropState fresh;
  EXPECT_THROW(rmsprop_step({theta}, {short_g}, fresh), ShapeError);
}

TEST(Rmsprop, ConfigValidation) {
  EXPECT_THROW((RmspropConfig{0.0, 0.9, 1e-7}.validate()), ConfigError);
  EXPECT_THROW((RmspropConfig{0.001, 1.0, 1e-7}.validate()), ConfigError);
  EXPECT_THROW((RmspropConfig{0.001, 0.9, 0.0}.validate()), ConfigError);
  EXPECT_NO_THROW(RmspropConfig{}.validate());
}
