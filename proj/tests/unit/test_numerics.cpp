// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "ptma/grad_check.hpp"
#include "ptma/tape.hpp"
#include "test_support.hpp"

namespace ptma {
namespace {

using test::random_matrix;

TEST(Tape, MatmulShapeContract) {
  Tape<double> tape;
  auto a = tape.leaf(Tensor<double>::matrix(2, 3, 1.0));
  auto b = tape.leaf(Tensor<double>::matrix(3, 4, 1.0));
  auto c = matmul(a, b);
  EXPECT_EQ(c.shape(), (Shape{2, 4}));
  EXPECT_DOUBLE_EQ(c.value()(1, 3), 3.0);
}

TEST(Tape, MatmulShapeMismatchNamesOpAndShapes) {
  Tape<double> tape;
  auto a = tape.leaf(Tensor<double>::matrix(2, 3));
  auto b = tape.leaf(Tensor<double>::matrix(2, 3));
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("matmul"), std::string::npos);
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Tape, MaskedSoftmaxSplitsEvenlyAndZeroesMaskedEntry) {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>::row_vector({1.0, 1.0, 1.0}));
  Tensor<double> mask = Tensor<double>::row_vector({0.0, 0.0, kMaskSentinel});
  auto p = masked_softmax(x, mask).value();
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Tape, SigmoidOfZeroIsHalf) {
  Tape<double> tape;
  EXPECT_DOUBLE_EQ(sigmoid(tape.leaf(Tensor<double>::scalar(0.0))).value().item(), 0.5);
}

TEST(Tape, SigmoidIsFiniteAtExtremes) {
  Tape<double> tape;
  auto s = sigmoid(tape.leaf(Tensor<double>::row_vector({-800.0, 800.0}))).value();
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[1], 1.0);
}

TEST(Tape, GradientOfSumOfLinearMapIsBroadcastInput) {
  Tape<double> tape;
  Tensor<double> xv = Tensor<double>::matrix(3, 1);
  xv[0] = 1.5;
  xv[1] = -2.0;
  xv[2] = 0.25;
  auto W = tape.leaf(Tensor<double>::matrix(2, 3, 0.7));
  auto x = tape.constant(xv);
  auto g = tape.backward(sum(matmul(W, x)));
  const auto& dW = g.at(W);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(dW(r, c), xv[c]);
  }
}

TEST(Tape, GradientOfMeanSquareAtThreeIsSix) {
  Tape<double> tape;
  auto z = tape.leaf(Tensor<double>::scalar(3.0));
  auto g = tape.backward(mean(square(z)));
  EXPECT_DOUBLE_EQ(g.at(z).item(), 6.0);
}

TEST(Tape, FanOutAccumulates) {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>::scalar(2.0));
  auto y = add(mul(x, x), x);  // x^2 + x
  EXPECT_DOUBLE_EQ(tape.backward(sum(y)).at(x).item(), 5.0);
}

TEST(Tape, BackwardRejectsNonScalarAndClearsTape) {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>::matrix(2, 2, 1.0));
  EXPECT_THROW(tape.backward(x), ShapeError);
  auto y = tape.leaf(Tensor<double>::scalar(1.0));
  tape.backward(square(y));
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Tape, UnreachedLeafGetsZeroGradient) {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>::matrix(2, 3, 1.0));
  auto unused = tape.leaf(Tensor<double>::matrix(4, 1, 1.0));
  auto g = tape.backward(sum(x));
  ASSERT_TRUE(g.contains(unused.id()));
  for (double v : g.at(unused).data()) EXPECT_EQ(v, 0.0);
}

TEST(Tape, BroadcastOnlyOverLeadingRow) {
  Tape<double> tape;
  auto a = tape.leaf(Tensor<double>::matrix(3, 4, 1.0));
  auto row = tape.leaf(Tensor<double>::matrix(1, 4, 2.0));
  auto col = tape.leaf(Tensor<double>::matrix(3, 1, 2.0));
  EXPECT_EQ(add(a, row).shape(), (Shape{3, 4}));
  EXPECT_THROW(add(a, col), ShapeError);
  auto g = tape.backward(sum(mul(a, row)));
  EXPECT_DOUBLE_EQ(g.at(row)[0], 3.0);  // summed over the broadcast rows
}

TEST(Tape, ForwardIsDeterministic) {
  auto run = [] {
    Xoshiro256pp rng(17);
    Tape<float> tape;
    auto a = tape.leaf(random_matrix<float>(5, 6, rng));
    auto b = tape.leaf(random_matrix<float>(6, 4, rng));
    return log_softmax(tanh(matmul(a, b))).value();
  };
  EXPECT_EQ(run(), run());
}

#ifndef NDEBUG
TEST(Tape, FiniteCheckFlagsOverflowInDebugBuilds) {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>::scalar(1000.0));
  EXPECT_THROW(exp(x), NumericError);
}
#endif

// ---- property: every op's backward agrees with central differences -------

struct OpCase {
  const char* name;
  std::size_t arity;
  /// Builds the op output from leaves; `shape_rng` fixes extra structure.
  std::function<Var<double>(std::span<const Var<double>>, const Tensor<double>& aux)> op;
  std::function<std::vector<Tensor<double>>(std::size_t r, std::size_t c, Xoshiro256pp&)> inputs;
};

std::vector<Tensor<double>> same_shape(std::size_t n, std::size_t r, std::size_t c,
                                       Xoshiro256pp& rng, double lo = -1.5, double hi = 1.5) {
  std::vector<Tensor<double>> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_matrix<double>(r, c, rng, lo, hi));
  return out;
}

Tensor<double> away_from_zero(std::size_t r, std::size_t c, Xoshiro256pp& rng) {
  auto t = random_matrix<double>(r, c, rng, 0.2, 1.5);
  for (auto& v : t.data()) {
    if (rng.uniform() < 0.5) v = -v;
  }
  return t;
}

std::vector<OpCase> op_cases() {
  using Vars = std::span<const Var<double>>;
  return {
      {"matmul", 2, [](Vars v, const Tensor<double>&) { return matmul(v[0], v[1]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) {
         const auto k = static_cast<std::size_t>(rng.uniform_int(1, 6));
         return std::vector{random_matrix<double>(r, k, rng), random_matrix<double>(k, c, rng)};
       }},
      {"add", 2, [](Vars v, const Tensor<double>&) { return add(v[0], v[1]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(2, r, c, rng); }},
      {"add-broadcast", 2, [](Vars v, const Tensor<double>&) { return add(v[0], v[1]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) {
         return std::vector{random_matrix<double>(r, c, rng), random_matrix<double>(1, c, rng)};
       }},
      {"sub", 2, [](Vars v, const Tensor<double>&) { return sub(v[0], v[1]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(2, r, c, rng); }},
      {"mul", 2, [](Vars v, const Tensor<double>&) { return mul(v[0], v[1]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(2, r, c, rng); }},
      {"mul-broadcast", 2, [](Vars v, const Tensor<double>&) { return mul(v[1], v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) {
         return std::vector{random_matrix<double>(r, c, rng), random_matrix<double>(1, c, rng)};
       }},
      {"affine", 1, [](Vars v, const Tensor<double>&) { return affine(v[0], -1.7, 0.3); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(1, r, c, rng); }},
      {"sigmoid", 1, [](Vars v, const Tensor<double>&) { return sigmoid(v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) {
         return same_shape(1, r, c, rng, -6.0, 6.0);
       }},
      {"tanh", 1, [](Vars v, const Tensor<double>&) { return tanh(v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(1, r, c, rng); }},
      {"relu", 1, [](Vars v, const Tensor<double>&) { return relu(v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) {
         return std::vector{away_from_zero(r, c, rng)};
       }},
      {"exp", 1, [](Vars v, const Tensor<double>&) { return exp(v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(1, r, c, rng); }},
      {"log", 1, [](Vars v, const Tensor<double>&) { return log(v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) {
         return same_shape(1, r, c, rng, 0.3, 3.0);
       }},
      {"square", 1, [](Vars v, const Tensor<double>&) { return square(v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(1, r, c, rng); }},
      {"masked_softmax", 1,
       [](Vars v, const Tensor<double>& mask) { return masked_softmax(v[0], mask); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) {
         return same_shape(1, r, c, rng, -3.0, 3.0);
       }},
      {"log_softmax", 1, [](Vars v, const Tensor<double>&) { return log_softmax(v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) {
         return same_shape(1, r, c, rng, -3.0, 3.0);
       }},
      {"concat-rows", 2,
       [](Vars v, const Tensor<double>&) {
         return concat<double>(std::vector{v[0], v[1]}, 0);
       },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) {
         return std::vector{random_matrix<double>(r, c, rng), random_matrix<double>(2, c, rng)};
       }},
      {"concat-cols", 2,
       [](Vars v, const Tensor<double>&) {
         return concat<double>(std::vector{v[0], v[1]}, 1);
       },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) {
         return std::vector{random_matrix<double>(r, c, rng), random_matrix<double>(r, 3, rng)};
       }},
      {"slice", 1,
       [](Vars v, const Tensor<double>&) {
         const std::size_t rows = v[0].value().rows();
         return slice(v[0], 0, rows / 2, rows);
       },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(1, r, c, rng); }},
      {"slice-cols", 1,
       [](Vars v, const Tensor<double>&) {
         const std::size_t cols = v[0].value().cols();
         return slice(v[0], 1, 0, (cols + 1) / 2);
       },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(1, r, c, rng); }},
      {"sum", 1, [](Vars v, const Tensor<double>&) { return sum(v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(1, r, c, rng); }},
      {"mean", 1, [](Vars v, const Tensor<double>&) { return mean(v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(1, r, c, rng); }},
      {"transpose", 1, [](Vars v, const Tensor<double>&) { return transpose(v[0]); },
       [](std::size_t r, std::size_t c, Xoshiro256pp& rng) { return same_shape(1, r, c, rng); }},
  };
}

// Additive mask with at least one open entry per row.
Tensor<double> random_mask(std::size_t r, std::size_t c, Xoshiro256pp& rng) {
  Tensor<double> m = Tensor<double>::matrix(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    const auto keep = static_cast<std::size_t>(rng.uniform_int(0, c - 1));
    for (std::size_t j = 0; j < c; ++j) {
      if (j != keep && rng.uniform() < 0.4) m(i, j) = kMaskSentinel;
    }
  }
  return m;
}

TEST(TapeProperty, EveryOpMatchesCentralDifferences) {
  Xoshiro256pp rng(2024);
  for (const auto& oc : op_cases()) {
    for (int trial = 0; trial < 12; ++trial) {
      const auto r = static_cast<std::size_t>(rng.uniform_int(1, 6));
      const auto c = static_cast<std::size_t>(rng.uniform_int(1, 6));
      const auto inputs = oc.inputs(r, c, rng);
      const Tensor<double> mask = random_mask(r, c, rng);
      // Probe the output with fixed random weights so every entry matters.
      Tensor<double> probe;
      {
        Tape<double> tape;
        std::vector<Var<double>> leaves;
        for (const auto& t : inputs) leaves.push_back(tape.leaf(t));
        const auto& out = oc.op(leaves, mask).value();
        probe = random_matrix<double>(out.rows(), out.cols(), rng);
      }
      const ScalarGraph f = [&](Tape<double>& tape, std::span<const Var<double>> p) {
        return sum(mul(oc.op(p, mask), tape.constant(probe)));
      };
      std::vector<std::string> names(inputs.size(), oc.name);
      const auto report = grad_check(f, inputs, names);
      EXPECT_TRUE(report.passed) << oc.name << " " << r << "x" << c
                                 << " worst rel err " << report.worst_rel_error();
    }
  }
}

TEST(TapeProperty, MaskedSoftmaxRowsSumToOneOverOpenEntries) {
  Xoshiro256pp rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const auto c = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const auto mask = random_mask(r, c, rng);
    const auto p = softmax_rows(random_matrix<double>(r, c, rng, -4, 4), mask);
    for (std::size_t i = 0; i < r; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        if (mask(i, j) != 0.0) {
          EXPECT_EQ(p(i, j), 0.0);
        }
        total += p(i, j);
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

// ---- grad_check itself ----------------------------------------------------

TEST(GradCheck, SquareAtOneHasNegligibleError) {
  const ScalarGraph f = [](Tape<double>&, std::span<const Var<double>> p) {
    return sum(square(p[0]));
  };
  const std::vector<Tensor<double>> params{Tensor<double>::scalar(1.0)};
  const std::vector<std::string> names{"w"};
  const auto report = grad_check(f, params, names);
  ASSERT_EQ(report.entries.size(), 1u);
  EXPECT_TRUE(report.passed);
  EXPECT_LT(report.entries[0].max_rel_error, 1e-9);
}

TEST(GradCheck, ZeroFunctionHasZeroGradient) {
  const ScalarGraph f = [](Tape<double>&, std::span<const Var<double>> p) {
    return affine(sum(p[0]), 0.0);
  };
  Xoshiro256pp rng(1);
  const std::vector<Tensor<double>> params{random_matrix<double>(3, 4, rng)};
  const std::vector<std::string> names{"w"};
  const auto report = grad_check(f, params, names);
  EXPECT_TRUE(report.passed);
  EXPECT_EQ(report.entries[0].max_abs_error, 0.0);
  EXPECT_EQ(report.loss, 0.0);
}

TEST(GradCheck, NonFinitePerturbationIsFlaggedNotFatal) {
  // log(w) at w = eps / 2: the minus perturbation evaluates log of a negative.
  const ScalarGraph f = [](Tape<double>&, std::span<const Var<double>> p) {
    return sum(log(p[0]));
  };
  const std::vector<Tensor<double>> params{Tensor<double>::scalar(5e-6)};
  const std::vector<std::string> names{"w"};
  GradCheckReport report;
  ASSERT_NO_THROW(report = grad_check(f, params, names));
  EXPECT_TRUE(report.entries[0].non_finite);
  EXPECT_FALSE(report.passed);
}

TEST(GradCheck, DetectsAWrongGradient) {
  // relu at exactly its kink: analytic picks one side, differences average.
  const ScalarGraph f = [](Tape<double>&, std::span<const Var<double>> p) {
    return sum(relu(p[0]));
  };
  const std::vector<Tensor<double>> params{Tensor<double>::scalar(0.0)};
  const std::vector<std::string> names{"w"};
  EXPECT_FALSE(grad_check(f, params, names).passed);
}

}  // namespace
}  // namespace ptma
