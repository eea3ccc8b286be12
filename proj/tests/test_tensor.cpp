#include <omp.h>

#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "saug/tensor.hpp"

using namespace saug;
using ad::Tensor;

namespace {

Matrix randm(std::int64_t r, std::int64_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (std::int64_t i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

}  // namespace

TEST_CASE("linear map: d(sum W x)/dW = x") {
  Tensor w = Tensor::parameter(randm(1, 3, 1));
  Matrix xv(3, 1);
  xv(0, 0) = 2.0;
  xv(1, 0) = -1.0;
  xv(2, 0) = 0.5;
  Tensor x = Tensor::constant(xv);
  Tensor loss = ad::matmul(w, x);  // 1x1
  ad::backward(loss);
  CHECK(w.grad()(0, 0) == doctest::Approx(2.0));
  CHECK(w.grad()(0, 1) == doctest::Approx(-1.0));
  CHECK(w.grad()(0, 2) == doctest::Approx(0.5));
}

TEST_CASE("backward errors: detached tensor, double backward, non-scalar") {
  Tensor c = Tensor::constant(randm(2, 2, 2));
  Tensor sum_c = ad::sum_squares(c);
  CHECK_THROWS_AS(ad::backward(sum_c), std::invalid_argument);  // detached

  Tensor p = Tensor::parameter(randm(2, 2, 3));
  CHECK_THROWS_AS(ad::backward(p), std::invalid_argument);  // not scalar

  Tensor loss = ad::sum_squares(p);
  ad::backward(loss);
  CHECK_THROWS_AS(ad::backward(loss), std::logic_error);  // second backward
}

TEST_CASE("unused parameter keeps a zero gradient") {
  Tensor used = Tensor::parameter(randm(2, 2, 4));
  Tensor unused = Tensor::parameter(randm(2, 2, 5));
  Tensor loss = ad::sum_squares(used);
  ad::backward(loss);
  CHECK(used.grad().size() == 4);
  CHECK(unused.grad().size() == 0);  // never touched by this tape

  // on-tape but non-contributing: scaled by zero
  Tensor loss2 = ad::add(ad::sum_squares(used), ad::scale(ad::sum_squares(unused), 0.0));
  ad::backward(loss2);
  for (std::int64_t i = 0; i < unused.grad().size(); ++i)
    CHECK(unused.grad().data()[i] == 0.0);
}

TEST_CASE("gradients match finite differences op by op") {
  auto check = [&](auto&& build, std::vector<Tensor> params) {
    Tensor loss = build();
    ad::backward(loss);
    const double err = oracle::max_gradient_error(params, [&] { return build().item(); });
    CHECK(err < 1e-6);
  };

  SUBCASE("matmul + add + relu + sum_squares") {
    Tensor a = Tensor::parameter(randm(4, 3, 10));
    Tensor b = Tensor::parameter(randm(3, 5, 11));
    check([&] { return ad::sum_squares(ad::relu(ad::matmul(a, b))); }, {a, b});
  }
  SUBCASE("spmm") {
    auto s = SparseCsr::from_dense(randm(4, 4, 12));
    Tensor x = Tensor::parameter(randm(4, 3, 13));
    check([&] { return ad::sum_squares(ad::spmm(s, x)); }, {x});
  }
  SUBCASE("add_rowvec and scale") {
    Tensor h = Tensor::parameter(randm(4, 3, 14));
    Tensor bias = Tensor::parameter(randm(1, 3, 15));
    check([&] { return ad::scale(ad::sum_squares(ad::add_rowvec(h, bias)), 0.7); }, {h, bias});
  }
  SUBCASE("concat rows and cols, slices") {
    Tensor a = Tensor::parameter(randm(2, 3, 16));
    Tensor b = Tensor::parameter(randm(3, 3, 17));
    check([&] { return ad::sum_squares(ad::slice_rows(ad::concat_rows(a, b), 1, 4)); }, {a, b});
    Tensor c = Tensor::parameter(randm(2, 2, 18));
    Tensor d = Tensor::parameter(randm(2, 4, 19));
    check([&] { return ad::sum_squares(ad::slice_cols(ad::concat_cols(c, d), 1, 5)); }, {c, d});
  }
  SUBCASE("clamp_cols inside the active range") {
    Tensor a = Tensor::parameter(randm(3, 2, 20));
    check([&] { return ad::sum_squares(ad::clamp_cols(a, {-10.0, -10.0}, {10.0, 10.0})); },
          {a});
  }
  SUBCASE("masked softmax cross-entropy") {
    Tensor logits = Tensor::parameter(randm(5, 3, 21));
    std::vector<int> labels{0, 2, 1, 0, 1};
    check([&] { return ad::masked_softmax_ce(logits, labels, {0, 2, 4}); }, {logits});
  }
  SUBCASE("edge BCE") {
    Tensor z = Tensor::parameter(randm(5, 4, 22));
    std::vector<EdgePair> pos{{0, 1}, {2, 3}};
    std::vector<EdgePair> neg{{0, 4}, {1, 3}};
    check([&] { return ad::edge_bce(z, pos, neg); }, {z});
  }
  SUBCASE("row BCE vs flags and the minimax generator term") {
    Tensor logits = Tensor::parameter(randm(6, 1, 23));
    std::vector<std::uint8_t> flags{1, 1, 0, 1, 0, 0};
    check([&] { return ad::bce_rows_vs_flags(logits, flags); }, {logits});
    check([&] { return ad::mean_log_one_minus_sigmoid(logits, 2, 6); }, {logits});
  }
  SUBCASE("sse_rows") {
    Tensor x = Tensor::parameter(randm(3, 4, 24));
    Matrix t = randm(3, 4, 25);
    check([&] { return ad::sse_rows(x, t); }, {x});
  }
}

TEST_CASE("dropout: inverted scaling, seeded stream, off in inference") {
  Tensor a = Tensor::parameter(randm(50, 20, 30));
  std::mt19937_64 rng(7);
  Tensor d = ad::dropout(a, 0.5, rng, true);
  std::int64_t zeros = 0;
  for (std::int64_t i = 0; i < d.value().size(); ++i) {
    const double v = d.value().data()[i];
    if (v == 0.0)
      zeros++;
    else
      CHECK(v == doctest::Approx(a.value().data()[i] / 0.5));
  }
  CHECK(zeros > 300);
  CHECK(zeros < 700);

  std::mt19937_64 rng2(7);
  Tensor d2 = ad::dropout(a, 0.5, rng2, true);
  CHECK(d2.value() == d.value());  // same seed, same mask

  std::mt19937_64 rng3(7);
  Tensor d3 = ad::dropout(a, 0.5, rng3, false);
  CHECK(d3.value() == a.value());  // inference mode
}

TEST_CASE("matmul and spmm are bitwise deterministic across thread counts") {
  Matrix av = randm(37, 29, 40), bv = randm(29, 17, 41);
  auto s = SparseCsr::from_dense(randm(37, 37, 42));

  const int old = omp_get_max_threads();
  omp_set_num_threads(1);
  Matrix m1 = ad::matmul(Tensor::constant(av), Tensor::constant(bv)).value();
  Matrix s1 = ad::spmm(s, Tensor::constant(av)).value();
  omp_set_num_threads(2);
  Matrix m2 = ad::matmul(Tensor::constant(av), Tensor::constant(bv)).value();
  Matrix s2 = ad::spmm(s, Tensor::constant(av)).value();
  omp_set_num_threads(old);

  CHECK(m1 == m2);
  CHECK(s1 == s2);
}

TEST_CASE("spmm transpose path agrees with a dense transpose product") {
  Matrix dense = randm(6, 4, 50);
  auto s = SparseCsr::from_dense(dense);
  Matrix b = randm(6, 3, 51);
  Matrix out;
  spmm_transpose(*s, b, out);

  Matrix expect(4, 3);
  for (std::int64_t i = 0; i < 4; ++i)
    for (std::int64_t j = 0; j < 3; ++j)
      for (std::int64_t k = 0; k < 6; ++k) expect(i, j) += dense(k, i) * b(k, j);
  CHECK(max_abs_diff(out, expect) < 1e-12);
}

TEST_CASE("spgemm matches the dense product") {
  Matrix a = randm(5, 7, 60), b = randm(7, 6, 61);
  // sparsify a bit
  for (std::int64_t i = 0; i < a.size(); ++i)
    if (std::abs(a.data()[i]) < 0.8) a.data()[i] = 0.0;
  for (std::int64_t i = 0; i < b.size(); ++i)
    if (std::abs(b.data()[i]) < 0.8) b.data()[i] = 0.0;
  auto sa = SparseCsr::from_dense(a);
  auto sb = SparseCsr::from_dense(b);
  auto sc = spgemm(*sa, *sb);

  Matrix expect(5, 6);
  for (std::int64_t i = 0; i < 5; ++i)
    for (std::int64_t j = 0; j < 6; ++j)
      for (std::int64_t k = 0; k < 7; ++k) expect(i, j) += a(i, k) * b(k, j);
  CHECK(max_abs_diff(sc->to_dense(), expect) < 1e-12);
}
