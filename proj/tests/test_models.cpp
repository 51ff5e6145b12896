#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "dirate/model_io.hpp"
#include "dirate/models.hpp"
#include "dirate/stock.hpp"
#include "dirate/util.hpp"

using namespace dirate;

namespace {

const std::filesystem::path kFixtures = DIRATE_FIXTURES_DIR;

MarkovSourceModel iid_uniform_binary() {
  Alphabet a = Alphabet::range(2);
  StochasticTable k(a, 1);
  k.set_row({0}, Eigen::Vector2d(0.5, 0.5));
  k.set_row({1}, Eigen::Vector2d(0.5, 0.5));
  return MarkovSourceModel(1, a, std::move(k));
}

TestChannelModel copy_test_channel(const MarkovSourceModel& src) {
  const int n = src.alphabet().size();
  StochasticTable k(src.alphabet(), src.order() + 1);
  for (const auto& [ctx, idx] : src.kernel().contexts())
    for (int x = 0; x < n; ++x) {
      Context window = ctx;
      window.push_back(x);
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      row(x) = 1.0;
      k.set_row(window, row);
    }
  return TestChannelModel(src.order(), src.alphabet(), src.alphabet(), std::move(k));
}

TestChannelModel independent_test_channel(const MarkovSourceModel& src,
                                          const Eigen::VectorXd& mu) {
  StochasticTable k(Alphabet::range(static_cast<int>(mu.size())), src.order() + 1);
  for (const auto& [ctx, idx] : src.kernel().contexts())
    for (int x = 0; x < src.alphabet().size(); ++x) {
      Context window = ctx;
      window.push_back(x);
      k.set_row(window, mu);
    }
  return TestChannelModel(src.order(), src.alphabet(),
                          Alphabet::range(static_cast<int>(mu.size())), std::move(k));
}

// Random ergodic order-m source + strictly positive test channel.
std::pair<MarkovSourceModel, TestChannelModel> random_pair(std::mt19937_64& rng,
                                                           int nx, int nr, int m) {
  Alphabet ax = Alphabet::range(nx);
  Alphabet ar = Alphabet::range(nr);
  std::vector<Context> windows;
  {
    std::function<void(Context&)> gen = [&](Context& c) {
      if (static_cast<int>(c.size()) == m) {
        windows.push_back(c);
        return;
      }
      for (int x = 0; x < nx; ++x) {
        c.push_back(x);
        gen(c);
        c.pop_back();
      }
    };
    Context c;
    gen(c);
  }
  auto draw = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = 0.05 + uniform01(rng);
    return Eigen::VectorXd(v / v.sum());
  };
  StochasticTable src_k(ax, m);
  StochasticTable test_k(ar, m + 1);
  for (const auto& w : windows) {
    src_k.set_row(w, draw(nx));
    for (int x = 0; x < nx; ++x) {
      Context ext = w;
      ext.push_back(x);
      test_k.set_row(ext, draw(nr));
    }
  }
  return {MarkovSourceModel(m, ax, std::move(src_k)),
          TestChannelModel(m, ax, ar, std::move(test_k))};
}

}  // namespace

TEST_CASE("compose_joint: copy channel concentrates on the diagonal") {
  auto src = iid_uniform_binary();
  auto joint = compose_joint(src, copy_test_channel(src));
  for (const auto& [ctx, idx] : joint.kernel().contexts())
    for (int x = 0; x < 2; ++x)
      for (int xh = 0; xh < 2; ++xh) {
        double expected = x == xh ? src.kernel().prob(ctx, x) : 0.0;
        CHECK(joint.kernel().row(idx)(joint.pair_index(x, xh)) == expected);
      }
}

TEST_CASE("compose_joint: stock policy joint entry matches the worked value") {
  stock::BirthDeathChain chain({0.5}, {0.5});
  auto src = stock::build_chain(chain);
  auto joint = compose_joint(src, stock::build_policy(chain, 0.2));
  // P(x2 = 0, xhat = 1 | x1 = 1) = 0.5 * 0.8
  CHECK(joint.kernel().prob({1}, joint.pair_index(0, 1)) ==
        doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("compose_joint: independent channel gives the product form") {
  auto src = iid_uniform_binary();
  Eigen::Vector2d mu(0.3, 0.7);
  auto joint = compose_joint(src, independent_test_channel(src, mu));
  for (const auto& [ctx, idx] : joint.kernel().contexts())
    for (int x = 0; x < 2; ++x)
      for (int xh = 0; xh < 2; ++xh)
        CHECK(joint.kernel().row(idx)(joint.pair_index(x, xh)) ==
              doctest::Approx(src.kernel().prob(ctx, x) * mu(xh)).epsilon(1e-15));
}

TEST_CASE("compose_joint rejects mismatched models") {
  auto src = iid_uniform_binary();
  Alphabet a3 = Alphabet::range(3);
  StochasticTable k(a3, 2);
  CHECK_THROWS_AS(
      compose_joint(src, TestChannelModel(1, a3, a3,
                                          [&] {
                                            StochasticTable t(a3, 2);
                                            Eigen::VectorXd u =
                                                Eigen::VectorXd::Constant(3, 1.0 / 3);
                                            for (int i = 0; i < 3; ++i)
                                              for (int j = 0; j < 3; ++j)
                                                t.set_row({i, j}, u);
                                            return t;
                                          }())),
      ValidationError);
}

TEST_CASE("marginal of compose_joint recovers the source kernel exactly") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    auto [src, test] = random_pair(rng, 2 + static_cast<int>(rng() % 2),
                                   2 + static_cast<int>(rng() % 2),
                                   1 + static_cast<int>(rng() % 2));
    auto joint = compose_joint(src, test);
    for (const auto& [ctx, idx] : src.kernel().contexts())
      for (int x = 0; x < src.alphabet().size(); ++x)
        CHECK(std::abs(joint.source_kernel().prob(ctx, x) -
                       src.kernel().prob(ctx, x)) <= 1e-15);
    CHECK(validate_table(joint.kernel(), 1e-9).ok());
  }
}

TEST_CASE("forward_conditional reproduces the stock Table II column") {
  stock::BirthDeathChain chain({0.3, 0.3}, {0.5, 0.4});
  auto src = stock::build_chain(chain);
  double eps = 0.2;
  auto joint = compose_joint(src, stock::build_policy(chain, eps));
  auto fwd = forward_conditional(joint);
  // interior state j=1 (p=0.3, q=0.5), column (x1=1, xhat=0):
  auto col = fwd.row(Context{1, 0});
  CHECK(col(0) == doctest::Approx(0.2).epsilon(1e-12));   // eps
  CHECK(col(1) == doctest::Approx(0.32).epsilon(1e-12));  // (1-eps)(1-p-q)/(1-q)
  CHECK(col(2) == doctest::Approx(0.48).epsilon(1e-12));  // (1-eps)p/(1-q)
  // and it matches the direct Table II construction cell-for-cell
  auto table2 = stock::build_forward_table(chain, eps);
  for (const auto& [ctx, idx] : fwd.contexts())
    for (int x = 0; x < 3; ++x)
      CHECK(std::abs(fwd.row(idx)(x) - table2.prob(ctx, x)) <= 1e-12);
}

TEST_CASE("forward/reverse conditionals: copy and independent channels") {
  auto src = iid_uniform_binary();
  {
    auto joint = compose_joint(src, copy_test_channel(src));
    auto fwd = forward_conditional(joint);
    auto rev = reverse_conditional(joint);
    for (int s = 0; s < 2; ++s)
      for (int v = 0; v < 2; ++v) {
        CHECK(fwd.prob({s, v}, v) == doctest::Approx(1.0));
        CHECK(rev.prob({s, v}, v) == doctest::Approx(1.0));
      }
  }
  {
    Eigen::Vector2d mu(0.3, 0.7);
    auto joint = compose_joint(src, independent_test_channel(src, mu));
    auto fwd = forward_conditional(joint);
    for (int s = 0; s < 2; ++s)
      for (int v = 0; v < 2; ++v)
        for (int x = 0; x < 2; ++x)
          CHECK(fwd.prob({s, v}, x) ==
                doctest::Approx(src.kernel().prob({s}, x)).epsilon(1e-12));
  }
}

TEST_CASE("reverse_conditional round-trips the test channel") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    auto [src, test] = random_pair(rng, 2, 3, 1);
    auto joint = compose_joint(src, test);
    auto rev = reverse_conditional(joint);
    for (const auto& [ctx, idx] : rev.contexts())
      for (int v = 0; v < 3; ++v)
        CHECK(rev.row(idx)(v) ==
              doctest::Approx(test.kernel().prob(ctx, v)).epsilon(1e-12));
  }
}

TEST_CASE("Bayes factorization identity on every positive cell") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto [src, test] = random_pair(rng, 3, 2, 1);
    auto joint = compose_joint(src, test);
    auto fwd = forward_conditional(joint);
    auto rev = reverse_conditional(joint);
    CHECK(validate_table(fwd, 1e-9).ok());
    CHECK(validate_table(rev, 1e-9).ok());
    for (const auto& [ctx, idx] : joint.kernel().contexts()) {
      for (int x = 0; x < 3; ++x)
        for (int v = 0; v < 2; ++v) {
          double cell = joint.kernel().row(idx)(joint.pair_index(x, v));
          if (cell <= 0.0) continue;
          Context cx = ctx;
          cx.push_back(x);
          Context cv = ctx;
          cv.push_back(v);
          double via_rev = joint.source_kernel().prob(ctx, x) * rev.prob(cx, v);
          double xhat_marginal = 0.0;
          for (int x2 = 0; x2 < 3; ++x2)
            xhat_marginal += joint.kernel().row(idx)(joint.pair_index(x2, v));
          double via_fwd = xhat_marginal * fwd.prob(cv, x);
          CHECK(std::abs(cell - via_rev) <= 1e-12);
          CHECK(std::abs(cell - via_fwd) <= 1e-12);
        }
    }
  }
}

TEST_CASE("sample_trajectory: determinism and degenerate chains") {
  auto src = iid_uniform_binary();
  auto joint = compose_joint(src, copy_test_channel(src));
  auto t1 = sample_trajectory(joint, 1000, 123);
  auto t2 = sample_trajectory(joint, 1000, 123);
  CHECK(t1.x == t2.x);
  CHECK(t1.xhat == t2.xhat);
  CHECK(t1.initial_window == t2.initial_window);
  CHECK(sample_trajectory(joint, 1000, 124).x != t1.x);
  for (int i = 0; i < t1.n; ++i) CHECK(t1.x[i] == t1.xhat[i]);  // copy channel

  // deterministic cycle 0 -> 1 -> 0: the unique path
  Alphabet a = Alphabet::range(2);
  StochasticTable k(a, 1);
  k.set_row({0}, Eigen::Vector2d(0.0, 1.0));
  k.set_row({1}, Eigen::Vector2d(1.0, 0.0));
  MarkovSourceModel cycle(1, a, std::move(k));
  auto cjoint = compose_joint(cycle, copy_test_channel(cycle));
  auto path = sample_trajectory(cjoint, 10, 5);
  for (int i = 1; i < 10; ++i) CHECK(path.x[i] == 1 - path.x[i - 1]);
}

TEST_CASE("sample_trajectory: empirical state frequencies match the stationary law") {
  // iid 3-symbol source: multinomial CLT bound is exact here
  Alphabet a = Alphabet::range(3);
  StochasticTable k(a, 1);
  Eigen::Vector3d p(0.2, 0.3, 0.5);
  for (int i = 0; i < 3; ++i) k.set_row({i}, p);
  MarkovSourceModel src(1, a, std::move(k));
  auto joint = compose_joint(src, copy_test_channel(src));

  const int n = 1'000'000;
  auto traj = sample_trajectory(joint, n, 2024);
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  for (int x : traj.x) counts(x) += 1.0;
  for (int i = 0; i < 3; ++i) {
    double sigma = std::sqrt(p(i) * (1 - p(i)) / n);
    CHECK(std::abs(counts(i) / n - p(i)) <= 3 * sigma);
  }
}

TEST_CASE("model JSON round-trip is bit-exact on the decimal representation") {
  auto tmp = std::filesystem::temp_directory_path();
  std::mt19937_64 rng(31);
  auto [src, test] = random_pair(rng, 3, 2, 1);
  auto joint = compose_joint(src, test);

  auto read_file = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  auto p1 = tmp / "dirate_roundtrip_1.json";
  auto p2 = tmp / "dirate_roundtrip_2.json";
  save_model(joint, p1);
  auto loaded = load_joint(p1);
  save_model(loaded, p2);
  CHECK(read_file(p1) == read_file(p2));

  save_model(src, p1);
  auto src2 = load_source(p1);
  save_model(src2, p2);
  CHECK(read_file(p1) == read_file(p2));

  save_model(test, p1);
  auto test2 = load_test_channel(p1);
  save_model(test2, p2);
  CHECK(read_file(p1) == read_file(p2));

  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("load_model rejects a row that sums to 0.9, naming the row") {
  auto tmp = std::filesystem::temp_directory_path() / "dirate_bad_model.json";
  {
    std::ofstream out(tmp);
    out << R"({"kind":"source","order":1,"source_alphabet":["0","1"],
               "rows":[{"context":["0"],"probs":{"0":"0.5","1":"0.4"}},
                       {"context":["1"],"probs":{"0":"0.5","1":"0.5"}}]})";
  }
  try {
    load_model(tmp);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("(0)") != std::string::npos);
  }
  std::filesystem::remove(tmp);
}

TEST_CASE("malformed JSON is a validation error") {
  auto tmp = std::filesystem::temp_directory_path() / "dirate_malformed.json";
  {
    std::ofstream out(tmp);
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_model(tmp), ValidationError);
  std::filesystem::remove(tmp);
}

TEST_CASE("shipped stock fixture loads to a 3-state birth-death model") {
  auto model = load_model(kFixtures / "stock_chain.json");
  auto* src = std::get_if<MarkovSourceModel>(&model);
  REQUIRE(src != nullptr);
  CHECK(src->alphabet().size() == 3);
  CHECK(src->order() == 1);
  // birth-death structure: no two-step jumps
  CHECK(src->kernel().prob({0}, 2) == 0.0);
  CHECK(src->kernel().prob({2}, 0) == 0.0);
  CHECK(src->stationary()(0) == doctest::Approx(8.0 / 29).epsilon(1e-12));
}

TEST_CASE("non-ergodic joint kernels are rejected") {
  Alphabet a = Alphabet::range(2);
  StochasticTable k(Alphabet::range(4), 1);
  Eigen::VectorXd r0 = Eigen::VectorXd::Zero(4);
  r0(0) = 1.0;  // state 0 emits (x=0, xhat=0) forever
  Eigen::VectorXd r1 = Eigen::VectorXd::Zero(4);
  r1(2) = 1.0;  // state 1 emits (x=1, xhat=0) forever
  k.set_row({0}, r0);
  k.set_row({1}, r1);
  CHECK_THROWS_AS(JointMarkovModel::from_kernel(1, a, a, std::move(k)),
                  ValidationError);
}
