#include <catch_amalgamated.hpp>

#include <vector>

#include "vigil/models/cart.hpp"
#include "vigil/models/knn.hpp"
#include "vigil/rng.hpp"

using namespace vigil;

namespace {

// Three well separated 2-D clusters, 'per' points each, classes 0/1/2.
void make_blobs(int per, std::uint64_t seed, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
  const double centers[3][2] = {{0.0, 0.0}, {6.0, 0.0}, {0.0, 6.0}};
  Rng rng(seed);
  x.resize(3 * per, 2);
  y.resize(3 * per);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < per; ++i) {
      const Eigen::Index r = c * per + i;
      x(r, 0) = centers[c][0] + 0.5 * rng.normal();
      x(r, 1) = centers[c][1] + 0.5 * rng.normal();
      y[r] = c;
    }
}

Eigen::MatrixXd shuffled_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& perm) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (std::size_t i = 0; i < perm.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(perm[i]));
  return out;
}

}  // namespace

TEST_CASE("knn matches a hand-computed neighborhood", "[knn]") {
  Eigen::MatrixXd x(5, 1);
  x << 0.0, 1.0, 2.0, 10.0, 11.0;
  Eigen::VectorXd y(5);
  y << 0, 0, 1, 2, 2;

  const KnnModel k1 = train_knn(x, y, Task::Classification, {{"k", 1}});
  Eigen::RowVectorXd q(1);
  q << 1.4;  // nearest is x=1 (class 0)
  REQUIRE(k1.predict_row(q) == 0.0);
  q << 9.0;
  REQUIRE(k1.predict_row(q) == 2.0);

  const KnnModel k3 = train_knn(x, y, Task::Classification, {{"k", 3}});
  q << 1.0;  // neighbors {0, 1, 2} vote classes {0, 0, 1} -> 0
  REQUIRE(k3.predict_row(q) == 0.0);

  const KnnModel r2 = train_knn(x, y, Task::Regression, {{"k", 2}});
  q << 10.5;  // neighbors y = 2 and 2
  REQUIRE(r2.predict_row(q) == 2.0);
  q << 0.4;  // neighbors y = 0 and 0
  REQUIRE(r2.predict_row(q) == 0.0);
}

TEST_CASE("knn vote ties resolve to the smaller class", "[knn]") {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 1.0, 2.0, 3.0;
  Eigen::VectorXd y(4);
  y << 2, 2, 1, 1;
  const KnnModel model = train_knn(x, y, Task::Classification, {{"k", 4}});
  Eigen::RowVectorXd q(1);
  q << 1.5;  // two votes each for classes 1 and 2
  REQUIRE(model.predict_row(q) == 1.0);
}

TEST_CASE("knn with k=1 memorizes distinct rows", "[knn]") {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  make_blobs(15, 3, x, y);
  const KnnModel model = train_knn(x, y, Task::Classification, {{"k", 1}});
  for (Eigen::Index r = 0; r < x.rows(); ++r) REQUIRE(model.predict_row(x.row(r)) == y[r]);
}

TEST_CASE("knn validates its hyperparameters", "[knn]") {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 2;
  Eigen::VectorXd y(3);
  y << 0, 1, 2;
  REQUIRE_THROWS_AS(train_knn(x, y, Task::Classification, {{"k", 4}}), ParameterError);
  REQUIRE_THROWS_AS(train_knn(x, y, Task::Classification, {{"k", 0}}), ParameterError);
  REQUIRE_THROWS_AS(train_knn(x, y, Task::Classification, {{"k", 1.5}}), ParameterError);
  REQUIRE_THROWS_AS(train_knn(x, y, Task::Classification, {{"neighbors", 1}}), ParameterError);
  REQUIRE_THROWS_AS(train_knn(Eigen::MatrixXd(), Eigen::VectorXd(), Task::Classification, {}),
                    ParameterError);
}

TEST_CASE("knn training is invariant to row permutations", "[knn]") {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  make_blobs(10, 4, x, y);
  std::vector<std::size_t> perm(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng rng(5);
  rng.shuffle(perm);
  Eigen::VectorXd y_perm(y.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    y_perm[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(perm[i])];

  const KnnModel a = train_knn(x, y, Task::Classification, {{"k", 3}});
  const KnnModel b = train_knn(shuffled_rows(x, perm), y_perm, Task::Classification, {{"k", 3}});
  REQUIRE(a.x == b.x);
  REQUIRE(a.y == b.y);
}

TEST_CASE("cart finds the obvious 1-d split", "[cart]") {
  Eigen::MatrixXd x(6, 1);
  x << 0.0, 1.0, 2.0, 5.0, 6.0, 7.0;
  Eigen::VectorXd y(6);
  y << 0, 0, 0, 1, 1, 1;
  const CartModel model = train_cart(x, y, Task::Classification, {});
  REQUIRE(model.tree.nodes[0].feature == 0);
  REQUIRE(model.tree.nodes[0].threshold == 3.5);
  REQUIRE(model.tree.depth() == 1);
  Eigen::RowVectorXd q(1);
  q << 3.4;
  REQUIRE(model.predict_row(q) == 0.0);
  q << 3.6;
  REQUIRE(model.predict_row(q) == 1.0);
}

TEST_CASE("cart resolves xor at depth two", "[cart]") {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0,
       0, 1,
       1, 0,
       1, 1;
  Eigen::VectorXd y(4);
  y << 0, 1, 1, 0;
  const CartModel model = train_cart(x, y, Task::Classification, {});
  REQUIRE(model.tree.depth() == 2);
  for (Eigen::Index r = 0; r < 4; ++r) REQUIRE(model.predict_row(x.row(r)) == y[r]);

  const CartModel stumped = train_cart(x, y, Task::Classification, {{"max_depth", 1}});
  int correct = 0;
  for (Eigen::Index r = 0; r < 4; ++r)
    if (stumped.predict_row(x.row(r)) == y[r]) ++correct;
  REQUIRE(correct < 4);
}

TEST_CASE("unlimited cart memorizes distinct rows", "[cart]") {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  make_blobs(20, 6, x, y);
  const CartModel clf = train_cart(x, y, Task::Classification, {});
  for (Eigen::Index r = 0; r < x.rows(); ++r) REQUIRE(clf.predict_row(x.row(r)) == y[r]);

  // Regression on distinct inputs interpolates exactly.
  Rng rng(7);
  Eigen::VectorXd targets(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) targets[r] = rng.uniform01();
  const CartModel reg = train_cart(x, targets, Task::Regression, {});
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    REQUIRE(reg.predict_row(x.row(r)) == Catch::Approx(targets[r]).margin(1e-12));
}

TEST_CASE("min_leaf blocks small partitions", "[cart]") {
  Eigen::MatrixXd x(6, 1);
  x << 0, 1, 2, 3, 4, 5;
  Eigen::VectorXd y(6);
  y << 0, 0, 0, 0, 1, 1;
  // min_leaf = 4 leaves no legal split (any split strands < 4 on one side).
  const CartModel model = train_cart(x, y, Task::Classification, {{"min_leaf", 4}});
  REQUIRE(model.tree.nodes.size() == 1);
  REQUIRE(model.tree.nodes[0].feature == -1);
  Eigen::RowVectorXd q(1);
  q << 5.0;
  REQUIRE(model.predict_row(q) == 0.0);  // majority class
}

TEST_CASE("cart training is invariant to row permutations", "[cart]") {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  make_blobs(12, 8, x, y);
  std::vector<std::size_t> perm(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng rng(9);
  rng.shuffle(perm);
  Eigen::VectorXd y_perm(y.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    y_perm[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(perm[i])];

  const CartModel a = train_cart(x, y, Task::Classification, {});
  const CartModel b = train_cart(shuffled_rows(x, perm), y_perm, Task::Classification, {});
  REQUIRE(a.tree.nodes.size() == b.tree.nodes.size());
  for (std::size_t i = 0; i < a.tree.nodes.size(); ++i) {
    REQUIRE(a.tree.nodes[i].feature == b.tree.nodes[i].feature);
    REQUIRE(a.tree.nodes[i].threshold == b.tree.nodes[i].threshold);
    REQUIRE(a.tree.nodes[i].value == b.tree.nodes[i].value);
  }
}

TEST_CASE("cart validates its hyperparameters", "[cart]") {
  Eigen::MatrixXd x(2, 1);
  x << 0, 1;
  Eigen::VectorXd y(2);
  y << 0, 1;
  REQUIRE_THROWS_AS(train_cart(x, y, Task::Classification, {{"max_depth", -1}}), ParameterError);
  REQUIRE_THROWS_AS(train_cart(x, y, Task::Classification, {{"min_leaf", 0}}), ParameterError);
  REQUIRE_THROWS_AS(train_cart(x, y, Task::Classification, {{"depth", 3}}), ParameterError);
}
