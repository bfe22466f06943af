#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cluesum/errors.hpp"

namespace cluesum::ad {

/// Dense row-major double matrix.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  static Matrix from(std::initializer_list<std::initializer_list<double>> rows_init);

  double& at(int r, int c) {
    return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                static_cast<std::size_t>(c)];
  }
  double at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                static_cast<std::size_t>(c)];
  }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool finite() const;
  std::vector<double> row(int r) const;
};

/// Handle to a tape node.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode autodiff tape over Matrix-valued nodes. Ops evaluate
/// eagerly; backward() replays the recorded closures in reverse order.
/// Construction order is topological by design, so no explicit sort is
/// needed.
class Tape {
 public:
  Var leaf(Matrix value, bool requires_grad = false);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  const Matrix& value(Var v) const { return val(check(v)); }
  const Matrix& grad(Var v) const { return nodes_[check(v)].grad; }

  // matrix algebra
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);                  // same shape
  Var scale(Var a, double s);
  Var mul(Var a, Var b);                  // elementwise, same shape
  Var add_row_broadcast(Var a, Var row);  // a[n,m] + row[1,m]
  Var mul_col_broadcast(Var a, Var col);  // a[n,m] * col[n,1], row-wise
  Var outer_sum(Var u, Var v);            // E[i][j] = u[i,0] + v[j,0]

  // shape ops
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  Var slice_cols(Var a, int c0, int c1);
  Var rows_gather(Var table, std::vector<int> ids);
  Var gather_entries(Var a, std::vector<std::pair<int, int>> rc);  // -> [k,1]
  Var mean_rows(Var a);  // [n,m] -> [1,m]
  Var sum_all(Var a);    // -> [1,1]

  // elementwise nonlinearities
  Var relu(Var a);
  Var leaky_relu(Var a, double slope);
  Var elu(Var a);
  Var sigmoid(Var a);
  Var log(Var a);

  /// Row-wise softmax; when mask is given only entries with mask!=0
  /// participate, the rest get probability 0. Every row needs at least one
  /// allowed entry.
  Var row_softmax(Var a, const Matrix* mask = nullptr);

  /// Row-wise layer normalization with gain/bias rows [1,m].
  Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-6);

  /// Inverted dropout; identity when rate == 0.
  Var dropout(Var a, double rate, std::mt19937_64& rng);

  /// Seeds d(loss)=1 and accumulates gradients; loss must be [1,1].
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  // node accessors used by the op closures (internal)
  const Matrix& val(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  Matrix& grd(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool req(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&)> back;  // null for leaves
  };

  std::size_t check(Var v) const;
  int next_id() const { return static_cast<int>(nodes_.size()); }
  Var push(Matrix value, bool requires_grad, std::function<void(Tape&)> back);

  std::vector<Node> nodes_;
};

}  // namespace cluesum::ad
