#include "cluesum/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cluesum::ad {

Matrix Matrix::from(std::initializer_list<std::initializer_list<double>> rows_init) {
  Matrix m(static_cast<int>(rows_init.size()),
           rows_init.size() ? static_cast<int>(rows_init.begin()->size()) : 0);
  int r = 0;
  for (const auto& row : rows_init) {
    int c = 0;
    for (double v : row) m.at(r, c++) = v;
    ++r;
  }
  return m;
}

bool Matrix::finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> Matrix::row(int r) const {
  std::vector<double> out(static_cast<std::size_t>(cols));
  for (int c = 0; c < cols; ++c) out[static_cast<std::size_t>(c)] = at(r, c);
  return out;
}

std::size_t Tape::check(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
    throw ValueError("invalid tape variable");
  return static_cast<std::size_t>(v.id);
}

Var Tape::push(Matrix value, bool requires_grad, std::function<void(Tape&)> back) {
  Node n;
  n.grad = Matrix(value.rows, value.cols, 0.0);
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

void Tape::backward(Var loss) {
  std::size_t lid = check(loss);
  const Matrix& lv = nodes_[lid].value;
  if (lv.rows != 1 || lv.cols != 1) throw ValueError("backward() expects a [1,1] loss");
  nodes_[lid].grad.at(0, 0) += 1.0;
  for (std::size_t i = lid + 1; i-- > 0;) {
    if (nodes_[i].back && nodes_[i].requires_grad) nodes_[i].back(*this);
  }
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.cols != B.rows) throw ValueError("matmul shape mismatch");
  Matrix C(A.rows, B.cols, 0.0);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
    }
  int ida = a.id, idb = b.id, out = next_id();
  return push(std::move(C), req(ida) || req(idb), [ida, idb, out](Tape& t) {
    const Matrix& G = t.grd(out);
    const Matrix& A = t.val(ida);
    const Matrix& B = t.val(idb);
    if (t.req(ida)) {
      Matrix& dA = t.grd(ida);  // dA += G * B^T
      for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < B.cols; ++j) {
          double g = G.at(i, j);
          if (g == 0.0) continue;
          for (int k = 0; k < A.cols; ++k) dA.at(i, k) += g * B.at(k, j);
        }
    }
    if (t.req(idb)) {
      Matrix& dB = t.grd(idb);  // dB += A^T * G
      for (int k = 0; k < A.cols; ++k)
        for (int i = 0; i < A.rows; ++i) {
          double av = A.at(i, k);
          if (av == 0.0) continue;
          for (int j = 0; j < B.cols; ++j) dB.at(k, j) += av * G.at(i, j);
        }
    }
  });
}

Var Tape::transpose(Var a) {
  const Matrix& A = value(a);
  Matrix T(A.cols, A.rows, 0.0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T.at(j, i) = A.at(i, j);
  int ida = a.id, out = next_id();
  return push(std::move(T), req(ida), [ida, out](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    Matrix& dA = t.grd(ida);
    for (int i = 0; i < G.rows; ++i)
      for (int j = 0; j < G.cols; ++j) dA.at(j, i) += G.at(i, j);
  });
}

Var Tape::add(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (!A.same_shape(B)) throw ValueError("add shape mismatch");
  Matrix C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] += B.data[i];
  int ida = a.id, idb = b.id, out = next_id();
  return push(std::move(C), req(ida) || req(idb), [ida, idb, out](Tape& t) {
    const Matrix& G = t.grd(out);
    if (t.req(ida)) {
      Matrix& dA = t.grd(ida);
      for (std::size_t i = 0; i < G.size(); ++i) dA.data[i] += G.data[i];
    }
    if (t.req(idb)) {
      Matrix& dB = t.grd(idb);
      for (std::size_t i = 0; i < G.size(); ++i) dB.data[i] += G.data[i];
    }
  });
}

Var Tape::scale(Var a, double s) {
  Matrix C = value(a);
  for (double& v : C.data) v *= s;
  int ida = a.id, out = next_id();
  return push(std::move(C), req(ida), [ida, out, s](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    Matrix& dA = t.grd(ida);
    for (std::size_t i = 0; i < G.size(); ++i) dA.data[i] += s * G.data[i];
  });
}

Var Tape::mul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (!A.same_shape(B)) throw ValueError("mul shape mismatch");
  Matrix C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] *= B.data[i];
  int ida = a.id, idb = b.id, out = next_id();
  return push(std::move(C), req(ida) || req(idb), [ida, idb, out](Tape& t) {
    const Matrix& G = t.grd(out);
    const Matrix& A = t.val(ida);
    const Matrix& B = t.val(idb);
    if (t.req(ida)) {
      Matrix& dA = t.grd(ida);
      for (std::size_t i = 0; i < G.size(); ++i) dA.data[i] += G.data[i] * B.data[i];
    }
    if (t.req(idb)) {
      Matrix& dB = t.grd(idb);
      for (std::size_t i = 0; i < G.size(); ++i) dB.data[i] += G.data[i] * A.data[i];
    }
  });
}

Var Tape::add_row_broadcast(Var a, Var row) {
  const Matrix& A = value(a);
  const Matrix& R = value(row);
  if (R.rows != 1 || R.cols != A.cols) throw ValueError("add_row_broadcast shape mismatch");
  Matrix C = A;
  for (int i = 0; i < C.rows; ++i)
    for (int j = 0; j < C.cols; ++j) C.at(i, j) += R.at(0, j);
  int ida = a.id, idr = row.id, out = next_id();
  return push(std::move(C), req(ida) || req(idr), [ida, idr, out](Tape& t) {
    const Matrix& G = t.grd(out);
    if (t.req(ida)) {
      Matrix& dA = t.grd(ida);
      for (std::size_t i = 0; i < G.size(); ++i) dA.data[i] += G.data[i];
    }
    if (t.req(idr)) {
      Matrix& dR = t.grd(idr);
      for (int i = 0; i < G.rows; ++i)
        for (int j = 0; j < G.cols; ++j) dR.at(0, j) += G.at(i, j);
    }
  });
}

Var Tape::mul_col_broadcast(Var a, Var col) {
  const Matrix& A = value(a);
  const Matrix& S = value(col);
  if (S.cols != 1 || S.rows != A.rows) throw ValueError("mul_col_broadcast shape mismatch");
  Matrix C = A;
  for (int i = 0; i < C.rows; ++i)
    for (int j = 0; j < C.cols; ++j) C.at(i, j) *= S.at(i, 0);
  int ida = a.id, ids = col.id, out = next_id();
  return push(std::move(C), req(ida) || req(ids), [ida, ids, out](Tape& t) {
    const Matrix& G = t.grd(out);
    const Matrix& A = t.val(ida);
    const Matrix& S = t.val(ids);
    if (t.req(ida)) {
      Matrix& dA = t.grd(ida);
      for (int i = 0; i < G.rows; ++i)
        for (int j = 0; j < G.cols; ++j) dA.at(i, j) += G.at(i, j) * S.at(i, 0);
    }
    if (t.req(ids)) {
      Matrix& dS = t.grd(ids);
      for (int i = 0; i < G.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < G.cols; ++j) acc += G.at(i, j) * A.at(i, j);
        dS.at(i, 0) += acc;
      }
    }
  });
}

Var Tape::outer_sum(Var u, Var v) {
  const Matrix& U = value(u);
  const Matrix& V = value(v);
  if (U.cols != 1 || V.cols != 1) throw ValueError("outer_sum expects column vectors");
  Matrix E(U.rows, V.rows, 0.0);
  for (int i = 0; i < U.rows; ++i)
    for (int j = 0; j < V.rows; ++j) E.at(i, j) = U.at(i, 0) + V.at(j, 0);
  int idu = u.id, idv = v.id, out = next_id();
  return push(std::move(E), req(idu) || req(idv), [idu, idv, out](Tape& t) {
    const Matrix& G = t.grd(out);
    if (t.req(idu)) {
      Matrix& dU = t.grd(idu);
      for (int i = 0; i < G.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < G.cols; ++j) acc += G.at(i, j);
        dU.at(i, 0) += acc;
      }
    }
    if (t.req(idv)) {
      Matrix& dV = t.grd(idv);
      for (int j = 0; j < G.cols; ++j) {
        double acc = 0.0;
        for (int i = 0; i < G.rows; ++i) acc += G.at(i, j);
        dV.at(j, 0) += acc;
      }
    }
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ValueError("concat_rows of nothing");
  int cols = value(parts[0]).cols, rows = 0;
  bool rg = false;
  for (Var p : parts) {
    if (value(p).cols != cols) throw ValueError("concat_rows column mismatch");
    rows += value(p).rows;
    rg = rg || req(p.id);
  }
  Matrix C(rows, cols, 0.0);
  int r = 0;
  std::vector<int> ids;
  std::vector<int> offsets;
  for (Var p : parts) {
    const Matrix& P = value(p);
    offsets.push_back(r);
    ids.push_back(p.id);
    for (int i = 0; i < P.rows; ++i)
      for (int j = 0; j < cols; ++j) C.at(r + i, j) = P.at(i, j);
    r += P.rows;
  }
  int out = next_id();
  return push(std::move(C), rg, [ids, offsets, out](Tape& t) {
    const Matrix& G = t.grd(out);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.req(ids[k])) continue;
      Matrix& dP = t.grd(ids[k]);
      for (int i = 0; i < dP.rows; ++i)
        for (int j = 0; j < dP.cols; ++j) dP.at(i, j) += G.at(offsets[k] + i, j);
    }
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ValueError("concat_cols of nothing");
  int rows = value(parts[0]).rows, cols = 0;
  bool rg = false;
  for (Var p : parts) {
    if (value(p).rows != rows) throw ValueError("concat_cols row mismatch");
    cols += value(p).cols;
    rg = rg || req(p.id);
  }
  Matrix C(rows, cols, 0.0);
  int c = 0;
  std::vector<int> ids, offsets;
  for (Var p : parts) {
    const Matrix& P = value(p);
    offsets.push_back(c);
    ids.push_back(p.id);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < P.cols; ++j) C.at(i, c + j) = P.at(i, j);
    c += P.cols;
  }
  int out = next_id();
  return push(std::move(C), rg, [ids, offsets, out](Tape& t) {
    const Matrix& G = t.grd(out);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.req(ids[k])) continue;
      Matrix& dP = t.grd(ids[k]);
      for (int i = 0; i < dP.rows; ++i)
        for (int j = 0; j < dP.cols; ++j) dP.at(i, j) += G.at(i, offsets[k] + j);
    }
  });
}

Var Tape::slice_cols(Var a, int c0, int c1) {
  const Matrix& A = value(a);
  if (c0 < 0 || c1 > A.cols || c0 >= c1) throw ValueError("slice_cols out of range");
  Matrix C(A.rows, c1 - c0, 0.0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = c0; j < c1; ++j) C.at(i, j - c0) = A.at(i, j);
  int ida = a.id, out = next_id();
  return push(std::move(C), req(ida), [ida, out, c0](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    Matrix& dA = t.grd(ida);
    for (int i = 0; i < G.rows; ++i)
      for (int j = 0; j < G.cols; ++j) dA.at(i, c0 + j) += G.at(i, j);
  });
}

Var Tape::rows_gather(Var table, std::vector<int> ids) {
  const Matrix& T = value(table);
  Matrix C(static_cast<int>(ids.size()), T.cols, 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= T.rows) throw ValueError("rows_gather id out of range");
    for (int j = 0; j < T.cols; ++j) C.at(static_cast<int>(i), j) = T.at(ids[i], j);
  }
  int idt = table.id, out = next_id();
  return push(std::move(C), req(idt), [idt, out, ids = std::move(ids)](Tape& t) {
    if (!t.req(idt)) return;
    const Matrix& G = t.grd(out);
    Matrix& dT = t.grd(idt);
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (int j = 0; j < G.cols; ++j) dT.at(ids[i], j) += G.at(static_cast<int>(i), j);
  });
}

Var Tape::gather_entries(Var a, std::vector<std::pair<int, int>> rc) {
  const Matrix& A = value(a);
  Matrix C(static_cast<int>(rc.size()), 1, 0.0);
  for (std::size_t i = 0; i < rc.size(); ++i) {
    auto [r, c] = rc[i];
    if (r < 0 || r >= A.rows || c < 0 || c >= A.cols)
      throw ValueError("gather_entries out of range");
    C.at(static_cast<int>(i), 0) = A.at(r, c);
  }
  int ida = a.id, out = next_id();
  return push(std::move(C), req(ida), [ida, out, rc = std::move(rc)](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    Matrix& dA = t.grd(ida);
    for (std::size_t i = 0; i < rc.size(); ++i)
      dA.at(rc[i].first, rc[i].second) += G.at(static_cast<int>(i), 0);
  });
}

Var Tape::mean_rows(Var a) {
  const Matrix& A = value(a);
  Matrix C(1, A.cols, 0.0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) C.at(0, j) += A.at(i, j);
  for (int j = 0; j < A.cols; ++j) C.at(0, j) /= static_cast<double>(A.rows);
  int ida = a.id, out = next_id();
  double inv = 1.0 / static_cast<double>(A.rows);
  return push(std::move(C), req(ida), [ida, out, inv](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    Matrix& dA = t.grd(ida);
    for (int i = 0; i < dA.rows; ++i)
      for (int j = 0; j < dA.cols; ++j) dA.at(i, j) += inv * G.at(0, j);
  });
}

Var Tape::sum_all(Var a) {
  const Matrix& A = value(a);
  double s = 0.0;
  for (double v : A.data) s += v;
  Matrix C(1, 1, s);
  int ida = a.id, out = next_id();
  return push(std::move(C), req(ida), [ida, out](Tape& t) {
    if (!t.req(ida)) return;
    double g = t.grd(out).at(0, 0);
    Matrix& dA = t.grd(ida);
    for (double& v : dA.data) v += g;
  });
}

Var Tape::relu(Var a) {
  const Matrix& A = value(a);
  Matrix C = A;
  for (double& v : C.data) v = v > 0.0 ? v : 0.0;
  int ida = a.id, out = next_id();
  return push(std::move(C), req(ida), [ida, out](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    const Matrix& A = t.val(ida);
    Matrix& dA = t.grd(ida);
    for (std::size_t i = 0; i < G.size(); ++i)
      if (A.data[i] > 0.0) dA.data[i] += G.data[i];
  });
}

Var Tape::leaky_relu(Var a, double slope) {
  const Matrix& A = value(a);
  Matrix C = A;
  for (double& v : C.data) v = v > 0.0 ? v : slope * v;
  int ida = a.id, out = next_id();
  return push(std::move(C), req(ida), [ida, out, slope](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    const Matrix& A = t.val(ida);
    Matrix& dA = t.grd(ida);
    for (std::size_t i = 0; i < G.size(); ++i)
      dA.data[i] += (A.data[i] > 0.0 ? 1.0 : slope) * G.data[i];
  });
}

Var Tape::elu(Var a) {
  const Matrix& A = value(a);
  Matrix C = A;
  for (double& v : C.data) v = v > 0.0 ? v : std::expm1(v);
  int ida = a.id, out = next_id();
  return push(std::move(C), req(ida), [ida, out](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    const Matrix& A = t.val(ida);
    const Matrix& Y = t.val(out);
    Matrix& dA = t.grd(ida);
    for (std::size_t i = 0; i < G.size(); ++i)
      dA.data[i] += (A.data[i] > 0.0 ? 1.0 : Y.data[i] + 1.0) * G.data[i];
  });
}

Var Tape::sigmoid(Var a) {
  const Matrix& A = value(a);
  Matrix C = A;
  for (double& v : C.data) v = 1.0 / (1.0 + std::exp(-v));
  int ida = a.id, out = next_id();
  return push(std::move(C), req(ida), [ida, out](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    const Matrix& Y = t.val(out);
    Matrix& dA = t.grd(ida);
    for (std::size_t i = 0; i < G.size(); ++i)
      dA.data[i] += Y.data[i] * (1.0 - Y.data[i]) * G.data[i];
  });
}

Var Tape::log(Var a) {
  const Matrix& A = value(a);
  Matrix C = A;
  for (double& v : C.data) v = std::log(v);
  int ida = a.id, out = next_id();
  return push(std::move(C), req(ida), [ida, out](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    const Matrix& A = t.val(ida);
    Matrix& dA = t.grd(ida);
    for (std::size_t i = 0; i < G.size(); ++i) dA.data[i] += G.data[i] / A.data[i];
  });
}

Var Tape::row_softmax(Var a, const Matrix* mask) {
  const Matrix& A = value(a);
  if (mask && !mask->same_shape(A)) throw ValueError("row_softmax mask shape mismatch");
  Matrix P(A.rows, A.cols, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < A.cols; ++j)
      if (!mask || mask->at(i, j) != 0.0) mx = std::max(mx, A.at(i, j));
    if (!std::isfinite(mx)) throw ValueError("row_softmax row with no allowed entries");
    double z = 0.0;
    for (int j = 0; j < A.cols; ++j) {
      if (!mask || mask->at(i, j) != 0.0) {
        P.at(i, j) = std::exp(A.at(i, j) - mx);
        z += P.at(i, j);
      }
    }
    for (int j = 0; j < A.cols; ++j) P.at(i, j) /= z;
  }
  int ida = a.id, out = next_id();
  return push(std::move(P), req(ida), [ida, out](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    const Matrix& P = t.val(out);
    Matrix& dA = t.grd(ida);
    for (int i = 0; i < G.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < G.cols; ++j) dot += G.at(i, j) * P.at(i, j);
      for (int j = 0; j < G.cols; ++j) dA.at(i, j) += P.at(i, j) * (G.at(i, j) - dot);
    }
  });
}

Var Tape::layer_norm(Var a, Var gain, Var bias, double eps) {
  const Matrix& A = value(a);
  const Matrix& Gn = value(gain);
  const Matrix& Bs = value(bias);
  if (Gn.rows != 1 || Gn.cols != A.cols || Bs.rows != 1 || Bs.cols != A.cols)
    throw ValueError("layer_norm gain/bias shape mismatch");
  Matrix Y(A.rows, A.cols, 0.0);
  std::vector<double> mu(static_cast<std::size_t>(A.rows)), istd(static_cast<std::size_t>(A.rows));
  for (int i = 0; i < A.rows; ++i) {
    double m = 0.0;
    for (int j = 0; j < A.cols; ++j) m += A.at(i, j);
    m /= A.cols;
    double var = 0.0;
    for (int j = 0; j < A.cols; ++j) {
      double d = A.at(i, j) - m;
      var += d * d;
    }
    var /= A.cols;
    mu[static_cast<std::size_t>(i)] = m;
    istd[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < A.cols; ++j)
      Y.at(i, j) = (A.at(i, j) - m) * istd[static_cast<std::size_t>(i)] * Gn.at(0, j) +
                   Bs.at(0, j);
  }
  int ida = a.id, idg = gain.id, idb = bias.id, out = next_id();
  return push(std::move(Y), req(ida) || req(idg) || req(idb),
              [ida, idg, idb, out, mu = std::move(mu), istd = std::move(istd)](Tape& t) {
                const Matrix& G = t.grd(out);
                const Matrix& A = t.val(ida);
                const Matrix& Gn = t.val(idg);
                int n = A.cols;
                for (int i = 0; i < A.rows; ++i) {
                  double m = mu[static_cast<std::size_t>(i)];
                  double is = istd[static_cast<std::size_t>(i)];
                  if (t.req(idg) || t.req(idb)) {
                    for (int j = 0; j < n; ++j) {
                      double xhat = (A.at(i, j) - m) * is;
                      if (t.req(idg)) t.grd(idg).at(0, j) += G.at(i, j) * xhat;
                      if (t.req(idb)) t.grd(idb).at(0, j) += G.at(i, j);
                    }
                  }
                  if (t.req(ida)) {
                    // dxhat = G * gain; dx = (dxhat - mean(dxhat) - xhat*mean(dxhat*xhat)) * istd
                    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                    for (int j = 0; j < n; ++j) {
                      double xhat = (A.at(i, j) - m) * is;
                      double dxh = G.at(i, j) * Gn.at(0, j);
                      sum_dxhat += dxh;
                      sum_dxhat_xhat += dxh * xhat;
                    }
                    Matrix& dA = t.grd(ida);
                    for (int j = 0; j < n; ++j) {
                      double xhat = (A.at(i, j) - m) * is;
                      double dxh = G.at(i, j) * Gn.at(0, j);
                      dA.at(i, j) +=
                          (dxh - sum_dxhat / n - xhat * sum_dxhat_xhat / n) * is;
                    }
                  }
                }
              });
}

Var Tape::dropout(Var a, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw ValueError("dropout rate must be < 1");
  const Matrix& A = value(a);
  Matrix maskm(A.rows, A.cols, 0.0);
  double keep = 1.0 - rate;
  for (double& v : maskm.data) {
    // portable uniform in [0,1) from the raw 64-bit stream
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = u < keep ? 1.0 / keep : 0.0;
  }
  Matrix C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data[i] *= maskm.data[i];
  int ida = a.id, out = next_id();
  return push(std::move(C), req(ida), [ida, out, maskm = std::move(maskm)](Tape& t) {
    if (!t.req(ida)) return;
    const Matrix& G = t.grd(out);
    Matrix& dA = t.grd(ida);
    for (std::size_t i = 0; i < G.size(); ++i) dA.data[i] += G.data[i] * maskm.data[i];
  });
}

}  // namespace cluesum::ad
